#pragma once

// Built-in benchmark problems with closed-form resolvents and known zeros.

#include "splitdyn/operator_core.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace splitdyn {

/// Objective f + g for A = subdiff f, B = grad g.
struct Objective {
    std::function<double(const Vector&)> f_value;
    std::function<double(const Vector&)> g_value;
    /// Moreau envelope f_gamma(x)
    std::function<double(double gamma, const Vector&)> f_envelope;
    double min_value = 0.0;
};

struct ProblemSpec {
    std::string name;
    SplitProblem problem;
    std::optional<Objective> objective;
    std::string provenance;
};

enum class NonsmoothKind { kHalfSquare, kAbs, kAbsPlusHalfSquare };

NonsmoothKind parse_nonsmooth_kind(std::string_view text);
std::string_view to_string(NonsmoothKind kind);

/// sign(x) max(|x| - threshold, 0), componentwise.
Vector soft_threshold(const Vector& x, double threshold);

/// A = 0, B = grad of g(x) = 1/2 sum c_i x_i^2.
ProblemSpec build_quadratic_diag(const Vector& coeffs);

/// A = subdiff f on the real line, B = 0.
ProblemSpec build_nonsmooth_1d(NonsmoothKind kind);

/// A(x1, x2) = (-x2, x1), B = id.
ProblemSpec build_rotation_identity();

/// A = subdiff f (componentwise f), B = grad g with g quadratic diagonal.
ProblemSpec build_composite(NonsmoothKind f_kind, const Vector& g_coeffs);

/// A = 0, B = 0 in the given dimension: T is identically zero.
ProblemSpec build_zero(Eigen::Index dim);

/// Closed form of T_{lambda,gamma} for the rotation/identity pair.
Eigen::Matrix2d rotation_identity_t_matrix(double lambda, double gamma);

/// Names: "quadratic_diag:1,100", "half_square", "abs", "abs_plus_half_square",
/// "rotation_identity", "composite:abs:1", "zero:2".
ProblemSpec problem_by_name(std::string_view name);

/// f(p) + g(p) - min(f + g) at p = prox_{gamma f}(x - gamma grad g(x)).
std::optional<double> objective_gap(const ProblemSpec& spec, double gamma, const Vector& x);

/// f_gamma(x) - min f (only meaningful when g == 0).
std::optional<double> envelope_gap(const ProblemSpec& spec, double gamma, const Vector& x);

}  // namespace splitdyn
