#pragma once

// Monotone / cocoercive operator abstractions and the forward-backward
// operator T_{lambda,gamma} = (1/lambda) [id - J_{gamma A} o (id - gamma B)].

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace splitdyn {

using Vector = Eigen::VectorXd;

/// Invalid scalar parameter (non-positive step, gamma outside (0, 2 beta), ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Maximally monotone operator, accessed only through its resolvent.
struct MonotoneOp {
    using Resolvent = std::function<Vector(double gamma, const Vector& x)>;
    using Forward = std::function<Vector(const Vector& x)>;

    Eigen::Index dim = 0;
    Resolvent resolvent;
    /// Present only when A is single-valued.
    std::optional<Forward> forward;
    std::string label;
};

/// Single-valued beta-cocoercive operator. The zero operator carries
/// beta = +inf (it is beta-cocoercive for every beta), which lifts the
/// upper bound on gamma.
struct CocoerciveOp {
    Eigen::Index dim = 0;
    std::function<Vector(const Vector& x)> forward;
    double beta = 1.0;
    std::string label;

    [[nodiscard]] bool is_zero() const noexcept {
        return beta == std::numeric_limits<double>::infinity();
    }
};

/// The inclusion 0 in (A + B) x.
struct SplitProblem {
    MonotoneOp a;
    CocoerciveOp b;
    std::optional<Vector> known_zero;

    [[nodiscard]] Eigen::Index dim() const noexcept { return a.dim; }
    /// Upper bound (exclusive) for admissible gamma: 2 beta.
    [[nodiscard]] double gamma_max() const noexcept { return 2.0 * b.beta; }
};

/// Checks a.dim == b.dim (and the known zero's size) and assembles the problem.
SplitProblem make_split_problem(MonotoneOp a, CocoerciveOp b,
                                std::optional<Vector> known_zero = std::nullopt);

MonotoneOp zero_monotone(Eigen::Index dim);
CocoerciveOp zero_cocoercive(Eigen::Index dim);
CocoerciveOp identity_cocoercive(Eigen::Index dim);

/// J_{gamma A}(x).
Vector resolvent_eval(const MonotoneOp& a, double gamma, const Vector& x);

/// Yosida approximation A_lambda(x) = (x - J_{lambda A} x) / lambda.
Vector yosida_eval(const MonotoneOp& a, double lambda, const Vector& x);

/// T_{lambda,gamma}(x). Requires lambda > 0 and 0 < gamma < 2 beta.
Vector fb_operator_eval(const SplitProblem& p, double lambda, double gamma, const Vector& x);

/// A_gamma(x - gamma B x) + B x, which equals (lambda / gamma) T_{lambda,gamma}(x).
Vector residual_eval(const SplitProblem& p, double gamma, const Vector& x);

/// Throws ParameterError unless lambda > 0 and gamma in (0, 2 beta).
void check_fb_parameters(const SplitProblem& p, double lambda, double gamma);

struct CocoercivityReport {
    /// min over pairs of <Tx - Ty, x - y> - modulus * |Tx - Ty|^2
    double min_margin = std::numeric_limits<double>::infinity();
    std::size_t worst_index = 0;
    std::size_t samples = 0;

    [[nodiscard]] bool passes(double tol) const noexcept { return min_margin >= -tol; }
};

using VectorPair = std::pair<Vector, Vector>;

CocoercivityReport cocoercivity_certificate(const std::function<Vector(const Vector&)>& op,
                                            double modulus, std::span<const VectorPair> samples);

/// Seed used by the property suites when none is given.
inline constexpr std::uint64_t kDefaultSeed = 20240611;

/// Uniform pairs in [-box, box]^dim, reproducible from seed.
std::vector<VectorPair> sample_pairs(Eigen::Index dim, std::size_t count, std::uint64_t seed,
                                     double box = 10.0);

}  // namespace splitdyn
