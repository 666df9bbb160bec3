#pragma once

// Time-dependent parameters lambda(t), gamma(t) and the precondition sets of
// the convergence theorems.

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace splitdyn {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct DampingParams {
    double alpha = 3.0;  ///< viscous damping, alpha > 1
    double xi = 0.0;     ///< Hessian-type damping, xi >= 0
    double t0 = 1.0;     ///< initial time, t0 > 0
};

/// lambda(t) = lambda0 t^2
struct LambdaSchedule {
    double lambda0 = 1.0;
};

struct GammaConstant {
    double value = 1.0;
};
/// gamma(t) = scale * t^degree
struct GammaPolynomial {
    double degree = 1.0;
    double scale = 1.0;
};
/// gamma(t) = exp(t^-rate)
struct GammaExponential {
    double rate = 1.0;
};

struct GammaSchedule {
    std::variant<GammaConstant, GammaPolynomial, GammaExponential> kind;

    static GammaSchedule constant(double c) { return {GammaConstant{c}}; }
    static GammaSchedule polynomial(double degree, double scale = 1.0) {
        return {GammaPolynomial{degree, scale}};
    }
    static GammaSchedule exponential(double rate) { return {GammaExponential{rate}}; }
};

/// Text form: "const:C", "poly:N" or "poly:N:SCALE", "exp:R".
GammaSchedule parse_gamma(std::string_view text);
std::string to_string(const GammaSchedule& gamma);

// Raw closed forms, valid for any t > 0.
double lambda_at(const LambdaSchedule& lam, double t);
double lambda_dot_at(const LambdaSchedule& lam, double t);
double gamma_at(const GammaSchedule& gam, double t);
double gamma_dot_at(const GammaSchedule& gam, double t);

// Checked evaluation: t < t0 is a DomainError.
double eval_lambda(const LambdaSchedule& lam, double t, double t0);
double eval_gamma(const GammaSchedule& gam, double t, double t0);
double eval_gamma_dot(const GammaSchedule& gam, double t, double t0);

/// Closed-form range of gamma over [t0, t_end], with t_end = inf meaning the
/// kind's limit is included.
struct GammaRange {
    double inf = 0.0;
    double sup = 0.0;
};
GammaRange gamma_range(const GammaSchedule& gam, double t0,
                       double t_end = std::numeric_limits<double>::infinity());

/// sup over t >= t0 of t |gamma'(t)| / gamma(t); finite means |gamma'|/gamma = O(1/t).
double gamma_log_rate_bound(const GammaSchedule& gam, double t0);

enum class Mode { kGeneral, kBZero, kAZero, kConvexMin };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct Violation {
    std::string condition;  ///< the required condition, e.g. "alpha > 1"
    std::string detail;     ///< what was observed
};

struct ValidationReport {
    Mode mode = Mode::kGeneral;
    bool passed = true;
    std::vector<Violation> violations;

    void add(std::string condition, std::string detail);
    [[nodiscard]] std::string summary() const;
};

/// Checks the hypotheses for the chosen mode. `beta` is the cocoercivity
/// modulus of B (1/L for convex_min). Failures are reported, never thrown.
ValidationReport validate(const DampingParams& params, const LambdaSchedule& lam,
                          const GammaSchedule& gam, double beta, Mode mode,
                          double t_end = std::numeric_limits<double>::infinity());

/// Damping, lambda and gamma bundled with checked accessors.
struct ScheduleSet {
    DampingParams params;
    LambdaSchedule lambda;
    GammaSchedule gamma;

    [[nodiscard]] double lambda_at(double t) const { return eval_lambda(lambda, t, params.t0); }
    [[nodiscard]] double gamma_at(double t) const { return eval_gamma(gamma, t, params.t0); }
    [[nodiscard]] double gamma_dot_at(double t) const {
        return eval_gamma_dot(gamma, t, params.t0);
    }
};

/// Reduction used for B-only problems: the system driven by B x / (eta t^2)
/// equals the general system with gamma == 2(beta - eps), lambda0 = 2(beta - eps) eta.
struct AZeroReduction {
    double epsilon = 0.0;
    double lambda0 = 0.0;
    double gamma = 0.0;
};
AZeroReduction a_zero_reduction(double eta, double beta, double alpha);

}  // namespace splitdyn
