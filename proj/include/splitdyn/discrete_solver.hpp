#pragma once

// Inertial proximal algorithm obtained by discretizing the dynamics with unit
// step:
//
//   y_k     = x_k + (1 - alpha/k)(x_k - x_{k-1}) - xi (T_k(x_k) - T_{k-1}(x_{k-1}))
//   x_{k+1} = (id + T_{k+1})^{-1}(y_k)
//
// where T_k = T_{lambda_k, gamma_k} and lambda_k = lambda0 k^2.

#include "splitdyn/operator_core.hpp"
#include "splitdyn/schedules.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace splitdyn {

class InnerSolveError : public std::runtime_error {
public:
    InnerSolveError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    [[nodiscard]] double achieved_residual() const noexcept { return achieved_; }

private:
    double achieved_;
};

struct InnerSolverConfig {
    double tol = 1e-12;
    std::size_t max_iters = 200;
};

/// Closed-form B = 0 update variants.
enum class BZeroVariant {
    kDerived,          ///< lambda/(lambda+1) y + 1/(lambda+1) J_{gamma(1+1/lambda) A}(y)
    kPrinted,          ///< lambda^2/(lambda^2+gamma) y + gamma/(lambda^2+gamma) J_{(lambda+gamma/lambda) A}(y)
    kPrintedVerbatim,  ///< as kPrinted with gamma_k in the second numerator
};

std::string_view to_string(BZeroVariant variant);
BZeroVariant parse_b_zero_variant(std::string_view text);

struct DiscreteParams {
    double alpha = 3.0;
    double xi = 0.0;
    double lambda0 = 1.0;
    GammaSchedule gamma = GammaSchedule::constant(1.0);
    std::size_t n_iters = 100;
    InnerSolverConfig inner;
    BZeroVariant b_zero_variant = BZeroVariant::kDerived;

    /// lambda0 max(k,1)^2; index 0 reuses index 1 so every lambda_k is positive.
    [[nodiscard]] double lambda_k(std::size_t k) const;
    /// gamma schedule at max(k,1).
    [[nodiscard]] double gamma_k(std::size_t k) const;
    /// 1 - alpha/k
    [[nodiscard]] double alpha_k(std::size_t k) const;
};

/// Hypotheses of the discrete convergence result for general or b_zero mode.
ValidationReport validate_discrete(const DiscreteParams& params, double beta, Mode mode);

struct IterateState {
    std::size_t k = 1;
    Vector x_prev;  ///< x_{k-1}
    Vector x_curr;  ///< x_k
    Vector t_prev;  ///< T_{k-1}(x_{k-1})
    Vector t_curr;  ///< T_k(x_k)
};

IterateState initial_iterate(const SplitProblem& p, const DiscreteParams& params, const Vector& x0,
                             const Vector& x1);

Vector extrapolate(const IterateState& state, const DiscreteParams& params);

struct InnerSolveResult {
    Vector x;
    std::size_t iterations = 0;
    double residual = 0.0;  ///< |x + T(x) - y|
};

/// Solves x + T_{lambda,gamma}(x) = y by fixed-point iteration (Banach when
/// 2/lambda < 1, damped with theta = 1/(1 + 2/lambda) otherwise).
InnerSolveResult backward_resolve(const SplitProblem& p, double lambda, double gamma,
                                  const Vector& y, const InnerSolverConfig& cfg = {});

struct StepResult {
    IterateState next;
    Vector y;
    std::size_t inner_iterations = 0;
    double backward_residual = 0.0;
};

StepResult step(const IterateState& state, const DiscreteParams& params, const SplitProblem& p);

/// Closed-form update for B = 0 using resolvents of A only.
StepResult b_zero_step(const IterateState& state, const DiscreteParams& params, const MonotoneOp& a);

struct IterateRecord {
    std::size_t k = 0;
    Vector x;                    ///< x_k
    Vector y;                    ///< y_k
    double step_norm = 0.0;      ///< |x_{k+1} - x_k|
    double residual_norm = 0.0;  ///< |A_{gamma_k}(x_k - gamma_k B x_k) + B x_k|
    double gap_norm = 0.0;       ///< |x_k - y_k|
    std::size_t inner_iterations = 0;
    double backward_residual = 0.0;
    double gamma = 0.0;          ///< gamma_k

    [[nodiscard]] double step_times_k() const noexcept { return static_cast<double>(k) * step_norm; }
    [[nodiscard]] double residual_times_gamma() const noexcept { return gamma * residual_norm; }
    [[nodiscard]] double gap_times_k() const noexcept { return static_cast<double>(k) * gap_norm; }
};

struct IterateRun {
    DiscreteParams params;
    std::vector<IterateRecord> records;
    Vector x_final;  ///< x_{n_iters + 1}
};

enum class StepMethod { kGeneric, kBZeroClosedForm };

IterateRun run(const SplitProblem& p, const DiscreteParams& params, const Vector& x0,
               const Vector& x1, StepMethod method = StepMethod::kGeneric);

}  // namespace splitdyn
