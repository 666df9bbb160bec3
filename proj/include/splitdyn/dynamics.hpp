#pragma once

// Second-order dynamics with vanishing damping and Hessian-type damping,
// integrated through its first-order phase-space form z = (x, y):
//
//   xi > 0:  x' = -xi T(x) + (1/xi - alpha/t) x - y/xi
//            y' = (1/xi - alpha/t + alpha xi/t^2) x - y/xi
//   xi = 0:  x' = y,  y' = -(alpha/t) y - T(x)
//
// with T = T_{lambda(t), gamma(t)}.

#include "splitdyn/operator_core.hpp"
#include "splitdyn/schedules.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace splitdyn {

/// Thrown when the state becomes non-finite or exceeds the divergence guard.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double time)
        : std::runtime_error(what), time_(time) {}
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

/// Schedules rejected for the requested mode.
class ConstructionError : public std::invalid_argument {
public:
    ConstructionError(const std::string& what, ValidationReport report)
        : std::invalid_argument(what), report_(std::move(report)) {}
    [[nodiscard]] const ValidationReport& report() const noexcept { return report_; }

private:
    ValidationReport report_;
};

struct PhaseState {
    double t = 0.0;
    Vector x;
    Vector y;  ///< auxiliary variable; equals the velocity when xi = 0
};

struct PhaseDerivative {
    Vector dx;
    Vector dy;
};

struct TrajectorySample {
    double t = 0.0;
    Vector x;
    Vector xdot;
    Vector t_op;      ///< T_{lambda(t),gamma(t)}(x)
    Vector residual;  ///< A_gamma(x - gamma B x) + B x
    double speed = 0.0;
};

struct Trajectory {
    std::string problem_label;
    ScheduleSet schedules;
    std::vector<TrajectorySample> samples;
    double step = 0.0;
};

class VectorField {
public:
    /// Validates the schedules for `mode` against the problem's beta; throws
    /// ConstructionError on failure.
    VectorField(ScheduleSet schedules, SplitProblem problem, Mode mode);

    [[nodiscard]] PhaseDerivative operator()(double t, const PhaseState& z) const;
    [[nodiscard]] PhaseDerivative operator()(double t, const Vector& x, const Vector& y) const;

    [[nodiscard]] Vector t_operator(double t, const Vector& x) const;
    [[nodiscard]] Vector residual(double t, const Vector& x) const;

    [[nodiscard]] const ScheduleSet& schedules() const noexcept { return schedules_; }
    [[nodiscard]] const SplitProblem& problem() const noexcept { return problem_; }
    [[nodiscard]] Mode mode() const noexcept { return mode_; }

private:
    ScheduleSet schedules_;
    SplitProblem problem_;
    Mode mode_;
};

/// Cauchy data (x0, u0) mapped to the phase variables at t0.
PhaseState initial_phase(const VectorField& field, const Vector& x0, const Vector& u0);

/// Velocity x' from the phase state; for xi = 0 this is y itself.
Vector recover_velocity(const VectorField& field, const PhaseState& state);

struct StepperConfig {
    double step = 0.0;            ///< <= 0 selects the default
    std::size_t sample_every = 0; ///< 0 selects the default
    std::size_t samples = 500;    ///< target sample count for the default spacing
    double divergence_bound = 1e12;
};

/// Step size and sampling stride actually used for [t0, t_end].
struct StepPlan {
    double step = 0.0;
    std::size_t n_steps = 0;
    std::size_t sample_every = 1;
};
StepPlan plan_steps(double t0, double t_end, const StepperConfig& cfg);

TrajectorySample make_sample(const VectorField& field, const PhaseState& state);

/// Classical fixed-step RK4 from z0 to t_end.
Trajectory integrate(const VectorField& field, const PhaseState& z0, double t_end,
                     const StepperConfig& cfg = {});

}  // namespace splitdyn
