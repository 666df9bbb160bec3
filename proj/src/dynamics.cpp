#include "splitdyn/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace splitdyn {

VectorField::VectorField(ScheduleSet schedules, SplitProblem problem, Mode mode)
    : schedules_(std::move(schedules)), problem_(std::move(problem)), mode_(mode) {
    ValidationReport report = validate(schedules_.params, schedules_.lambda, schedules_.gamma,
                                       problem_.b.beta, mode_);
    if (mode_ == Mode::kBZero && !problem_.b.is_zero()) {
        report.add("B = 0", "b_zero mode with a nonzero cocoercive part '" + problem_.b.label + "'");
    }
    if (!report.passed) {
        std::string what = "vector field rejected: " + report.summary();
        throw ConstructionError(what, std::move(report));
    }
}

Vector VectorField::t_operator(double t, const Vector& x) const {
    return fb_operator_eval(problem_, schedules_.lambda_at(t), schedules_.gamma_at(t), x);
}

Vector VectorField::residual(double t, const Vector& x) const {
    return residual_eval(problem_, schedules_.gamma_at(t), x);
}

PhaseDerivative VectorField::operator()(double t, const Vector& x, const Vector& y) const {
    const double alpha = schedules_.params.alpha;
    const double xi = schedules_.params.xi;
    const Vector tx = t_operator(t, x);
    if (xi > 0.0) {
        const double c = 1.0 / xi - alpha / t;
        return {-xi * tx + c * x - y / xi, (c + alpha * xi / (t * t)) * x - y / xi};
    }
    return {y, -(alpha / t) * y - tx};
}

PhaseDerivative VectorField::operator()(double t, const PhaseState& z) const {
    return (*this)(t, z.x, z.y);
}

PhaseState initial_phase(const VectorField& field, const Vector& x0, const Vector& u0) {
    const Eigen::Index dim = field.problem().dim();
    if (x0.size() != dim || u0.size() != dim) {
        throw DimensionError("initial phase: Cauchy data dimension does not match the problem");
    }
    const auto& p = field.schedules().params;
    if (p.xi > 0.0) {
        const Vector tx = field.t_operator(p.t0, x0);
        const Vector y0 = -p.xi * (u0 + p.xi * tx - (1.0 / p.xi - p.alpha / p.t0) * x0);
        return {p.t0, x0, y0};
    }
    return {p.t0, x0, u0};
}

Vector recover_velocity(const VectorField& field, const PhaseState& state) {
    const auto& p = field.schedules().params;
    if (p.xi > 0.0) {
        const Vector tx = field.t_operator(state.t, state.x);
        return -p.xi * tx + (1.0 / p.xi - p.alpha / state.t) * state.x - state.y / p.xi;
    }
    return state.y;
}

StepPlan plan_steps(double t0, double t_end, const StepperConfig& cfg) {
    if (!(t_end > t0)) throw ParameterError("integrate: t_end must exceed t0");
    const double span = t_end - t0;
    const std::size_t intervals = cfg.samples > 1 ? cfg.samples - 1 : 1;
    StepPlan plan;
    if (cfg.step > 0.0) {
        plan.n_steps = static_cast<std::size_t>(std::ceil(span / cfg.step - 1e-9));
        if (plan.n_steps == 0) plan.n_steps = 1;
        plan.sample_every =
            cfg.sample_every > 0 ? cfg.sample_every : std::max<std::size_t>(1, plan.n_steps / intervals);
    } else {
        const double max_step = std::min(1e-3 * span, 1e-2);
        const auto per_sample =
            static_cast<std::size_t>(std::ceil(span / max_step / static_cast<double>(intervals) - 1e-9));
        plan.sample_every = cfg.sample_every > 0 ? cfg.sample_every : std::max<std::size_t>(1, per_sample);
        plan.n_steps = std::max<std::size_t>(1, per_sample) * intervals;
    }
    plan.step = span / static_cast<double>(plan.n_steps);
    return plan;
}

TrajectorySample make_sample(const VectorField& field, const PhaseState& state) {
    TrajectorySample s;
    s.t = state.t;
    s.x = state.x;
    s.xdot = recover_velocity(field, state);
    s.t_op = field.t_operator(state.t, state.x);
    s.residual = field.residual(state.t, state.x);
    s.speed = s.xdot.norm();
    return s;
}

Trajectory integrate(const VectorField& field, const PhaseState& z0, double t_end,
                     const StepperConfig& cfg) {
    const StepPlan plan = plan_steps(z0.t, t_end, cfg);
    const double h = plan.step;

    Trajectory traj;
    traj.problem_label = field.problem().a.label + " + " + field.problem().b.label;
    traj.schedules = field.schedules();
    traj.step = h;
    traj.samples.reserve(plan.n_steps / plan.sample_every + 2);
    traj.samples.push_back(make_sample(field, z0));

    Vector x = z0.x;
    Vector y = z0.y;
    for (std::size_t i = 0; i < plan.n_steps; ++i) {
        const double t = z0.t + static_cast<double>(i) * h;
        const auto k1 = field(t, x, y);
        const auto k2 = field(t + 0.5 * h, x + 0.5 * h * k1.dx, y + 0.5 * h * k1.dy);
        const auto k3 = field(t + 0.5 * h, x + 0.5 * h * k2.dx, y + 0.5 * h * k2.dy);
        const auto k4 = field(t + h, x + h * k3.dx, y + h * k3.dy);
        x += (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
        y += (h / 6.0) * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);

        const double t_next = (i + 1 == plan.n_steps) ? t_end : z0.t + static_cast<double>(i + 1) * h;
        const double size = x.norm() + y.norm();
        if (!std::isfinite(size) || size > cfg.divergence_bound) {
            std::ostringstream msg;
            msg << "trajectory diverged at t = " << t_next << " (|z| = " << size << ")";
            throw DivergenceError(msg.str(), t_next);
        }
        if ((i + 1) % plan.sample_every == 0 || i + 1 == plan.n_steps) {
            traj.samples.push_back(make_sample(field, PhaseState{t_next, x, y}));
        }
    }
    return traj;
}

}  // namespace splitdyn
