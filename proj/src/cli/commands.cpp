#include "splitdyn/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

namespace splitdyn::cli {
namespace {

using nlohmann::json;

Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

void check_dim(const std::vector<double>& v, Eigen::Index dim, const char* key) {
    if (static_cast<Eigen::Index>(v.size()) != dim) {
        throw ConfigError(std::string("config: '") + key + "' has " + std::to_string(v.size()) +
                          " entries but the problem has dimension " + std::to_string(dim));
    }
}

json fit_json(const std::vector<SeriesPoint>& series, double window) {
    try {
        const RateFit fit = rate_fit(series, window);
        return json{{"slope", fit.slope},   {"intercept", fit.intercept}, {"r2", fit.r2},
                    {"t_lo", fit.t_lo},     {"t_hi", fit.t_hi},           {"points", fit.points},
                    {"dropped", fit.dropped}, {"window", window}};
    } catch (const InsufficientDataError& e) {
        return json{{"error", e.what()}, {"window", window}};
    }
}

json config_json(const ExperimentConfig& cfg) {
    json out = json::object();
    std::istringstream in(render(cfg));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

double metric_at(const SimulationResult& r, std::size_t i, Metric metric, bool& present) {
    const auto& s = r.trajectory.samples[i];
    present = true;
    switch (metric) {
        case Metric::kObjective:
            present = r.objective[i].has_value();
            return present ? *r.objective[i] : 0.0;
        case Metric::kSpeed: return s.speed;
        case Metric::kNormT: return s.t_op.norm();
        case Metric::kResidual: return s.residual.norm();
        case Metric::kDistance: return (s.x - r.anchor.point).norm();
    }
    return 0.0;
}

}  // namespace

ProblemSpec build_problem(const ExperimentConfig& cfg, RunKind kind) {
    ProblemSpec spec = problem_by_name(cfg.problem);
    const Eigen::Index dim = spec.problem.dim();
    check_dim(cfg.x0, dim, "x0");
    if (kind == RunKind::kContinuous) {
        check_dim(cfg.u0, dim, "u0");
    } else {
        check_dim(cfg.x1, dim, "x1");
    }
    return spec;
}

ScheduleSet build_schedules(const ExperimentConfig& cfg, const ProblemSpec& spec) {
    ScheduleSet set;
    set.params = DampingParams{cfg.alpha, cfg.xi, cfg.t0};
    set.lambda = LambdaSchedule{cfg.lambda0};
    set.gamma = parse_gamma(cfg.gamma);
    if (cfg.mode == Mode::kAZero && cfg.eta) {
        const AZeroReduction red = a_zero_reduction(*cfg.eta, spec.problem.b.beta, cfg.alpha);
        set.lambda = LambdaSchedule{red.lambda0};
        set.gamma = GammaSchedule::constant(red.gamma);
    }
    return set;
}

DiscreteParams build_discrete_params(const ExperimentConfig& cfg) {
    DiscreteParams p;
    p.alpha = cfg.alpha;
    p.xi = cfg.xi;
    p.lambda0 = cfg.lambda0;
    p.gamma = parse_gamma(cfg.gamma);
    p.n_iters = cfg.n_iters;
    p.inner = InnerSolverConfig{cfg.inner_tol, cfg.inner_max_iters};
    p.b_zero_variant = cfg.b_zero_variant;
    return p;
}

ValidationReport validate_config(const ExperimentConfig& cfg, RunKind kind) {
    const ProblemSpec spec = build_problem(cfg, kind);
    const SplitProblem& p = spec.problem;
    ValidationReport report;
    if (kind == RunKind::kContinuous) {
        const ScheduleSet set = build_schedules(cfg, spec);
        report = validate(set.params, set.lambda, set.gamma, p.b.beta, cfg.mode, cfg.t_end);
        if (cfg.mode == Mode::kBZero && !p.b.is_zero()) {
            report.add("B = 0", "problem '" + spec.name + "' has B = " + p.b.label);
        }
        if (cfg.mode == Mode::kAZero && p.a.label != "zero") {
            report.add("A = 0", "problem '" + spec.name + "' has A = " + p.a.label);
        }
    } else {
        if (cfg.mode != Mode::kGeneral && cfg.mode != Mode::kBZero) {
            report.mode = cfg.mode;
            report.add("mode in {general, b_zero}",
                       "discrete runs support general and b_zero, got " + std::string(to_string(cfg.mode)));
            return report;
        }
        report = validate_discrete(build_discrete_params(cfg), p.b.beta, cfg.mode);
        if ((cfg.mode == Mode::kBZero || cfg.method == "b_zero_closed_form") && !p.b.is_zero()) {
            report.add("B = 0", "problem '" + spec.name + "' has B = " + p.b.label);
        }
    }
    return report;
}

SimulationResult simulate(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    SimulationResult r{build_problem(cfg, RunKind::kContinuous), {}, {}, {}, {}, {}};
    const ScheduleSet set = build_schedules(cfg, r.spec);
    const ValidationReport report = validate_config(cfg, RunKind::kContinuous);
    if (!report.passed) throw ConstructionError("configuration rejected: " + report.summary(), report);

    const VectorField field(set, r.spec.problem, cfg.mode);
    const PhaseState z0 = initial_phase(field, to_vector(cfg.x0), to_vector(cfg.u0));
    StepperConfig stepper;
    stepper.step = cfg.step;
    stepper.samples = cfg.samples;
    r.trajectory = integrate(field, z0, cfg.t_end, stepper);
    r.trajectory.problem_label = r.spec.name;

    r.anchor = resolve_anchor(r.trajectory, r.spec.problem.known_zero);
    r.energy = energy_series(r.trajectory, r.anchor.point);
    r.objective.reserve(r.trajectory.samples.size());
    std::vector<SeriesPoint> objective_points;
    for (const auto& s : r.trajectory.samples) {
        r.objective.push_back(objective_gap(r.spec, set.gamma_at(s.t), s.x));
        if (r.objective.back()) objective_points.push_back({s.t, *r.objective.back()});
    }

    constexpr double kWindow = 0.5;
    json& j = r.report;
    j["command"] = "simulate";
    j["config"] = config_json(cfg);
    j["problem"] = r.spec.name;
    j["lambda0_effective"] = set.lambda.lambda0;
    j["gamma_effective"] = to_string(set.gamma);
    j["step"] = r.trajectory.step;
    j["samples"] = r.trajectory.samples.size();
    j["fits"]["speed"] = fit_json(speed_series(r.trajectory), kWindow);
    j["fits"]["norm_T"] = fit_json(t_norm_series(r.trajectory), kWindow);
    j["fits"]["residual"] = fit_json(residual_norm_series(r.trajectory), kWindow);
    j["fits"]["objective"] =
        r.spec.objective ? fit_json(objective_points, kWindow) : json(nullptr);

    const double e0 = r.energy.front().energy;
    const double e_tol = 1e-7 * e0;
    const auto onset = energy_monotone_onset(r.energy, e_tol);
    j["energy"] = {{"start", e0},
                   {"anchor_approximate", r.anchor.approximate},
                   {"step_tolerance", e_tol},
                   {"monotone_onset_t",
                    onset ? json(r.energy[*onset].t) : json(nullptr)}};
    try {
        const double eps = epsilon_default(set.params.alpha, set.lambda.lambda0, cfg.mode);
        DissipationOptions opts;
        opts.mode = cfg.mode;
        opts.tol = 1e-6 * e0;
        const DissipationReport d = dissipation_check(r.trajectory, r.anchor.point, eps, opts);
        j["dissipation"] = {{"epsilon", d.epsilon}, {"max_lhs", d.max_lhs}, {"t_at_max", d.t_at_max},
                            {"burn_in", opts.burn_in}, {"tolerance", opts.tol}, {"passed", d.passed}};
    } catch (const ParameterError& e) {
        j["dissipation"] = {{"error", e.what()}};
    }
    if (r.spec.problem.known_zero) {
        j["final_distance"] = (r.trajectory.samples.back().x - *r.spec.problem.known_zero).norm();
    } else {
        j["final_distance"] = nullptr;
    }
    if (r.spec.problem.dim() > 1) {
        j["xdot1_sign_changes"] = velocity_sign_changes(r.trajectory, 1);
    }
    j["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

void write_trajectory_csv(std::ostream& out, const SimulationResult& r) {
    const Eigen::Index dim = r.spec.problem.dim();
    out << "t";
    for (Eigen::Index i = 0; i < dim; ++i) out << ",x_" << i;
    for (Eigen::Index i = 0; i < dim; ++i) out << ",xdot_" << i;
    out << ",norm_xdot,norm_T,norm_residual,energy,objective\n";
    for (std::size_t n = 0; n < r.trajectory.samples.size(); ++n) {
        const auto& s = r.trajectory.samples[n];
        out << fmt(s.t);
        for (Eigen::Index i = 0; i < dim; ++i) out << ',' << fmt(s.x[i]);
        for (Eigen::Index i = 0; i < dim; ++i) out << ',' << fmt(s.xdot[i]);
        out << ',' << fmt(s.speed) << ',' << fmt(s.t_op.norm()) << ',' << fmt(s.residual.norm())
            << ',' << fmt(r.energy[n].energy) << ',';
        if (r.objective[n]) out << fmt(*r.objective[n]);
        out << '\n';
    }
}

IterationResult iterate(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    IterationResult r{build_problem(cfg, RunKind::kDiscrete), {}, {}};
    const ValidationReport report = validate_config(cfg, RunKind::kDiscrete);
    if (!report.passed) throw ConstructionError("configuration rejected: " + report.summary(), report);

    const DiscreteParams params = build_discrete_params(cfg);
    const StepMethod method =
        cfg.method == "b_zero_closed_form" ? StepMethod::kBZeroClosedForm : StepMethod::kGeneric;
    const Vector x0 = to_vector(cfg.x0);
    const Vector x1 = to_vector(cfg.x1);
    r.run = run(r.spec.problem, params, x0, x1, method);

    json& j = r.report;
    j["command"] = "iterate";
    j["config"] = config_json(cfg);
    j["problem"] = r.spec.name;
    j["method"] = cfg.method;

    double max_backward = 0.0;
    std::size_t inner_total = 0;
    for (const auto& rec : r.run.records) {
        max_backward = std::max(max_backward, rec.backward_residual);
        inner_total += rec.inner_iterations;
    }
    j["max_backward_residual"] = max_backward;
    j["inner_iterations_total"] = inner_total;

    const auto window_stats = [&](auto getter) {
        const auto& recs = r.run.records;
        const std::size_t ref_k = std::min<std::size_t>(100, recs.size());
        if (ref_k == 0) return json(nullptr);
        const double ref = getter(recs[ref_k - 1]);
        double max_v = ref;
        for (std::size_t i = ref_k - 1; i < recs.size(); ++i) max_v = std::max(max_v, getter(recs[i]));
        return json{{"k_ref", ref_k}, {"value_at_ref", ref}, {"max_after_ref", max_v},
                    {"bounded", max_v <= 2.0 * ref}};
    };
    j["step_times_k"] = window_stats([](const IterateRecord& rec) { return rec.step_times_k(); });
    j["gap_times_k"] = window_stats([](const IterateRecord& rec) { return rec.gap_times_k(); });
    if (!r.run.records.empty()) {
        j["final_residual_times_gamma"] = r.run.records.back().residual_times_gamma();
    }
    if (r.spec.problem.known_zero) {
        j["final_distance"] = (r.run.x_final - *r.spec.problem.known_zero).norm();
    }

    if (r.spec.problem.b.is_zero()) {
        const StepMethod other =
            method == StepMethod::kGeneric ? StepMethod::kBZeroClosedForm : StepMethod::kGeneric;
        const IterateRun alt = run(r.spec.problem, params, x0, x1, other);
        double gap = (alt.x_final - r.run.x_final).cwiseAbs().maxCoeff();
        for (std::size_t i = 0; i < alt.records.size(); ++i) {
            gap = std::max(gap, (alt.records[i].x - r.run.records[i].x).cwiseAbs().maxCoeff());
        }
        j["b_zero_cross_check"] = {{"max_discrepancy", gap}, {"agrees", gap <= 1e-8}};
    }
    j["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

void write_iterates_csv(std::ostream& out, const IterationResult& r) {
    const Eigen::Index dim = r.spec.problem.dim();
    out << "k";
    for (Eigen::Index i = 0; i < dim; ++i) out << ",x_" << i;
    out << ",norm_dx_times_k,norm_residual_times_gamma,norm_xy_times_k,inner_iters\n";
    for (const auto& rec : r.run.records) {
        out << rec.k;
        for (Eigen::Index i = 0; i < dim; ++i) out << ',' << fmt(rec.x[i]);
        out << ',' << fmt(rec.step_times_k()) << ',' << fmt(rec.residual_times_gamma()) << ','
            << fmt(rec.gap_times_k()) << ',' << rec.inner_iterations << '\n';
    }
}

Metric parse_metric(std::string_view text) {
    if (text == "objective") return Metric::kObjective;
    if (text == "speed") return Metric::kSpeed;
    if (text == "norm_T") return Metric::kNormT;
    if (text == "residual") return Metric::kResidual;
    if (text == "distance") return Metric::kDistance;
    throw ConfigError("unknown metric '" + std::string(text) +
                      "' (objective, speed, norm_T, residual, distance)");
}

std::string_view to_string(Metric metric) {
    switch (metric) {
        case Metric::kObjective: return "objective";
        case Metric::kSpeed: return "speed";
        case Metric::kNormT: return "norm_T";
        case Metric::kResidual: return "residual";
        case Metric::kDistance: return "distance";
    }
    return "unknown";
}

Comparison compare(const ExperimentConfig& a, const ExperimentConfig& b, Metric metric) {
    if (a.problem != b.problem) {
        throw ConfigError("compare: configurations use different problems ('" + a.problem + "' vs '" +
                          b.problem + "')");
    }
    const SimulationResult ra = simulate(a);
    const SimulationResult rb = simulate(b);

    Comparison cmp;
    cmp.metric = metric;
    const auto& sb = rb.trajectory.samples;
    std::size_t j = 0;
    for (std::size_t i = 0; i < ra.trajectory.samples.size(); ++i) {
        ComparisonRow row;
        row.t = ra.trajectory.samples[i].t;
        bool present = false;
        const double va = metric_at(ra, i, metric, present);
        if (present) row.a = va;

        if (row.t >= sb.front().t && row.t <= sb.back().t) {
            while (j + 1 < sb.size() && sb[j + 1].t < row.t) ++j;
            const std::size_t k = std::min(j + 1, sb.size() - 1);
            bool pj = false;
            bool pk = false;
            const double vj = metric_at(rb, j, metric, pj);
            const double vk = metric_at(rb, k, metric, pk);
            if (pj && pk) {
                const double span = sb[k].t - sb[j].t;
                const double w = span > 0.0 ? (row.t - sb[j].t) / span : 0.0;
                row.b = (1.0 - std::clamp(w, 0.0, 1.0)) * vj + std::clamp(w, 0.0, 1.0) * vk;
            }
        }
        cmp.rows.push_back(row);
    }
    const auto& last = cmp.rows.back();
    if (last.a && last.b) {
        if (*last.b != 0.0) {
            cmp.final_ratio = *last.a / *last.b;
        } else if (*last.a == 0.0) {
            cmp.final_ratio = 1.0;
        }
    }
    if (ra.spec.problem.dim() > 1) {
        cmp.oscillations_a = velocity_sign_changes(ra.trajectory, 1);
        cmp.oscillations_b = velocity_sign_changes(rb.trajectory, 1);
    }
    return cmp;
}

void write_comparison_csv(std::ostream& out, const Comparison& cmp) {
    const std::string name(to_string(cmp.metric));
    out << "t," << name << "_a," << name << "_b\n";
    for (const auto& row : cmp.rows) {
        out << fmt(row.t) << ',';
        if (row.a) out << fmt(*row.a);
        out << ',';
        if (row.b) out << fmt(*row.b);
        out << '\n';
    }
}

}  // namespace splitdyn::cli
