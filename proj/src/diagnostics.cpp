#include "splitdyn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace splitdyn {

namespace {

// Derivative of a sampled scalar series: three-point non-uniform stencil in
// the interior, one-sided differences at the ends.
template <class Value, class Get>
std::vector<Value> differentiate(std::size_t n, const std::vector<double>& t, Get get) {
    std::vector<Value> out(n);
    if (n < 2) {
        for (auto& v : out) v = get(0) * 0.0;
        return out;
    }
    out[0] = (get(1) - get(0)) / (t[1] - t[0]);
    out[n - 1] = (get(n - 1) - get(n - 2)) / (t[n - 1] - t[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = t[i] - t[i - 1];
        const double hr = t[i + 1] - t[i];
        out[i] = (hl * hl * get(i + 1) - hr * hr * get(i - 1) + (hr * hr - hl * hl) * get(i)) /
                 (hl * hr * (hl + hr));
    }
    return out;
}

std::vector<double> times(const Trajectory& traj) {
    std::vector<double> t;
    t.reserve(traj.samples.size());
    for (const auto& s : traj.samples) t.push_back(s.t);
    return t;
}

}  // namespace

Anchor resolve_anchor(const Trajectory& traj, const std::optional<Vector>& known_zero) {
    if (known_zero) return {*known_zero, false};
    if (traj.samples.empty()) {
        throw InsufficientDataError(
            "no anchor: supply a point of zer(A+B) or a non-empty trajectory");
    }
    return {traj.samples.back().x, true};
}

EnergyRecord lyapunov_energy(const TrajectorySample& sample, const Vector& anchor,
                             const DampingParams& params) {
    if (anchor.size() != sample.x.size()) {
        throw DimensionError("lyapunov energy: anchor dimension does not match the sample");
    }
    const double c = 0.5 * (params.alpha - 1.0);
    const Vector dist = sample.x - anchor;
    const Vector anchored = c * dist + sample.t * (sample.xdot + params.xi * sample.t_op);
    const double energy = 0.5 * anchored.squaredNorm() + 0.5 * c * c * dist.squaredNorm();
    return {sample.t, energy, anchor};
}

std::vector<EnergyRecord> energy_series(const Trajectory& traj, const Vector& anchor) {
    std::vector<EnergyRecord> out;
    out.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
        out.push_back(lyapunov_energy(s, anchor, traj.schedules.params));
    }
    return out;
}

std::optional<std::size_t> energy_monotone_onset(std::span<const EnergyRecord> energies,
                                                 double tol) {
    if (energies.empty()) return std::nullopt;
    std::size_t onset = 0;
    for (std::size_t i = 0; i + 1 < energies.size(); ++i) {
        if (energies[i + 1].energy - energies[i].energy > tol) onset = i + 1;
    }
    if (onset + 1 >= energies.size() && energies.size() > 1) return std::nullopt;
    return onset;
}

double epsilon_default(double alpha, double lambda0, Mode mode) {
    const double c = mode == Mode::kBZero ? 1.0 : 2.0;
    if (!(alpha > 1.0) || !(lambda0 > c / ((alpha - 1.0) * (alpha - 1.0)))) {
        std::ostringstream msg;
        msg << "epsilon_default: need alpha > 1 and lambda0 > " << c
            << "/(alpha-1)^2 (got alpha = " << alpha << ", lambda0 = " << lambda0 << ")";
        throw ParameterError(msg.str());
    }
    return 0.5 * (alpha - 1.0 - std::sqrt(c / lambda0));
}

DissipationReport dissipation_check(const Trajectory& traj, const Vector& anchor, double epsilon,
                                    const DissipationOptions& options) {
    const auto& params = traj.schedules.params;
    const double lambda0 = traj.schedules.lambda.lambda0;
    const double c = options.mode == Mode::kBZero ? 1.0 : 2.0;
    const double upper = params.alpha - 1.0 - std::sqrt(c / lambda0);
    if (!(epsilon > 0.0) || !(epsilon < upper)) {
        std::ostringstream msg;
        msg << "dissipation check: epsilon = " << epsilon
            << " must satisfy 0 < epsilon < alpha - 1 - sqrt(" << c << "/lambda0) = " << upper;
        throw ParameterError(msg.str());
    }
    const std::size_t n = traj.samples.size();
    if (n < 3) throw InsufficientDataError("dissipation check: need at least 3 samples");

    const auto energies = energy_series(traj, anchor);
    const auto t = times(traj);
    const auto denergy =
        differentiate<double>(n, t, [&](std::size_t i) { return energies[i].energy; });

    DissipationReport report;
    report.epsilon = epsilon;
    report.energy_start = energies.front().energy;
    report.lhs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = traj.samples[i];
        const double lambda = lambda_at(traj.schedules.lambda, s.t);
        report.lhs[i] = denergy[i] + 0.5 * epsilon * s.t * s.xdot.squaredNorm() +
                        0.25 * epsilon * s.t * lambda * s.t_op.squaredNorm();
    }

    const auto first = static_cast<std::size_t>(std::floor(options.burn_in * static_cast<double>(n)));
    report.max_lhs = -std::numeric_limits<double>::infinity();
    for (std::size_t i = std::min(first, n - 1); i < n; ++i) {
        if (report.lhs[i] > report.max_lhs) {
            report.max_lhs = report.lhs[i];
            report.t_at_max = t[i];
        }
    }
    std::size_t last_bad = n;
    for (std::size_t i = n; i-- > 0;) {
        if (report.lhs[i] > options.tol) {
            last_bad = i;
            break;
        }
    }
    if (last_bad == n) {
        report.onset = t.front();
    } else if (last_bad + 1 < n) {
        report.onset = t[last_bad + 1];
    }
    report.passed = report.max_lhs <= options.tol;
    return report;
}

RateFit rate_fit(std::span<const SeriesPoint> series, double window) {
    if (series.size() < 2) throw InsufficientDataError("rate fit: series too short");
    if (!(window > 0.0 && window <= 1.0)) throw ParameterError("rate fit: window must be in (0, 1]");
    const double t_first = series.front().t;
    const double t_last = series.back().t;
    if (!(t_first > 0.0) || !(t_last > t_first)) {
        throw ParameterError("rate fit: times must be positive and increasing");
    }
    const double log_lo = std::log(t_last) - window * (std::log(t_last) - std::log(t_first));
    const double t_lo = std::exp(log_lo);

    RateFit fit;
    fit.t_lo = t_lo;
    fit.t_hi = t_last;
    std::vector<double> lx, ly;
    for (const auto& p : series) {
        if (p.t < t_lo * (1.0 - 1e-12)) continue;
        if (!(p.value > 0.0)) {
            ++fit.dropped;
            continue;
        }
        lx.push_back(std::log(p.t));
        ly.push_back(std::log(p.value));
    }
    fit.points = lx.size();
    if (fit.points < 10) {
        std::ostringstream msg;
        msg << "rate fit: only " << fit.points << " positive points in window [" << t_lo << ", "
            << t_last << "] (" << fit.dropped << " non-positive dropped)";
        throw InsufficientDataError(msg.str());
    }
    const double n = static_cast<double>(fit.points);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double cxx = 0.0, cxy = 0.0, cyy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double dx = lx[i] - mx;
        const double dy = ly[i] - my;
        cxx += dx * dx;
        cxy += dx * dy;
        cyy += dy * dy;
    }
    fit.slope = cxy / cxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = cyy > 0.0 ? std::clamp(cxy * cxy / (cxx * cyy), 0.0, 1.0) : 1.0;
    return fit;
}

std::vector<SeriesPoint> speed_series(const Trajectory& traj) {
    std::vector<SeriesPoint> out;
    out.reserve(traj.samples.size());
    for (const auto& s : traj.samples) out.push_back({s.t, s.speed});
    return out;
}

std::vector<SeriesPoint> t_norm_series(const Trajectory& traj) {
    std::vector<SeriesPoint> out;
    out.reserve(traj.samples.size());
    for (const auto& s : traj.samples) out.push_back({s.t, s.t_op.norm()});
    return out;
}

std::vector<SeriesPoint> residual_norm_series(const Trajectory& traj) {
    std::vector<SeriesPoint> out;
    out.reserve(traj.samples.size());
    for (const auto& s : traj.samples) out.push_back({s.t, s.residual.norm()});
    return out;
}

std::vector<SeriesPoint> distance_series(const Trajectory& traj, const Vector& anchor) {
    std::vector<SeriesPoint> out;
    out.reserve(traj.samples.size());
    for (const auto& s : traj.samples) out.push_back({s.t, (s.x - anchor).norm()});
    return out;
}

std::vector<Vector> acceleration_by_differences(const Trajectory& traj) {
    const auto t = times(traj);
    return differentiate<Vector>(traj.samples.size(), t,
                                 [&](std::size_t i) -> Vector { return traj.samples[i].xdot; });
}

std::array<IntegralEstimate, 3> integral_estimates(const Trajectory& traj) {
    const std::size_t n = traj.samples.size();
    if (n < 50) throw InsufficientDataError("integral estimates: need at least 50 samples");
    const auto accel = acceleration_by_differences(traj);

    std::array<IntegralEstimate, 3> out;
    out[0].name = "int t |x'|^2";
    out[1].name = "int t^3 |x''|^2";
    out[2].name = "int gamma^2/t |residual|^2";

    std::vector<std::array<double, 3>> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = traj.samples[i];
        const double gamma = gamma_at(traj.schedules.gamma, s.t);
        integrand[i] = {s.t * s.xdot.squaredNorm(), s.t * s.t * s.t * accel[i].squaredNorm(),
                        gamma * gamma / s.t * s.residual.squaredNorm()};
    }

    std::vector<std::array<double, 3>> cumulative(n);
    cumulative[0] = {0.0, 0.0, 0.0};
    for (std::size_t i = 1; i < n; ++i) {
        const double dt = traj.samples[i].t - traj.samples[i - 1].t;
        for (std::size_t k = 0; k < 3; ++k) {
            cumulative[i][k] = cumulative[i - 1][k] + 0.5 * dt * (integrand[i][k] + integrand[i - 1][k]);
        }
    }

    // partial integrals up to the last sample at or before each quarter mark
    const double t0 = traj.samples.front().t;
    const double span = traj.samples.back().t - t0;
    for (std::size_t q = 0; q < 4; ++q) {
        const double mark = t0 + 0.25 * static_cast<double>(q + 1) * span;
        std::size_t j = 0;
        while (j + 1 < n && traj.samples[j + 1].t <= mark + 1e-12 * span) ++j;
        for (std::size_t k = 0; k < 3; ++k) out[k].partial[q] = cumulative[j][k];
    }
    return out;
}

ResidualDerivativeReport residual_derivative_report(const Trajectory& traj, double window) {
    const std::size_t n = traj.samples.size();
    const auto t = times(traj);
    const auto drdt = differentiate<Vector>(
        n, t, [&](std::size_t i) -> Vector { return traj.samples[i].residual; });
    std::vector<SeriesPoint> measured, env_a, env_b;
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = t[i];
        const double gamma = gamma_at(traj.schedules.gamma, ti);
        const double gamma_dot = gamma_dot_at(traj.schedules.gamma, ti);
        const double lambda = lambda_at(traj.schedules.lambda, ti);
        const double lambda_dot = lambda_dot_at(traj.schedules.lambda, ti);
        const double ratio_dot = (gamma_dot * lambda - gamma * lambda_dot) / (lambda * lambda);
        measured.push_back({ti, drdt[i].norm()});
        env_a.push_back({ti, 1.0 / (ti * gamma)});
        env_b.push_back({ti, ti * ti * std::abs(ratio_dot) / (gamma * gamma)});
    }
    ResidualDerivativeReport report;
    report.measured = rate_fit(measured, window);
    report.envelope_t_gamma = rate_fit(env_a, window);
    report.envelope_schedule = rate_fit(env_b, window);
    return report;
}

FunctionValueCertificate function_value_certificate(const Trajectory& traj, const ProblemSpec& spec,
                                                    const Vector& anchor) {
    if (!spec.objective) {
        throw ParameterError("function value certificate: problem '" + spec.name +
                             "' has no objective");
    }
    FunctionValueCertificate cert;
    cert.worst_excess = -std::numeric_limits<double>::infinity();
    for (const auto& s : traj.samples) {
        const double gamma = gamma_at(traj.schedules.gamma, s.t);
        const double lambda = lambda_at(traj.schedules.lambda, s.t);
        const double gap = *objective_gap(spec, gamma, s.x);
        const double bound = lambda / gamma * s.t_op.norm() * (s.x - anchor).norm();
        const double excess = gap - bound;
        if (excess > cert.worst_excess) {
            cert.worst_excess = excess;
            cert.t_at_worst = s.t;
        }
        ++cert.samples;
    }
    return cert;
}

std::size_t velocity_sign_changes(const Trajectory& traj, Eigen::Index index) {
    std::size_t changes = 0;
    double previous = 0.0;
    for (const auto& s : traj.samples) {
        if (index >= s.xdot.size()) throw DimensionError("sign changes: component out of range");
        const double v = s.xdot[index];
        if (v == 0.0) continue;
        if (previous != 0.0 && (v > 0.0) != (previous > 0.0)) ++changes;
        previous = v;
    }
    return changes;
}

}  // namespace splitdyn
