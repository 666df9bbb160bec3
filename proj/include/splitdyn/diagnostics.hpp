#pragma once

// Lyapunov energy, dissipation inequality and log-log rate fits evaluated on
// sampled trajectories.

#include "splitdyn/dynamics.hpp"
#include "splitdyn/problem_library.hpp"

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace splitdyn {

class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reference point in zer(A + B) used by the energy.
struct Anchor {
    Vector point;
    bool approximate = false;  ///< true when taken from the last trajectory sample
};

/// known_zero when available, otherwise the final sample (flagged approximate).
Anchor resolve_anchor(const Trajectory& traj, const std::optional<Vector>& known_zero);

struct EnergyRecord {
    double t = 0.0;
    double energy = 0.0;
    Vector anchor;
};

/// E(t) = 1/2 |(alpha-1)/2 (x - xbar) + t (x' + xi T(x))|^2 + (alpha-1)^2/8 |x - xbar|^2
EnergyRecord lyapunov_energy(const TrajectorySample& sample, const Vector& anchor,
                             const DampingParams& params);

std::vector<EnergyRecord> energy_series(const Trajectory& traj, const Vector& anchor);

/// First sample index from which E_{i+1} - E_i <= tol for every later step.
std::optional<std::size_t> energy_monotone_onset(std::span<const EnergyRecord> energies,
                                                 double tol);

/// Default epsilon in the admissible interval (0, alpha - 1 - sqrt(c / lambda0)),
/// c = 2 in general modes and c = 1 for b_zero. Throws ParameterError when the
/// interval is empty.
double epsilon_default(double alpha, double lambda0, Mode mode = Mode::kGeneral);

struct DissipationOptions {
    double burn_in = 0.2;  ///< fraction of samples skipped
    double tol = 0.0;
    Mode mode = Mode::kGeneral;
};

struct DissipationReport {
    double epsilon = 0.0;
    double max_lhs = 0.0;          ///< over samples beyond the burn-in
    double t_at_max = 0.0;
    std::optional<double> onset;   ///< first time after which the lhs stays <= tol
    double energy_start = 0.0;     ///< E(t0)
    std::vector<double> lhs;       ///< per sample, full grid
    bool passed = false;
};

/// Checks E' + (eps/2) t |x'|^2 + (eps/4) t lambda(t) |T(x)|^2 <= tol, with E'
/// from centered differences on the sample grid.
DissipationReport dissipation_check(const Trajectory& traj, const Vector& anchor, double epsilon,
                                    const DissipationOptions& options = {});

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
    std::size_t dropped = 0;  ///< non-positive values skipped inside the window
};

struct SeriesPoint {
    double t = 0.0;
    double value = 0.0;
};

/// Least-squares line through (log t, log value) on the trailing `window`
/// fraction of the horizon measured in log-time.
RateFit rate_fit(std::span<const SeriesPoint> series, double window = 0.5);

/// Series extraction helpers.
std::vector<SeriesPoint> speed_series(const Trajectory& traj);
std::vector<SeriesPoint> t_norm_series(const Trajectory& traj);
std::vector<SeriesPoint> residual_norm_series(const Trajectory& traj);
std::vector<SeriesPoint> distance_series(const Trajectory& traj, const Vector& anchor);

/// x'' by differencing the sampled velocities (second order, non-uniform grid).
std::vector<Vector> acceleration_by_differences(const Trajectory& traj);

struct IntegralEstimate {
    std::string name;
    std::array<double, 4> partial{};  ///< at 25/50/75/100% of the horizon
    [[nodiscard]] double total() const noexcept { return partial[3]; }
    /// increment over the last quarter relative to the total
    [[nodiscard]] double last_quartile_share() const noexcept {
        return partial[3] > 0.0 ? (partial[3] - partial[2]) / partial[3] : 0.0;
    }
};

/// Trapezoid estimates of int t|x'|^2, int t^3|x''|^2, int gamma^2/t |residual|^2.
std::array<IntegralEstimate, 3> integral_estimates(const Trajectory& traj);

/// Measured decay of |d/dt residual| next to the two candidate envelopes
/// 1/(t gamma) and t^2 |d/dt(gamma/lambda)| / gamma^2.
struct ResidualDerivativeReport {
    RateFit measured;
    RateFit envelope_t_gamma;
    RateFit envelope_schedule;
};
ResidualDerivativeReport residual_derivative_report(const Trajectory& traj, double window = 0.5);

/// Pointwise check of f(p) + g(p) - min <= (lambda/gamma) |T(x)| |x - xbar|,
/// p = prox_{gamma f}(x - gamma grad g(x)). Returns the largest lhs - rhs.
struct FunctionValueCertificate {
    double worst_excess = 0.0;
    double t_at_worst = 0.0;
    std::size_t samples = 0;
};
FunctionValueCertificate function_value_certificate(const Trajectory& traj, const ProblemSpec& spec,
                                                    const Vector& anchor);

/// Number of sign changes of component `index` of x' across the samples.
std::size_t velocity_sign_changes(const Trajectory& traj, Eigen::Index index);

}  // namespace splitdyn
