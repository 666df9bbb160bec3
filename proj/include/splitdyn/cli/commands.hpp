#pragma once

// simulate | iterate | compare | validate, usable both from the command line
// and in-process (tests drive these directly).

#include "json.hpp"

#include "splitdyn/cli/config.hpp"
#include "splitdyn/diagnostics.hpp"
#include "splitdyn/discrete_solver.hpp"
#include "splitdyn/dynamics.hpp"
#include "splitdyn/problem_library.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace splitdyn::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitValidation = 2,
    kExitDivergence = 3,
    kExitInnerSolver = 4,
};

/// Problem named by cfg.problem, dimension-checked against x0/u0/x1.
ProblemSpec build_problem(const ExperimentConfig& cfg, RunKind kind);

/// Schedules for a continuous run; a_zero with eta set goes through a_zero_reduction.
ScheduleSet build_schedules(const ExperimentConfig& cfg, const ProblemSpec& spec);

DiscreteParams build_discrete_params(const ExperimentConfig& cfg);

/// Validation of cfg for its run kind (never throws on hypothesis failures).
ValidationReport validate_config(const ExperimentConfig& cfg, RunKind kind);

struct SimulationResult {
    ProblemSpec spec;
    Trajectory trajectory;
    Anchor anchor;
    std::vector<EnergyRecord> energy;
    std::vector<std::optional<double>> objective;  ///< per sample
    nlohmann::json report;
};

/// Integrates cfg; throws ConstructionError / DivergenceError.
SimulationResult simulate(const ExperimentConfig& cfg);

/// Columns t, x[..], xdot[..], norm_xdot, norm_T, norm_residual, energy, objective.
void write_trajectory_csv(std::ostream& out, const SimulationResult& result);

struct IterationResult {
    ProblemSpec spec;
    IterateRun run;
    nlohmann::json report;
};

/// Runs the discrete scheme; throws ConstructionError / InnerSolveError.
IterationResult iterate(const ExperimentConfig& cfg);

/// Columns k, x_k[..], norm_dx_times_k, norm_residual_times_gamma, norm_xy_times_k, inner_iters.
void write_iterates_csv(std::ostream& out, const IterationResult& result);

enum class Metric { kObjective, kSpeed, kNormT, kResidual, kDistance };
Metric parse_metric(std::string_view text);
std::string_view to_string(Metric metric);

struct ComparisonRow {
    double t = 0.0;
    std::optional<double> a;
    std::optional<double> b;
};

struct Comparison {
    Metric metric = Metric::kObjective;
    std::vector<ComparisonRow> rows;  ///< on A's sample grid, B linearly interpolated
    std::optional<double> final_ratio;  ///< a / b at t_end
    std::optional<std::size_t> oscillations_a;  ///< sign changes of xdot[1] when dim > 1
    std::optional<std::size_t> oscillations_b;
};

/// Both configs must name the same problem.
Comparison compare(const ExperimentConfig& a, const ExperimentConfig& b, Metric metric);

void write_comparison_csv(std::ostream& out, const Comparison& cmp);

/// Entry point for the splitdyn executable.
int run_cli(int argc, char** argv);

}  // namespace splitdyn::cli
