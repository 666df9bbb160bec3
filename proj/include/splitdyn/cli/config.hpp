#pragma once

// Flat key=value experiment configuration shared by the CLI subcommands.

#include "splitdyn/discrete_solver.hpp"
#include "splitdyn/schedules.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace splitdyn::cli {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class RunKind { kContinuous, kDiscrete };

struct ExperimentConfig {
    std::string preset;  ///< informational, set by apply_preset
    std::string problem = "rotation_identity";
    Mode mode = Mode::kGeneral;
    double alpha = 3.0;
    double xi = 0.0;
    double lambda0 = 1.0;
    std::optional<double> eta;  ///< a_zero: lambda0 and gamma follow from eta and beta
    std::string gamma = "const:1";

    double t0 = 1.0;
    double t_end = 10.0;
    double step = 0.0;  ///< 0 selects the integrator default
    std::size_t samples = 500;

    std::size_t n_iters = 100;
    std::string method = "generic";  ///< generic | b_zero_closed_form
    BZeroVariant b_zero_variant = BZeroVariant::kDerived;
    double inner_tol = 1e-12;
    std::size_t inner_max_iters = 200;

    std::vector<double> x0{1.0, 2.0};
    std::vector<double> u0{-1.0, -1.0};  ///< initial velocity (continuous)
    std::vector<double> x1{0.0, 1.0};    ///< second iterate (discrete)

    std::string output;  ///< CSV path; empty writes to stdout
    std::uint64_t seed = kDefaultSeed;
};

/// Sets one key. Unknown keys and malformed values throw ConfigError.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// "key=value" form of apply_setting.
void apply_assignment(ExperimentConfig& cfg, std::string_view assignment);

/// Reads a key=value file; blank lines and '#' comments are skipped.
void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

/// Named presets "5.1", "5.2", "5.3" for continuous or discrete runs.
void apply_preset(ExperimentConfig& cfg, std::string_view name, RunKind kind);

std::vector<std::string> preset_names();

/// SPLITDYN_SEED, when set, replaces cfg.seed.
void apply_seed_env(ExperimentConfig& cfg);

/// Canonical key=value rendering (round-trips through load_config_file).
std::string render(const ExperimentConfig& cfg);

std::vector<double> parse_list(std::string_view text);

}  // namespace splitdyn::cli
