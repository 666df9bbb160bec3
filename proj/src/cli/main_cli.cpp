#include "CLI11.hpp"

#include "splitdyn/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace splitdyn::cli {
namespace {

namespace fs = std::filesystem;

/// Options shared by every subcommand that builds a configuration.
struct SourceOptions {
    std::string preset;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> flags;  // key, value
    std::vector<std::pair<std::string, CLI::Option*>> flag_opts;
    std::vector<std::string> flag_values;

    void attach(CLI::App* app) {
        app->add_option("--preset", preset, "preset: 5.1, 5.2 or 5.3");
        app->add_option("--set", sets, "override, key=value (repeatable)");
        static const std::vector<std::pair<std::string, std::string>> keys = {
            {"--problem", "problem"}, {"--mode", "mode"},       {"--alpha", "alpha"},
            {"--xi", "xi"},           {"--lambda0", "lambda0"}, {"--eta", "eta"},
            {"--gamma", "gamma"},     {"--f", "f"},             {"--t-end", "t_end"},
            {"--step", "step"},       {"--n-iters", "n_iters"}, {"--method", "method"},
            {"--output,-o", "output"}, {"--seed", "seed"}};
        flag_values.resize(keys.size());
        for (std::size_t i = 0; i < keys.size(); ++i) {
            flag_opts.emplace_back(keys[i].second,
                                   app->add_option(keys[i].first, flag_values[i],
                                                   "shorthand for --set " + keys[i].second + "=..."));
        }
    }

    [[nodiscard]] std::vector<std::string> overrides() const {
        std::vector<std::string> out = sets;
        for (std::size_t i = 0; i < flag_opts.size(); ++i) {
            if (flag_opts[i].second->count() > 0) out.push_back(flag_opts[i].first + "=" + flag_values[i]);
        }
        return out;
    }
};

bool is_preset(const std::string& s) {
    const auto names = preset_names();
    return std::find(names.begin(), names.end(), s) != names.end();
}

/// preset < config file < overrides; a preset named inside the file applies first.
ExperimentConfig assemble(RunKind kind, std::string preset, const std::string& source,
                          const std::vector<std::string>& overrides) {
    ExperimentConfig cfg;
    std::string file;
    if (!source.empty()) {
        if (is_preset(source) && !fs::exists(source)) {
            if (preset.empty()) preset = source;
        } else {
            file = source;
        }
    }
    if (!file.empty() && preset.empty()) {
        ExperimentConfig probe;
        load_config_file(probe, file);
        preset = probe.preset;
    }
    if (!preset.empty()) apply_preset(cfg, preset, kind);
    if (!file.empty()) load_config_file(cfg, file);
    for (const auto& o : overrides) apply_assignment(cfg, o);
    apply_seed_env(cfg);
    return cfg;
}

void print_violations(std::ostream& err, const ValidationReport& report) {
    for (const auto& v : report.violations) {
        err << "violation [" << to_string(report.mode) << "] " << v.condition << ": " << v.detail << '\n';
    }
}

std::mutex g_io_mutex;

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ConstructionError& e) {
        std::lock_guard lock(g_io_mutex);
        std::cerr << "error: validation failed\n";
        print_violations(std::cerr, e.report());
        return kExitValidation;
    } catch (const DivergenceError& e) {
        std::lock_guard lock(g_io_mutex);
        std::cerr << "error: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const InnerSolveError& e) {
        std::lock_guard lock(g_io_mutex);
        std::cerr << "error: " << e.what() << '\n';
        return kExitInnerSolver;
    } catch (const std::exception& e) {
        std::lock_guard lock(g_io_mutex);
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

template <typename Result>
void emit(const ExperimentConfig& cfg, const Result& result,
          void (*writer)(std::ostream&, const Result&)) {
    if (cfg.output.empty() || cfg.output == "-") {
        std::lock_guard lock(g_io_mutex);
        writer(std::cout, result);
        return;
    }
    const fs::path csv = cfg.output;
    if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
    {
        std::ofstream out(csv);
        if (!out) throw ConfigError("cannot write '" + csv.string() + "'");
        writer(out, result);
    }
    fs::path report = csv;
    report.replace_extension(".json");
    std::ofstream out(report);
    if (!out) throw ConfigError("cannot write '" + report.string() + "'");
    out << result.report.dump(2) << '\n';
}

int run_batch(RunKind kind, const SourceOptions& opts, const std::vector<std::string>& sources,
              unsigned jobs) {
    std::vector<std::string> inputs = sources;
    if (inputs.empty()) inputs.emplace_back();
    const bool batch = inputs.size() > 1;

    std::vector<int> codes(inputs.size(), kExitOk);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < inputs.size(); i = next++) {
            codes[i] = guarded([&] {
                ExperimentConfig cfg = assemble(kind, opts.preset, inputs[i], opts.overrides());
                if (batch && cfg.output.empty()) {
                    const std::string stem = fs::path(inputs[i]).stem().string();
                    cfg.output = (stem.empty() ? "run" + std::to_string(i) : stem) + ".csv";
                }
                if (kind == RunKind::kContinuous) {
                    emit<SimulationResult>(cfg, simulate(cfg), &write_trajectory_csv);
                } else {
                    emit<IterationResult>(cfg, iterate(cfg), &write_iterates_csv);
                }
                return static_cast<int>(kExitOk);
            });
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(inputs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return *std::max_element(codes.begin(), codes.end());
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"splitdyn: inertial forward-backward dynamics and their discretization"};
    app.require_subcommand(1);

    SourceOptions sim_opts;
    std::vector<std::string> sim_sources;
    unsigned sim_jobs = 1;
    auto* sim = app.add_subcommand("simulate", "integrate the continuous dynamics, write CSV + JSON report");
    sim->add_option("config", sim_sources, "config files or preset names");
    sim->add_option("--jobs,-j", sim_jobs, "run configs concurrently")->check(CLI::PositiveNumber);
    sim_opts.attach(sim);

    SourceOptions it_opts;
    std::vector<std::string> it_sources;
    unsigned it_jobs = 1;
    auto* it = app.add_subcommand("iterate", "run the discrete inertial proximal scheme");
    it->add_option("config", it_sources, "config files or preset names");
    it->add_option("--jobs,-j", it_jobs, "run configs concurrently")->check(CLI::PositiveNumber);
    it_opts.attach(it);

    std::string cmp_a;
    std::string cmp_b;
    std::vector<std::string> cmp_set;
    std::vector<std::string> cmp_set_a;
    std::vector<std::string> cmp_set_b;
    std::string cmp_metric = "objective";
    std::string cmp_output;
    auto* cmp = app.add_subcommand("compare", "compare a metric between two continuous runs");
    cmp->add_option("a", cmp_a, "first config file or preset")->required();
    cmp->add_option("b", cmp_b, "second config file or preset")->required();
    cmp->add_option("--set", cmp_set, "override applied to both");
    cmp->add_option("--set-a", cmp_set_a, "override applied to the first");
    cmp->add_option("--set-b", cmp_set_b, "override applied to the second");
    cmp->add_option("--metric", cmp_metric, "objective|speed|norm_T|residual|distance");
    cmp->add_option("--output,-o", cmp_output, "CSV path (stdout when omitted)");

    SourceOptions val_opts;
    std::string val_source;
    std::string val_kind = "continuous";
    auto* val = app.add_subcommand("validate", "check the convergence hypotheses of a configuration");
    val->add_option("config", val_source, "config file or preset name");
    val->add_option("--kind", val_kind, "continuous|discrete")
        ->check(CLI::IsMember({"continuous", "discrete"}));
    val_opts.attach(val);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (sim->parsed()) return run_batch(RunKind::kContinuous, sim_opts, sim_sources, sim_jobs);
    if (it->parsed()) return run_batch(RunKind::kDiscrete, it_opts, it_sources, it_jobs);

    if (cmp->parsed()) {
        return guarded([&] {
            std::vector<std::string> oa = cmp_set;
            oa.insert(oa.end(), cmp_set_a.begin(), cmp_set_a.end());
            std::vector<std::string> ob = cmp_set;
            ob.insert(ob.end(), cmp_set_b.begin(), cmp_set_b.end());
            const ExperimentConfig a = assemble(RunKind::kContinuous, "", cmp_a, oa);
            const ExperimentConfig b = assemble(RunKind::kContinuous, "", cmp_b, ob);
            const Comparison result = compare(a, b, parse_metric(cmp_metric));

            std::ostream* summary = &std::cerr;
            std::ofstream file;
            if (cmp_output.empty()) {
                write_comparison_csv(std::cout, result);
            } else {
                file.open(cmp_output);
                if (!file) throw ConfigError("cannot write '" + cmp_output + "'");
                write_comparison_csv(file, result);
                summary = &std::cout;
            }
            *summary << "metric " << to_string(result.metric) << " at t_end: a/b = ";
            if (result.final_ratio) {
                *summary << *result.final_ratio << '\n';
            } else {
                *summary << "undefined\n";
            }
            if (result.oscillations_a) {
                *summary << "sign changes of xdot_1: a = " << *result.oscillations_a
                         << ", b = " << *result.oscillations_b << '\n';
            }
            return static_cast<int>(kExitOk);
        });
    }

    return guarded([&] {
        const RunKind kind = val_kind == "discrete" ? RunKind::kDiscrete : RunKind::kContinuous;
        const ExperimentConfig cfg = assemble(kind, val_opts.preset, val_source, val_opts.overrides());
        const ValidationReport report = validate_config(cfg, kind);
        if (!report.passed) {
            print_violations(std::cout, report);
            std::cout << "FAIL (" << report.violations.size() << " violation"
                      << (report.violations.size() == 1 ? "" : "s") << ")\n";
            return static_cast<int>(kExitValidation);
        }
        std::cout << "OK mode=" << to_string(cfg.mode) << " problem=" << cfg.problem << '\n';

        // spot check of the cocoercivity of T at the initial parameters
        const ProblemSpec spec = build_problem(cfg, kind);
        double lambda = cfg.lambda0;
        double gamma = 0.0;
        if (kind == RunKind::kContinuous) {
            const ScheduleSet set = build_schedules(cfg, spec);
            lambda = set.lambda_at(cfg.t0);
            gamma = set.gamma_at(cfg.t0);
        } else {
            const DiscreteParams params = build_discrete_params(cfg);
            lambda = params.lambda_k(1);
            gamma = params.gamma_k(1);
        }
        const double modulus = lambda * (1.0 - gamma / (4.0 * spec.problem.b.beta));
        const auto pairs = sample_pairs(spec.problem.dim(), 200, cfg.seed);
        const auto cert = cocoercivity_certificate(
            [&](const Vector& x) { return fb_operator_eval(spec.problem, lambda, gamma, x); }, modulus,
            pairs);
        std::cout << "cocoercivity of T (modulus " << modulus << ", seed " << cfg.seed
                  << "): min margin " << cert.min_margin << '\n';
        return static_cast<int>(kExitOk);
    });
}

}  // namespace splitdyn::cli
