#include "splitdyn/cli/config.hpp"

#include "splitdyn/problem_library.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace splitdyn::cli {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("config: '" + std::string(key) + "' expects a number, got '" +
                          std::string(text) + "'");
    }
    return v;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
    text = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("config: '" + std::string(key) + "' expects a non-negative integer, got '" +
                          std::string(text) + "'");
    }
    return v;
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += fmt(v[i]);
    }
    return out;
}

}  // namespace

std::vector<double> parse_list(std::string_view text) {
    std::vector<double> out;
    text = trim(text);
    if (text.empty()) throw ConfigError("config: empty vector");
    while (true) {
        const auto comma = text.find(',');
        out.push_back(parse_double("vector", text.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    try {
        if (key == "problem") {
            cfg.problem = std::string(value);
        } else if (key == "f") {
            // shorthand for the one-dimensional nonsmooth problems
            cfg.problem = std::string(to_string(parse_nonsmooth_kind(value)));
        } else if (key == "mode") {
            cfg.mode = parse_mode(value);
        } else if (key == "alpha") {
            cfg.alpha = parse_double(key, value);
        } else if (key == "xi") {
            cfg.xi = parse_double(key, value);
        } else if (key == "lambda0") {
            cfg.lambda0 = parse_double(key, value);
        } else if (key == "eta") {
            if (value.empty() || value == "none") {
                cfg.eta.reset();
            } else {
                cfg.eta = parse_double(key, value);
            }
        } else if (key == "gamma") {
            (void)parse_gamma(value);
            cfg.gamma = std::string(value);
        } else if (key == "t0") {
            cfg.t0 = parse_double(key, value);
        } else if (key == "t_end") {
            cfg.t_end = parse_double(key, value);
        } else if (key == "step") {
            cfg.step = parse_double(key, value);
        } else if (key == "samples") {
            cfg.samples = parse_unsigned(key, value);
        } else if (key == "n_iters") {
            cfg.n_iters = parse_unsigned(key, value);
        } else if (key == "method") {
            if (value != "generic" && value != "b_zero_closed_form") {
                throw ConfigError("config: method must be generic or b_zero_closed_form");
            }
            cfg.method = std::string(value);
        } else if (key == "b_zero_variant") {
            cfg.b_zero_variant = parse_b_zero_variant(value);
        } else if (key == "inner_tol") {
            cfg.inner_tol = parse_double(key, value);
        } else if (key == "inner_max_iters") {
            cfg.inner_max_iters = parse_unsigned(key, value);
        } else if (key == "x0") {
            cfg.x0 = parse_list(value);
        } else if (key == "u0") {
            cfg.u0 = parse_list(value);
        } else if (key == "x1") {
            cfg.x1 = parse_list(value);
        } else if (key == "output") {
            cfg.output = std::string(value);
        } else if (key == "seed") {
            cfg.seed = parse_unsigned(key, value);
        } else if (key == "preset") {
            cfg.preset = std::string(value);
        } else {
            throw ConfigError("config: unknown key '" + std::string(key) + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config: bad value for '" + std::string(key) + "': " + e.what());
    }
}

void apply_assignment(ExperimentConfig& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("config: expected key=value, got '" + std::string(assignment) + "'");
    }
    apply_setting(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) {
            view = view.substr(0, hash);
        }
        view = trim(view);
        if (view.empty()) continue;
        try {
            apply_assignment(cfg, view);
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::vector<std::string> preset_names() { return {"5.1", "5.2", "5.3"}; }

void apply_preset(ExperimentConfig& cfg, std::string_view name, RunKind kind) {
    const bool discrete = kind == RunKind::kDiscrete;
    ExperimentConfig p;
    p.preset = std::string(name);
    p.output = cfg.output;
    p.seed = cfg.seed;
    if (name == "5.1") {
        p.problem = "quadratic_diag:1,100";
        p.alpha = 20.0;
        p.t0 = 1.0;
        p.t_end = 50.0;
        p.x0 = {1.0, 1.0};
        p.u0 = {1.0, 1.0};
        if (discrete) {
            p.mode = Mode::kGeneral;
            p.xi = 0.2;
            p.lambda0 = 0.01;
            p.gamma = "const:0.01";
            p.x1 = {1.0, 1.0};
            p.n_iters = 1000;
            p.inner_max_iters = 2000;
        } else {
            p.mode = Mode::kAZero;
            p.xi = 0.0;
            p.eta = 0.278;
        }
    } else if (name == "5.2") {
        p.problem = "abs";
        p.mode = Mode::kBZero;
        p.alpha = 2.0;
        p.xi = 0.0;
        p.lambda0 = 1.1;
        p.gamma = "poly:8";
        p.t0 = 1.0;
        p.t_end = 50.0;
        p.x0 = {1.0};
        p.u0 = {1.0};
        p.x1 = {1.0};
        p.n_iters = 200;
    } else if (name == "5.3") {
        p.problem = "rotation_identity";
        p.mode = Mode::kGeneral;
        p.alpha = 7.0;
        p.gamma = "const:1.5";
        p.t0 = 1.0;
        p.t_end = 100.0;
        p.x0 = {1.0, 2.0};
        p.u0 = {-1.0, -1.0};
        p.xi = 0.0;
        p.lambda0 = 0.056;
        if (discrete) {
            p.x1 = {0.0, 1.0};
            p.n_iters = 1000;
        }
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "' (expected 5.1, 5.2 or 5.3)");
    }
    cfg = std::move(p);
}

void apply_seed_env(ExperimentConfig& cfg) {
    if (const char* env = std::getenv("SPLITDYN_SEED"); env && *env) {
        cfg.seed = parse_unsigned("SPLITDYN_SEED", env);
    }
}

std::string render(const ExperimentConfig& cfg) {
    std::ostringstream out;
    if (!cfg.preset.empty()) out << "# preset " << cfg.preset << '\n';
    out << "problem=" << cfg.problem << '\n'
        << "mode=" << to_string(cfg.mode) << '\n'
        << "alpha=" << fmt(cfg.alpha) << '\n'
        << "xi=" << fmt(cfg.xi) << '\n'
        << "lambda0=" << fmt(cfg.lambda0) << '\n'
        << "eta=" << (cfg.eta ? fmt(*cfg.eta) : std::string("none")) << '\n'
        << "gamma=" << cfg.gamma << '\n'
        << "t0=" << fmt(cfg.t0) << '\n'
        << "t_end=" << fmt(cfg.t_end) << '\n'
        << "step=" << fmt(cfg.step) << '\n'
        << "samples=" << cfg.samples << '\n'
        << "n_iters=" << cfg.n_iters << '\n'
        << "method=" << cfg.method << '\n'
        << "b_zero_variant=" << to_string(cfg.b_zero_variant) << '\n'
        << "inner_tol=" << fmt(cfg.inner_tol) << '\n'
        << "inner_max_iters=" << cfg.inner_max_iters << '\n'
        << "x0=" << fmt_list(cfg.x0) << '\n'
        << "u0=" << fmt_list(cfg.u0) << '\n'
        << "x1=" << fmt_list(cfg.x1) << '\n'
        << "seed=" << cfg.seed << '\n';
    if (!cfg.output.empty()) out << "output=" << cfg.output << '\n';
    return out.str();
}

}  // namespace splitdyn::cli
