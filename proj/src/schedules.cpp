#include "splitdyn/schedules.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace splitdyn {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double parse_number(std::string_view text, std::string_view what) {
    // std::from_chars for double is available in libstdc++ 11.
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw std::invalid_argument("cannot parse " + std::string(what) + " from '" +
                                    std::string(text) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(10);
    out << v;
    return out.str();
}

void check_t(double t, double t0) {
    if (!(t >= t0)) {
        throw DomainError("schedule evaluated at t = " + fmt(t) + " before t0 = " + fmt(t0));
    }
}

}  // namespace

GammaSchedule parse_gamma(std::string_view text) {
    const auto parts = split(text, ':');
    const auto kind = parts.front();
    if (kind == "const" && parts.size() == 2) {
        return GammaSchedule::constant(parse_number(parts[1], "gamma constant"));
    }
    if (kind == "poly" && (parts.size() == 2 || parts.size() == 3)) {
        const double degree = parse_number(parts[1], "gamma degree");
        const double scale = parts.size() == 3 ? parse_number(parts[2], "gamma scale") : 1.0;
        return GammaSchedule::polynomial(degree, scale);
    }
    if (kind == "exp" && parts.size() == 2) {
        return GammaSchedule::exponential(parse_number(parts[1], "gamma rate"));
    }
    throw std::invalid_argument("unknown gamma schedule '" + std::string(text) +
                                "' (expected const:C, poly:N[:SCALE] or exp:R)");
}

std::string to_string(const GammaSchedule& gamma) {
    return std::visit(Overloaded{
                          [](const GammaConstant& c) { return "const:" + fmt(c.value); },
                          [](const GammaPolynomial& p) {
                              return "poly:" + fmt(p.degree) + ":" + fmt(p.scale);
                          },
                          [](const GammaExponential& e) { return "exp:" + fmt(e.rate); },
                      },
                      gamma.kind);
}

double lambda_at(const LambdaSchedule& lam, double t) { return lam.lambda0 * t * t; }

double lambda_dot_at(const LambdaSchedule& lam, double t) { return 2.0 * lam.lambda0 * t; }

double gamma_at(const GammaSchedule& gam, double t) {
    return std::visit(Overloaded{
                          [](const GammaConstant& c) { return c.value; },
                          [t](const GammaPolynomial& p) { return p.scale * std::pow(t, p.degree); },
                          [t](const GammaExponential& e) { return std::exp(std::pow(t, -e.rate)); },
                      },
                      gam.kind);
}

double gamma_dot_at(const GammaSchedule& gam, double t) {
    return std::visit(Overloaded{
                          [](const GammaConstant&) { return 0.0; },
                          [t](const GammaPolynomial& p) {
                              return p.degree == 0.0
                                         ? 0.0
                                         : p.scale * p.degree * std::pow(t, p.degree - 1.0);
                          },
                          [t](const GammaExponential& e) {
                              return -e.rate * std::pow(t, -e.rate - 1.0) *
                                     std::exp(std::pow(t, -e.rate));
                          },
                      },
                      gam.kind);
}

double eval_lambda(const LambdaSchedule& lam, double t, double t0) {
    check_t(t, t0);
    return lambda_at(lam, t);
}

double eval_gamma(const GammaSchedule& gam, double t, double t0) {
    check_t(t, t0);
    return gamma_at(gam, t);
}

double eval_gamma_dot(const GammaSchedule& gam, double t, double t0) {
    check_t(t, t0);
    return gamma_dot_at(gam, t);
}

GammaRange gamma_range(const GammaSchedule& gam, double t0, double t_end) {
    const double inf = std::numeric_limits<double>::infinity();
    return std::visit(
        Overloaded{
            [](const GammaConstant& c) { return GammaRange{c.value, c.value}; },
            [&](const GammaPolynomial& p) {
                const double at_start = p.scale * std::pow(t0, p.degree);
                if (p.degree == 0.0) return GammaRange{at_start, at_start};
                // monotone in t: the far end is t_end or the limit at infinity
                const double at_end = std::isinf(t_end) ? (p.degree > 0.0 ? inf : 0.0)
                                                        : p.scale * std::pow(t_end, p.degree);
                return GammaRange{std::min(at_start, at_end), std::max(at_start, at_end)};
            },
            [&](const GammaExponential& e) {
                // decreasing towards 1 for rate > 0
                const double at_start = std::exp(std::pow(t0, -e.rate));
                const double at_end = std::isinf(t_end) ? 1.0 : std::exp(std::pow(t_end, -e.rate));
                return GammaRange{std::min(at_start, at_end), std::max(at_start, at_end)};
            },
        },
        gam.kind);
}

double gamma_log_rate_bound(const GammaSchedule& gam, double t0) {
    return std::visit(Overloaded{
                          [](const GammaConstant&) { return 0.0; },
                          [](const GammaPolynomial& p) { return std::abs(p.degree); },
                          [t0](const GammaExponential& e) {
                              // t |gamma'| / gamma = rate t^-rate, largest at t0
                              return e.rate * std::pow(t0, -e.rate);
                          },
                      },
                      gam.kind);
}

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::kGeneral: return "general";
        case Mode::kBZero: return "b_zero";
        case Mode::kAZero: return "a_zero";
        case Mode::kConvexMin: return "convex_min";
    }
    return "unknown";
}

Mode parse_mode(std::string_view text) {
    if (text == "general") return Mode::kGeneral;
    if (text == "b_zero") return Mode::kBZero;
    if (text == "a_zero") return Mode::kAZero;
    if (text == "convex_min") return Mode::kConvexMin;
    throw std::invalid_argument("unknown mode '" + std::string(text) +
                                "' (expected general, b_zero, a_zero or convex_min)");
}

void ValidationReport::add(std::string condition, std::string detail) {
    violations.push_back({std::move(condition), std::move(detail)});
    passed = false;
}

std::string ValidationReport::summary() const {
    std::ostringstream out;
    out << "mode " << to_string(mode) << ": " << (passed ? "passed" : "FAILED");
    for (const auto& v : violations) out << "\n  violated: " << v.condition << " (" << v.detail << ")";
    return out.str();
}

ValidationReport validate(const DampingParams& params, const LambdaSchedule& lam,
                          const GammaSchedule& gam, double beta, Mode mode, double t_end) {
    ValidationReport report;
    report.mode = mode;

    const double alpha = params.alpha;
    if (!(alpha > 1.0)) report.add("alpha > 1", "alpha <= 1: got " + fmt(alpha));
    if (!(params.xi >= 0.0)) report.add("xi >= 0", "got " + fmt(params.xi));
    if (!(params.t0 > 0.0)) report.add("t0 > 0", "got " + fmt(params.t0));
    if (!(lam.lambda0 > 0.0)) report.add("lambda0 > 0", "got " + fmt(lam.lambda0));
    if (!(t_end > params.t0)) report.add("t_end > t0", "got t_end = " + fmt(t_end));

    const bool kind_ok = std::visit(
        Overloaded{
            [&](const GammaConstant& c) {
                if (c.value > 0.0) return true;
                report.add("gamma constant > 0", "got " + fmt(c.value));
                return false;
            },
            [&](const GammaPolynomial& p) {
                if (p.scale > 0.0 && std::isfinite(p.degree)) return true;
                report.add("gamma polynomial scale > 0", "got " + fmt(p.scale));
                return false;
            },
            [&](const GammaExponential& e) {
                if (e.rate > 0.0) return true;
                report.add("gamma exponential rate > 0", "got " + fmt(e.rate));
                return false;
            },
        },
        gam.kind);

    if (!(beta > 0.0)) report.add("beta > 0", "got " + fmt(beta));
    if (!report.passed || !kind_ok) return report;

    const double am1_sq = (alpha - 1.0) * (alpha - 1.0);
    // every kind is monotone, so [t0, t_end] plus the limit is the whole half-line
    const GammaRange range = gamma_range(gam, params.t0);
    const double log_rate = gamma_log_rate_bound(gam, params.t0);
    if (!std::isfinite(log_rate)) {
        report.add("|gamma'|/gamma = O(1/t)", "t |gamma'| / gamma unbounded");
    }

    const auto require_lambda = [&](double bound, const std::string& condition) {
        if (!(lam.lambda0 > bound)) {
            report.add(condition, "lambda0 = " + fmt(lam.lambda0) + " <= " + fmt(bound));
        }
    };
    const auto require_gamma_window = [&](double upper, const std::string& upper_name) {
        if (!(range.inf > 0.0)) report.add("inf gamma > 0", "inf gamma = " + fmt(range.inf));
        if (!(range.sup < upper)) {
            report.add("sup gamma < " + upper_name,
                       "sup gamma = " + fmt(range.sup) + " >= " + fmt(upper));
        }
    };

    switch (mode) {
        case Mode::kGeneral:
            require_lambda(2.0 / am1_sq, "lambda0 > 2/(alpha-1)^2");
            require_gamma_window(2.0 * beta, "2 beta");
            break;
        case Mode::kConvexMin:
            require_lambda(2.0 / am1_sq, "lambda0 > 2/(alpha-1)^2");
            require_gamma_window(2.0 * beta, "2/L");
            break;
        case Mode::kBZero:
            require_lambda(1.0 / am1_sq, "lambda0 > 1/(alpha-1)^2");
            if (!(range.inf > 0.0)) report.add("inf gamma > 0", "inf gamma = " + fmt(range.inf));
            break;
        case Mode::kAZero: {
            const auto* c = std::get_if<GammaConstant>(&gam.kind);
            if (c == nullptr) {
                report.add("gamma constant", "B-only reduction needs a constant gamma");
                break;
            }
            if (!(c->value < 2.0 * beta)) {
                report.add("sup gamma < 2 beta", "gamma = " + fmt(c->value));
            }
            const double eta = lam.lambda0 / c->value;
            const double bound = 1.0 / (beta * am1_sq);
            if (!(eta > bound)) {
                report.add("eta > 1/(beta (alpha-1)^2)",
                           "eta = " + fmt(eta) + " <= " + fmt(bound));
            }
            break;
        }
    }
    return report;
}

AZeroReduction a_zero_reduction(double eta, double beta, double alpha) {
    double epsilon = beta * 1e-3;
    // keep eta > 1/((beta - eps)(alpha - 1)^2) whenever eta > 1/(beta (alpha - 1)^2)
    const double slack = beta - 1.0 / (eta * (alpha - 1.0) * (alpha - 1.0));
    if (slack > 0.0) epsilon = std::min(epsilon, 0.5 * slack);
    const double gamma = 2.0 * (beta - epsilon);
    return AZeroReduction{epsilon, gamma * eta, gamma};
}

}  // namespace splitdyn
