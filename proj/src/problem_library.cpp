#include "splitdyn/problem_library.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace splitdyn {

namespace {

double f_scalar(NonsmoothKind kind, double v) {
    switch (kind) {
        case NonsmoothKind::kHalfSquare: return 0.5 * v * v;
        case NonsmoothKind::kAbs: return std::abs(v);
        case NonsmoothKind::kAbsPlusHalfSquare: return std::abs(v) + 0.5 * v * v;
    }
    return 0.0;
}

double prox_scalar(NonsmoothKind kind, double gamma, double v) {
    const double soft = std::copysign(std::max(std::abs(v) - gamma, 0.0), v);
    switch (kind) {
        case NonsmoothKind::kHalfSquare: return v / (1.0 + gamma);
        case NonsmoothKind::kAbs: return soft;
        case NonsmoothKind::kAbsPlusHalfSquare: return soft / (1.0 + gamma);
    }
    return v;
}

MonotoneOp subdifferential(NonsmoothKind kind, Eigen::Index dim) {
    MonotoneOp op;
    op.dim = dim;
    op.resolvent = [kind](double gamma, const Vector& x) -> Vector {
        return x.unaryExpr([&](double v) { return prox_scalar(kind, gamma, v); });
    };
    if (kind == NonsmoothKind::kHalfSquare) {
        op.forward = [](const Vector& x) -> Vector { return x; };
    }
    op.label = std::string("subdiff ") + std::string(to_string(kind));
    return op;
}

double sum_f(NonsmoothKind kind, const Vector& x) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) total += f_scalar(kind, x[i]);
    return total;
}

CocoerciveOp quadratic_gradient(const Vector& coeffs) {
    if (coeffs.size() == 0) throw ParameterError("quadratic_diag: no coefficients");
    if ((coeffs.array() <= 0.0).any() || !coeffs.allFinite()) {
        throw ParameterError("quadratic_diag: coefficients must be positive");
    }
    return CocoerciveOp{coeffs.size(),
                        [coeffs](const Vector& x) -> Vector {
                            return coeffs.cwiseProduct(x);
                        },
                        1.0 / coeffs.maxCoeff(), "grad quadratic_diag"};
}

std::function<double(const Vector&)> quadratic_value(const Vector& coeffs) {
    return [coeffs](const Vector& x) { return 0.5 * coeffs.dot(x.cwiseProduct(x)); };
}

Vector parse_coeffs(std::string_view text) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto pos = text.find(',', start);
        const auto item = text.substr(start, pos == std::string_view::npos ? pos : pos - start);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size() || item.empty()) {
            throw std::invalid_argument("bad coefficient list '" + std::string(text) + "'");
        }
        values.push_back(v);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

NonsmoothKind parse_nonsmooth_kind(std::string_view text) {
    if (text == "half_square") return NonsmoothKind::kHalfSquare;
    if (text == "abs") return NonsmoothKind::kAbs;
    if (text == "abs_plus_half_square") return NonsmoothKind::kAbsPlusHalfSquare;
    throw std::invalid_argument("unknown nonsmooth function '" + std::string(text) + "'");
}

std::string_view to_string(NonsmoothKind kind) {
    switch (kind) {
        case NonsmoothKind::kHalfSquare: return "half_square";
        case NonsmoothKind::kAbs: return "abs";
        case NonsmoothKind::kAbsPlusHalfSquare: return "abs_plus_half_square";
    }
    return "unknown";
}

Vector soft_threshold(const Vector& x, double threshold) {
    return x.unaryExpr(
        [threshold](double v) { return std::copysign(std::max(std::abs(v) - threshold, 0.0), v); });
}

ProblemSpec build_quadratic_diag(const Vector& coeffs) {
    CocoerciveOp b = quadratic_gradient(coeffs);
    const Eigen::Index dim = coeffs.size();
    Objective objective;
    objective.f_value = [](const Vector&) { return 0.0; };
    objective.g_value = quadratic_value(coeffs);
    objective.f_envelope = [](double, const Vector&) { return 0.0; };

    std::string name = "quadratic_diag:";
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (i > 0) name += ',';
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, coeffs[i]);
        name.append(buf, ptr);
    }
    return ProblemSpec{name,
                       make_split_problem(zero_monotone(dim), std::move(b), Vector::Zero(dim)),
                       std::move(objective), "smooth convex quadratic, A = 0, B = grad g"};
}

ProblemSpec build_nonsmooth_1d(NonsmoothKind kind) {
    Objective objective;
    objective.f_value = [kind](const Vector& x) { return sum_f(kind, x); };
    objective.g_value = [](const Vector&) { return 0.0; };
    objective.f_envelope = [kind](double gamma, const Vector& x) {
        const Vector p = x.unaryExpr([&](double v) { return prox_scalar(kind, gamma, v); });
        return sum_f(kind, p) + (x - p).squaredNorm() / (2.0 * gamma);
    };
    return ProblemSpec{std::string(to_string(kind)),
                       make_split_problem(subdifferential(kind, 1), zero_cocoercive(1),
                                          Vector::Zero(1)),
                       std::move(objective), "nonsmooth convex minimization, A = subdiff f, B = 0"};
}

ProblemSpec build_rotation_identity() {
    MonotoneOp rotation;
    rotation.dim = 2;
    rotation.resolvent = [](double gamma, const Vector& x) -> Vector {
        const double d = 1.0 + gamma * gamma;
        Vector out(2);
        out << (x[0] + gamma * x[1]) / d, (-gamma * x[0] + x[1]) / d;
        return out;
    };
    rotation.forward = [](const Vector& x) -> Vector {
        Vector out(2);
        out << -x[1], x[0];
        return out;
    };
    rotation.label = "rotation";
    return ProblemSpec{"rotation_identity",
                       make_split_problem(std::move(rotation), identity_cocoercive(2),
                                          Vector::Zero(2)),
                       std::nullopt, "operator splitting with a skew A and B = id"};
}

ProblemSpec build_composite(NonsmoothKind f_kind, const Vector& g_coeffs) {
    const Eigen::Index dim = g_coeffs.size();
    CocoerciveOp b = quadratic_gradient(g_coeffs);
    Objective objective;
    objective.f_value = [f_kind](const Vector& x) { return sum_f(f_kind, x); };
    objective.g_value = quadratic_value(g_coeffs);
    objective.f_envelope = [f_kind](double gamma, const Vector& x) {
        const Vector p = x.unaryExpr([&](double v) { return prox_scalar(f_kind, gamma, v); });
        return sum_f(f_kind, p) + (x - p).squaredNorm() / (2.0 * gamma);
    };
    // every f kind and g are minimized at the origin
    std::string name = "composite:" + std::string(to_string(f_kind)) + ":";
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (i > 0) name += ',';
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, g_coeffs[i]);
        name.append(buf, ptr);
    }
    return ProblemSpec{name,
                       make_split_problem(subdifferential(f_kind, dim), std::move(b),
                                          Vector::Zero(dim)),
                       std::move(objective), "structured convex minimization f + g"};
}

ProblemSpec build_zero(Eigen::Index dim) {
    if (dim <= 0) throw DimensionError("zero problem: dimension must be positive");
    Objective objective;
    objective.f_value = [](const Vector&) { return 0.0; };
    objective.g_value = [](const Vector&) { return 0.0; };
    objective.f_envelope = [](double, const Vector&) { return 0.0; };
    // every point is a zero; the origin is reported
    return ProblemSpec{"zero:" + std::to_string(dim),
                       make_split_problem(zero_monotone(dim), zero_cocoercive(dim),
                                          Vector::Zero(dim)),
                       std::move(objective), "A = B = 0, T vanishes identically"};
}

Eigen::Matrix2d rotation_identity_t_matrix(double lambda, double gamma) {
    const double d = lambda * (1.0 + gamma * gamma);
    const double diag = (gamma * gamma + gamma) / d;
    const double off = (gamma * gamma - gamma) / d;
    Eigen::Matrix2d m;
    m << diag, off, -off, diag;
    return m;
}

ProblemSpec problem_by_name(std::string_view name) {
    const auto colon = name.find(':');
    const auto head = name.substr(0, colon);
    const auto tail = colon == std::string_view::npos ? std::string_view{} : name.substr(colon + 1);
    if (head == "quadratic_diag") return build_quadratic_diag(parse_coeffs(tail));
    if (head == "rotation_identity" && tail.empty()) return build_rotation_identity();
    if (head == "zero") {
        int dim = 0;
        auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), dim);
        if (ec != std::errc{} || ptr != tail.data() + tail.size()) {
            throw std::invalid_argument("bad dimension in '" + std::string(name) + "'");
        }
        return build_zero(dim);
    }
    if (head == "composite") {
        const auto second = tail.find(':');
        if (second == std::string_view::npos) {
            throw std::invalid_argument("composite expects composite:<f>:<coeffs>");
        }
        return build_composite(parse_nonsmooth_kind(tail.substr(0, second)),
                               parse_coeffs(tail.substr(second + 1)));
    }
    if (tail.empty() && (head == "half_square" || head == "abs" || head == "abs_plus_half_square")) {
        return build_nonsmooth_1d(parse_nonsmooth_kind(head));
    }
    throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

std::optional<double> objective_gap(const ProblemSpec& spec, double gamma, const Vector& x) {
    if (!spec.objective) return std::nullopt;
    const auto& p = spec.problem;
    const Vector u = x - gamma * p.b.forward(x);
    const Vector prox = p.a.resolvent(gamma, u);
    const auto& obj = *spec.objective;
    return obj.f_value(prox) + obj.g_value(prox) - obj.min_value;
}

std::optional<double> envelope_gap(const ProblemSpec& spec, double gamma, const Vector& x) {
    if (!spec.objective) return std::nullopt;
    return spec.objective->f_envelope(gamma, x) - spec.objective->min_value;
}

}  // namespace splitdyn
