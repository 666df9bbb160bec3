#include "splitdyn/operator_core.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace splitdyn {

namespace {

void require_dim(Eigen::Index expected, const Vector& x, const char* what) {
    if (x.size() != expected) {
        std::ostringstream msg;
        msg << what << ": expected dimension " << expected << ", got " << x.size();
        throw DimensionError(msg.str());
    }
}

}  // namespace

SplitProblem make_split_problem(MonotoneOp a, CocoerciveOp b, std::optional<Vector> known_zero) {
    if (a.dim <= 0) throw DimensionError("split problem: dimension must be positive");
    if (a.dim != b.dim) {
        std::ostringstream msg;
        msg << "split problem: A has dimension " << a.dim << " but B has dimension " << b.dim;
        throw DimensionError(msg.str());
    }
    if (!(b.beta > 0.0)) throw ParameterError("split problem: cocoercivity modulus must be > 0");
    if (known_zero) require_dim(a.dim, *known_zero, "split problem known zero");
    return SplitProblem{std::move(a), std::move(b), std::move(known_zero)};
}

MonotoneOp zero_monotone(Eigen::Index dim) {
    MonotoneOp op;
    op.dim = dim;
    op.resolvent = [](double, const Vector& x) -> Vector { return x; };
    op.forward = [](const Vector& x) -> Vector { return Vector::Zero(x.size()); };
    op.label = "zero";
    return op;
}

CocoerciveOp zero_cocoercive(Eigen::Index dim) {
    return CocoerciveOp{dim, [](const Vector& x) -> Vector { return Vector::Zero(x.size()); },
                        std::numeric_limits<double>::infinity(), "zero"};
}

CocoerciveOp identity_cocoercive(Eigen::Index dim) {
    return CocoerciveOp{dim, [](const Vector& x) -> Vector { return x; }, 1.0, "identity"};
}

Vector resolvent_eval(const MonotoneOp& a, double gamma, const Vector& x) {
    if (!(gamma > 0.0)) throw ParameterError("resolvent: gamma must be > 0");
    require_dim(a.dim, x, "resolvent");
    return a.resolvent(gamma, x);
}

Vector yosida_eval(const MonotoneOp& a, double lambda, const Vector& x) {
    if (!(lambda > 0.0)) throw ParameterError("yosida: lambda must be > 0");
    require_dim(a.dim, x, "yosida");
    return (x - a.resolvent(lambda, x)) / lambda;
}

void check_fb_parameters(const SplitProblem& p, double lambda, double gamma) {
    if (!(lambda > 0.0)) throw ParameterError("forward-backward operator: lambda must be > 0");
    if (!(gamma > 0.0) || !(gamma < p.gamma_max())) {
        std::ostringstream msg;
        msg << "forward-backward operator: gamma = " << gamma << " outside (0, 2*beta) = (0, "
            << p.gamma_max() << ")";
        throw ParameterError(msg.str());
    }
}

Vector fb_operator_eval(const SplitProblem& p, double lambda, double gamma, const Vector& x) {
    check_fb_parameters(p, lambda, gamma);
    require_dim(p.dim(), x, "forward-backward operator");
    const Vector forward = x - gamma * p.b.forward(x);
    return (x - p.a.resolvent(gamma, forward)) / lambda;
}

Vector residual_eval(const SplitProblem& p, double gamma, const Vector& x) {
    check_fb_parameters(p, 1.0, gamma);
    require_dim(p.dim(), x, "residual");
    const Vector bx = p.b.forward(x);
    const Vector shifted = x - gamma * bx;
    return (shifted - p.a.resolvent(gamma, shifted)) / gamma + bx;
}

CocoercivityReport cocoercivity_certificate(const std::function<Vector(const Vector&)>& op,
                                            double modulus, std::span<const VectorPair> samples) {
    if (samples.empty()) throw ParameterError("cocoercivity certificate: no samples");
    CocoercivityReport report;
    report.samples = samples.size();
    const Eigen::Index dim = samples.front().first.size();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& [x, y] = samples[i];
        if (x.size() != dim || y.size() != dim) {
            throw DimensionError("cocoercivity certificate: inconsistent sample dimensions");
        }
        const Vector dt = op(x) - op(y);
        if (dt.size() != dim) throw DimensionError("cocoercivity certificate: operator changed dimension");
        const double margin = dt.dot(x - y) - modulus * dt.squaredNorm();
        if (margin < report.min_margin) {
            report.min_margin = margin;
            report.worst_index = i;
        }
    }
    return report;
}

std::vector<VectorPair> sample_pairs(Eigen::Index dim, std::size_t count, std::uint64_t seed,
                                     double box) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-box, box);
    std::vector<VectorPair> pairs;
    pairs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Vector x(dim), y(dim);
        for (Eigen::Index j = 0; j < dim; ++j) x[j] = coord(rng);
        for (Eigen::Index j = 0; j < dim; ++j) y[j] = coord(rng);
        pairs.emplace_back(std::move(x), std::move(y));
    }
    return pairs;
}

}  // namespace splitdyn
