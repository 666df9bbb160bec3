#include "splitdyn/discrete_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace splitdyn {

std::string_view to_string(BZeroVariant variant) {
    switch (variant) {
        case BZeroVariant::kDerived: return "derived";
        case BZeroVariant::kPrinted: return "printed";
        case BZeroVariant::kPrintedVerbatim: return "printed_verbatim";
    }
    return "unknown";
}

BZeroVariant parse_b_zero_variant(std::string_view text) {
    if (text == "derived") return BZeroVariant::kDerived;
    if (text == "printed") return BZeroVariant::kPrinted;
    if (text == "printed_verbatim") return BZeroVariant::kPrintedVerbatim;
    throw std::invalid_argument("unknown b_zero variant '" + std::string(text) + "'");
}

double DiscreteParams::lambda_k(std::size_t k) const {
    const double kk = static_cast<double>(std::max<std::size_t>(k, 1));
    return lambda0 * kk * kk;
}

double DiscreteParams::gamma_k(std::size_t k) const {
    return gamma_at(gamma, static_cast<double>(std::max<std::size_t>(k, 1)));
}

double DiscreteParams::alpha_k(std::size_t k) const { return 1.0 - alpha / static_cast<double>(k); }

ValidationReport validate_discrete(const DiscreteParams& params, double beta, Mode mode) {
    ValidationReport report;
    report.mode = mode;
    const auto num = [](double v) {
        std::ostringstream out;
        out.precision(10);
        out << v;
        return out.str();
    };
    if (!(params.alpha > 1.0)) report.add("alpha > 1", "alpha <= 1: got " + num(params.alpha));
    if (!(params.xi >= 0.0)) report.add("xi >= 0", "got " + num(params.xi));
    if (!(beta > 0.0)) report.add("beta > 0", "got " + num(beta));
    if (params.n_iters == 0) report.add("n_iters > 0", "got 0");
    if (!report.passed) return report;

    const double am1_sq = (params.alpha - 1.0) * (params.alpha - 1.0);
    const GammaRange range = gamma_range(params.gamma, 1.0);
    if (!std::isfinite(gamma_log_rate_bound(params.gamma, 1.0))) {
        report.add("(gamma_k - gamma_{k-1})/gamma_k = O(1/k)", "unbounded");
    }
    if (!(range.inf > 0.0)) report.add("inf gamma_k > 0", "inf = " + num(range.inf));
    if (mode == Mode::kBZero) {
        const double bound = (2.0 * params.xi + 1.0) / am1_sq;
        if (!(params.lambda0 > bound)) {
            report.add("lambda0 > (2 xi + 1)/(alpha-1)^2",
                       "lambda0 = " + num(params.lambda0) + " <= " + num(bound));
        }
    } else {
        const double bound = (4.0 * params.xi + 2.0) / am1_sq;
        if (!(params.lambda0 > bound)) {
            report.add("lambda0 > (4 xi + 2)/(alpha-1)^2",
                       "lambda0 = " + num(params.lambda0) + " <= " + num(bound));
        }
        if (!(range.sup < 2.0 * beta)) {
            report.add("sup gamma_k < 2 beta", "sup = " + num(range.sup) + " >= " + num(2.0 * beta));
        }
    }
    return report;
}

IterateState initial_iterate(const SplitProblem& p, const DiscreteParams& params, const Vector& x0,
                             const Vector& x1) {
    if (x0.size() != p.dim() || x1.size() != p.dim()) {
        throw DimensionError("discrete solver: initial points do not match the problem dimension");
    }
    IterateState state;
    state.k = 1;
    state.x_prev = x0;
    state.x_curr = x1;
    state.t_prev = fb_operator_eval(p, params.lambda_k(0), params.gamma_k(0), x0);
    state.t_curr = fb_operator_eval(p, params.lambda_k(1), params.gamma_k(1), x1);
    return state;
}

Vector extrapolate(const IterateState& state, const DiscreteParams& params) {
    return state.x_curr + params.alpha_k(state.k) * (state.x_curr - state.x_prev) -
           params.xi * (state.t_curr - state.t_prev);
}

InnerSolveResult backward_resolve(const SplitProblem& p, double lambda, double gamma,
                                  const Vector& y, const InnerSolverConfig& cfg) {
    check_fb_parameters(p, lambda, gamma);
    const double q = 2.0 / lambda;  // Lipschitz constant of T
    const double theta = 1.0 / (1.0 + q);

    InnerSolveResult result;
    Vector x = y;
    for (std::size_t it = 0;; ++it) {
        const Vector tx = fb_operator_eval(p, lambda, gamma, x);
        const Vector r = x + tx - y;
        const double res = r.norm();
        if (res <= cfg.tol || it == cfg.max_iters) {
            result.x = std::move(x);
            result.iterations = it;
            result.residual = res;
            if (res > cfg.tol) {
                std::ostringstream msg;
                msg << "backward step did not reach tolerance " << cfg.tol << " in " << cfg.max_iters
                    << " iterations (residual " << res << ", lambda = " << lambda << ")";
                throw InnerSolveError(msg.str(), res);
            }
            return result;
        }
        if (q < 1.0) {
            x = y - tx;
        } else {
            x -= theta * r;
        }
    }
}

StepResult step(const IterateState& state, const DiscreteParams& params, const SplitProblem& p) {
    const std::size_t k = state.k;
    StepResult out;
    out.y = extrapolate(state, params);
    const double lambda_next = params.lambda_k(k + 1);
    const double gamma_next = params.gamma_k(k + 1);
    auto inner = backward_resolve(p, lambda_next, gamma_next, out.y, params.inner);
    out.inner_iterations = inner.iterations;
    out.backward_residual = inner.residual;

    out.next.k = k + 1;
    out.next.x_prev = state.x_curr;
    out.next.t_prev = state.t_curr;
    out.next.t_curr = fb_operator_eval(p, lambda_next, gamma_next, inner.x);
    out.next.x_curr = std::move(inner.x);
    return out;
}

StepResult b_zero_step(const IterateState& state, const DiscreteParams& params,
                       const MonotoneOp& a) {
    const std::size_t k = state.k;
    const double lam_k = params.lambda_k(k);
    const double lam_prev = params.lambda_k(k - 1);
    const double gam_k = params.gamma_k(k);
    const double gam_prev = params.gamma_k(k - 1);
    const double xi = params.xi;

    const Vector j_curr = resolvent_eval(a, gam_k, state.x_curr);
    const Vector j_prev = resolvent_eval(a, gam_prev, state.x_prev);

    StepResult out;
    out.y = (1.0 - xi * (1.0 / lam_k - 1.0 / lam_prev)) * state.x_curr +
            (params.alpha_k(k) - xi / lam_prev) * (state.x_curr - state.x_prev) +
            xi * (j_curr / lam_k - j_prev / lam_prev);

    const double lam = params.lambda_k(k + 1);
    const double gam = params.gamma_k(k + 1);
    Vector x_next;
    switch (params.b_zero_variant) {
        case BZeroVariant::kDerived: {
            const Vector j = resolvent_eval(a, gam * (1.0 + 1.0 / lam), out.y);
            x_next = (lam / (lam + 1.0)) * out.y + (1.0 / (lam + 1.0)) * j;
            break;
        }
        case BZeroVariant::kPrinted:
        case BZeroVariant::kPrintedVerbatim: {
            const double denom = lam * lam + gam;
            const double numer = params.b_zero_variant == BZeroVariant::kPrinted ? gam : gam_k;
            const Vector j = resolvent_eval(a, lam + gam / lam, out.y);
            x_next = (lam * lam / denom) * out.y + (numer / denom) * j;
            break;
        }
    }

    const Vector t_next = (x_next - resolvent_eval(a, gam, x_next)) / lam;
    out.backward_residual = (x_next + t_next - out.y).norm();
    out.next.k = k + 1;
    out.next.x_prev = state.x_curr;
    out.next.t_prev = state.t_curr;
    out.next.t_curr = t_next;
    out.next.x_curr = std::move(x_next);
    return out;
}

IterateRun run(const SplitProblem& p, const DiscreteParams& params, const Vector& x0,
               const Vector& x1, StepMethod method) {
    if (method == StepMethod::kBZeroClosedForm && !p.b.is_zero()) {
        throw ParameterError("closed-form B = 0 update requested for a problem with B != 0");
    }
    IterateRun result;
    result.params = params;
    result.records.reserve(params.n_iters);

    IterateState state = initial_iterate(p, params, x0, x1);
    for (std::size_t i = 0; i < params.n_iters; ++i) {
        StepResult s = method == StepMethod::kGeneric ? step(state, params, p)
                                                      : b_zero_step(state, params, p.a);
        IterateRecord rec;
        rec.k = state.k;
        rec.x = state.x_curr;
        rec.y = s.y;
        rec.step_norm = (s.next.x_curr - state.x_curr).norm();
        rec.gamma = params.gamma_k(state.k);
        rec.residual_norm = residual_eval(p, rec.gamma, state.x_curr).norm();
        rec.gap_norm = (state.x_curr - s.y).norm();
        rec.inner_iterations = s.inner_iterations;
        rec.backward_residual = s.backward_residual;
        result.records.push_back(std::move(rec));
        state = std::move(s.next);
    }
    result.x_final = state.x_curr;
    return result;
}

}  // namespace splitdyn
