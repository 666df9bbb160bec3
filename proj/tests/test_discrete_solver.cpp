#include "catch_amalgamated.hpp"

#include "splitdyn/discrete_solver.hpp"
#include "splitdyn/problem_library.hpp"
#include "test_support.hpp"

#include <Eigen/LU>

#include <cmath>
#include <random>

using namespace splitdyn;
using Catch::Approx;
using testing_support::vec;

namespace {

bool has_violation(const ValidationReport& r, const std::string& condition) {
    for (const auto& v : r.violations) {
        if (v.condition == condition) return true;
    }
    return false;
}

DiscreteParams rotation_params(double xi, double lambda0, std::size_t n) {
    DiscreteParams params;
    params.alpha = 7.0;
    params.xi = xi;
    params.lambda0 = lambda0;
    params.gamma = GammaSchedule::constant(1.5);
    params.n_iters = n;
    return params;
}

DiscreteParams b_zero_params() {
    DiscreteParams params;
    params.alpha = 3.0;
    params.xi = 0.5;
    params.lambda0 = 1.1;
    params.gamma = GammaSchedule::polynomial(2.0);
    params.n_iters = 200;
    return params;
}

}  // namespace

TEST_CASE("extrapolation") {
    const auto rot = build_rotation_identity();
    SECTION("at a zero the extrapolated point is the zero") {
        const auto params = rotation_params(0.8, 0.056, 10);
        const auto state = initial_iterate(rot.problem, params, vec({0.0, 0.0}), vec({0.0, 0.0}));
        CHECK(extrapolate(state, params).isZero(0.0));
    }
    SECTION("momentum vanishes at k = alpha") {
        DiscreteParams params;
        params.alpha = 2.0;
        IterateState state;
        state.k = 2;
        state.x_prev = vec({1.0, 0.0});
        state.x_curr = vec({2.0, 0.0});
        state.t_prev = vec({0.0, 0.0});
        state.t_curr = vec({0.0, 0.0});
        CHECK(extrapolate(state, params) == vec({2.0, 0.0}));
    }
    SECTION("random states against the formula") {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> n01;
        const auto draw = [&] { return vec({n01(rng), n01(rng), n01(rng)}); };
        DiscreteParams params;
        params.alpha = 4.5;
        params.xi = 0.3;
        for (std::size_t k = 1; k < 40; k += 3) {
            IterateState s{k, draw(), draw(), draw(), draw()};
            const double ak = 1.0 - 4.5 / static_cast<double>(k);
            const Vector expected = s.x_curr + ak * (s.x_curr - s.x_prev) - 0.3 * (s.t_curr - s.t_prev);
            CHECK((extrapolate(s, params) - expected).norm() <= 1e-14 * (1.0 + expected.norm()));
        }
    }
}

TEST_CASE("inner solver on a linear operator") {
    const auto spec = build_quadratic_diag(vec({1.0}));
    for (double lambda : {0.5, 1.0, 4.4, 110.0}) {
        for (double gamma : {0.3, 1.0, 1.9}) {
            for (double y : {-3.0, 0.7, 12.0}) {
                const auto res = backward_resolve(spec.problem, lambda, gamma, vec({y}));
                CAPTURE(lambda, gamma, y);
                CHECK(std::abs(res.x[0] - y / (1.0 + gamma / lambda)) <= 1e-12 * (1.0 + std::abs(y)));
                CHECK(res.residual <= 1e-12);
            }
        }
    }
    SECTION("geometric iteration count") {
        const auto res = backward_resolve(spec.problem, 110.0, 1.0, vec({1.0}));
        const auto bound = static_cast<std::size_t>(std::ceil(std::log(1e-12) / std::log(2.0 / 110.0)));
        CHECK(bound == 7);
        CHECK(res.iterations <= bound);
    }
}

TEST_CASE("inner solver falls back to damping when 2/lambda >= 1") {
    const auto rot = build_rotation_identity();
    const Vector y = vec({1.0, -2.0});
    const auto res = backward_resolve(rot.problem, 0.5, 1.5, y);
    CHECK(res.residual <= 1e-12);
    CHECK(res.iterations > 7);
    const Vector check = res.x + fb_operator_eval(rot.problem, 0.5, 1.5, res.x) - y;
    CHECK(check.norm() <= 1e-12);
    // the linear system it solves
    const Eigen::Matrix2d m = Eigen::Matrix2d::Identity() + rotation_identity_t_matrix(0.5, 1.5);
    CHECK((res.x - m.inverse() * y).norm() <= 1e-11);
}

TEST_CASE("inner solver reports its achieved residual on failure") {
    const auto rot = build_rotation_identity();
    try {
        (void)backward_resolve(rot.problem, 0.5, 1.5, vec({1.0, -2.0}), InnerSolverConfig{1e-12, 2});
        FAIL("expected InnerSolveError");
    } catch (const InnerSolveError& e) {
        CHECK(e.achieved_residual() > 1e-12);
        CHECK(std::isfinite(e.achieved_residual()));
    }
    CHECK_THROWS_AS(backward_resolve(rot.problem, 0.0, 1.0, vec({1.0, 1.0})), ParameterError);
}

TEST_CASE("the zero is a fixed point of the scheme") {
    const auto rot = build_rotation_identity();
    const auto params = rotation_params(0.8, 0.16, 50);
    const auto zero = vec({0.0, 0.0});
    CHECK(backward_resolve(rot.problem, 5.0, 1.5, zero).iterations <= 1);
    const IterateRun out = run(rot.problem, params, zero, zero);
    for (const auto& r : out.records) {
        CHECK(r.x.isZero(0.0));
        CHECK(r.step_times_k() == 0.0);
        CHECK(r.residual_times_gamma() == 0.0);
        CHECK(r.gap_times_k() == 0.0);
    }
}

TEST_CASE("cached operator values stay consistent") {
    const auto rot = build_rotation_identity();
    const auto params = rotation_params(0.8, 0.16, 0);
    IterateState state = initial_iterate(rot.problem, params, vec({1.0, 2.0}), vec({0.0, 1.0}));
    for (int i = 0; i < 30; ++i) {
        state = step(state, params, rot.problem).next;
        const Vector fresh_curr =
            fb_operator_eval(rot.problem, params.lambda_k(state.k), params.gamma_k(state.k), state.x_curr);
        const Vector fresh_prev = fb_operator_eval(rot.problem, params.lambda_k(state.k - 1),
                                                   params.gamma_k(state.k - 1), state.x_prev);
        CHECK((state.t_curr - fresh_curr).norm() <= 1e-12);
        CHECK((state.t_prev - fresh_prev).norm() <= 1e-12);
    }
    CHECK(state.k == 31);
}

TEST_CASE("generic and closed-form B = 0 steps agree") {
    auto params = b_zero_params();
    for (const char* name : {"half_square", "abs", "abs_plus_half_square", "zero:2"}) {
        const auto spec = problem_by_name(name);
        const Eigen::Index d = spec.problem.dim();
        const Vector x0 = Vector::Constant(d, 5.0);
        const Vector x1 = Vector::Constant(d, 4.0);
        const IterateRun generic = run(spec.problem, params, x0, x1, StepMethod::kGeneric);
        const IterateRun closed = run(spec.problem, params, x0, x1, StepMethod::kBZeroClosedForm);
        double worst = 0.0;
        for (std::size_t i = 0; i < generic.records.size(); ++i) {
            worst = std::max(worst, (generic.records[i].x - closed.records[i].x).norm());
        }
        worst = std::max(worst, (generic.x_final - closed.x_final).norm());
        CAPTURE(name, worst);
        CHECK(worst <= 1e-8);
        for (const auto& r : closed.records) CHECK(r.backward_residual <= 1e-10);
    }
    const auto rot = build_rotation_identity();
    CHECK_THROWS_AS(run(rot.problem, rotation_params(0.0, 0.056, 5), vec({1.0, 1.0}), vec({1.0, 1.0}),
                        StepMethod::kBZeroClosedForm),
                    ParameterError);
}

TEST_CASE("printed closed-form variants") {
    const auto spec = build_nonsmooth_1d(NonsmoothKind::kHalfSquare);
    auto params = b_zero_params();
    const auto state = initial_iterate(spec.problem, params, vec({5.0}), vec({4.0}));
    const auto derived = b_zero_step(state, params, spec.problem.a);
    params.b_zero_variant = BZeroVariant::kPrinted;
    const auto printed = b_zero_step(state, params, spec.problem.a);
    CHECK(derived.y == printed.y);
    CHECK(std::abs(derived.next.x_curr[0] - printed.next.x_curr[0]) > 1e-6);
    CHECK(printed.backward_residual > derived.backward_residual);

    SECTION("the printed combination still fixes a zero") {
        const auto at_zero = initial_iterate(spec.problem, params, vec({0.0}), vec({0.0}));
        for (BZeroVariant v : {BZeroVariant::kPrinted, BZeroVariant::kPrintedVerbatim}) {
            params.b_zero_variant = v;
            CHECK(b_zero_step(at_zero, params, spec.problem.a).next.x_curr[0] == 0.0);
        }
    }
    SECTION("names round-trip") {
        for (BZeroVariant v : {BZeroVariant::kDerived, BZeroVariant::kPrinted, BZeroVariant::kPrintedVerbatim}) {
            CHECK(parse_b_zero_variant(to_string(v)) == v);
        }
        CHECK_THROWS_AS(parse_b_zero_variant("exact"), std::invalid_argument);
    }
}

TEST_CASE("rotation run converges with bounded proxies") {
    const auto rot = build_rotation_identity();
    const auto params = rotation_params(0.0, 0.056, 1000);
    const IterateRun out = run(rot.problem, params, vec({1.0, 2.0}), vec({0.0, 1.0}));
    REQUIRE(out.records.size() == 1000);
    CHECK(out.records.front().k == 1);
    CHECK(out.records.back().k == 1000);
    const auto& ref = out.records[99];
    REQUIRE(ref.k == 100);
    double max_backward = 0.0;
    for (std::size_t i = 99; i < out.records.size(); ++i) {
        CHECK(out.records[i].step_times_k() <= 2.0 * ref.step_times_k());
        CHECK(out.records[i].gap_times_k() <= 2.0 * ref.gap_times_k());
        max_backward = std::max(max_backward, out.records[i].backward_residual);
    }
    CHECK(max_backward <= 1e-10);
    CHECK(out.records.back().x.norm() <= 1e-4);
    CHECK(out.records.back().residual_times_gamma() <= ref.residual_times_gamma());
}

TEST_CASE("rotation run with Hessian damping") {
    const auto rot = build_rotation_identity();
    const auto params = rotation_params(0.8, 0.16, 1000);
    REQUIRE(validate_discrete(params, 1.0, Mode::kGeneral).passed);
    const IterateRun out = run(rot.problem, params, vec({1.0, 2.0}), vec({0.0, 1.0}));
    CHECK(out.records.back().x.norm() < out.records[99].x.norm());
    CHECK(out.records.back().x.norm() <= 1e-2);
}

TEST_CASE("discrete hypotheses") {
    CHECK(validate_discrete(rotation_params(0.0, 0.056, 10), 1.0, Mode::kGeneral).passed);
    const auto too_small = validate_discrete(rotation_params(0.8, 0.1, 10), 1.0, Mode::kGeneral);
    CHECK(has_violation(too_small, "lambda0 > (4 xi + 2)/(alpha-1)^2"));

    CHECK(validate_discrete(b_zero_params(), std::numeric_limits<double>::infinity(), Mode::kBZero).passed);
    auto bz = b_zero_params();
    bz.lambda0 = 0.5;
    CHECK(has_violation(validate_discrete(bz, std::numeric_limits<double>::infinity(), Mode::kBZero),
                        "lambda0 > (2 xi + 1)/(alpha-1)^2"));

    auto big = rotation_params(0.0, 0.056, 10);
    big.gamma = GammaSchedule::constant(2.0);
    CHECK(has_violation(validate_discrete(big, 1.0, Mode::kGeneral), "sup gamma_k < 2 beta"));

    auto vanishing = rotation_params(0.0, 0.056, 10);
    vanishing.gamma = GammaSchedule::polynomial(-1.0);
    CHECK(has_violation(validate_discrete(vanishing, 1.0, Mode::kGeneral), "inf gamma_k > 0"));

    auto basic = rotation_params(0.0, 0.056, 0);
    basic.alpha = 1.0;
    const auto r = validate_discrete(basic, 1.0, Mode::kGeneral);
    CHECK(has_violation(r, "alpha > 1"));
    CHECK(has_violation(r, "n_iters > 0"));
    CHECK(r.violations.size() == 2);
}

TEST_CASE("schedules at index zero reuse index one") {
    const auto params = rotation_params(0.0, 0.5, 1);
    CHECK(params.lambda_k(0) == params.lambda_k(1));
    CHECK(params.lambda_k(3) == Approx(4.5));
    CHECK(params.alpha_k(7) == 0.0);
    auto poly = b_zero_params();
    CHECK(poly.gamma_k(0) == 1.0);
    CHECK(poly.gamma_k(10) == Approx(100.0));
}
