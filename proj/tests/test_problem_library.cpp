#include "catch_amalgamated.hpp"

#include "splitdyn/problem_library.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace splitdyn;
using Catch::Approx;
using testing_support::grid_prox;
using testing_support::vec;

TEST_CASE("quadratic_diag") {
    const auto spec = build_quadratic_diag(vec({1.0, 100.0}));
    CHECK(spec.problem.b.forward(vec({1.0, 1.0})) == vec({1.0, 100.0}));
    CHECK(spec.problem.b.beta == Approx(0.01));
    CHECK(spec.problem.known_zero->isZero(0.0));
    CHECK(spec.objective->g_value(vec({1.0, 1.0})) == Approx(50.5));

    const auto one = build_quadratic_diag(vec({1.0}));
    CHECK(one.problem.b.forward(vec({3.0}))[0] == 3.0);
    CHECK(one.problem.b.beta == 1.0);

    CHECK_THROWS_AS(build_quadratic_diag(vec({1.0, 0.0})), ParameterError);
    CHECK_THROWS_AS(build_quadratic_diag(vec({-2.0})), ParameterError);
}

TEST_CASE("quadratic_diag gradient is 0.01-cocoercive") {
    const auto spec = build_quadratic_diag(vec({1.0, 100.0}));
    const auto pairs = sample_pairs(2, 500, kDefaultSeed);
    const auto report = cocoercivity_certificate(spec.problem.b.forward, 0.01, pairs);
    CHECK(report.passes(1e-10));
    const auto too_big = cocoercivity_certificate(spec.problem.b.forward, 0.011, pairs);
    CHECK_FALSE(too_big.passes(1e-9));
}

TEST_CASE("one-dimensional nonsmooth proximal maps") {
    const auto abs = build_nonsmooth_1d(NonsmoothKind::kAbs);
    CHECK(abs.problem.a.resolvent(1.0, vec({0.5}))[0] == 0.0);

    const auto mixed = build_nonsmooth_1d(NonsmoothKind::kAbsPlusHalfSquare);
    CHECK(mixed.problem.a.resolvent(2.0, vec({5.0}))[0] == Approx(1.0));
    const double grid = grid_prox([](double y) { return std::abs(y) + 0.5 * y * y; }, 2.0, 5.0, -10.0, 10.0);
    CHECK(grid == Approx(1.0).margin(2e-4));

    const auto half = build_nonsmooth_1d(NonsmoothKind::kHalfSquare);
    CHECK(half.objective->f_envelope(1.0, vec({2.0})) == Approx(1.0));
    // envelope by brute-force minimization over y
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 400000; ++i) {
        const double y = -5.0 + 10.0 * i / 400000.0;
        best = std::min(best, 0.5 * y * y + (2.0 - y) * (2.0 - y) / 2.0);
    }
    CHECK(best == Approx(1.0).epsilon(1e-8));
    CHECK(half.problem.b.is_zero());
}

TEST_CASE("property: proximal maps agree with grid search") {
    const std::vector<std::pair<NonsmoothKind, double (*)(double)>> kinds = {
        {NonsmoothKind::kHalfSquare, [](double y) { return 0.5 * y * y; }},
        {NonsmoothKind::kAbs, [](double y) { return std::abs(y); }},
        {NonsmoothKind::kAbsPlusHalfSquare, [](double y) { return std::abs(y) + 0.5 * y * y; }},
    };
    const double resolution = 20.0 / 200000.0;
    for (const auto& [kind, phi] : kinds) {
        const auto spec = build_nonsmooth_1d(kind);
        for (double gamma : {0.1, 0.7, 2.0, 5.0}) {
            for (double x : {-8.3, -1.0, -0.2, 0.0, 0.45, 3.0, 9.9}) {
                const double exact = spec.problem.a.resolvent(gamma, vec({x}))[0];
                const double grid = grid_prox(phi, gamma, x, -10.0, 10.0);
                CAPTURE(to_string(kind), gamma, x);
                CHECK(std::abs(exact - grid) <= resolution);
            }
        }
    }
}

TEST_CASE("property: two-dimensional prox agrees with grid search") {
    // f(y) = |y1| + |y2| separates; brute force over a 2-d grid anyway
    const auto spec = build_composite(NonsmoothKind::kAbs, vec({1.0, 2.0}));
    const int n = 801;
    const double lo = -4.0;
    const double hi = 4.0;
    const double h = (hi - lo) / (n - 1);
    for (const auto& x : {vec({2.5, -0.3}), vec({-3.1, 1.7})}) {
        const double gamma = 0.8;
        double best = std::numeric_limits<double>::infinity();
        Vector arg(2);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const Vector y = vec({lo + h * i, lo + h * j});
                const double v = y.cwiseAbs().sum() + (x - y).squaredNorm() / (2.0 * gamma);
                if (v < best) {
                    best = v;
                    arg = y;
                }
            }
        }
        CHECK((spec.problem.a.resolvent(gamma, x) - arg).cwiseAbs().maxCoeff() <= h);
    }
}

TEST_CASE("rotation_identity") {
    const auto spec = build_rotation_identity();
    const Vector j = spec.problem.a.resolvent(1.5, vec({1.0, 2.0}));
    CHECK(j[0] == Approx(1.230769230769).epsilon(1e-12));
    CHECK(j[1] == Approx(0.153846153846).epsilon(1e-11));
    CHECK(spec.problem.b.beta == 1.0);
    CHECK_FALSE(spec.objective.has_value());

    const Eigen::Matrix2d m = rotation_identity_t_matrix(0.5, 1.5);
    CHECK(m(0, 0) == Approx((2.25 + 1.5) / (0.5 * 3.25)));
    CHECK(m(0, 1) == Approx(0.75 / (0.5 * 3.25)));
    CHECK(m(1, 0) == Approx(-0.75 / (0.5 * 3.25)));
}

TEST_CASE("composite problem") {
    const auto spec = build_composite(NonsmoothKind::kAbs, vec({1.0}));
    CHECK(spec.problem.known_zero->isZero(0.0));
    CHECK(fb_operator_eval(spec.problem, 1.0, 1.0, vec({3.0}))[0] == Approx(3.0));
    CHECK(objective_gap(spec, 0.5, vec({0.0})).value() == 0.0);
    // x = 2, gamma = 0.5: u = 1, prox = 0.5, f + g = 0.5 + 0.125
    CHECK(objective_gap(spec, 0.5, vec({2.0})).value() == Approx(0.625));
}

TEST_CASE("objective minimum is attained at the known zero") {
    for (const auto& name : testing_support::builtin_problem_names()) {
        const auto spec = problem_by_name(name);
        if (!spec.objective) continue;
        const Vector& z = *spec.problem.known_zero;
        const double at_zero = spec.objective->f_value(z) + spec.objective->g_value(z);
        CAPTURE(name);
        CHECK(at_zero == Approx(spec.objective->min_value).margin(1e-15));
        const auto pairs = sample_pairs(spec.problem.dim(), 100, kDefaultSeed);
        for (const auto& [x, unused] : pairs) {
            CHECK(spec.objective->f_value(x) + spec.objective->g_value(x) >= at_zero);
        }
    }
}

TEST_CASE("every built-in known zero has a vanishing residual") {
    for (const auto& name : testing_support::builtin_problem_names()) {
        const auto spec = problem_by_name(name);
        for (double gamma : testing_support::gamma_grid(spec.problem.b.beta, 5)) {
            CAPTURE(name, gamma);
            CHECK(residual_eval(spec.problem, gamma, *spec.problem.known_zero).norm() <= 1e-12);
        }
    }
}

TEST_CASE("problems by name") {
    CHECK(problem_by_name("quadratic_diag:1,100").problem.b.beta == Approx(0.01));
    CHECK(problem_by_name("zero:3").problem.dim() == 3);
    CHECK(problem_by_name("composite:abs:1,2").problem.dim() == 2);
    CHECK(problem_by_name("abs_plus_half_square").name == "abs_plus_half_square");
    CHECK_THROWS_AS(problem_by_name("lasso"), std::invalid_argument);
    CHECK_THROWS_AS(problem_by_name("quadratic_diag:1,x"), std::invalid_argument);
    CHECK_THROWS_AS(problem_by_name("composite:abs"), std::invalid_argument);
    CHECK_THROWS_AS(problem_by_name("zero:0"), DimensionError);
    CHECK_THROWS_AS(problem_by_name("rotation_identity:2"), std::invalid_argument);
}

TEST_CASE("soft threshold") {
    CHECK(soft_threshold(vec({3.0, -0.5, -2.0}), 1.0) == vec({2.0, 0.0, -1.0}));
}

TEST_CASE("envelope gap of the absolute value") {
    const auto spec = build_nonsmooth_1d(NonsmoothKind::kAbs);
    // inside the threshold f_gamma(x) = x^2 / (2 gamma); outside |x| - gamma/2
    CHECK(envelope_gap(spec, 4.0, vec({1.0})).value() == Approx(0.125));
    CHECK(envelope_gap(spec, 1.0, vec({3.0})).value() == Approx(2.5));
    CHECK_FALSE(envelope_gap(build_rotation_identity(), 1.0, vec({1.0, 1.0})).has_value());
}
