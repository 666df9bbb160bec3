#include "catch_amalgamated.hpp"

#include "splitdyn/dynamics.hpp"
#include "splitdyn/problem_library.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace splitdyn;
using Catch::Approx;
using testing_support::vec;

namespace {

ScheduleSet rotation_schedules(double xi) {
    return ScheduleSet{DampingParams{7.0, xi, 1.0}, LambdaSchedule{0.056}, GammaSchedule::constant(1.5)};
}

ScheduleSet free_schedules(double alpha, double xi) {
    return ScheduleSet{DampingParams{alpha, xi, 1.0}, LambdaSchedule{1.0}, GammaSchedule::constant(1.0)};
}

double free_solution(double t, double x0, double u0, double t0, double alpha) {
    return x0 + u0 * t0 / (alpha - 1.0) * (1.0 - std::pow(t0 / t, alpha - 1.0));
}

}  // namespace

TEST_CASE("vector field at equilibrium") {
    const VectorField field(rotation_schedules(0.0), build_rotation_identity().problem, Mode::kGeneral);
    for (double t : {1.0, 3.0, 50.0}) {
        const auto d = field(t, PhaseState{t, vec({0.0, 0.0}), vec({0.0, 0.0})});
        CHECK(d.dx.isZero(0.0));
        CHECK(d.dy.isZero(0.0));
    }
}

TEST_CASE("constant solution at a nonzero zero with matching y") {
    // on A = B = 0 every point is a zero
    const double alpha = 3.0;
    const double xi = 0.4;
    const VectorField field(free_schedules(alpha, xi), build_zero(2).problem, Mode::kGeneral);
    const Vector xbar = vec({1.0, -2.0});
    for (double t : {1.0, 2.0, 9.0}) {
        const Vector y = (1.0 - alpha * xi / t) * xbar;
        const PhaseState z{t, xbar, y};
        CHECK(recover_velocity(field, z).norm() <= 1e-15);
        const auto d = field(t, z);
        CHECK(d.dx.norm() <= 1e-15);
        CHECK((d.dy - alpha * xi / (t * t) * xbar).norm() <= 1e-15);
    }
}

TEST_CASE("vector field agrees with a finite difference of a short integration") {
    const VectorField field(rotation_schedules(0.8), build_rotation_identity().problem, Mode::kGeneral);
    const PhaseState z0 = initial_phase(field, vec({1.0, 2.0}), vec({-1.0, -1.0}));
    const double h = 1e-6;
    StepperConfig cfg;
    cfg.step = h;
    cfg.sample_every = 1;
    const Trajectory traj = integrate(field, z0, 1.0 + 2.0 * h, cfg);
    REQUIRE(traj.samples.size() == 3);
    const Vector fd = (traj.samples[2].x - traj.samples[0].x) / (2.0 * h);
    const auto d = field(1.0, z0);
    CHECK((fd - d.dx).norm() <= 1e-4 * d.dx.norm());
    // recovered velocity at the midpoint versus central difference
    const Vector central = (traj.samples[2].x - traj.samples[0].x) / (2.0 * h);
    CHECK((traj.samples[1].xdot - central).norm() <= 1e-6 * central.norm());
}

TEST_CASE("initial phase mapping") {
    SECTION("xi = 0 passes the velocity through") {
        const auto spec = build_quadratic_diag(vec({1.0, 100.0}));
        const ScheduleSet set{DampingParams{20.0, 0.0, 1.0}, LambdaSchedule{0.00555},
                              GammaSchedule::constant(0.01998)};
        const VectorField field(set, spec.problem, Mode::kAZero);
        const PhaseState z = initial_phase(field, vec({1.0, 1.0}), vec({1.0, 1.0}));
        CHECK(z.t == 1.0);
        CHECK(z.x == vec({1.0, 1.0}));
        CHECK(z.y == vec({1.0, 1.0}));
    }
    SECTION("xi > 0 round-trips to u0") {
        const auto spec = build_quadratic_diag(vec({1.0, 100.0}));
        const ScheduleSet set{DampingParams{20.0, 0.2, 1.0}, LambdaSchedule{0.00555},
                              GammaSchedule::constant(0.01998)};
        const VectorField field(set, spec.problem, Mode::kAZero);
        const Vector u0 = vec({1.0, 1.0});
        const PhaseState z = initial_phase(field, vec({1.0, 1.0}), u0);
        CHECK((recover_velocity(field, z) - u0).norm() <= 1e-12);
        // y0 = -xi (u0 + xi T(x0) - (1/xi - alpha/t0) x0) evaluated independently
        const Vector tx = spec.problem.b.forward(vec({1.0, 1.0})) * 0.01998 / 0.00555;
        const Vector y0 = -0.2 * (u0 + 0.2 * tx - (5.0 - 20.0) * vec({1.0, 1.0}));
        CHECK((z.y - y0).norm() <= 1e-10 * y0.norm());
    }
    SECTION("start at a zero with zero velocity") {
        const double alpha = 7.0;
        const double xi = 0.8;
        const VectorField field(free_schedules(alpha, xi), build_zero(2).problem, Mode::kGeneral);
        const Vector xbar = vec({0.5, 3.0});
        const PhaseState z = initial_phase(field, xbar, vec({0.0, 0.0}));
        CHECK((z.y - xi * (1.0 / xi - alpha) * xbar).norm() <= 1e-14);
        CHECK(recover_velocity(field, z).norm() <= 1e-14);
    }
    SECTION("dimension mismatch") {
        const VectorField field(rotation_schedules(0.0), build_rotation_identity().problem,
                                Mode::kGeneral);
        CHECK_THROWS_AS(initial_phase(field, vec({1.0}), vec({1.0, 1.0})), DimensionError);
    }
}

TEST_CASE("construction validates the schedules") {
    const auto rot = build_rotation_identity();
    const ScheduleSet bad{DampingParams{1.0, 0.0, 1.0}, LambdaSchedule{1.0}, GammaSchedule::constant(1.0)};
    try {
        VectorField field(bad, rot.problem, Mode::kGeneral);
        FAIL("expected ConstructionError");
    } catch (const ConstructionError& e) {
        CHECK_FALSE(e.report().passed);
        CHECK(std::string(e.what()).find("alpha > 1") != std::string::npos);
    }
    CHECK_THROWS_AS(VectorField(rotation_schedules(0.0), rot.problem, Mode::kBZero), ConstructionError);
    const ScheduleSet big_gamma{DampingParams{7.0, 0.0, 1.0}, LambdaSchedule{1.0},
                                GammaSchedule::constant(2.0)};
    CHECK_THROWS_AS(VectorField(big_gamma, rot.problem, Mode::kGeneral), ConstructionError);
}

TEST_CASE("free motion matches the closed form") {
    const double alpha = 3.0;
    const auto spec = build_zero(1);
    const VectorField field(free_schedules(alpha, 0.0), spec.problem, Mode::kGeneral);
    const PhaseState z0 = initial_phase(field, vec({2.0}), vec({1.5}));
    StepperConfig cfg;
    cfg.step = 1e-3;
    const Trajectory traj = integrate(field, z0, 10.0, cfg);
    CHECK(traj.samples.back().t == 10.0);
    CHECK(std::abs(traj.samples.back().x[0] - free_solution(10.0, 2.0, 1.5, 1.0, alpha)) <= 1e-8);

    SECTION("same answer through the xi > 0 phase variables") {
        const VectorField hess(free_schedules(alpha, 0.5), spec.problem, Mode::kGeneral);
        const Trajectory t2 = integrate(hess, initial_phase(hess, vec({2.0}), vec({1.5})), 10.0, cfg);
        CHECK(std::abs(t2.samples.back().x[0] - free_solution(10.0, 2.0, 1.5, 1.0, alpha)) <= 1e-8);
    }
}

TEST_CASE("property: fourth-order convergence on the free motion") {
    const double alpha = 3.0;
    const VectorField field(free_schedules(alpha, 0.0), build_zero(1).problem, Mode::kGeneral);
    const PhaseState z0 = initial_phase(field, vec({0.0}), vec({1.0}));
    const double exact = free_solution(10.0, 0.0, 1.0, 1.0, alpha);
    std::vector<double> errors;
    for (double h : {0.2, 0.1, 0.05}) {
        StepperConfig cfg;
        cfg.step = h;
        errors.push_back(std::abs(integrate(field, z0, 10.0, cfg).samples.back().x[0] - exact));
    }
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        const double ratio = errors[i] / errors[i + 1];
        CAPTURE(errors[i], errors[i + 1]);
        CHECK(ratio == Approx(16.0).epsilon(0.2));
    }
}

TEST_CASE("trajectory sampling") {
    const VectorField field(rotation_schedules(0.0), build_rotation_identity().problem, Mode::kGeneral);
    const Vector x0 = vec({1.0, 2.0});
    const Vector u0 = vec({-1.0, -1.0});
    const Trajectory traj = integrate(field, initial_phase(field, x0, u0), 50.0);
    REQUIRE(traj.samples.size() == 500);
    CHECK(traj.samples.front().t == 1.0);
    CHECK(traj.samples.front().x == x0);
    CHECK(traj.samples.front().xdot == u0);
    CHECK(traj.samples.back().t == 50.0);
    CHECK(traj.step <= 1e-2);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        CHECK(traj.samples[i].t > traj.samples[i - 1].t);
    }
    SECTION("residual = (lambda/gamma) T at every sample") {
        for (const auto& s : traj.samples) {
            const double ratio = 0.056 * s.t * s.t / 1.5;
            CHECK((s.residual - ratio * s.t_op).norm() <= 1e-9 * std::max(s.residual.norm(), 1e-300));
            CHECK(s.speed == s.xdot.norm());
        }
    }
}

TEST_CASE("step plan defaults") {
    const StepPlan plan = plan_steps(1.0, 50.0, StepperConfig{});
    CHECK(plan.step <= 1e-2);
    CHECK(plan.n_steps % 499 == 0);
    CHECK(plan.sample_every * 499 == plan.n_steps);
    CHECK(plan.step * static_cast<double>(plan.n_steps) == Approx(49.0));

    const StepPlan short_run = plan_steps(1.0, 2.0, StepperConfig{});
    CHECK(short_run.step <= 1e-3 + 1e-15);
    CHECK_THROWS_AS(plan_steps(2.0, 2.0, StepperConfig{}), ParameterError);
}

TEST_CASE("step halving changes the final state by at most 1e-6") {
    for (double xi : {0.0, 0.8}) {
        const VectorField field(rotation_schedules(xi), build_rotation_identity().problem,
                                Mode::kGeneral);
        const PhaseState z0 = initial_phase(field, vec({1.0, 2.0}), vec({-1.0, -1.0}));
        StepperConfig coarse;
        StepperConfig fine;
        fine.step = plan_steps(1.0, 100.0, coarse).step / 2.0;
        const Vector a = integrate(field, z0, 100.0, coarse).samples.back().x;
        const Vector b = integrate(field, z0, 100.0, fine).samples.back().x;
        CAPTURE(xi, (a - b).norm());
        CHECK((a - b).norm() <= 1e-6);
    }
}

TEST_CASE("equilibrium stays put") {
    const VectorField field(rotation_schedules(0.8), build_rotation_identity().problem, Mode::kGeneral);
    const Trajectory traj = integrate(field, initial_phase(field, vec({0.0, 0.0}), vec({0.0, 0.0})), 10.0);
    for (const auto& s : traj.samples) CHECK(s.x.norm() <= 1e-10);
}

TEST_CASE("divergence guard names the time") {
    const VectorField field(free_schedules(3.0, 0.0), build_zero(1).problem, Mode::kGeneral);
    StepperConfig cfg;
    cfg.divergence_bound = 3.0;
    try {
        (void)integrate(field, initial_phase(field, vec({1.0}), vec({5.0})), 10.0, cfg);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.time() > 1.0);
        CHECK(e.time() < 10.0);
        CHECK(std::string(e.what()).find("diverged at t =") != std::string::npos);
    }
}
