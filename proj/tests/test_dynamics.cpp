#include "doctest.h"

#include <cmath>

#include "angio/dynamics.hpp"
#include "angio/spectral.hpp"

using namespace angio;

namespace {

ModelParams decoupled(double lambda, double mu) {
    ModelParams p;
    p.lambda = lambda;
    p.mu = mu;
    p.c = 1;
    p.V = SensitivitySpec::truncated_linear(0);
    return p;
}

StepControl fixed(double dt, double t_end, int every = 10) {
    StepControl c;
    c.dt = dt;
    c.t_end = t_end;
    c.output_every = every;
    return c;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("parameter validation") {
    ModelParams p;
    p.c = 0;
    CHECK_THROWS_AS(p.validate(), DomainConfigError);
    p.c = 1;
    p.mu = std::nan("");
    CHECK_THROWS_AS(p.validate(), DomainConfigError);
    StepControl c;
    c.t_end = -1;
    CHECK_THROWS_AS(c.validate(), DomainConfigError);
    c = StepControl{};
    c.dt_safety = 1.5;
    CHECK_THROWS_AS(c.validate(), DomainConfigError);
}

TEST_CASE("decoupled logistic decay: u = 1/(1+t), v = e^-t/(1+t)") {
    const Grid g(1.0, 33);
    std::vector<double> errs;
    for (double dt : {0.01, 0.005, 0.0025}) {
        const auto traj = run(FieldD::constant(g, 1), FieldD::constant(g, 1), decoupled(0, 0), fixed(dt, 1));
        const auto& s = traj.final_snapshot().state;
        CHECK(s.t == 1.0);
        CHECK((s.u.values().array() - s.u[0]).abs().maxCoeff() < 1e-12);
        const double eu = std::abs(s.u[16] - 0.5);
        const double ev = std::abs(s.v[16] - std::exp(-1.0) / 2);
        CHECK(eu < 2 * dt);
        CHECK(ev < 2 * dt);
        errs.push_back(eu);
    }
    CHECK(std::log2(errs[0] / errs[1]) == doctest::Approx(1).epsilon(0.1));
    CHECK(std::log2(errs[1] / errs[2]) == doctest::Approx(1).epsilon(0.1));
}

TEST_CASE("logistic growth to lambda") {
    const Grid g(1.0, 33);
    const double lambda = 1, u0 = 0.5, t = 5;
    const double exact = lambda / (1 + (lambda - u0) / u0 * std::exp(-lambda * t));
    const auto traj = run(FieldD::constant(g, u0), FieldD::constant(g, 0.5), decoupled(lambda, 0), fixed(0.005, t));
    CHECK(std::abs(traj.final_snapshot().state.u[10] - exact) < 0.005);
}

TEST_CASE("u = 0 and v = 0 are preserved exactly by step") {
    const Grid g(1.0, 65);
    ModelParams p;
    p.mu = 0.5;
    const auto bump = initial_profile(g, 0.2, 0.5);
    SimState s{0, FieldD::constant(g, 0), bump};
    for (int k = 0; k < 50; ++k) s = step(s, p, 0.01);
    CHECK(s.u.values().cwiseAbs().maxCoeff() == 0);
    CHECK(s.v.values().minCoeff() > 0);

    SimState z{0, bump, FieldD::constant(g, 0)};
    for (int k = 0; k < 50; ++k) z = step(z, p, 0.01);
    CHECK(z.v.values().cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("with u = 0, v follows the linear problem and decays below threshold") {
    // the Robin flux lifts v near Gamma2 at first; decay sets in after that
    const Grid g(1.0, 65);
    ModelParams p;
    p.mu = 0.5;
    SimState s{0, FieldD::constant(g, 0), FieldD::constant(g, 1)};
    double prev = 0, at10 = 0;
    for (int k = 1; k <= 2000; ++k) {
        s = step(s, p, 0.01);
        const double now = norm(s.v, NormKind::Linf);
        if (k > 500) CHECK(now < prev);
        if (k == 1000) at10 = now;
        prev = now;
    }
    const double alpha = principal_eigen(g, FieldD::constant(g, 1), 0.5).eigenvalue;
    const double rate = std::log(at10 / prev) / 10;
    MESSAGE("rate " << rate << " vs alpha " << alpha);
    CHECK(rate == doctest::Approx(alpha).epsilon(0.02));
}

TEST_CASE("one step balances mass exactly") {
    const Grid g(1.0, 65);
    ModelParams p;
    p.lambda = 0;
    p.mu = 0.8;
    const auto u = initial_profile(g, 0.3, 0.6);
    const auto v = FieldD::from_function(g, [](double x) { return 0.2 + x * x; });
    const SimState s{0, u, v};
    const double dt = 1e-3;
    const auto next = step(s, p, dt);
    const double loss = p.V(u.at_gamma2()) * p.mu * v.at_gamma2() / (1 + v.at_gamma2());
    const double u2 = integrate(g, u.values().array().square());
    const double expected = integrate(u) - dt * (u2 + loss);
    CHECK(std::abs(integrate(next.u) - expected) < 1e-14);
}

TEST_CASE("chemotaxis moves u up the gradient of v") {
    const Grid g(1.0, 65);
    ModelParams p;
    p.mu = 0;
    p.V = SensitivitySpec::linear_saturating();
    const auto u = FieldD::constant(g, 0.5);
    const auto v = FieldD::from_function(g, [](double x) { return 1 + x; });
    const auto next = step(SimState{0, u, v}, p, 1e-3);
    CHECK(next.u.at_gamma2() > next.u.at_gamma1());
}

TEST_CASE("cfl_dt") {
    const Grid g(1.0, 65);
    SUBCASE("no drift: reaction bound only") {
        ModelParams p = decoupled(0.5, 0.5);
        const SimState s{0, FieldD::constant(g, 2), FieldD::from_function(g, [](double x) { return 3 * x; })};
        CHECK(cfl_dt(s, p, 0.4) == doctest::Approx(0.4 * 0.5 / std::max(0.5 + 4, 1 + 2.0)));
    }
    SUBCASE("zero state") {
        ModelParams p;
        p.lambda = 0;
        const SimState s{0, FieldD::constant(g, 0), FieldD::constant(g, 0)};
        CHECK(cfl_dt(s, p, 0.4) == doctest::Approx(0.4 * 0.5));
        CHECK(cfl_dt(s, p, 1.0) == doctest::Approx(0.5));
    }
    SUBCASE("doubling the gradient halves the advective bound") {
        ModelParams p;
        p.mu = 0.5;
        const auto u = FieldD::constant(g, 0.5);
        const SimState a{0, u, FieldD::from_function(g, [](double x) { return 100 * x; })};
        const SimState b{0, u, FieldD::from_function(g, [](double x) { return 200 * x; })};
        const double da = cfl_dt(a, p, 0.4), db = cfl_dt(b, p, 0.4);
        CHECK(da < 0.4 * 0.5 / 1.5);
        CHECK(db / da == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("oversized explicit step is reported") {
    const Grid g(1.0, 33);
    ModelParams p;
    p.lambda = 0;
    const SimState s{0, FieldD::constant(g, 1), FieldD::constant(g, 1)};
    CHECK_THROWS_AS(step(s, p, 10.0), PositivityFailure);
    CHECK_THROWS_AS(step(s, p, -1.0), DomainConfigError);
}

TEST_CASE("run bookkeeping") {
    const Grid g(1.0, 65);
    ModelParams p;
    p.mu = 0.5;
    const auto traj = run(initial_profile(g, 0.5), initial_profile(g, 0.5), p, fixed(0.01, 1.005, 7));
    CHECK(traj.snapshots.front().state.t == 0);
    CHECK(traj.snapshots.back().state.t == 1.005);
    for (std::size_t k = 1; k + 1 < traj.snapshots.size(); ++k) CHECK(traj.snapshots[k].step_index % 7 == 0);
    CHECK(traj.times.size() == traj.step_sizes.size() + 1);
    CHECK(traj.history.size() == traj.times.size());
    double sum = 0;
    for (double dt : traj.step_sizes) {
        CHECK(dt <= 0.01 * (1 + 1e-9));
        sum += dt;
    }
    CHECK(sum == doctest::Approx(1.005).epsilon(1e-12));
    CHECK(traj.min_u_all >= -1e-12);
    CHECK(traj.min_v_all >= -1e-12);
}

TEST_CASE("run rejects bad initial data") {
    const Grid g(1.0, 17);
    ModelParams p;
    CHECK_THROWS_AS(run(FieldD::constant(g, -0.1), FieldD::constant(g, 1), p, fixed(0.01, 1)), DomainConfigError);
    CHECK_THROWS_AS(run(FieldD::constant(g, 0), FieldD::constant(g, 1), p, fixed(0.01, 1)), DomainConfigError);
    CHECK_THROWS_AS(run(FieldD::constant(g, 1), FieldD::constant(Grid(1.0, 9), 1), p, fixed(0.01, 1)),
                    DomainConfigError);
}

TEST_CASE("auto step stays below the cap and the CFL bound") {
    const Grid g(1.0, 129);
    ModelParams p;
    p.mu = 1.2;
    StepControl c;
    c.auto_dt = true;
    c.dt_max = 0.02;
    c.t_end = 2;
    const auto traj = run(initial_profile(g, 0.5, 1.0), initial_profile(g, 0.5, 1.0), p, c);
    CHECK(traj.max_dt <= 0.02);
    CHECK(traj.min_u_all >= -1e-12);
    CHECK(traj.min_v_all >= -1e-12);
}

TEST_CASE("the linear problem dominates v") {
    const Grid g(1.0, 129);
    for (double mu : {0.5, 1.2}) {
        ModelParams p;
        p.mu = mu;
        const auto u0 = initial_profile(g, 0.5, 0.5);
        const auto v0 = initial_profile(g, 0.5);
        const auto traj = run(u0, v0, p, fixed(0.01, 5, 20));
        const auto w = linear_supersolution(traj, v0);
        REQUIRE(w.size() == traj.snapshots.size());
        for (std::size_t k = 0; k < w.size(); ++k)
            CHECK((w[k].values() - traj.snapshots[k].state.v.values()).minCoeff() >= -1e-8);
    }
}

TEST_CASE("two resolutions agree") {
    ModelParams p;
    p.lambda = 1;
    p.mu = 0.5;
    auto final_u = [&](int n, double dt) {
        const Grid g(1.0, n);
        return run(initial_profile(g, 0.5), initial_profile(g, 0.5), p, fixed(dt, 5, 1000)).final_snapshot();
    };
    const auto a = final_u(129, 0.01), b = final_u(257, 0.005);
    CHECK(std::abs(a.diag.linf_u - b.diag.linf_u) < 1e-3);
    CHECK(std::abs(a.diag.linf_v - b.diag.linf_v) < 1e-3);
}

TEST_CASE("initial profile") {
    const Grid g(2.0, 5);
    const auto f = initial_profile(g, 0.5, 1.0);
    CHECK(f.at_gamma1() == doctest::Approx(1.5));
    CHECK(f.at_gamma2() == doctest::Approx(0.5));
    CHECK(f[2] == doctest::Approx(1.0));
}

}
