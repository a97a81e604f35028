#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hiermpc/vehicle_models.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace hiermpc;

TEST_CASE("quadcopter continuous structure") {
    QuadcopterParams p;
    Mat Ac, Bc, C;
    quadcopter_continuous(p, Ac, Bc, C);
    CHECK(Ac.rows() == 10);
    CHECK(Ac(0, 1) == 1.0);
    CHECK(Ac(1, 1) == doctest::Approx(-p.lambda_x));
    CHECK(Ac(1, 2) == doctest::Approx(-p.gravity));
    CHECK(Ac(5, 6) == doctest::Approx(p.gravity));
    CHECK(Ac(3, 2) == doctest::Approx(-p.a_wx_theta));
    CHECK(Ac(3, 3) == doctest::Approx(-p.a_wx_wx));
    CHECK(Bc(3, 0) == doctest::Approx(p.b_x));
    CHECK(Bc(7, 1) == doctest::Approx(p.b_y));
    CHECK(Bc(9, 2) == doctest::Approx(p.b_z));
    // no cross-block coupling
    CHECK(Ac.block(0, 4, 4, 6).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Ac.block(4, 0, 4, 4).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Ac.block(8, 0, 2, 8).cwiseAbs().maxCoeff() == 0.0);

    Vec x(10);
    x << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10;
    Vec y = C * x;
    CHECK(y[0] == 1.0);
    CHECK(y[1] == 5.0);
    CHECK(y[2] == 9.0);
}

TEST_CASE("quadcopter integrator limit") {
    QuadcopterParams p;
    p.lambda_x = p.lambda_y = p.lambda_z = 0.0;
    p.a_wx_theta = p.a_wx_wx = p.a_wy_phi = p.a_wy_wy = 0.0;
    p.b_x = p.b_y = p.b_z = 1.0;
    Mat Ac, Bc, C;
    quadcopter_continuous(p, Ac, Bc, C);
    // altitude block is a plain double integrator
    const double h = 0.25;
    auto [A, B] = discretize_zoh(Ac, Bc, h);
    CHECK(A(8, 9) == doctest::Approx(h));
    CHECK(B(9, 2) == doctest::Approx(h));
    CHECK(B(8, 2) == doctest::Approx(h * h / 2));
}

TEST_CASE("quadcopter constraints per the printed bounds") {
    Vec lo(3), hi(3);
    lo << -5, -5, 0;
    hi << 5, 5, 3;
    auto [X, U] = quadcopter_constraints(lo, hi);
    Vec x = Vec::Zero(10);
    x[8] = 1.0;  // inside the arena
    x[1] = 1.5;
    CHECK(X.contains(x, 1e-12));
    x[1] = 1.6;
    CHECK_FALSE(X.contains(x, 1e-12));
    Vec u = Vec::Zero(3);
    u[0] = 3.14159265358979323846 / 4.0;
    CHECK(U.contains(u, 1e-12));
    u[0] += 0.01;
    CHECK_FALSE(U.contains(u, 1e-12));
}

TEST_CASE("mode presets") {
    auto presets = mode_presets();
    REQUIRE(presets.size() == 2);
    CHECK(presets[0].name == "fast");
    CHECK(presets[0].horizontal_velocity_limit == doctest::Approx(1.5));
    CHECK(presets[1].name == "slow");
    CHECK(presets[1].horizontal_velocity_limit == doctest::Approx(1.0));
}

TEST_CASE("double integrator bundle") {
    ModelBundle b = double_integrator(1, 1.0, 2);
    Vec x(2);
    x << 0, 1;
    Vec u = Vec::Zero(1);
    Vec next = b.fine.A * x + b.fine.B * u;
    CHECK(next[0] == doctest::Approx(1.0));
    CHECK(next[1] == doctest::Approx(1.0));
    CHECK(b.steady_zero_idx == std::vector<int>{1});
    CHECK(is_controllable(b.fine.A, b.fine.B));

    ModelBundle b3 = double_integrator(3, 0.05, 10);
    CHECK(is_controllable(b3.fine.A, b3.fine.B));
    CHECK(b3.steady_zero_idx.size() == 3);
}

TEST_CASE("block decoupling of the 10-state model") {
    QuadcopterParams p;
    ModelBundle b = quadcopter_model(p, 0.05, 10);
    testutil::Rng rng(91);
    Vec x = testutil::random_vector(rng, 10);
    Vec u = testutil::random_vector(rng, 3);

    Vec full = x;
    for (int k = 0; k < 20; ++k) full = b.fine.A * full + b.fine.B * u;

    // per-block propagation
    auto run_block = [&](int off, int len, int uin) {
        Mat Ab = b.fine.A.block(off, off, len, len);
        Mat Bb = b.fine.B.block(off, uin, len, 1);
        Vec xb = x.segment(off, len);
        for (int k = 0; k < 20; ++k) xb = Ab * xb + Bb * u.segment(uin, 1);
        return xb;
    };
    Vec lon = run_block(0, 4, 0);
    Vec lat = run_block(4, 4, 1);
    Vec alt = run_block(8, 2, 2);
    CHECK((full.segment(0, 4) - lon).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((full.segment(4, 4) - lat).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((full.segment(8, 2) - alt).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("planning pair composes the fine model") {
    QuadcopterParams p;
    ModelBundle b = quadcopter_model(p, 0.05, 10);
    testutil::Rng rng(97);
    Vec x = testutil::random_vector(rng, 10);
    Vec u = testutil::random_vector(rng, 3);
    Vec fine = x;
    for (int k = 0; k < 10; ++k) fine = b.fine.A * fine + b.fine.B * u;
    Vec coarse = b.Ap * x + b.Bp * u;
    CHECK((fine - coarse).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("steady subspace is invariant") {
    QuadcopterParams p;
    ModelBundle b = quadcopter_model(p, 0.05, 10);
    Vec x = Vec::Zero(10);
    x[0] = 2.0;
    x[4] = -1.0;
    x[8] = 1.5;  // nonzero positions, zero velocity/attitude
    Vec next = b.Ap * x;
    CHECK((next - x).cwiseAbs().maxCoeff() <= 1e-10);

    ModelBundle di = double_integrator(2, 0.1, 5);
    Vec xd = Vec::Zero(4);
    xd[0] = 3.0;
    xd[2] = -2.0;
    CHECK((di.Ap * xd - xd).cwiseAbs().maxCoeff() <= 1e-12);
}
