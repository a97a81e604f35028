#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hiermpc/linalg.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace hiermpc;

namespace {

Mat naive_power(const Mat& a, int e) {
    Mat r = Mat::Identity(a.rows(), a.cols());
    for (int i = 0; i < e; ++i) r = r * a;
    return r;
}

}  // namespace

TEST_CASE("mat_power identity, hand oracle, zero") {
    Mat I = Mat::Identity(3, 3);
    CHECK((mat_power(I, 5) - I).cwiseAbs().maxCoeff() == 0.0);

    Mat a(2, 2);
    a << 1, 1, 0, 1;
    Mat expect = naive_power(a, 2);
    CHECK(expect(0, 1) == 2.0);
    CHECK((mat_power(a, 2) - expect).cwiseAbs().maxCoeff() == 0.0);

    Mat z = Mat::Zero(2, 2);
    CHECK((mat_power(z, 1) - z).cwiseAbs().maxCoeff() == 0.0);
    CHECK((mat_power(z, 0) - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(mat_power(Mat::Zero(2, 3), 1), std::invalid_argument);
    CHECK_THROWS_AS(mat_power(I, -1), std::invalid_argument);
}

TEST_CASE("mat_power exponent additivity") {
    testutil::Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        Mat a = testutil::random_matrix(rng, 4, 4, -0.5, 0.5);
        for (int i = 0; i <= 5; ++i) {
            for (int j = 0; j <= 5; ++j) {
                Mat lhs = mat_power(a, i + j);
                Mat rhs = mat_power(a, i) * mat_power(a, j);
                CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
            }
        }
    }
}

TEST_CASE("planning_model examples") {
    Mat I = Mat::Identity(2, 2);
    Mat b(2, 1);
    b << 0.3, -0.7;
    auto [ap1, bp1] = planning_model(I, b, 3);
    CHECK((ap1 - I).cwiseAbs().maxCoeff() == 0.0);
    CHECK((bp1 - 3.0 * b).cwiseAbs().maxCoeff() <= 1e-15);

    Mat a(2, 2);
    a << 1, 1, 0, 1;
    Mat b2(2, 1);
    b2 << 0, 1;
    auto [ap2, bp2] = planning_model(a, b2, 2);
    CHECK(ap2(0, 1) == 2.0);
    CHECK(bp2(0, 0) == doctest::Approx(1.0));
    CHECK(bp2(1, 0) == doctest::Approx(2.0));

    Mat as(1, 1), bs(1, 1);
    as << 0.5;
    bs << 1.0;
    auto [ap3, bp3] = planning_model(as, bs, 2);
    CHECK(ap3(0, 0) == doctest::Approx(0.25));
    CHECK(bp3(0, 0) == doctest::Approx(1.5));

    CHECK_THROWS_AS(planning_model(as, bs, 1), std::invalid_argument);
}

TEST_CASE("planning_model equals fine rollout under constant input") {
    testutil::Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Mat a = testutil::random_matrix(rng, 4, 4, -0.6, 0.6);
        Mat b = testutil::random_matrix(rng, 4, 2);
        int M = rng.uniform_int(2, 6);
        auto [ap, bp] = planning_model(a, b, M);
        Vec x = testutil::random_vector(rng, 4);
        Vec u = testutil::random_vector(rng, 2);
        Vec fine = x;
        for (int i = 0; i < M; ++i) fine = a * fine + b * u;
        Vec coarse = ap * x + bp * u;
        CHECK((fine - coarse).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("discretize_zoh closed forms") {
    Mat Ac = Mat::Zero(2, 2);
    Mat Bc = Mat::Identity(2, 2);
    auto [a1, b1] = discretize_zoh(Ac, Bc, 0.05);
    CHECK((a1 - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((b1 - 0.05 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-15);

    Mat Ai(2, 2);
    Ai << 0, 1, 0, 0;
    Mat Bi(2, 1);
    Bi << 0, 1;
    const double h = 0.3;
    auto [a2, b2] = discretize_zoh(Ai, Bi, h);
    CHECK(a2(0, 1) == doctest::Approx(h));
    CHECK(b2(0, 0) == doctest::Approx(h * h / 2));
    CHECK(b2(1, 0) == doctest::Approx(h));

    Mat As(1, 1), Bs(1, 1);
    const double lambda = 1.7;
    As << -lambda;
    Bs << 0.0;
    auto [a3, b3] = discretize_zoh(As, Bs, 0.4);
    CHECK(a3(0, 0) == doctest::Approx(std::exp(-lambda * 0.4)).epsilon(1e-12));
    CHECK(b3(0, 0) == 0.0);
}

TEST_CASE("discretize_zoh composes across half steps") {
    testutil::Rng rng(13);
    for (int trial = 0; trial < 15; ++trial) {
        Mat Ac = testutil::random_matrix(rng, 3, 3);
        Mat Bc = testutil::random_matrix(rng, 3, 2);
        const double dt = rng.uniform(0.05, 0.8);
        auto [af, bf] = discretize_zoh(Ac, Bc, dt);
        auto [ah, bh] = discretize_zoh(Ac, Bc, dt / 2);
        CHECK((ah * ah - af).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((ah * bh + bh - bf).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("lqr_gain scalar closed form") {
    Mat a(1, 1), b(1, 1), q(1, 1), r(1, 1);
    a << 0.5;
    b << 1.0;
    q << 1.0;
    r << 1.0;
    Mat k = lqr_gain(a, b, q, r);
    // fixed point of P^2 - 0.25P - 1 = 0
    const double p = (0.25 + std::sqrt(0.0625 + 4.0)) / 2.0;
    const double k_expect = -0.5 * p / (1.0 + p);
    CHECK(k(0, 0) == doctest::Approx(k_expect).epsilon(1e-9));
    CHECK(std::abs(0.5 + k(0, 0)) == doctest::Approx(0.2344).epsilon(1e-3));

    a << 0.0;
    Mat k0 = lqr_gain(a, b, q, r);
    CHECK(std::abs(k0(0, 0)) <= 1e-12);
}

TEST_CASE("lqr_gain stabilizes random controllable pairs") {
    testutil::Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        int n = rng.uniform_int(2, 4);
        int m = rng.uniform_int(1, 2);
        auto [a, b] = testutil::random_controllable_pair(rng, n, m);
        Mat q = Mat::Identity(n, n);
        Mat r = 0.5 * Mat::Identity(m, m);
        Mat k = lqr_gain(a, b, q, r);
        CHECK(spectral_radius(a + b * k) < 1.0);
    }
}

TEST_CASE("spectral_radius basics") {
    CHECK(spectral_radius(Mat::Identity(3, 3)) == doctest::Approx(1.0));
    CHECK(spectral_radius(Mat::Zero(2, 2)) == doctest::Approx(0.0));
    Mat d(2, 2);
    d << 0.5, 0, 0, 0.25;
    CHECK(spectral_radius(d) == doctest::Approx(0.5));
}

TEST_CASE("controllability rank test") {
    Mat a(2, 2);
    a << 1, 1, 0, 1;
    Mat b(2, 1);
    b << 0, 1;
    CHECK(is_controllable(a, b));
    Mat b_bad(2, 1);
    b_bad << 1, 0;  // integrator chain driven from the wrong end
    CHECK_FALSE(is_controllable(Mat::Identity(2, 2), b_bad));
}
