#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hiermpc/sets.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace hiermpc;

namespace {

Zonotope unit_square() {
    return Zonotope::box(Vec::Zero(2), Vec::Ones(2));
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec vec1(double a) {
    return Vec::Constant(1, a);
}

Mat scalar(double a) {
    return Mat::Constant(1, 1, a);
}

}  // namespace

TEST_CASE("zonotope support values") {
    Zonotope sq = unit_square();
    CHECK(sq.support(vec2(1, 1)) == doctest::Approx(2.0));
    CHECK(sq.support(vec2(1, 0)) == doctest::Approx(1.0));

    Zonotope shifted(vec1(1.0), scalar(1.0));
    CHECK(shifted.support(vec1(1.0)) == doctest::Approx(2.0));
}

TEST_CASE("polytope support and boundedness") {
    HPolytope box = HPolytope::box(vec2(-1, -1), vec2(1, 1));
    CHECK(support_polytope(box, vec2(1, 1)) == doctest::Approx(2.0));

    HPolytope half(Mat::Identity(1, 1), Vec::Ones(1));  // x <= 1
    CHECK(support_polytope(half, vec1(1)) == doctest::Approx(1.0));
    CHECK(std::isinf(support_polytope(half, vec1(-1))));
    CHECK(is_bounded(box));
    CHECK_FALSE(is_bounded(half));
}

TEST_CASE("pontryagin difference") {
    HPolytope big = HPolytope::box(vec2(-2, -2), vec2(2, 2));
    HPolytope diff = pontryagin_diff(big, unit_square());
    CHECK_FALSE(diff.is_empty());
    for (int i = 0; i < diff.num_faces(); ++i) {
        CHECK(diff.g[i] == doctest::Approx(1.0));
    }

    // unnormalized face normal: {2x <= 4} minus the unit interval
    HPolytope row(Mat::Constant(1, 1, 2.0), Vec::Constant(1, 4.0));
    Zonotope seg(Vec::Zero(1), Mat::Constant(1, 1, 1.0));
    HPolytope tight = pontryagin_diff(row, seg);
    CHECK(tight.g[0] == doctest::Approx(2.0));  // 2x <= 2, i.e. x <= 1

    HPolytope small = HPolytope::box(vec1(-1), vec1(1));
    Zonotope wide(Vec::Zero(1), Mat::Constant(1, 1, 2.0));
    CHECK(pontryagin_diff(small, wide).is_empty());
}

TEST_CASE("pontryagin then minkowski re-add stays inside") {
    testutil::Rng rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = rng.uniform_int(1, 3);
        Vec hw = testutil::random_vector(rng, n, 0.5, 2.0);
        Vec sw = testutil::random_vector(rng, n, 0.05, 0.4);
        HPolytope p = HPolytope::box(Vec(-hw), hw);
        Zonotope s = Zonotope::box(Vec::Zero(n), sw);
        HPolytope d = pontryagin_diff(p, s);
        REQUIRE_FALSE(d.is_empty());
        for (const Vec& a : containment_template(s)) {
            double lhs = support_polytope(d, a) + s.support(a);
            CHECK(lhs <= support_polytope(p, a) + 1e-9);
        }
    }
}

TEST_CASE("obstacle enlargement") {
    HPolytope obox = HPolytope::box(vec2(-1, -1), vec2(1, 1));
    Zonotope tube = Zonotope::box(Vec::Zero(2), vec2(0.5, 0.5));
    Vec f = enlarge_obstacle(obox, tube);
    for (int i = 0; i < 4; ++i) {
        CHECK(f[i] == doctest::Approx(1.5));
    }

    Vec fs = enlarge_obstacle(obox, Zonotope::singleton(Vec::Zero(2)));
    CHECK((fs - obox.g).cwiseAbs().maxCoeff() == 0.0);

    Mat tf(3, 2);
    tf << -1, 0, 0, -1, 1, 1;
    Vec tg(3);
    tg << 0, 0, 1;
    HPolytope tri(tf, tg);
    Vec ft = enlarge_obstacle(tri, unit_square());
    CHECK(ft[2] == doctest::Approx(3.0));  // face x+y<=1 grows by h((1,1)) = 2
}

TEST_CASE("obstacle enlargement contains the true sum (2-D oracle)") {
    testutil::Rng rng(67);
    for (int trial = 0; trial < 25; ++trial) {
        Vec olo = testutil::random_vector(rng, 2, -2.0, -0.2);
        Vec ohi = testutil::random_vector(rng, 2, 0.2, 2.0);
        HPolytope O = HPolytope::box(olo, ohi);
        Mat G = testutil::random_matrix(rng, 2, rng.uniform_int(1, 3), -0.5, 0.5);
        Zonotope S(Vec::Zero(2), G);
        Vec f = enlarge_obstacle(O, S);
        // vertices of O plus vertices of S must satisfy E y <= f'
        std::vector<Vec> overts = {olo, ohi, vec2(olo[0], ohi[1]), vec2(ohi[0], olo[1])};
        const int k = S.num_generators();
        for (const Vec& ov : overts) {
            for (long mask = 0; mask < (1L << k); ++mask) {
                Vec xi(k);
                for (int t = 0; t < k; ++t) xi[t] = (mask >> t) & 1 ? 1.0 : -1.0;
                Vec y = ov + G * xi;
                CHECK(((O.F * y - f).array() <= 1e-12).all());
            }
        }
    }
}

TEST_CASE("linear_map basics") {
    Zonotope sq = unit_square();
    Zonotope same = linear_map(Mat::Identity(2, 2), sq);
    CHECK((same.G - sq.G).cwiseAbs().maxCoeff() == 0.0);

    Zonotope zero = linear_map(Mat::Zero(2, 2), sq);
    CHECK(zero.support(vec2(1, 1)) == doctest::Approx(0.0));

    Mat proj(1, 2);
    proj << 1, 0;
    Zonotope seg = linear_map(proj, sq);
    CHECK(seg.support(vec1(1)) == doctest::Approx(1.0));
    CHECK(seg.support(vec1(-1)) == doctest::Approx(1.0));
}

TEST_CASE("error tube scalar recursion") {
    Zonotope w(Vec::Zero(1), scalar(1.0));
    auto tubes = error_tube(scalar(0.5), w, 3);
    REQUIRE(tubes.size() == 4);
    CHECK(tubes[0].support(vec1(1)) == doctest::Approx(0.0));
    CHECK(tubes[1].support(vec1(1)) == doctest::Approx(1.0));
    CHECK(tubes[2].support(vec1(1)) == doctest::Approx(1.5));
    CHECK(tubes[3].support(vec1(1)) == doctest::Approx(1.75));

    auto dead = error_tube(scalar(0.0), w, 3);
    for (int j = 1; j <= 3; ++j) {
        CHECK(dead[j].support(vec1(1)) == doctest::Approx(1.0));
    }
}

TEST_CASE("mrpi scalar geometric series") {
    Zonotope w(Vec::Zero(1), scalar(1.0));
    auto res = mrpi_outer(scalar(0.5), w, 0.125);
    CHECK(res.s == 3);
    CHECK(res.alpha == doctest::Approx(0.125));
    CHECK(res.Z.support(vec1(1)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(res.Z.support(vec1(-1)) == doctest::Approx(2.0).epsilon(1e-12));

    auto dead = mrpi_outer(scalar(0.0), w, 0.5);
    CHECK(dead.s == 1);
    CHECK(dead.Z.support(vec1(1)) == doctest::Approx(1.0));
}

TEST_CASE("mrpi 2-D diagonal oracle") {
    Zonotope w = unit_square();
    auto res = mrpi_outer(0.5 * Mat::Identity(2, 2), w, 0.25);
    CHECK(res.s == 2);
    // per-axis geometric series: (1 + 0.5) / (1 - 0.25) = 2
    CHECK(res.Z.support(vec2(1, 0)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(res.Z.support(vec2(0, 1)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mrpi invariance in random directions") {
    testutil::Rng rng(71);
    for (int sys = 0; sys < 20; ++sys) {
        const int n = rng.uniform_int(2, 4);
        Mat a = testutil::random_stable_matrix(rng, n, rng.uniform(0.3, 0.9));
        Zonotope w = Zonotope::box(Vec::Zero(n), testutil::random_vector(rng, n, 0.1, 1.0));
        auto res = mrpi_outer(a, w, 0.2);
        for (int d = 0; d < 100; ++d) {
            Vec dir = testutil::random_vector(rng, n);
            double lhs = linear_map(a, res.Z).support(dir) + w.support(dir);
            CHECK(lhs <= res.Z.support(dir) + 1e-9);
        }
    }
}

TEST_CASE("tube monotonicity and containment in Z") {
    testutil::Rng rng(73);
    for (int sys = 0; sys < 10; ++sys) {
        const int n = rng.uniform_int(2, 4);
        Mat a = testutil::random_stable_matrix(rng, n, 0.7);
        Zonotope w = Zonotope::box(Vec::Zero(n), testutil::random_vector(rng, n, 0.1, 1.0));
        auto res = mrpi_outer(a, w, 0.15);
        auto tubes = error_tube(a, w, 10);
        std::vector<Vec> dirs = containment_template(w);
        while (dirs.size() < 32) {
            dirs.push_back(testutil::random_vector(rng, n));
        }
        for (const Vec& d : dirs) {
            double hz = res.Z.support(d);
            for (int j = 0; j + 1 <= 10; ++j) {
                CHECK(tubes[j].support(d) <= tubes[j + 1].support(d) + 1e-9);
                CHECK(tubes[j].support(d) <= hz + 1e-9);
            }
            CHECK(tubes[10].support(d) <= hz + 1e-9);
        }
    }
}

TEST_CASE("tube margin scalar values") {
    Mat a = scalar(0.5);
    Zonotope w(Vec::Zero(1), scalar(1.0));
    const int s = 3;
    const double alpha = 0.125;
    CHECK(tube_margin(a, w, s, alpha, 0).support(vec1(1)) == doctest::Approx(2.0));
    CHECK(tube_margin(a, w, s, alpha, 1).support(vec1(1)) == doctest::Approx(1.0));
    CHECK(tube_margin(a, w, s, alpha, 3).support(vec1(1)) == doctest::Approx(0.25));
    CHECK_THROWS_AS(tube_margin(a, w, s, alpha, -1), std::invalid_argument);
}

TEST_CASE("margin decomposition: E(j) + D_j fills Z exactly up to s") {
    testutil::Rng rng(79);
    for (int sys = 0; sys < 10; ++sys) {
        const int n = rng.uniform_int(1, 3);
        Mat a = testutil::random_stable_matrix(rng, n, 0.6);
        Zonotope w = Zonotope::box(Vec::Zero(n), testutil::random_vector(rng, n, 0.2, 1.0));
        auto res = mrpi_outer(a, w, 0.3);
        auto tubes = error_tube(a, w, res.s + 4);
        for (const Vec& d : containment_template(w)) {
            for (int j = 0; j <= res.s + 4; ++j) {
                Zonotope dj = tube_margin(a, w, res.s, res.alpha, j);
                double sum = tubes[j].support(d) + dj.support(d);
                double hz = res.Z.support(d);
                if (j <= res.s) {
                    CHECK(sum == doctest::Approx(hz).epsilon(1e-9));
                } else {
                    CHECK(sum <= hz + 1e-9);
                }
            }
        }
    }
}

TEST_CASE("margin telescoping under the error recursion") {
    // D_j + A^{j-1} W inside D_{j-1}: the shrinking-horizon shift stays feasible
    testutil::Rng rng(83);
    for (int sys = 0; sys < 8; ++sys) {
        const int n = rng.uniform_int(1, 3);
        Mat a = testutil::random_stable_matrix(rng, n, 0.55);
        Zonotope w = Zonotope::box(Vec::Zero(n), testutil::random_vector(rng, n, 0.2, 1.0));
        auto res = mrpi_outer(a, w, 0.3);
        for (int j = 1; j <= res.s + 5; ++j) {
            Zonotope dj = tube_margin(a, w, res.s, res.alpha, j);
            Zonotope dprev = tube_margin(a, w, res.s, res.alpha, j - 1);
            Zonotope shifted = minkowski_sum(dj, linear_map(mat_power(a, j - 1), w));
            for (const Vec& d : containment_template(w)) {
                CHECK(shifted.support(d) <= dprev.support(d) + 1e-9);
            }
        }
    }
}

TEST_CASE("zonotope membership") {
    Zonotope z(Vec::Zero(1), scalar(1.0));
    CHECK(zonotope_contains(z, vec1(0.0)));
    CHECK(zonotope_contains(z, vec1(1.0)));
    CHECK_FALSE(zonotope_contains(z, vec1(1.0 + 1e-6)));

    Zonotope sq = unit_square();
    CHECK(zonotope_contains(sq, vec2(1.0, -1.0)));
    CHECK_FALSE(zonotope_contains(sq, vec2(1.1, 0.0)));

    Zonotope pt = Zonotope::singleton(vec2(0.5, 0.5));
    CHECK(zonotope_contains(pt, vec2(0.5, 0.5)));
    CHECK_FALSE(zonotope_contains(pt, vec2(0.5, 0.6)));
}

TEST_CASE("polytope emptiness cache and membership") {
    HPolytope box = HPolytope::box(vec2(-1, -1), vec2(1, 1));
    CHECK_FALSE(box.is_empty());
    CHECK(box.contains(vec2(1.0, 1.0)));
    CHECK_FALSE(box.contains(vec2(1.1, 0.0)));

    Mat f(2, 1);
    f << 1, -1;
    Vec g(2);
    g << -1, 0;  // x <= -1 and x >= 0
    HPolytope empty(f, g);
    CHECK(empty.is_empty());
    CHECK(empty.is_empty());  // cached path
}
