#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace hiermpc;
using optim::SolveStatus;

namespace {

// scalar regression model from the operation examples: x+ = x + u
struct ScalarRig {
    LtiModel model;
    Mat K;
    Mode mode;
    Mat Q, R, P;
    int M = 5;

    ScalarRig() {
        model.A = Mat::Constant(1, 1, 1.0);
        model.B = Mat::Constant(1, 1, 1.0);
        model.C = Mat::Constant(1, 1, 1.0);
        model.dt = 1.0;
        K = lqr_gain(model.A, model.B, Mat::Identity(1, 1), 0.1 * Mat::Identity(1, 1));
        Zonotope W = Zonotope::box(Vec::Zero(1), Vec::Constant(1, 0.1));
        HPolytope X = HPolytope::box(Vec::Constant(1, -5.0), Vec::Constant(1, 5.0));
        HPolytope U = HPolytope::box(Vec::Constant(1, -2.0), Vec::Constant(1, 2.0));
        mode = prepare_mode("reg", X, U, W, K, model, M, 0.3);
        Q = Mat::Identity(1, 1);
        R = 0.1 * Mat::Identity(1, 1);
        P = Mat::Identity(1, 1);
    }

    TrackerProblem problem(double x, int k, const Mat& xref) const {
        TrackerProblem p;
        p.x = Vec::Constant(1, x);
        p.xref = xref;
        p.mode = &mode;
        p.k = k;
        p.M = M;
        p.Q = Q;
        p.R = R;
        p.P = P;
        p.model = &model;
        return p;
    }
};

Mat constant_ref(double v, int cols) {
    return Mat::Constant(1, cols, v);
}

}  // namespace

TEST_CASE("cyclic horizon wraps") {
    CHECK(cyclic_horizon(0, 10) == 10);
    CHECK(cyclic_horizon(3, 10) == 7);
    CHECK(cyclic_horizon(19, 10) == 1);
    CHECK(cyclic_horizon(20, 10) == 10);
    for (int k = 0; k + 1 <= 100; ++k) {
        int lk = cyclic_horizon(k, 10);
        int lk1 = cyclic_horizon(k + 1, 10);
        if ((k + 1) % 10 == 0) {
            CHECK(lk1 == 10);
        } else {
            CHECK(lk1 == lk - 1);
        }
    }
    CHECK_THROWS_AS(cyclic_horizon(-1, 10), std::invalid_argument);
}

TEST_CASE("qp variable count at horizon one") {
    ScalarRig rig;
    const int k = rig.M - 1;  // L = 1
    TrackerQpLayout lay;
    TrackerProblem p = rig.problem(0.0, k, constant_ref(0.0, 2));
    build_tracking_qp(p, &lay);
    const int n = 1, m = 1;
    Zonotope cd0 = linear_map(rig.model.C, rig.mode.margins[0]);
    const int expected = n * 2 + m + cd0.num_generators() + rig.mode.margins[1].num_generators();
    CHECK(lay.total == expected);
}

TEST_CASE("zero tube leaves the stage set untightened at j=0") {
    ScalarRig rig;
    CHECK(rig.mode.X_stage[0].g[0] == doctest::Approx(rig.mode.X.g[0]));
    CHECK(rig.mode.X_stage[1].g[0] < rig.mode.X.g[0]);
}

TEST_CASE("on-reference step applies zero input") {
    ScalarRig rig;
    TrackerProblem p = rig.problem(0.0, 0, constant_ref(0.0, rig.M + 1));
    TrackerResult r = control_step(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(std::abs(r.u[0]) <= 1e-7);
    CHECK(r.objective <= 1e-10);
}

TEST_CASE("offset inside the margin pulls toward the reference") {
    ScalarRig rig;
    const double offset = 0.05;
    TrackerProblem p = rig.problem(offset, 0, constant_ref(0.0, rig.M + 1));
    TrackerResult r = control_step(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.u[0] < 0.0);

    // KKT oracle: with every inequality inactive, the QP reduces to its
    // equality system
    TrackerQpLayout lay;
    auto qp = build_tracking_qp(p, &lay);
    Mat kkt(qp.H.rows() + qp.A.rows(), qp.H.rows() + qp.A.rows());
    kkt.setZero();
    kkt.topLeftCorner(qp.H.rows(), qp.H.cols()) = qp.H;
    kkt.topRightCorner(qp.H.rows(), qp.A.rows()) = qp.A.transpose();
    kkt.bottomLeftCorner(qp.A.rows(), qp.H.cols()) = qp.A;
    Vec rhs(qp.H.rows() + qp.A.rows());
    rhs.head(qp.H.rows()) = -qp.q;
    rhs.tail(qp.A.rows()) = qp.b;
    Vec sol = kkt.fullPivLu().solve(rhs);
    const double u_direct = sol[lay.v(0, 0)];
    CHECK(r.u[0] == doctest::Approx(u_direct).epsilon(1e-5));
}

TEST_CASE("state outside the contract margin is infeasible at a planning instant") {
    ScalarRig rig;
    const double z0 = rig.mode.margins[0].support(Vec::Constant(1, 1.0));
    TrackerProblem p = rig.problem(z0 + 1.0, 0, constant_ref(0.0, rig.M + 1));
    TrackerResult r = control_step(p);
    CHECK(r.status != SolveStatus::Optimal);
}

TEST_CASE("cost shrinks along the horizon in the nominal case") {
    ScalarRig rig;
    double x = 0.08;  // inside the margin
    double last_cost = 0.0;
    for (int k = 0; k < rig.M; ++k) {
        const int L = cyclic_horizon(k, rig.M);
        TrackerProblem p = rig.problem(x, k, constant_ref(0.0, L + 1));
        TrackerResult r = control_step(p);
        REQUIRE(r.status == SolveStatus::Optimal);
        if (k > 0) {
            CHECK(r.objective <= last_cost + 1e-9);
        }
        last_cost = r.objective;
        x = rig.model.A(0, 0) * x + rig.model.B(0, 0) * r.u[0];  // zero disturbance
    }
}

TEST_CASE("feasibility survives in-bound disturbances across a block") {
    ScalarRig rig;
    testutil::Rng rng(107);
    for (int trial = 0; trial < 5; ++trial) {
        double x = 0.05 * (2.0 * rng.uniform() - 1.0);
        for (int k = 0; k < rig.M; ++k) {
            const int L = cyclic_horizon(k, rig.M);
            TrackerProblem p = rig.problem(x, k, constant_ref(0.0, L + 1));
            TrackerResult r = control_step(p);
            REQUIRE(r.status == SolveStatus::Optimal);
            const double w = 0.1 * (2.0 * rng.uniform() - 1.0);
            x = x + r.u[0] + w;
        }
        // contract met at the next planning instant
        CHECK(zonotope_contains(rig.mode.Z, Vec::Constant(1, x)));
    }
}

TEST_CASE("auxiliary error bound replay") {
    ScalarRig rig;
    TrackerProblem p = rig.problem(0.0, 0, constant_ref(0.0, rig.M + 1));
    TrackerResult r = control_step(p);
    REQUIRE(r.status == SolveStatus::Optimal);

    Mat w_zero = Mat::Zero(1, rig.M);
    CHECK(auxiliary_error_bound_check(r.z, r.v, w_zero, rig.mode, rig.K, rig.model));

    Mat w_worst = Mat::Zero(1, rig.M);
    w_worst(0, 0) = 0.1;  // boundary of W: e(1) sits on the edge of E(1)
    CHECK(auxiliary_error_bound_check(r.z, r.v, w_worst, rig.mode, rig.K, rig.model));

    Mat w_out = Mat::Zero(1, rig.M);
    w_out(0, 0) = 0.25;  // beyond the bound: the guarantee is void
    CHECK_FALSE(auxiliary_error_bound_check(r.z, r.v, w_out, rig.mode, rig.K, rig.model));
}
