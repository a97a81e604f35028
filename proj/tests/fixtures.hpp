#pragma once

#include "hiermpc/planner.hpp"
#include "hiermpc/sim.hpp"
#include "hiermpc/vehicle_models.hpp"

#include <vector>

namespace fixtures {

using namespace hiermpc;

// Mode constraint boxes for a double integrator: arena on positions,
// symmetric bounds on velocities and inputs.
inline HPolytope di_state_box(int dims, double pos_lo, double pos_hi, double vmax) {
    const int n = 2 * dims;
    Mat F = Mat::Zero(4 * dims, n);
    Vec g(4 * dims);
    int r = 0;
    for (int d = 0; d < dims; ++d) {
        F(r, 2 * d) = 1.0;
        g[r++] = pos_hi;
        F(r, 2 * d) = -1.0;
        g[r++] = -pos_lo;
        F(r, 2 * d + 1) = 1.0;
        g[r++] = vmax;
        F(r, 2 * d + 1) = -1.0;
        g[r++] = vmax;
    }
    return HPolytope(F, g);
}

inline HPolytope input_box(int m, double umax) {
    Mat F(2 * m, m);
    Vec g(2 * m);
    F.topRows(m) = Mat::Identity(m, m);
    F.bottomRows(m) = -Mat::Identity(m, m);
    g.setConstant(umax);
    return HPolytope(F, g);
}

struct Setup {
    ModelBundle model;
    Mat K;
    std::vector<Mode> modes;
    std::vector<Obstacle> obstacles;
    PreparedPlanner prep;
};

// strongly contractive block gain for a double-integrator axis
inline Mat di_axis_gain(const ModelBundle& model) {
    return ackermann_gain(model.fine.A.topLeftCorner(2, 2), model.fine.B.topLeftCorner(2, 1),
                          {0.2, 0.3});
}

// 1-D double integrator, one mode, optional interval obstacle in output
// space. vmax/umax/wvel control the test geometry.
inline Setup di_1d(double vmax = 2.0, double umax = 1.0, double wvel = 0.02,
                   std::vector<std::pair<double, double>> walls = {},
                   double pos_lo = -2.0, double pos_hi = 30.0,
                   double alpha_target = 0.4) {
    Setup s;
    s.model = double_integrator(1, 0.1, 5);
    s.K = di_axis_gain(s.model);
    Vec whw(2);
    whw << 0.1 * wvel, wvel;
    Zonotope W = Zonotope::box(Vec::Zero(2), whw);
    s.modes.push_back(prepare_mode("only", di_state_box(1, pos_lo, pos_hi, vmax),
                                   input_box(1, umax), W, s.K, s.model.fine,
                                   s.model.steps_per_plan, alpha_target));
    std::vector<HPolytope> raw;
    for (auto [lo, hi] : walls) {
        Mat F(2, 1);
        F << 1, -1;
        Vec g(2);
        g << hi, -lo;
        raw.emplace_back(F, g);
    }
    s.obstacles = prepare_obstacles(raw, s.modes, s.model.fine.C);
    s.prep = prepare_planner(s.model, s.modes, s.obstacles);
    return s;
}

struct Box2 {
    double xlo, xhi, ylo, yhi;
};

// 2-D double integrator with fast/slow modes and box obstacles.
inline Setup di_2d(double v_fast, double v_slow, double w_fast, double w_slow,
                   std::vector<Box2> boxes, double umax = 1.0, double pos_lo = -1.0,
                   double pos_hi = 8.0, double alpha_target = 0.4) {
    Setup s;
    s.model = double_integrator(2, 0.1, 5);
    Mat kb = di_axis_gain(s.model);
    s.K = block_diag_gain(4, 2, {{0, 0, kb}, {2, 1, kb}});
    auto mk_w = [](double wv) {
        Vec hw(4);
        hw << 0.1 * wv, wv, 0.1 * wv, wv;
        return Zonotope::box(Vec::Zero(4), hw);
    };
    s.modes.push_back(prepare_mode("fast", di_state_box(2, pos_lo, pos_hi, v_fast),
                                   input_box(2, umax), mk_w(w_fast), s.K, s.model.fine,
                                   s.model.steps_per_plan, alpha_target));
    s.modes.push_back(prepare_mode("slow", di_state_box(2, pos_lo, pos_hi, v_slow),
                                   input_box(2, umax), mk_w(w_slow), s.K, s.model.fine,
                                   s.model.steps_per_plan, alpha_target));
    std::vector<HPolytope> raw;
    for (const Box2& b : boxes) {
        Vec lo(2), hi(2);
        lo << b.xlo, b.ylo;
        hi << b.xhi, b.yhi;
        raw.push_back(HPolytope::box(lo, hi));
    }
    s.obstacles = prepare_obstacles(raw, s.modes, s.model.fine.C);
    s.prep = prepare_planner(s.model, s.modes, s.obstacles);
    return s;
}

inline PlanProblem make_problem(const Setup& s, const Vec& x0, const Vec& goal, int N) {
    PlanProblem p;
    p.x0 = x0;
    p.goal = goal;
    p.N = N;
    p.model = &s.model;
    p.modes = &s.modes;
    p.obstacles = &s.obstacles;
    p.prep = &s.prep;
    return p;
}

inline SimSetup make_sim(const Setup& s, const Vec& x0, const Vec& goal, int N) {
    SimSetup sim;
    sim.model = s.model;
    sim.modes = s.modes;
    sim.obstacles = s.obstacles;
    sim.prep = s.prep;
    sim.K = s.K;
    const int n = s.model.n();
    const int m = s.model.m();
    sim.Q = Mat::Identity(n, n);
    sim.R = 0.1 * Mat::Identity(m, m);
    sim.P = Mat::Identity(n, n);
    sim.x0 = x0;
    sim.goal = goal;
    sim.N = N;
    return sim;
}

}  // namespace fixtures
