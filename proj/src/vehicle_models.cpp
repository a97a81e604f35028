#include "hiermpc/vehicle_models.hpp"

#include <cmath>

namespace hiermpc {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void QuadcopterParams::validate() const {
    const double vals[] = {lambda_x, lambda_y, lambda_z, a_wx_theta, a_wx_wx,
                           a_wy_phi, a_wy_wy, b_x, b_y, b_z, gravity};
    for (double v : vals) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("QuadcopterParams: entries must be finite");
        }
    }
    if (lambda_x < 0 || lambda_y < 0 || lambda_z < 0) {
        throw std::invalid_argument("QuadcopterParams: drag coefficients must be >= 0");
    }
    if (b_x <= 0 || b_y <= 0 || b_z <= 0) {
        throw std::invalid_argument("QuadcopterParams: input gains must be positive");
    }
}

void quadcopter_continuous(const QuadcopterParams& p, Mat& Ac, Mat& Bc, Mat& C) {
    p.validate();
    Ac = Mat::Zero(10, 10);
    Bc = Mat::Zero(10, 3);

    // longitudinal block [p_x v_x theta w_x]
    Ac(0, 1) = 1.0;
    Ac(1, 1) = -p.lambda_x;
    Ac(1, 2) = -p.gravity;
    Ac(2, 3) = 1.0;
    Ac(3, 2) = -p.a_wx_theta;
    Ac(3, 3) = -p.a_wx_wx;
    Bc(3, 0) = p.b_x;

    // lateral block [p_y v_y phi w_y]
    Ac(4, 5) = 1.0;
    Ac(5, 5) = -p.lambda_y;
    Ac(5, 6) = p.gravity;
    Ac(6, 7) = 1.0;
    Ac(7, 6) = -p.a_wy_phi;
    Ac(7, 7) = -p.a_wy_wy;
    Bc(7, 1) = p.b_y;

    // vertical block [p_z v_z]
    Ac(8, 9) = 1.0;
    Ac(9, 9) = -p.lambda_z;
    Bc(9, 2) = p.b_z;

    C = Mat::Zero(3, 10);
    C(0, 0) = 1.0;
    C(1, 4) = 1.0;
    C(2, 8) = 1.0;
}

ModelBundle quadcopter_model(const QuadcopterParams& params, double dt, int steps_per_plan) {
    if (steps_per_plan < 2) {
        throw std::invalid_argument("quadcopter_model: steps_per_plan must be >= 2");
    }
    ModelBundle b;
    quadcopter_continuous(params, b.Ac, b.Bc, b.fine.C);
    auto [A, B] = discretize_zoh(b.Ac, b.Bc, dt);
    b.fine.A = A;
    b.fine.B = B;
    b.fine.dt = dt;
    b.fine.validate();
    std::tie(b.Ap, b.Bp) = planning_model(A, B, steps_per_plan);
    b.steps_per_plan = steps_per_plan;
    b.steady_zero_idx = {1, 2, 3, 5, 6, 7, 9};
    b.state_labels = {"p_x", "v_x", "theta", "w_x", "p_y",
                      "v_y", "phi", "w_y", "p_z", "v_z"};
    b.input_labels = {"theta_c", "phi_c", "T_c"};
    b.position_idx = {0, 4, 8};
    return b;
}

std::pair<HPolytope, HPolytope> quadcopter_constraints(const Vec& arena_lo,
                                                       const Vec& arena_hi) {
    if (arena_lo.size() != 3 || arena_hi.size() != 3) {
        throw std::invalid_argument("quadcopter_constraints: arena box must be 3-D");
    }
    const double vmax = 1.5;
    const double ang = kPi / 4.0;
    const int pos[] = {0, 4, 8};
    const int vel[] = {1, 5, 9};
    const int att[] = {2, 6};

    Mat F = Mat::Zero(16, 10);
    Vec g(16);
    int r = 0;
    for (int i = 0; i < 3; ++i) {  // velocities
        F(r, vel[i]) = 1.0;
        g[r++] = vmax;
        F(r, vel[i]) = -1.0;
        g[r++] = vmax;
    }
    for (int i = 0; i < 2; ++i) {  // attitude angles
        F(r, att[i]) = 1.0;
        g[r++] = ang;
        F(r, att[i]) = -1.0;
        g[r++] = ang;
    }
    for (int i = 0; i < 3; ++i) {  // arena positions
        F(r, pos[i]) = 1.0;
        g[r++] = arena_hi[i];
        F(r, pos[i]) = -1.0;
        g[r++] = -arena_lo[i];
    }
    HPolytope X(F, g);

    Mat Fu = Mat::Zero(4, 3);
    Vec gu(4);
    Fu(0, 0) = 1.0;
    gu[0] = ang;
    Fu(1, 0) = -1.0;
    gu[1] = ang;
    Fu(2, 1) = 1.0;
    gu[2] = ang;
    Fu(3, 1) = -1.0;
    gu[3] = ang;
    HPolytope U(Fu, gu);
    return {X, U};
}

std::vector<ModePreset> mode_presets() {
    return {{"fast", 1.5}, {"slow", 1.0}};
}

ModelBundle double_integrator(int dims, double dt, int steps_per_plan) {
    if (dims < 1 || dims > 3) {
        throw std::invalid_argument("double_integrator: dims must be 1..3");
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("double_integrator: dt must be positive");
    }
    const int n = 2 * dims;
    ModelBundle b;
    b.fine.A = Mat::Identity(n, n);
    b.fine.B = Mat::Zero(n, dims);
    b.fine.C = Mat::Zero(dims, n);
    for (int d = 0; d < dims; ++d) {
        b.fine.A(2 * d, 2 * d + 1) = dt;
        b.fine.B(2 * d, d) = dt * dt / 2.0;
        b.fine.B(2 * d + 1, d) = dt;
        b.fine.C(d, 2 * d) = 1.0;
        b.steady_zero_idx.push_back(2 * d + 1);
        b.position_idx.push_back(2 * d);
        b.state_labels.push_back("p" + std::to_string(d));
        b.state_labels.push_back("v" + std::to_string(d));
        b.input_labels.push_back("a" + std::to_string(d));
    }
    b.fine.dt = dt;
    b.fine.validate();
    if (steps_per_plan >= 2) {
        std::tie(b.Ap, b.Bp) = planning_model(b.fine.A, b.fine.B, steps_per_plan);
    } else {
        b.Ap = b.fine.A;
        b.Bp = b.fine.B;
        steps_per_plan = 1;
    }
    b.steps_per_plan = steps_per_plan;
    return b;
}

}  // namespace hiermpc
