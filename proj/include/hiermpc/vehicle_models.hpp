#pragma once

#include "hiermpc/linalg.hpp"
#include "hiermpc/sets.hpp"

#include <string>
#include <vector>

namespace hiermpc {

/// Placeholder numbers; experiments read them from the scenario file.
struct QuadcopterParams {
    double lambda_x = 0.1;
    double lambda_y = 0.1;
    double lambda_z = 0.1;
    double a_wx_theta = 4.0;
    double a_wx_wx = 2.0;
    double a_wy_phi = 4.0;
    double a_wy_wy = 2.0;
    double b_x = 8.0;
    double b_y = 8.0;
    double b_z = 8.0;
    double gravity = 9.81;

    void validate() const;
};

struct ModelBundle {
    Mat Ac, Bc;                      // continuous blocks (empty for native discrete)
    LtiModel fine;                   // discretized at the tracker rate
    Mat Ap, Bp;                      // planning pair at M*dt
    int steps_per_plan = 0;          // M
    std::vector<int> steady_zero_idx;  // coordinates pinned to 0 at steady state
    std::vector<std::string> state_labels;
    std::vector<std::string> input_labels;
    std::vector<int> position_idx;   // coordinates selected by C

    int n() const { return fine.n(); }
    int m() const { return fine.m(); }
    int p() const { return fine.p(); }
};

/// Decoupled longitudinal/lateral/vertical blocks, states ordered
/// [p_x v_x theta w_x | p_y v_y phi w_y | p_z v_z], inputs
/// [theta_c, phi_c, T_c]; C picks the three positions.
void quadcopter_continuous(const QuadcopterParams& params, Mat& Ac, Mat& Bc, Mat& C);

ModelBundle quadcopter_model(const QuadcopterParams& params, double dt, int steps_per_plan);

/// Velocity/attitude/input bounds plus the arena box on positions.
/// T_c is left unbounded here; scenarios bound it per mode.
std::pair<HPolytope, HPolytope> quadcopter_constraints(const Vec& arena_lo,
                                                       const Vec& arena_hi);

struct ModePreset {
    std::string name;
    double horizontal_velocity_limit;
};

/// Fast (1.5 m/s) and slow (1.0 m/s) horizontal-velocity templates; the
/// scenario supplies the matching disturbance sets, slow strictly inside
/// fast.
std::vector<ModePreset> mode_presets();

/// Per-axis [[1,dt],[0,1]] blocks, state order [p1 v1 p2 v2 ...]; steady
/// states are the zero-velocity points.
ModelBundle double_integrator(int dims, double dt, int steps_per_plan);

}  // namespace hiermpc
