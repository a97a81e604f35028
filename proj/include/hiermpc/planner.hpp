#pragma once

#include "hiermpc/linalg.hpp"
#include "hiermpc/optim/milp.hpp"
#include "hiermpc/sets.hpp"
#include "hiermpc/vehicle_models.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hiermpc {

/// One operating region: raw constraint sets plus everything derived from
/// them (tubes, invariant set, margins, tightened sets).
struct Mode {
    std::string name;
    HPolytope X;  // rows normalized
    HPolytope U;
    Zonotope W;

    std::vector<Zonotope> tubes;    // E(0..M)
    Zonotope Z;                     // invariant outer approximation
    int s = 0;
    double alpha = 0.0;
    std::vector<Zonotope> margins;  // D_0..D_M
    HPolytope X_tight;              // X minus Z
    HPolytope U_tight;              // U minus K Z
    std::vector<HPolytope> X_stage;  // X minus E(j)
    std::vector<HPolytope> U_stage;  // U minus K E(j)
    bool zero_terminal_input_ok = false;
};

/// Derives tubes, the invariant set, margins and tightened sets, and
/// validates the mode invariants (nonempty tightened sets, E(j) inside Z).
Mode prepare_mode(const std::string& name, const HPolytope& X, const HPolytope& U,
                  const Zonotope& W, const Mat& K, const LtiModel& fine, int M,
                  double alpha_target);

/// Fills per-mode enlarged offsets for each obstacle: f^i = f + h_{(-C)Z_i}.
std::vector<Obstacle> prepare_obstacles(const std::vector<HPolytope>& raw,
                                        const std::vector<Mode>& modes, const Mat& C);

enum class IntersamplePolicy { SharedFace, PerSample };

/// Stage row data shared by every planning instant of a scenario: the
/// pruned per-mode stage polytope over (x_p, u_p) covering the tightened
/// state/input rows and the inter-sample state rows, plus the obstacle
/// separation rows per sample with LP-certified simplifications.
struct PreparedPlanner {
    struct FaceRows {
        double rhs = 0.0;                // enlarged offset (+ tiny margin)
        std::vector<Vec> sample_row;     // over (x,u); empty when always satisfied
        std::vector<char> impossible;    // per sample: face can never certify
        Vec terminal_row;                // over x
        double terminal_rhs = 0.0;
        bool terminal_always = false;
        bool terminal_impossible = false;
    };
    std::vector<HPolytope> stage;        // per mode, dim n+m
    std::vector<std::vector<std::vector<FaceRows>>> faces;  // [mode][obstacle][face]
    std::vector<Mat> roll_A;             // A^l, l = 0..M
    std::vector<Mat> roll_S;             // sum_{m<l} A^m B
};

PreparedPlanner prepare_planner(const ModelBundle& model, const std::vector<Mode>& modes,
                                const std::vector<Obstacle>& obstacles);

struct PlanProblem {
    Vec x0;
    int N = 10;
    Vec goal;
    const ModelBundle* model = nullptr;
    const std::vector<Mode>* modes = nullptr;
    const std::vector<Obstacle>* obstacles = nullptr;
    const PreparedPlanner* prep = nullptr;
    double alpha_x = 0.01;
    double alpha_u = 0.01;
    double big_m = 1e4;
    IntersamplePolicy policy = IntersamplePolicy::SharedFace;
    bool open_loop = false;
    std::optional<Vec> committed_x0;  // open-loop replan pins x_p(0) to this
    long node_budget = 200000;
};

/// Column layout of the planning MILP; exposed so tests can count variables
/// and the planner can decode solutions.
struct PlanMilpLayout {
    int n = 0, m = 0, N = 0, M = 0, n_modes = 0;
    int x_base = 0, u_base = 0, t_goal = 0, t_x_base = 0, t_u_base = 0;
    std::vector<int> xi_base, xi_len;
    int d_base = 0;
    int b_base = 0;
    int sets_per_stage_pair = 0;  // binary sets per (mode, obstacle)
    std::vector<int> face_counts;  // per obstacle
    int total = 0;

    int x(int j, int i) const { return x_base + j * n + i; }
    int u(int j, int i) const { return u_base + j * m + i; }
    int t_x(int j) const { return t_x_base + j; }
    int t_u(int j) const { return t_u_base + j; }
    int d(int mode) const { return d_base + mode; }
    int b(int mode, int obstacle, int set, int face) const;
    int num_binaries() const;
};

optim::MixedIntegerLinearProgram build_planning_milp(const PlanProblem& p,
                                                     PlanMilpLayout* layout = nullptr);

struct PlanResult {
    optim::SolveStatus status = optim::SolveStatus::IterationLimit;
    int mode_index = -1;
    Mat xp;  // n x (N+1)
    Mat up;  // m x N
    double objective = 0.0;
    long nodes = 0;
    long lp_iterations = 0;
    double solve_seconds = 0.0;
};

/// Builds and solves the planning MILP, then re-verifies every constraint
/// of the reference planning problem at the reported optimum with
/// independent set-membership code. A re-verification failure throws.
PlanResult plan(const PlanProblem& p);

/// Fine-rate reference x_ref(j) = A^j x_p*(0) + sum_{m<j} A^m B u_p*(0),
/// j = 0..M; the endpoint equals x_p*(1).
Mat extract_reference(const PlanResult& result, const ModelBundle& model);

/// True iff every sample clears, for every obstacle, at least one enlarged
/// face (closed complement: equality counts as safe).
bool check_reference_safety(const Mat& xref, int mode_index,
                            const std::vector<Obstacle>& obstacles, const Mat& C);

}  // namespace hiermpc
