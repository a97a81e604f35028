#pragma once

#include "hiermpc/linalg.hpp"
#include "hiermpc/optim/qp.hpp"
#include "hiermpc/planner.hpp"

namespace hiermpc {

/// Shrinks to the next planning instant, then resets: L = M - rem(k, M).
int cyclic_horizon(int k, int M);

struct TrackerProblem {
    Vec x;        // measured state at step k
    Mat xref;     // n x (L+1) window x_ref(k .. k+L)
    const Mode* mode = nullptr;
    int k = 0;
    int M = 0;
    Mat Q, R, P;  // stage, input, terminal weights (positive definite)
    const LtiModel* model = nullptr;
};

/// Column layout of the tracking QP (nominal states, nominal inputs, then
/// the membership coefficients of the per-stage margins).
struct TrackerQpLayout {
    int n = 0, m = 0, L = 0;
    int z_base = 0, v_base = 0;
    std::vector<int> xi_base;  // j = 0..L-1 for the output margins, then the
    std::vector<int> xi_len;   // terminal full-state margin at index L
    int total = 0;

    int z(int j, int i) const { return z_base + j * n + i; }
    int v(int j, int i) const { return v_base + j * m + i; }
};

optim::QuadraticProgram build_tracking_qp(const TrackerProblem& p,
                                          TrackerQpLayout* layout = nullptr);

struct TrackerResult {
    optim::SolveStatus status = optim::SolveStatus::IterationLimit;
    Vec u;   // applied input v*(k|k)
    Mat z;   // n x (L+1) nominal states
    Mat v;   // m x L nominal inputs
    double objective = 0.0;  // tracking cost at the optimum
    int qp_iterations = 0;
    double solve_seconds = 0.0;
};

/// Solves the tracking QP and independently re-verifies the tightened
/// constraints and margin memberships at the reported optimum.
TrackerResult control_step(const TrackerProblem& p);

/// Replays the fictitious auxiliary law x+ = Ax + B(v* + K(x - z*)) + w
/// from the logged nominal trajectory and checks x - z* against the tubes.
bool auxiliary_error_bound_check(const Mat& z_nom, const Mat& v_nom, const Mat& w_seq,
                                 const Mode& mode, const Mat& K, const LtiModel& model,
                                 double tol = 1e-8);

}  // namespace hiermpc
