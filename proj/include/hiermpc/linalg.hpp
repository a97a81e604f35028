#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

namespace hiermpc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Numeric tolerances shared across the toolkit. Tests may tighten them;
/// production code reads the defaults.
struct Tolerances {
    double zoh_series_term = 1e-14;     // matrix-exponential series truncation
    double riccati_fixed_point = 1e-10; // successive-iterate max-norm
    int riccati_max_iters = 10000;
    double rank = 1e-9;                 // controllability rank test
    double membership = 1e-8;           // closed-set membership slack
    double lp_feasibility = 1e-8;
    double qp_kkt = 1e-6;
    double milp_integrality = 1e-6;
    double milp_gap = 1e-6;
};

const Tolerances& default_tolerances();

/// Discrete-time LTI plant x+ = Ax + Bu, y = Cx at sample time dt.
struct LtiModel {
    Mat A;
    Mat B;
    Mat C;
    double dt = 0.0;

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    int p() const { return static_cast<int>(C.rows()); }

    void validate() const;
};

/// A^M by repeated squaring; A^0 is the identity.
Mat mat_power(const Mat& A, int M);

/// Slow-rate planning pair (A^M, sum_{i<M} A^i B). Requires M >= 2.
/// Warns on stderr if the pair loses controllability.
std::pair<Mat, Mat> planning_model(const Mat& A, const Mat& B, int M);
std::pair<Mat, Mat> planning_model(const LtiModel& model, int M);

/// Exact zero-order-hold discretization of (Ac, Bc) at step dt via the
/// truncated series of the augmented block exponential.
std::pair<Mat, Mat> discretize_zoh(const Mat& Ac, const Mat& Bc, double dt);

/// Stabilizing feedback u = Kx from the discrete Riccati fixed point.
/// Throws if the iteration does not converge.
Mat lqr_gain(const Mat& A, const Mat& B, const Mat& Qk, const Mat& Rk);

/// Largest eigenvalue magnitude.
double spectral_radius(const Mat& A);

/// Single-input pole placement (Ackermann): K with the eigenvalues of
/// A + BK at `poles`. Requires a controllable pair and one input column.
Mat ackermann_gain(const Mat& A, const Mat& B, const std::vector<double>& poles);

/// Block-diagonal composition of per-block gains for block-decoupled
/// models: entries are (state offset, input offset, gain block).
Mat block_diag_gain(int n, int m, const std::vector<std::tuple<int, int, Mat>>& blocks);

/// Rank test on the controllability matrix [B AB ... A^{n-1}B].
bool is_controllable(const Mat& A, const Mat& B, double tol = 1e-9);

}  // namespace hiermpc
