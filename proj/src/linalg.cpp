#include "hiermpc/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <iostream>

namespace hiermpc {

const Tolerances& default_tolerances() {
    static const Tolerances tols{};
    return tols;
}

void LtiModel::validate() const {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument("LtiModel: A must be square");
    }
    if (B.rows() != A.rows()) {
        throw std::invalid_argument("LtiModel: B row count must match A");
    }
    if (C.cols() != A.cols()) {
        throw std::invalid_argument("LtiModel: C column count must match A");
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("LtiModel: dt must be positive");
    }
    if (!A.allFinite() || !B.allFinite() || !C.allFinite()) {
        throw std::invalid_argument("LtiModel: matrices must be finite");
    }
    if (!is_controllable(A, B)) {
        std::cerr << "[hiermpc] warning: (A, B) fails the controllability rank test\n";
    }
}

Mat mat_power(const Mat& A, int M) {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument("mat_power: matrix must be square");
    }
    if (M < 0) {
        throw std::invalid_argument("mat_power: exponent must be nonnegative");
    }
    Mat result = Mat::Identity(A.rows(), A.cols());
    Mat base = A;
    int e = M;
    while (e > 0) {
        if (e & 1) {
            result = result * base;
        }
        e >>= 1;
        if (e > 0) {
            base = base * base;
        }
    }
    return result;
}

std::pair<Mat, Mat> planning_model(const Mat& A, const Mat& B, int M) {
    if (M < 2) {
        throw std::invalid_argument("planning_model: M must be at least 2");
    }
    if (A.rows() != A.cols() || B.rows() != A.rows()) {
        throw std::invalid_argument("planning_model: dimension mismatch");
    }
    Mat Ap = mat_power(A, M);
    Mat Bp = Mat::Zero(B.rows(), B.cols());
    Mat Ai = Mat::Identity(A.rows(), A.cols());
    for (int i = 0; i < M; ++i) {
        Bp += Ai * B;
        Ai = Ai * A;
    }
    if (is_controllable(A, B) && !is_controllable(Ap, Bp)) {
        std::cerr << "[hiermpc] warning: planning pair (A^M, sum A^i B) lost controllability\n";
    }
    return {Ap, Bp};
}

std::pair<Mat, Mat> planning_model(const LtiModel& model, int M) {
    return planning_model(model.A, model.B, M);
}

std::pair<Mat, Mat> discretize_zoh(const Mat& Ac, const Mat& Bc, double dt) {
    if (Ac.rows() != Ac.cols()) {
        throw std::invalid_argument("discretize_zoh: Ac must be square");
    }
    if (Bc.rows() != Ac.rows()) {
        throw std::invalid_argument("discretize_zoh: Bc row count must match Ac");
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("discretize_zoh: dt must be positive");
    }
    const int n = static_cast<int>(Ac.rows());
    const int m = static_cast<int>(Bc.cols());
    Mat M0 = Mat::Zero(n + m, n + m);
    M0.topLeftCorner(n, n) = Ac * dt;
    M0.topRightCorner(n, m) = Bc * dt;

    // Scale-and-square keeps the plain series well inside its convergence
    // radius for large ||Ac*dt||.
    int squarings = 0;
    double norm = M0.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.5) {
        norm *= 0.5;
        ++squarings;
    }
    Mat Ms = M0 / std::pow(2.0, squarings);

    Mat expM = Mat::Identity(n + m, n + m);
    Mat term = Mat::Identity(n + m, n + m);
    const double tol = default_tolerances().zoh_series_term;
    for (int k = 1; k <= 200; ++k) {
        term = (term * Ms) / static_cast<double>(k);
        expM += term;
        if (term.cwiseAbs().maxCoeff() < tol) {
            break;
        }
    }
    for (int i = 0; i < squarings; ++i) {
        expM = expM * expM;
    }
    return {expM.topLeftCorner(n, n), expM.topRightCorner(n, m)};
}

Mat lqr_gain(const Mat& A, const Mat& B, const Mat& Qk, const Mat& Rk) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    if (A.cols() != n || B.rows() != n || Qk.rows() != n || Qk.cols() != n ||
        Rk.rows() != m || Rk.cols() != m) {
        throw std::invalid_argument("lqr_gain: dimension mismatch");
    }
    Eigen::LLT<Mat> rchol(Rk);
    if (rchol.info() != Eigen::Success) {
        throw std::invalid_argument("lqr_gain: Rk must be positive definite");
    }

    const Tolerances& tols = default_tolerances();
    Mat P = Qk;
    for (int it = 0; it < tols.riccati_max_iters; ++it) {
        Mat BtPB = B.transpose() * P * B;
        Mat BtPA = B.transpose() * P * A;
        Mat gain = (Rk + BtPB).ldlt().solve(BtPA);
        Mat Pn = Qk + A.transpose() * P * A - BtPA.transpose() * gain;
        Pn = 0.5 * (Pn + Pn.transpose());
        double delta = (Pn - P).cwiseAbs().maxCoeff();
        P = Pn;
        if (delta < tols.riccati_fixed_point) {
            Mat K = -(Rk + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
            return K;
        }
    }
    throw std::runtime_error("lqr_gain: Riccati iteration did not converge");
}

double spectral_radius(const Mat& A) {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument("spectral_radius: matrix must be square");
    }
    if (A.rows() == 0) {
        return 0.0;
    }
    return A.eigenvalues().cwiseAbs().maxCoeff();
}

Mat ackermann_gain(const Mat& A, const Mat& B, const std::vector<double>& poles) {
    const int n = static_cast<int>(A.rows());
    if (B.cols() != 1) {
        throw std::invalid_argument("ackermann_gain: single-input pairs only");
    }
    if (static_cast<int>(poles.size()) != n) {
        throw std::invalid_argument("ackermann_gain: need one pole per state");
    }
    if (!is_controllable(A, B)) {
        throw std::invalid_argument("ackermann_gain: pair is not controllable");
    }
    Mat ctrb(n, n);
    Mat AiB = B;
    for (int i = 0; i < n; ++i) {
        ctrb.col(i) = AiB;
        AiB = A * AiB;
    }
    // phi(A) with phi the desired characteristic polynomial
    Mat phi = Mat::Identity(n, n);
    for (double p : poles) {
        phi = phi * (A - p * Mat::Identity(n, n));
    }
    Vec en = Vec::Zero(n);
    en[n - 1] = 1.0;
    Vec row = ctrb.transpose().fullPivLu().solve(en);
    return -(row.transpose() * phi);
}

Mat block_diag_gain(int n, int m, const std::vector<std::tuple<int, int, Mat>>& blocks) {
    Mat K = Mat::Zero(m, n);
    for (const auto& [soff, uoff, kb] : blocks) {
        K.block(uoff, soff, kb.rows(), kb.cols()) = kb;
    }
    return K;
}

bool is_controllable(const Mat& A, const Mat& B, double tol) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    Mat ctrb(n, n * m);
    Mat AiB = B;
    for (int i = 0; i < n; ++i) {
        ctrb.middleCols(i * m, m) = AiB;
        AiB = A * AiB;
    }
    Eigen::FullPivLU<Mat> lu(ctrb);
    lu.setThreshold(tol);
    return lu.rank() == n;
}

}  // namespace hiermpc
