#include "hiermpc/tracker.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

namespace hiermpc {

using optim::QuadraticProgram;
using optim::SolveStatus;

int cyclic_horizon(int k, int M) {
    if (k < 0 || M < 2) {
        throw std::invalid_argument("cyclic_horizon: need k >= 0 and M >= 2");
    }
    return M - (k % M);
}

QuadraticProgram build_tracking_qp(const TrackerProblem& p, TrackerQpLayout* layout_out) {
    if (!p.mode || !p.model) {
        throw std::invalid_argument("build_tracking_qp: missing mode or model");
    }
    const int n = p.model->n();
    const int m = p.model->m();
    const Mat& C = p.model->C;
    const int pdim = p.model->p();
    const int L = cyclic_horizon(p.k, p.M);
    if (p.xref.rows() != n || p.xref.cols() != L + 1) {
        throw std::invalid_argument("build_tracking_qp: reference window must span L+1 samples");
    }
    const Mode& mode = *p.mode;
    if (static_cast<int>(mode.margins.size()) <= L) {
        throw std::invalid_argument("build_tracking_qp: mode margins not prepared up to L");
    }
    for (const Mat* W : {&p.Q, &p.R, &p.P}) {
        Eigen::LLT<Mat> llt(*W);
        if (llt.info() != Eigen::Success) {
            throw std::invalid_argument("build_tracking_qp: weights must be positive definite");
        }
    }

    TrackerQpLayout lay;
    lay.n = n;
    lay.m = m;
    lay.L = L;
    lay.z_base = 0;
    lay.v_base = (L + 1) * n;
    int at = lay.v_base + L * m;
    std::vector<Zonotope> cmargins;  // C D_j for j < L, then D_L
    for (int j = 0; j < L; ++j) {
        cmargins.push_back(linear_map(C, mode.margins[j]));
        lay.xi_base.push_back(at);
        lay.xi_len.push_back(cmargins.back().num_generators());
        at += lay.xi_len.back();
    }
    cmargins.push_back(mode.margins[L]);
    lay.xi_base.push_back(at);
    lay.xi_len.push_back(mode.margins[L].num_generators());
    at += lay.xi_len.back();
    lay.total = at;
    if (layout_out) *layout_out = lay;

    // empty stage sets surface as a build error naming the offending row
    for (int j = 0; j <= L; ++j) {
        if (mode.X_stage[j].is_empty()) {
            throw std::runtime_error("build_tracking_qp: tightened state set empty at offset " +
                                     std::to_string(j));
        }
    }

    QuadraticProgram qp;
    qp.H = Mat::Zero(lay.total, lay.total);
    qp.q = Vec::Zero(lay.total);
    for (int j = 0; j < L; ++j) {
        qp.H.block(lay.z(j, 0), lay.z(j, 0), n, n) = 2.0 * p.Q;
        qp.q.segment(lay.z(j, 0), n) = -2.0 * p.Q * p.xref.col(j);
        qp.H.block(lay.v(j, 0), lay.v(j, 0), m, m) = 2.0 * p.R;
    }
    qp.H.block(lay.z(L, 0), lay.z(L, 0), n, n) = 2.0 * p.P;
    qp.q.segment(lay.z(L, 0), n) = -2.0 * p.P * p.xref.col(L);

    int eq_rows = n + L * n + L * pdim + n;
    int ineq_rows = 0;
    for (int j = 0; j <= L; ++j) ineq_rows += mode.X_stage[j].num_faces();
    for (int j = 0; j < L; ++j) ineq_rows += mode.U_stage[j].num_faces();
    for (int j = 0; j <= L; ++j) ineq_rows += 2 * lay.xi_len[j];

    qp.A = Mat::Zero(eq_rows, lay.total);
    qp.b = Vec::Zero(eq_rows);
    qp.G = Mat::Zero(ineq_rows, lay.total);
    qp.h = Vec::Zero(ineq_rows);

    int er = 0;
    // z(k|k) = x(k)
    for (int r = 0; r < n; ++r) {
        qp.A(er, lay.z(0, r)) = 1.0;
        qp.b[er] = p.x[r];
        ++er;
    }
    // nominal dynamics
    for (int j = 0; j < L; ++j) {
        for (int r = 0; r < n; ++r) {
            qp.A(er, lay.z(j + 1, r)) = 1.0;
            for (int c = 0; c < n; ++c) qp.A(er, lay.z(j, c)) -= p.model->A(r, c);
            for (int c = 0; c < m; ++c) qp.A(er, lay.v(j, c)) -= p.model->B(r, c);
            ++er;
        }
    }
    // output-margin membership C(z - xref) = CG_j xi_j
    for (int j = 0; j < L; ++j) {
        const Mat& G = cmargins[j].G;
        for (int r = 0; r < pdim; ++r) {
            for (int c = 0; c < n; ++c) qp.A(er, lay.z(j, c)) = C(r, c);
            for (int t = 0; t < lay.xi_len[j]; ++t) {
                qp.A(er, lay.xi_base[j] + t) = -G(r, t);
            }
            qp.b[er] = C.row(r).dot(p.xref.col(j));
            ++er;
        }
    }
    // terminal full-state margin membership
    {
        const Mat& G = cmargins[L].G;
        for (int r = 0; r < n; ++r) {
            qp.A(er, lay.z(L, r)) = 1.0;
            for (int t = 0; t < lay.xi_len[L]; ++t) {
                qp.A(er, lay.xi_base[L] + t) = -G(r, t);
            }
            qp.b[er] = p.xref(r, L);
            ++er;
        }
    }

    int ir = 0;
    for (int j = 0; j <= L; ++j) {
        const HPolytope& xs = mode.X_stage[j];
        for (int r = 0; r < xs.num_faces(); ++r) {
            for (int c = 0; c < n; ++c) qp.G(ir, lay.z(j, c)) = xs.F(r, c);
            qp.h[ir] = xs.g[r];
            ++ir;
        }
    }
    for (int j = 0; j < L; ++j) {
        const HPolytope& us = mode.U_stage[j];
        for (int r = 0; r < us.num_faces(); ++r) {
            for (int c = 0; c < m; ++c) qp.G(ir, lay.v(j, c)) = us.F(r, c);
            qp.h[ir] = us.g[r];
            ++ir;
        }
    }
    for (int j = 0; j <= L; ++j) {
        for (int t = 0; t < lay.xi_len[j]; ++t) {
            qp.G(ir, lay.xi_base[j] + t) = 1.0;
            qp.h[ir] = 1.0;
            ++ir;
            qp.G(ir, lay.xi_base[j] + t) = -1.0;
            qp.h[ir] = 1.0;
            ++ir;
        }
    }
    if (er != eq_rows || ir != ineq_rows) {
        throw std::logic_error("build_tracking_qp: row count bookkeeping error");
    }
    return qp;
}

namespace {

double tracking_cost(const TrackerProblem& p, const Mat& z, const Mat& v) {
    const int L = static_cast<int>(v.cols());
    double cost = 0.0;
    for (int j = 0; j < L; ++j) {
        Vec dz = p.xref.col(j) - z.col(j);
        cost += dz.dot(p.Q * dz) + v.col(j).dot(p.R * v.col(j));
    }
    Vec dT = p.xref.col(L) - z.col(L);
    cost += dT.dot(p.P * dT);
    return cost;
}

void verify_tracker(const TrackerProblem& p, const TrackerResult& res) {
    const double tol = 1e-6;
    const Mode& mode = *p.mode;
    const Mat& C = p.model->C;
    const int L = static_cast<int>(res.v.cols());
    auto fail = [](const std::string& what) {
        throw std::runtime_error("tracker re-verification failed: " + what);
    };
    if ((res.z.col(0) - p.x).cwiseAbs().maxCoeff() > tol) fail("initial state pin");
    for (int j = 0; j < L; ++j) {
        Vec resid = res.z.col(j + 1) - p.model->A * res.z.col(j) - p.model->B * res.v.col(j);
        if (resid.cwiseAbs().maxCoeff() > tol) fail("nominal dynamics");
        if (!mode.U_stage[j].contains(res.v.col(j), tol)) fail("tightened input");
        Zonotope cd = linear_map(C, mode.margins[j]);
        if (!zonotope_contains(cd, C * (res.z.col(j) - p.xref.col(j)), tol)) {
            fail("output margin membership at offset " + std::to_string(j));
        }
    }
    for (int j = 0; j <= L; ++j) {
        if (!mode.X_stage[j].contains(res.z.col(j), tol)) fail("tightened state");
    }
    if (!zonotope_contains(mode.margins[L], res.z.col(L) - p.xref.col(L), tol)) {
        fail("terminal margin membership");
    }
}

}  // namespace

TrackerResult control_step(const TrackerProblem& p) {
    const auto t0 = std::chrono::steady_clock::now();
    TrackerQpLayout lay;
    QuadraticProgram qp = build_tracking_qp(p, &lay);
    auto sol = optim::solve_qp(qp);

    TrackerResult res;
    res.status = sol.status;
    res.qp_iterations = sol.iterations;
    res.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (sol.status != SolveStatus::Optimal) {
        // feasibility was promised by the contract; surface the breach
        if (zonotope_contains(p.mode->margins[0], p.x - p.xref.col(0), 1e-8)) {
            std::cerr << "[hiermpc] tracker infeasible despite in-contract state at k=" << p.k
                      << " (" << optim::to_string(sol.status) << ")\n";
        }
        return res;
    }
    const int L = lay.L;
    res.z.resize(lay.n, L + 1);
    res.v.resize(lay.m, L);
    for (int j = 0; j <= L; ++j) {
        for (int r = 0; r < lay.n; ++r) res.z(r, j) = sol.x[lay.z(j, r)];
    }
    for (int j = 0; j < L; ++j) {
        for (int r = 0; r < lay.m; ++r) res.v(r, j) = sol.x[lay.v(j, r)];
    }
    res.u = res.v.col(0);
    res.objective = tracking_cost(p, res.z, res.v);
    verify_tracker(p, res);
    return res;
}

bool auxiliary_error_bound_check(const Mat& z_nom, const Mat& v_nom, const Mat& w_seq,
                                 const Mode& mode, const Mat& K, const LtiModel& model,
                                 double tol) {
    const int L = static_cast<int>(v_nom.cols());
    Vec x = z_nom.col(0);
    for (int j = 0; j <= L; ++j) {
        if (static_cast<int>(mode.tubes.size()) <= j) return false;
        if (!zonotope_contains(mode.tubes[j], x - z_nom.col(j), tol)) {
            return false;
        }
        if (j == L) break;
        Vec u = v_nom.col(j) + K * (x - z_nom.col(j));
        x = model.A * x + model.B * u + w_seq.col(j);
    }
    return true;
}

}  // namespace hiermpc
