#include "hiermpc/optim/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>

namespace hiermpc::optim {

void QuadraticProgram::validate() const {
    const int n = num_vars();
    if (H.rows() != n || H.cols() != n) {
        throw std::invalid_argument("QuadraticProgram: Hessian dimension mismatch");
    }
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + H.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("QuadraticProgram: Hessian must be symmetric");
    }
    if (G.size() > 0 && (G.cols() != n || G.rows() != h.size())) {
        throw std::invalid_argument("QuadraticProgram: inequality system dimension mismatch");
    }
    if (A.size() > 0 && (A.cols() != n || A.rows() != b.size())) {
        throw std::invalid_argument("QuadraticProgram: equality system dimension mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    if (es.info() == Eigen::Success && es.eigenvalues().minCoeff() < -1e-10 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("QuadraticProgram: Hessian must be positive semidefinite");
    }
}

namespace {

struct Workspace {
    // scaled data
    Mat P, M;
    Vec q, l, u;
    Vec d_scale, e_scale;  // x and row scalings
    double c_scale = 1.0;
    Vec rho;
    Eigen::LLT<Mat> kkt;
    int n = 0, m = 0;
};

void ruiz_equilibrate(Workspace& ws) {
    const int n = ws.n;
    const int m = ws.m;
    ws.d_scale = Vec::Ones(n);
    ws.e_scale = Vec::Ones(m);
    for (int iter = 0; iter < 10; ++iter) {
        Vec dx(n), de(m);
        for (int j = 0; j < n; ++j) {
            double cn = ws.P.col(j).cwiseAbs().maxCoeff();
            if (m > 0) cn = std::max(cn, ws.M.col(j).cwiseAbs().maxCoeff());
            dx[j] = cn > 1e-12 ? 1.0 / std::sqrt(cn) : 1.0;
        }
        for (int i = 0; i < m; ++i) {
            double rn = ws.M.row(i).cwiseAbs().maxCoeff();
            de[i] = rn > 1e-12 ? 1.0 / std::sqrt(rn) : 1.0;
        }
        ws.P = dx.asDiagonal() * ws.P * dx.asDiagonal();
        ws.q = dx.asDiagonal() * ws.q;
        if (m > 0) {
            ws.M = de.asDiagonal() * ws.M * dx.asDiagonal();
            for (int i = 0; i < m; ++i) {
                if (std::isfinite(ws.l[i])) ws.l[i] *= de[i];
                if (std::isfinite(ws.u[i])) ws.u[i] *= de[i];
            }
        }
        ws.d_scale = ws.d_scale.cwiseProduct(dx);
        ws.e_scale = ws.e_scale.cwiseProduct(de);
    }
    double pnorm = ws.P.cwiseAbs().colwise().sum().mean();
    double qnorm = ws.q.cwiseAbs().maxCoeff();
    double c = 1.0 / std::max(1e-6, std::max(pnorm, qnorm));
    c = std::min(c, 1e6);
    ws.P *= c;
    ws.q *= c;
    ws.c_scale = c;
}

void factor_kkt(Workspace& ws, double sigma) {
    Mat K = ws.P + sigma * Mat::Identity(ws.n, ws.n);
    if (ws.m > 0) {
        K.noalias() += ws.M.transpose() * ws.rho.asDiagonal() * ws.M;
    }
    ws.kkt.compute(K);
}

struct Residuals {
    double prim = 0.0, dual = 0.0, comp = 0.0;
};

// Unscaled KKT residuals at (x, y).
Residuals kkt_residuals(const QuadraticProgram& qp, const Vec& x, const Vec& y_ineq,
                        const Vec& y_eq) {
    Residuals r;
    Vec stat = qp.H * x + qp.q;
    if (qp.G.rows() > 0) stat.noalias() += qp.G.transpose() * y_ineq;
    if (qp.A.rows() > 0) stat.noalias() += qp.A.transpose() * y_eq;
    r.dual = stat.size() ? stat.cwiseAbs().maxCoeff() : 0.0;
    for (int i = 0; i < qp.G.rows(); ++i) {
        double slack = qp.G.row(i).dot(x) - qp.h[i];
        r.prim = std::max(r.prim, slack);
        r.comp = std::max(r.comp, std::abs(std::max(y_ineq[i], 0.0) * slack));
    }
    for (int i = 0; i < qp.A.rows(); ++i) {
        r.prim = std::max(r.prim, std::abs(qp.A.row(i).dot(x) - qp.b[i]));
    }
    return r;
}

// Equality-constrained solve on the detected active set, with a regularized
// factorization and iterative refinement.
bool polish(const QuadraticProgram& qp, const std::vector<int>& active_ineq, Vec& x,
            Vec& y_ineq, Vec& y_eq) {
    const int n = qp.num_vars();
    const int na = static_cast<int>(active_ineq.size());
    const int ne = static_cast<int>(qp.A.rows());
    const int dim = n + na + ne;
    Mat K = Mat::Zero(dim, dim);
    K.topLeftCorner(n, n) = qp.H;
    Vec rhs(dim);
    rhs.head(n) = -qp.q;
    for (int t = 0; t < na; ++t) {
        K.block(n + t, 0, 1, n) = qp.G.row(active_ineq[t]);
        K.block(0, n + t, n, 1) = qp.G.row(active_ineq[t]).transpose();
        rhs[n + t] = qp.h[active_ineq[t]];
    }
    for (int t = 0; t < ne; ++t) {
        K.block(n + na + t, 0, 1, n) = qp.A.row(t);
        K.block(0, n + na + t, n, 1) = qp.A.row(t).transpose();
        rhs[n + na + t] = qp.b[t];
    }
    const double delta = 1e-9;
    Mat Kreg = K;
    Kreg.topLeftCorner(n, n) += delta * Mat::Identity(n, n);
    Kreg.bottomRightCorner(na + ne, na + ne) -= delta * Mat::Identity(na + ne, na + ne);
    Eigen::PartialPivLU<Mat> lu(Kreg);
    Vec sol = lu.solve(rhs);
    for (int refine = 0; refine < 3; ++refine) {
        Vec resid = rhs - K * sol;
        sol += lu.solve(resid);
    }
    if (!sol.allFinite()) return false;
    x = sol.head(n);
    Vec yi = Vec::Zero(qp.G.rows());
    for (int t = 0; t < na; ++t) {
        yi[active_ineq[t]] = std::max(sol[n + t], 0.0);
    }
    y_ineq = yi;
    y_eq = sol.tail(ne);
    return true;
}

}  // namespace

QpSolution solve_qp(const QuadraticProgram& qp, const QpSettings& st) {
    qp.validate();
    const int n = qp.num_vars();
    const int mg = static_cast<int>(qp.G.rows());
    const int me = static_cast<int>(qp.A.rows());
    const int m = mg + me;

    QpSolution out;

    if (m == 0) {
        Eigen::LDLT<Mat> ldlt(qp.H + 1e-12 * Mat::Identity(n, n));
        Vec x = ldlt.solve(-qp.q);
        double resid = (qp.H * x + qp.q).cwiseAbs().maxCoeff();
        if (resid > st.kkt_tol) {
            out.status = SolveStatus::Unbounded;
            return out;
        }
        out.status = SolveStatus::Optimal;
        out.x = x;
        out.dual_ineq = Vec();
        out.dual_eq = Vec();
        out.objective = 0.5 * x.dot(qp.H * x) + qp.q.dot(x);
        out.kkt_residual = resid;
        return out;
    }

    Workspace ws;
    ws.n = n;
    ws.m = m;
    ws.P = qp.H;
    ws.q = qp.q;
    ws.M.resize(m, n);
    ws.l.resize(m);
    ws.u.resize(m);
    if (mg > 0) {
        ws.M.topRows(mg) = qp.G;
        ws.l.head(mg).setConstant(-kInf);
        ws.u.head(mg) = qp.h;
    }
    if (me > 0) {
        ws.M.bottomRows(me) = qp.A;
        ws.l.tail(me) = qp.b;
        ws.u.tail(me) = qp.b;
    }
    ruiz_equilibrate(ws);

    const double rho0 = 0.1;
    ws.rho.resize(m);
    for (int i = 0; i < m; ++i) {
        ws.rho[i] = (ws.l[i] == ws.u[i]) ? rho0 * 1e3 : rho0;
    }
    factor_kkt(ws, st.sigma);

    Vec x = Vec::Zero(n), z = Vec::Zero(m), y = Vec::Zero(m);
    Vec x_prev = x, y_prev = y;
    int iter = 0;
    SolveStatus admm_status = SolveStatus::IterationLimit;

    auto unscale_x = [&](const Vec& xs) { return Vec(ws.d_scale.asDiagonal() * xs); };
    auto unscale_y = [&](const Vec& ys) {
        return Vec(ws.e_scale.asDiagonal() * ys / ws.c_scale);
    };

    for (iter = 1; iter <= st.max_iterations; ++iter) {
        Vec rhs = st.sigma * x - ws.q + ws.M.transpose() * (ws.rho.cwiseProduct(z) - y);
        Vec xt = ws.kkt.solve(rhs);
        Vec zt = ws.M * xt;
        Vec x_next = st.alpha * xt + (1.0 - st.alpha) * x;
        Vec z_mid = st.alpha * zt + (1.0 - st.alpha) * z + y.cwiseQuotient(ws.rho);
        Vec z_next = z_mid.cwiseMax(ws.l).cwiseMin(ws.u);
        y += ws.rho.cwiseProduct(st.alpha * zt + (1.0 - st.alpha) * z - z_next);
        x = x_next;
        z = z_next;

        if (iter % st.check_interval != 0) continue;

        Vec mx = ws.M * x;
        double rp = (mx - z).cwiseAbs().maxCoeff();
        Vec dres = ws.P * x + ws.q + ws.M.transpose() * y;
        double rd = dres.cwiseAbs().maxCoeff();
        double ep = st.eps_abs + st.eps_rel * std::max(mx.cwiseAbs().maxCoeff(),
                                                       z.cwiseAbs().maxCoeff());
        double ed = st.eps_abs +
                    st.eps_rel * std::max({(ws.P * x).cwiseAbs().maxCoeff(),
                                           (ws.M.transpose() * y).cwiseAbs().maxCoeff(),
                                           ws.q.cwiseAbs().maxCoeff()});
        if (rp < ep && rd < ed) {
            admm_status = SolveStatus::Optimal;
            break;
        }

        // infeasibility certificates
        Vec dy = y - y_prev;
        Vec dx = x - x_prev;
        double dynorm = dy.cwiseAbs().maxCoeff();
        if (dynorm > 1e-12) {
            double atdy = (ws.M.transpose() * dy).cwiseAbs().maxCoeff();
            double support = 0.0;
            bool valid = true;
            for (int i = 0; i < m; ++i) {
                if (dy[i] > 0) {
                    if (!std::isfinite(ws.u[i])) { valid = false; break; }
                    support += ws.u[i] * dy[i];
                } else if (dy[i] < 0) {
                    if (!std::isfinite(ws.l[i])) { valid = false; break; }
                    support += ws.l[i] * dy[i];
                }
            }
            if (valid && atdy <= 1e-10 * dynorm && support < -1e-10 * dynorm) {
                admm_status = SolveStatus::Infeasible;
                break;
            }
        }
        double dxnorm = dx.cwiseAbs().maxCoeff();
        if (dxnorm > 1e-12) {
            double pdx = (ws.P * dx).cwiseAbs().maxCoeff();
            double qdx = ws.q.dot(dx);
            Vec mdx = ws.M * dx;
            bool cone_ok = true;
            for (int i = 0; i < m; ++i) {
                if (std::isfinite(ws.u[i]) && mdx[i] > 1e-10 * dxnorm) cone_ok = false;
                if (std::isfinite(ws.l[i]) && mdx[i] < -1e-10 * dxnorm) cone_ok = false;
            }
            if (cone_ok && pdx <= 1e-10 * dxnorm && qdx < -1e-10 * dxnorm) {
                admm_status = SolveStatus::Unbounded;
                break;
            }
        }
        x_prev = x;
        y_prev = y;

        // adaptive penalty
        if (iter % 100 == 0 && rd > 1e-14) {
            double ratio = std::sqrt((rp / std::max(ep, 1e-14)) /
                                     (rd / std::max(ed, 1e-14)));
            ratio = std::min(std::max(ratio, 1e-3), 1e3);
            if (ratio > 5.0 || ratio < 0.2) {
                ws.rho *= ratio;
                for (int i = 0; i < m; ++i) {
                    ws.rho[i] = std::min(std::max(ws.rho[i], 1e-6), 1e6);
                }
                factor_kkt(ws, st.sigma);
            }
        }
    }
    out.iterations = std::min(iter, st.max_iterations);

    if (admm_status == SolveStatus::Infeasible || admm_status == SolveStatus::Unbounded) {
        out.status = admm_status;
        return out;
    }

    Vec xu = unscale_x(x);
    Vec yu = unscale_y(y);
    Vec yi = mg > 0 ? Vec(yu.head(mg).cwiseMax(0.0)) : Vec();
    Vec ye = me > 0 ? Vec(yu.tail(me)) : Vec();

    // Active-set polish: rows the ADMM drove to their bound with positive
    // multiplier.
    std::vector<int> active;
    for (int i = 0; i < mg; ++i) {
        double slack = qp.h[i] - qp.G.row(i).dot(xu);
        if (yu[i] > 1e-10 || slack < 1e-7 * (1.0 + std::abs(qp.h[i]))) {
            active.push_back(i);
        }
    }
    Vec xp = xu, yip = yi, yep = ye;
    bool polished = polish(qp, active, xp, yip, yep);
    Residuals rp = polished ? kkt_residuals(qp, xp, yip, yep)
                            : Residuals{kInf, kInf, kInf};
    Residuals ra = kkt_residuals(qp, xu, yi, ye);
    double rp_max = std::max({rp.prim, rp.dual, rp.comp});
    double ra_max = std::max({ra.prim, ra.dual, ra.comp});
    bool dual_ok_p = polished;
    if (polished) {
        for (int i = 0; i < yip.size(); ++i) {
            if (yip[i] < -1e-9) dual_ok_p = false;
        }
    }
    if (dual_ok_p && rp_max <= ra_max) {
        out.x = xp;
        out.dual_ineq = yip;
        out.dual_eq = yep;
        out.kkt_residual = rp_max;
    } else {
        out.x = xu;
        out.dual_ineq = yi;
        out.dual_eq = ye;
        out.kkt_residual = ra_max;
    }
    out.objective = 0.5 * out.x.dot(qp.H * out.x) + qp.q.dot(out.x);
    out.status = out.kkt_residual <= st.kkt_tol ? SolveStatus::Optimal
                                                : SolveStatus::IterationLimit;
    return out;
}

}  // namespace hiermpc::optim
