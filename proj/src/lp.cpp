#include "hiermpc/optim/lp.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hiermpc::optim {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::IterationLimit: return "iteration_limit";
    }
    return "unknown";
}

void LinearProgram::validate() const {
    const int n = num_vars();
    if (!c.allFinite()) {
        throw std::invalid_argument("LinearProgram: cost entries must be finite");
    }
    if (G.size() > 0 && (G.cols() != n || G.rows() != h.size())) {
        throw std::invalid_argument("LinearProgram: inequality system dimension mismatch");
    }
    if (A.size() > 0 && (A.cols() != n || A.rows() != b.size())) {
        throw std::invalid_argument("LinearProgram: equality system dimension mismatch");
    }
    if (lo.size() > 0 && lo.size() != n) {
        throw std::invalid_argument("LinearProgram: lower bound dimension mismatch");
    }
    if (hi.size() > 0 && hi.size() != n) {
        throw std::invalid_argument("LinearProgram: upper bound dimension mismatch");
    }
}

RowLp to_row_form(const LinearProgram& lp) {
    lp.validate();
    const int n = lp.num_vars();
    const int mg = static_cast<int>(lp.G.rows());
    const int ma = static_cast<int>(lp.A.rows());
    RowLp out;
    out.c = lp.c;
    out.A.resize(mg + ma, n);
    out.rlo.resize(mg + ma);
    out.rhi.resize(mg + ma);
    if (mg > 0) {
        out.A.topRows(mg) = lp.G;
        out.rlo.head(mg).setConstant(-kInf);
        out.rhi.head(mg) = lp.h;
    }
    if (ma > 0) {
        out.A.bottomRows(ma) = lp.A;
        out.rlo.tail(ma) = lp.b;
        out.rhi.tail(ma) = lp.b;
    }
    out.lo = lp.lo.size() ? lp.lo : Vec::Constant(n, -kInf);
    out.hi = lp.hi.size() ? lp.hi : Vec::Constant(n, kInf);
    return out;
}

namespace {

struct Eta {
    int pos;
    Vec w;
};

// Bounded-variable revised simplex. The basis inverse is represented by an
// LU factorization of the structural kernel (rows not owned by basic
// logicals) plus a product-form eta chain.
struct SimplexImpl {
    const RowLp& lp;
    SimplexOptions opts;
    int n, m, total;

    Vec lo, hi;          // bounds for structurals then logicals
    Vec value;           // current values, all variables
    std::vector<VarStatus> status;
    std::vector<int> basic;        // m entries
    std::vector<int> pos_of;       // column -> basic position, -1 if nonbasic

    // kernel factorization
    std::vector<int> kernel_rows;  // Rc
    std::vector<int> kernel_cols;  // structural basic columns, aligned with lu
    std::vector<int> logical_rows; // Rl
    std::vector<int> logical_pos;  // basic position owning each Rl row
    std::vector<int> struct_pos;   // basic positions of kernel_cols
    Eigen::PartialPivLU<Mat> lu;
    Mat arl;                       // A(Rl, kernel_cols)
    std::vector<Eta> etas;

    long iters = 0;
    long max_iters;
    int degenerate_streak = 0;

    explicit SimplexImpl(const RowLp& problem, const SimplexOptions& options)
        : lp(problem), opts(options) {
        n = lp.cols();
        m = lp.rows();
        total = n + m;
        lo.resize(total);
        hi.resize(total);
        lo.head(n) = lp.lo;
        hi.head(n) = lp.hi;
        lo.tail(m) = lp.rlo;
        hi.tail(m) = lp.rhi;
        value = Vec::Zero(total);
        status.assign(total, VarStatus::AtLower);
        pos_of.assign(total, -1);
        max_iters = opts.max_iterations > 0 ? opts.max_iterations
                                            : 100L * (n + m);
    }

    double cost_of(int j) const { return j < n ? lp.c[j] : 0.0; }

    // Per-variable feasibility slack, mildly scaled so big-M rows do not
    // chatter while staying inside the 1e-8 residual contract.
    double ftol(int j) const {
        double s = 0.0;
        if (std::isfinite(lo[j])) s = std::max(s, std::abs(lo[j]));
        if (std::isfinite(hi[j])) s = std::max(s, std::abs(hi[j]));
        return opts.feas_tol * (1.0 + 1e-4 * s);
    }

    bool primal_feasible() const {
        for (int i = 0; i < m; ++i) {
            const int j = basic[i];
            const double t = ftol(j);
            if (value[j] < lo[j] - t || value[j] > hi[j] + t) return false;
        }
        return true;
    }

    void set_nonbasic_at_best_bound(int j) {
        if (std::isfinite(lo[j])) {
            status[j] = VarStatus::AtLower;
            value[j] = lo[j];
        } else if (std::isfinite(hi[j])) {
            status[j] = VarStatus::AtUpper;
            value[j] = hi[j];
        } else {
            status[j] = VarStatus::FreeNonbasic;
            value[j] = 0.0;
        }
    }

    void start_from_logical_basis() {
        basic.resize(m);
        std::fill(pos_of.begin(), pos_of.end(), -1);
        for (int j = 0; j < n; ++j) {
            set_nonbasic_at_best_bound(j);
        }
        for (int i = 0; i < m; ++i) {
            basic[i] = n + i;
            pos_of[n + i] = i;
            status[n + i] = VarStatus::Basic;
        }
        refactor();
        refresh_basic_values();
    }

    void adopt_basis(const Basis& start) {
        basic = start.basic;
        status = start.status;
        std::fill(pos_of.begin(), pos_of.end(), -1);
        for (int i = 0; i < m; ++i) {
            pos_of[basic[i]] = i;
        }
        for (int j = 0; j < total; ++j) {
            if (status[j] == VarStatus::Basic) continue;
            if (status[j] == VarStatus::AtLower) {
                value[j] = std::isfinite(lo[j]) ? lo[j] : 0.0;
                if (!std::isfinite(lo[j])) set_nonbasic_at_best_bound(j);
            } else if (status[j] == VarStatus::AtUpper) {
                value[j] = std::isfinite(hi[j]) ? hi[j] : 0.0;
                if (!std::isfinite(hi[j])) set_nonbasic_at_best_bound(j);
            } else {
                value[j] = 0.0;
            }
        }
        refactor();
        refresh_basic_values();
    }

    // Factorize the structural kernel of the current basis. Singular bases
    // are repaired greedily: dependent structural columns are swapped for
    // logicals of the rows left without a pivot.
    void refactor() {
        etas.clear();
        while (true) {
            kernel_rows.clear();
            kernel_cols.clear();
            logical_rows.clear();
            logical_pos.clear();
            struct_pos.clear();
            std::vector<char> row_owned(m, 0);
            for (int i = 0; i < m; ++i) {
                if (basic[i] >= n) {
                    row_owned[basic[i] - n] = 1;
                }
            }
            for (int i = 0; i < m; ++i) {
                if (basic[i] >= n) {
                    logical_rows.push_back(basic[i] - n);
                    logical_pos.push_back(i);
                } else {
                    kernel_cols.push_back(basic[i]);
                    struct_pos.push_back(i);
                }
            }
            for (int r = 0; r < m; ++r) {
                if (!row_owned[r]) kernel_rows.push_back(r);
            }
            const int k = static_cast<int>(kernel_cols.size());
            const int nl = static_cast<int>(logical_rows.size());
            Mat K(k, k);
            for (int jc = 0; jc < k; ++jc) {
                for (int ir = 0; ir < k; ++ir) {
                    K(ir, jc) = lp.A(kernel_rows[ir], kernel_cols[jc]);
                }
            }
            arl.resize(nl, k);
            for (int jc = 0; jc < k; ++jc) {
                for (int ir = 0; ir < nl; ++ir) {
                    arl(ir, jc) = lp.A(logical_rows[ir], kernel_cols[jc]);
                }
            }
            if (k == 0) {
                return;
            }
            lu.compute(K);
            Vec diag = lu.matrixLU().diagonal().cwiseAbs();
            double dmax = std::max(diag.maxCoeff(), 1.0);
            if (diag.minCoeff() > 1e-12 * dmax) {
                return;
            }
            // Greedy elimination to find a maximal independent column subset.
            Mat W = K;
            std::vector<char> row_used(k, 0);
            std::vector<int> dependent;
            for (int jc = 0; jc < k; ++jc) {
                int piv = -1;
                double best = 1e-10 * dmax;
                for (int ir = 0; ir < k; ++ir) {
                    if (!row_used[ir] && std::abs(W(ir, jc)) > best) {
                        best = std::abs(W(ir, jc));
                        piv = ir;
                    }
                }
                if (piv < 0) {
                    dependent.push_back(jc);
                    continue;
                }
                row_used[piv] = 1;
                for (int ir = 0; ir < k; ++ir) {
                    if (ir == piv || std::abs(W(ir, jc)) == 0.0) continue;
                    W.row(ir) -= (W(ir, jc) / W(piv, jc)) * W.row(piv);
                }
            }
            std::vector<int> free_rows;
            for (int ir = 0; ir < k; ++ir) {
                if (!row_used[ir]) free_rows.push_back(kernel_rows[ir]);
            }
            for (size_t t = 0; t < dependent.size() && t < free_rows.size(); ++t) {
                const int eject_pos = struct_pos[dependent[t]];
                const int old_col = basic[eject_pos];
                pos_of[old_col] = -1;
                set_nonbasic_at_best_bound(old_col);
                const int lcol = n + free_rows[t];
                basic[eject_pos] = lcol;
                pos_of[lcol] = eject_pos;
                status[lcol] = VarStatus::Basic;
            }
        }
    }

    // Solve B z = v; z indexed by basic position.
    Vec ftran(const Vec& v) const {
        const int k = static_cast<int>(kernel_cols.size());
        Vec z(m);
        Vec zs;
        if (k > 0) {
            Vec vrc(k);
            for (int i = 0; i < k; ++i) vrc[i] = v[kernel_rows[i]];
            zs = lu.solve(vrc);
            for (int i = 0; i < k; ++i) z[struct_pos[i]] = zs[i];
        }
        if (!logical_rows.empty()) {
            Vec rl = k > 0 ? Vec(arl * zs) : Vec(Vec::Zero(logical_rows.size()));
            for (size_t i = 0; i < logical_rows.size(); ++i) {
                z[logical_pos[i]] = rl[static_cast<int>(i)] - v[logical_rows[i]];
            }
        }
        for (const Eta& e : etas) {
            double t = z[e.pos] / e.w[e.pos];
            if (t != 0.0) {
                z -= e.w * t;
            }
            z[e.pos] = t;
        }
        return z;
    }

    // Solve B' y = w; w indexed by basic position, y indexed by row.
    Vec btran(Vec w) const {
        for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
            double dot = it->w.dot(w);
            w[it->pos] = (w[it->pos] - (dot - it->w[it->pos] * w[it->pos])) / it->w[it->pos];
        }
        const int k = static_cast<int>(kernel_cols.size());
        Vec y(m);
        for (size_t i = 0; i < logical_rows.size(); ++i) {
            y[logical_rows[i]] = -w[logical_pos[i]];
        }
        if (k > 0) {
            Vec ws(k);
            for (int i = 0; i < k; ++i) ws[i] = w[struct_pos[i]];
            if (!logical_rows.empty()) {
                Vec yrl(static_cast<int>(logical_rows.size()));
                for (size_t i = 0; i < logical_rows.size(); ++i) {
                    yrl[static_cast<int>(i)] = y[logical_rows[i]];
                }
                ws -= arl.transpose() * yrl;
            }
            Vec yrc = lu.transpose().solve(ws);
            for (int i = 0; i < k; ++i) y[kernel_rows[i]] = yrc[i];
        }
        return y;
    }

    // Column of the full system [A, -I].
    Vec column(int j) const {
        if (j < n) return lp.A.col(j);
        Vec e = Vec::Zero(m);
        e[j - n] = -1.0;
        return e;
    }

    void refresh_basic_values() {
        Vec rhs = Vec::Zero(m);
        for (int j = 0; j < total; ++j) {
            if (status[j] == VarStatus::Basic || value[j] == 0.0) continue;
            if (j < n) {
                rhs -= lp.A.col(j) * value[j];
            } else {
                rhs[j - n] += value[j];
            }
        }
        Vec xb = ftran(rhs);
        for (int i = 0; i < m; ++i) {
            value[basic[i]] = xb[i];
        }
    }

    Vec basic_costs(bool phase1) const {
        Vec cb(m);
        for (int i = 0; i < m; ++i) {
            const int j = basic[i];
            if (phase1) {
                const double t = ftol(j);
                if (value[j] < lo[j] - t) {
                    cb[i] = -1.0;
                } else if (value[j] > hi[j] + t) {
                    cb[i] = 1.0;
                } else {
                    cb[i] = 0.0;
                }
            } else {
                cb[i] = cost_of(j);
            }
        }
        return cb;
    }

    // Reduced costs for all columns given row duals y.
    Vec reduced_costs(const Vec& y, bool phase1) const {
        Vec d(total);
        d.head(n) = (phase1 ? Vec(Vec::Zero(n)) : lp.c) - lp.A.transpose() * y;
        d.tail(m) = y;
        return d;
    }

    bool fixed(int j) const { return lo[j] == hi[j] && std::isfinite(lo[j]); }

    int pick_entering(const Vec& d, bool bland) const {
        int best = -1;
        double best_score = opts.opt_tol;
        for (int j = 0; j < total; ++j) {
            if (status[j] == VarStatus::Basic || fixed(j)) continue;
            double score = 0.0;
            if (status[j] == VarStatus::AtLower && d[j] < -opts.opt_tol) {
                score = -d[j];
            } else if (status[j] == VarStatus::AtUpper && d[j] > opts.opt_tol) {
                score = d[j];
            } else if (status[j] == VarStatus::FreeNonbasic && std::abs(d[j]) > opts.opt_tol) {
                score = std::abs(d[j]);
            } else {
                continue;
            }
            if (bland) {
                return j;
            }
            if (score > best_score) {
                best_score = score;
                best = j;
            }
        }
        return best;
    }

    struct Ratio {
        double theta = kInf;
        int blocking_pos = -1;   // basic position, -1 means the entering bound
        bool blocking_at_upper = false;
    };

    // Bounded ratio test. In phase 1, basics that violate a bound block when
    // they reach it; feasible basics block before leaving their range.
    Ratio ratio_test(int q, double sigma, const Vec& w, bool phase1, bool bland) const {
        Ratio r;
        double span = hi[q] - lo[q];
        if (std::isfinite(span)) {
            r.theta = span;
            r.blocking_pos = -1;
        }
        for (int i = 0; i < m; ++i) {
            const int j = basic[i];
            const double delta = -sigma * w[i];
            if (std::abs(delta) <= opts.pivot_tol) continue;
            const double v = value[j];
            const double t = ftol(j);
            double theta_i = kInf;
            bool at_upper = false;
            if (phase1 && v < lo[j] - t) {
                if (delta > 0.0) {
                    theta_i = (lo[j] - v) / delta;
                    at_upper = false;
                }
            } else if (phase1 && v > hi[j] + t) {
                if (delta < 0.0) {
                    theta_i = (hi[j] - v) / delta;
                    at_upper = true;
                }
            } else {
                if (delta > 0.0 && std::isfinite(hi[j])) {
                    theta_i = (hi[j] - v) / delta;
                    at_upper = true;
                } else if (delta < 0.0 && std::isfinite(lo[j])) {
                    theta_i = (lo[j] - v) / delta;
                    at_upper = false;
                }
            }
            if (theta_i == kInf) continue;
            theta_i = std::max(theta_i, 0.0);
            bool take = false;
            if (theta_i < r.theta - 1e-12) {
                take = true;
            } else if (theta_i < r.theta + 1e-12 && r.blocking_pos >= 0) {
                if (bland) {
                    take = basic[i] < basic[r.blocking_pos];
                } else {
                    take = std::abs(w[i]) > std::abs(w[r.blocking_pos]);
                }
            }
            if (take) {
                r.theta = theta_i;
                r.blocking_pos = i;
                r.blocking_at_upper = at_upper;
            }
        }
        return r;
    }

    void apply_step(int q, double sigma, double theta, const Vec& w) {
        if (theta != 0.0) {
            for (int i = 0; i < m; ++i) {
                value[basic[i]] -= sigma * theta * w[i];
            }
            value[q] += sigma * theta;
        }
    }

    void pivot(int q, int leave_pos, bool leave_at_upper, const Vec& w) {
        const int leaving = basic[leave_pos];
        status[leaving] = leave_at_upper ? VarStatus::AtUpper : VarStatus::AtLower;
        value[leaving] = leave_at_upper ? hi[leaving] : lo[leaving];
        pos_of[leaving] = -1;
        basic[leave_pos] = q;
        pos_of[q] = leave_pos;
        status[q] = VarStatus::Basic;
        etas.push_back(Eta{leave_pos, w});
        if (static_cast<int>(etas.size()) >= opts.refactor_interval) {
            refactor();
            refresh_basic_values();
        }
    }

    // Returns true when the phase finished (feasible/optimal), false on an
    // iteration-limit stop.
    enum class PhaseOutcome { Done, NoProgress, Limit, Unbounded };

    PhaseOutcome run_phase(bool phase1) {
        degenerate_streak = 0;
        while (true) {
            if (iters >= max_iters) return PhaseOutcome::Limit;
            if (phase1 && primal_feasible()) {
                return PhaseOutcome::Done;
            }
            Vec cb = basic_costs(phase1);
            Vec y = btran(cb);
            Vec d = reduced_costs(y, phase1);
            const bool bland = degenerate_streak >= opts.bland_after_degenerate;
            int q = pick_entering(d, bland);
            if (q < 0) {
                return phase1 ? PhaseOutcome::NoProgress : PhaseOutcome::Done;
            }
            double sigma;
            if (status[q] == VarStatus::AtLower) {
                sigma = 1.0;
            } else if (status[q] == VarStatus::AtUpper) {
                sigma = -1.0;
            } else {
                sigma = d[q] < 0.0 ? 1.0 : -1.0;
            }
            Vec w = ftran(column(q));
            Ratio r = ratio_test(q, sigma, w, phase1, bland);
            ++iters;
            if (r.theta == kInf) {
                return phase1 ? PhaseOutcome::NoProgress : PhaseOutcome::Unbounded;
            }
            if (r.theta <= opts.feas_tol) {
                ++degenerate_streak;
            } else {
                degenerate_streak = 0;
            }
            apply_step(q, sigma, r.theta, w);
            if (r.blocking_pos < 0) {
                // bound flip
                status[q] = status[q] == VarStatus::AtLower ? VarStatus::AtUpper
                                                            : VarStatus::AtLower;
                value[q] = status[q] == VarStatus::AtUpper ? hi[q] : lo[q];
            } else {
                if (std::abs(w[r.blocking_pos]) < opts.pivot_tol) {
                    refactor();
                    refresh_basic_values();
                    continue;
                }
                pivot(q, r.blocking_pos, r.blocking_at_upper, w);
            }
        }
    }

    // Dual simplex from a dual-feasible basis after bound changes.
    PhaseOutcome run_dual() {
        degenerate_streak = 0;
        while (true) {
            if (iters >= max_iters) return PhaseOutcome::Limit;
            int leave_pos = -1;
            double worst = 0.0;
            bool below = false;
            for (int i = 0; i < m; ++i) {
                const int j = basic[i];
                const double t = ftol(j);
                double viol_lo = lo[j] - value[j] - t;
                double viol_hi = value[j] - hi[j] - t;
                if (viol_lo > worst) {
                    worst = viol_lo;
                    leave_pos = i;
                    below = true;
                }
                if (viol_hi > worst) {
                    worst = viol_hi;
                    leave_pos = i;
                    below = false;
                }
            }
            if (leave_pos < 0) return PhaseOutcome::Done;

            Vec cb = basic_costs(false);
            Vec y = btran(cb);
            Vec d = reduced_costs(y, false);

            Vec ep = Vec::Zero(m);
            ep[leave_pos] = 1.0;
            Vec rho = btran(ep);
            Vec alpha(total);
            alpha.head(n) = lp.A.transpose() * rho;
            alpha.tail(m) = -rho;

            const double dir = below ? 1.0 : -1.0;  // required movement of leaving value
            const bool bland = degenerate_streak >= opts.bland_after_degenerate;
            int q = -1;
            double best_ratio = kInf;
            double best_alpha = 0.0;
            for (int j = 0; j < total; ++j) {
                if (status[j] == VarStatus::Basic || fixed(j)) continue;
                const double a = alpha[j];
                double ratio;
                if (status[j] == VarStatus::AtLower && dir * a < -opts.pivot_tol) {
                    ratio = d[j] / (-dir * a);
                } else if (status[j] == VarStatus::AtUpper && dir * a > opts.pivot_tol) {
                    ratio = -d[j] / (dir * a);
                } else if (status[j] == VarStatus::FreeNonbasic &&
                           std::abs(a) > opts.pivot_tol) {
                    ratio = std::abs(d[j]) / std::abs(a);
                } else {
                    continue;
                }
                ratio = std::max(ratio, 0.0);
                bool take = false;
                if (q < 0) {
                    take = true;
                } else if (bland) {
                    take = ratio < best_ratio - 1e-12 ||
                           (ratio < best_ratio + 1e-12 && j < q);
                } else if (ratio < best_ratio - 1e-12) {
                    take = true;
                } else if (ratio < best_ratio + 1e-12 && std::abs(a) > best_alpha) {
                    take = true;
                }
                if (take) {
                    q = j;
                    best_ratio = ratio;
                    best_alpha = std::abs(a);
                }
            }
            if (q < 0) return PhaseOutcome::NoProgress;  // primal infeasible

            ++iters;
            if (best_ratio <= opts.opt_tol) {
                ++degenerate_streak;
            } else {
                degenerate_streak = 0;
            }

            const int leaving = basic[leave_pos];
            const double target = below ? lo[leaving] : hi[leaving];
            Vec w = ftran(column(q));
            if (std::abs(w[leave_pos]) < opts.pivot_tol) {
                refactor();
                refresh_basic_values();
                w = ftran(column(q));
                if (std::abs(w[leave_pos]) < opts.pivot_tol) {
                    return PhaseOutcome::NoProgress;
                }
            }
            const double delta_q = (target - value[leaving]) / (-w[leave_pos]);
            for (int i = 0; i < m; ++i) {
                value[basic[i]] -= delta_q * w[i];
            }
            value[q] += delta_q;
            pivot(q, leave_pos, !below, w);
        }
    }

    bool dual_feasible(const Vec& d) const {
        for (int j = 0; j < total; ++j) {
            if (status[j] == VarStatus::Basic || fixed(j)) continue;
            if (status[j] == VarStatus::AtLower && d[j] < -1e-7) return false;
            if (status[j] == VarStatus::AtUpper && d[j] > 1e-7) return false;
        }
        return true;
    }

    SimplexResult finish(SolveStatus st) {
        SimplexResult res;
        res.status = st;
        res.iterations = iters;
        res.x = value.head(n);
        Vec cb = basic_costs(false);
        Vec y = btran(cb);
        res.row_duals = y;
        Vec d = reduced_costs(y, false);
        res.reduced_costs = d.head(n);
        res.objective = lp.c.size() ? lp.c.dot(res.x) : 0.0;
        res.basis.status = status;
        res.basis.basic = basic;
        return res;
    }

    SimplexResult solve_cold() {
        start_from_logical_basis();
        PhaseOutcome p1 = run_phase(true);
        if (p1 == PhaseOutcome::Limit) return finish(SolveStatus::IterationLimit);
        if (p1 == PhaseOutcome::NoProgress && !primal_feasible()) {
            return finish(SolveStatus::Infeasible);
        }
        refactor();
        refresh_basic_values();
        PhaseOutcome p2 = run_phase(false);
        if (p2 == PhaseOutcome::Limit) return finish(SolveStatus::IterationLimit);
        if (p2 == PhaseOutcome::Unbounded) return finish(SolveStatus::Unbounded);
        refresh_basic_values();
        return finish(SolveStatus::Optimal);
    }

    SimplexResult solve_warm(const Basis& start) {
        adopt_basis(start);
        Vec cb = basic_costs(false);
        Vec y = btran(cb);
        Vec d = reduced_costs(y, false);
        if (!dual_feasible(d)) {
            return solve_cold();
        }
        PhaseOutcome out = run_dual();
        if (out == PhaseOutcome::Limit) return finish(SolveStatus::IterationLimit);
        if (out == PhaseOutcome::NoProgress) return finish(SolveStatus::Infeasible);
        refresh_basic_values();
        return finish(SolveStatus::Optimal);
    }
};

}  // namespace

SimplexSolver::SimplexSolver(const RowLp& lp, SimplexOptions opts)
    : lp_(lp), opts_(opts) {}

SimplexResult SimplexSolver::solve() {
    SimplexImpl impl(lp_, opts_);
    return impl.solve_cold();
}

SimplexResult SimplexSolver::solve_from_basis(const Basis& start, const Vec& new_lo,
                                              const Vec& new_hi) {
    lp_.lo = new_lo;
    lp_.hi = new_hi;
    SimplexImpl impl(lp_, opts_);
    return impl.solve_warm(start);
}

LpSolution solve_lp(const LinearProgram& lp) {
    RowLp row = to_row_form(lp);
    SimplexSolver solver(row);
    SimplexResult r = solver.solve();
    LpSolution out;
    out.status = r.status;
    out.objective = r.objective;
    out.x = r.x;
    out.iterations = r.iterations;
    const int mg = static_cast<int>(lp.G.rows());
    const int ma = static_cast<int>(lp.A.rows());
    if (r.row_duals.size() == mg + ma) {
        out.dual_ineq = r.row_duals.head(mg);
        out.dual_eq = r.row_duals.tail(ma);
    }
    out.reduced_costs = r.reduced_costs;
    return out;
}

double LpSolution::dual_objective(const LinearProgram& lp) const {
    // Active <=-rows carry y <= 0 and contribute y*h; equality rows y*b;
    // variables at a bound contribute their reduced cost times the bound.
    double obj = 0.0;
    const int mg = static_cast<int>(lp.G.rows());
    for (int i = 0; i < mg; ++i) {
        obj += dual_ineq[i] * lp.h[i];
    }
    for (int i = 0; i < static_cast<int>(lp.A.rows()); ++i) {
        obj += dual_eq[i] * lp.b[i];
    }
    const int n = lp.num_vars();
    for (int j = 0; j < n; ++j) {
        const double z = reduced_costs[j];
        if (std::abs(z) < 1e-11) continue;
        double lo = lp.lo.size() ? lp.lo[j] : -kInf;
        double hi = lp.hi.size() ? lp.hi[j] : kInf;
        if (z > 0.0 && std::isfinite(lo)) {
            obj += z * lo;
        } else if (z < 0.0 && std::isfinite(hi)) {
            obj += z * hi;
        }
    }
    return obj;
}

void write_lp_file(const LinearProgram& lp, const std::string& path,
                   const std::vector<int>& binary_indices) {
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("write_lp_file: cannot open " + path);
    }
    auto var = [](int j) { return "x" + std::to_string(j); };
    auto term = [&](double coef, int j, bool first) {
        std::ostringstream s;
        if (first) {
            s << coef << " " << var(j);
        } else {
            s << (coef >= 0 ? " + " : " - ") << std::abs(coef) << " " << var(j);
        }
        return s.str();
    };
    f << "Minimize\n obj:";
    bool first = true;
    for (int j = 0; j < lp.num_vars(); ++j) {
        if (lp.c[j] == 0.0) continue;
        f << " " << term(lp.c[j], j, first);
        first = false;
    }
    if (first) f << " 0 x0";
    f << "\nSubject To\n";
    auto write_row = [&](const Mat& M, int i, const char* rel, double rhs, const char* tag) {
        f << " " << tag << i << ":";
        bool fst = true;
        for (int j = 0; j < lp.num_vars(); ++j) {
            if (M(i, j) == 0.0) continue;
            f << " " << term(M(i, j), j, fst);
            fst = false;
        }
        if (fst) f << " 0 x0";
        f << " " << rel << " " << rhs << "\n";
    };
    for (int i = 0; i < lp.G.rows(); ++i) write_row(lp.G, i, "<=", lp.h[i], "g");
    for (int i = 0; i < lp.A.rows(); ++i) write_row(lp.A, i, "=", lp.b[i], "e");
    f << "Bounds\n";
    for (int j = 0; j < lp.num_vars(); ++j) {
        double lo = lp.lo.size() ? lp.lo[j] : -kInf;
        double hi = lp.hi.size() ? lp.hi[j] : kInf;
        if (lo == -kInf && hi == kInf) {
            f << " " << var(j) << " free\n";
        } else {
            if (lo == -kInf)
                f << " -inf <= " << var(j) << " <= " << hi << "\n";
            else if (hi == kInf)
                f << " " << var(j) << " >= " << lo << "\n";
            else
                f << " " << lo << " <= " << var(j) << " <= " << hi << "\n";
        }
    }
    if (!binary_indices.empty()) {
        f << "Binary\n";
        for (int j : binary_indices) f << " " << var(j) << "\n";
    }
    f << "End\n";
}

}  // namespace hiermpc::optim
