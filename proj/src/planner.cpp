#include "hiermpc/planner.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

namespace hiermpc {

using optim::LinearProgram;
using optim::MixedIntegerLinearProgram;
using optim::SolveStatus;

namespace {

// Conservative extra margin on enlarged obstacle offsets so that exact
// boundary checks downstream never flip on solver round-off.
constexpr double kFaceMargin = 1e-9;

double support_or_inf(const HPolytope& P, const Vec& a) {
    return support_polytope(P, a);
}

}  // namespace

Mode prepare_mode(const std::string& name, const HPolytope& X, const HPolytope& U,
                  const Zonotope& W, const Mat& K, const LtiModel& fine, int M,
                  double alpha_target) {
    if (X.dim() != fine.n() || U.dim() != fine.m() || W.dim() != fine.n()) {
        throw std::invalid_argument("prepare_mode: dimension mismatch");
    }
    if (!W.origin_centered(1e-12)) {
        throw std::invalid_argument("prepare_mode: W must be origin-centered");
    }
    Mode mode;
    mode.name = name;
    mode.X = X.normalized();
    mode.U = U.normalized();
    mode.W = W;

    const Mat A_K = fine.A + fine.B * K;
    if (spectral_radius(A_K) >= 1.0) {
        std::cerr << "[hiermpc] warning: mode '" << name << "' has non-Schur A+BK\n";
    }
    mode.tubes = error_tube(A_K, W, M);
    auto rpi = mrpi_outer(A_K, W, alpha_target);
    mode.Z = rpi.Z;
    mode.s = rpi.s;
    mode.alpha = rpi.alpha;
    mode.margins.reserve(M + 1);
    for (int j = 0; j <= M; ++j) {
        mode.margins.push_back(tube_margin(A_K, W, rpi.s, rpi.alpha, j));
    }

    // tube containment E(j) in Z, on the containment template
    for (const Vec& d : containment_template(W)) {
        const double hz = mode.Z.support(d);
        for (int j = 0; j <= M; ++j) {
            if (mode.tubes[j].support(d) > hz + 1e-9) {
                throw std::runtime_error("prepare_mode: tube escapes the invariant set in mode '" +
                                         name + "'");
            }
        }
    }

    mode.X_tight = pontryagin_diff(mode.X, mode.Z);
    mode.U_tight = pontryagin_diff(mode.U, linear_map(K, mode.Z));
    if (mode.X_tight.is_empty() || mode.U_tight.is_empty()) {
        throw std::invalid_argument("prepare_mode: tightened sets of mode '" + name +
                                    "' are empty");
    }
    mode.X_stage.reserve(M + 1);
    mode.U_stage.reserve(M + 1);
    for (int j = 0; j <= M; ++j) {
        mode.X_stage.push_back(pontryagin_diff(mode.X, mode.tubes[j]));
        mode.U_stage.push_back(pontryagin_diff(mode.U, linear_map(K, mode.tubes[j])));
        if (mode.X_stage.back().is_empty() || mode.U_stage.back().is_empty()) {
            throw std::invalid_argument("prepare_mode: stage-tightened set empty at j=" +
                                        std::to_string(j) + " in mode '" + name + "'");
        }
    }
    mode.zero_terminal_input_ok = mode.U_tight.contains(Vec::Zero(fine.m()), 1e-10);
    return mode;
}

std::vector<Obstacle> prepare_obstacles(const std::vector<HPolytope>& raw,
                                        const std::vector<Mode>& modes, const Mat& C) {
    std::vector<Obstacle> out;
    out.reserve(raw.size());
    for (const HPolytope& o : raw) {
        if (o.dim() != C.rows()) {
            throw std::invalid_argument("prepare_obstacles: obstacle dimension mismatch");
        }
        if (!is_bounded(o)) {
            throw std::invalid_argument("prepare_obstacles: obstacle must be bounded");
        }
        Obstacle ob;
        ob.base = o.normalized();
        for (const Mode& mode : modes) {
            ob.enlarged.push_back(enlarge_obstacle(ob.base, linear_map(-C, mode.Z)));
        }
        out.push_back(std::move(ob));
    }
    return out;
}

PreparedPlanner prepare_planner(const ModelBundle& model, const std::vector<Mode>& modes,
                                const std::vector<Obstacle>& obstacles) {
    const int n = model.n();
    const int m = model.m();
    const int M = model.steps_per_plan;
    PreparedPlanner prep;

    prep.roll_A.resize(M + 1);
    prep.roll_S.resize(M + 1);
    prep.roll_A[0] = Mat::Identity(n, n);
    prep.roll_S[0] = Mat::Zero(n, m);
    for (int l = 1; l <= M; ++l) {
        prep.roll_A[l] = model.fine.A * prep.roll_A[l - 1];
        prep.roll_S[l] = model.fine.A * prep.roll_S[l - 1] + model.fine.B;
    }

    for (const Mode& mode : modes) {
        const int rx = mode.X_tight.num_faces();
        const int ru = mode.U_tight.num_faces();
        Mat F = Mat::Zero(rx + ru + (M - 1) * rx, n + m);
        Vec g(F.rows());
        int r = 0;
        F.block(r, 0, rx, n) = mode.X_tight.F;
        g.segment(r, rx) = mode.X_tight.g;
        r += rx;
        F.block(r, n, ru, m) = mode.U_tight.F;
        g.segment(r, ru) = mode.U_tight.g;
        r += ru;
        for (int l = 1; l < M; ++l) {
            F.block(r, 0, rx, n) = mode.X_tight.F * prep.roll_A[l];
            F.block(r, n, rx, m) = mode.X_tight.F * prep.roll_S[l];
            g.segment(r, rx) = mode.X_tight.g;
            r += rx;
        }
        prep.stage.push_back(prune_redundant_rows(HPolytope(F, g)));
    }

    const Mat& C = model.fine.C;
    prep.faces.resize(modes.size());
    for (size_t i = 0; i < modes.size(); ++i) {
        prep.faces[i].resize(obstacles.size());
        for (size_t l = 0; l < obstacles.size(); ++l) {
            const Obstacle& ob = obstacles[l];
            const int q = ob.base.num_faces();
            prep.faces[i][l].resize(q);
            for (int a = 0; a < q; ++a) {
                PreparedPlanner::FaceRows& fr = prep.faces[i][l][a];
                fr.rhs = ob.enlarged[i][a] + kFaceMargin;
                const Vec ec = (ob.base.F.row(a) * C).transpose();
                fr.sample_row.resize(M);
                fr.impossible.assign(M, 0);
                for (int s = 0; s < M; ++s) {
                    Vec row(n + m);
                    row.head(n) = prep.roll_A[s].transpose() * ec;
                    row.tail(m) = prep.roll_S[s].transpose() * ec;
                    const double rmax = support_or_inf(prep.stage[i], row);
                    const double rmin = -support_or_inf(prep.stage[i], Vec(-row));
                    if (rmin >= fr.rhs) {
                        fr.sample_row[s] = Vec();  // always separated
                    } else if (rmax < fr.rhs) {
                        fr.impossible[s] = 1;
                        fr.sample_row[s] = Vec();
                    } else {
                        fr.sample_row[s] = row;
                    }
                }
                fr.terminal_row = ec;
                fr.terminal_rhs = fr.rhs;
                const double tmax = support_or_inf(modes[i].X_tight, ec);
                const double tmin = -support_or_inf(modes[i].X_tight, Vec(-ec));
                fr.terminal_always = tmin >= fr.rhs;
                fr.terminal_impossible = tmax < fr.rhs;
            }
        }
    }
    return prep;
}

int PlanMilpLayout::b(int mode, int obstacle, int set, int face) const {
    int prefix = 0;
    for (int l = 0; l < obstacle; ++l) {
        prefix += sets_per_stage_pair * face_counts[l];
    }
    int stride = 0;
    for (int fc : face_counts) stride += sets_per_stage_pair * fc;
    return b_base + mode * stride + prefix + set * face_counts[obstacle] + face;
}

int PlanMilpLayout::num_binaries() const {
    int stride = 0;
    for (int fc : face_counts) stride += sets_per_stage_pair * fc;
    return n_modes + n_modes * stride;
}

MixedIntegerLinearProgram build_planning_milp(const PlanProblem& p, PlanMilpLayout* layout_out) {
    if (!p.model || !p.modes || !p.obstacles || !p.prep) {
        throw std::invalid_argument("build_planning_milp: missing problem data");
    }
    const ModelBundle& model = *p.model;
    const auto& modes = *p.modes;
    const auto& obstacles = *p.obstacles;
    const PreparedPlanner& prep = *p.prep;
    const int n = model.n();
    const int m = model.m();
    const int N = p.N;
    const int M = model.steps_per_plan;
    const int n_modes = static_cast<int>(modes.size());
    if (N < 1 || n_modes < 1) {
        throw std::invalid_argument("build_planning_milp: need N >= 1 and at least one mode");
    }
    if (p.x0.size() != n || p.goal.size() != n) {
        throw std::invalid_argument("build_planning_milp: state dimension mismatch");
    }

    std::vector<char> usable(n_modes, 1);
    int usable_count = 0;
    for (int i = 0; i < n_modes; ++i) {
        usable[i] = !prep.stage[i].is_empty() && modes[i].zero_terminal_input_ok;
        usable_count += usable[i];
    }
    if (usable_count == 0) {
        throw std::invalid_argument(
            "build_planning_milp: every mode has an empty tightened stage set or an "
            "inadmissible zero terminal input");
    }

    const bool committed = p.open_loop && p.committed_x0.has_value();

    PlanMilpLayout lay;
    lay.n = n;
    lay.m = m;
    lay.N = N;
    lay.M = M;
    lay.n_modes = n_modes;
    lay.x_base = 0;
    lay.u_base = n * (N + 1);
    lay.t_goal = lay.u_base + m * N;
    lay.t_x_base = lay.t_goal + 1;
    lay.t_u_base = lay.t_x_base + N;
    int at = lay.t_u_base + N;
    for (int i = 0; i < n_modes; ++i) {
        lay.xi_base.push_back(at);
        lay.xi_len.push_back(modes[i].Z.num_generators());
        at += lay.xi_len.back();
    }
    lay.d_base = at;
    at += n_modes;
    lay.b_base = at;
    const bool shared = p.policy == IntersamplePolicy::SharedFace;
    lay.sets_per_stage_pair = shared ? N : N * M + 1;
    for (const Obstacle& ob : obstacles) {
        lay.face_counts.push_back(ob.base.num_faces());
    }
    lay.total = lay.b_base + (lay.num_binaries() - n_modes);

    if (layout_out) *layout_out = lay;

    // --- count rows (the +1 equality is the one-active-mode row) ---
    const int n_steady = static_cast<int>(model.steady_zero_idx.size());
    int eq_rows = n * N + n_steady + (committed ? n : 0) + 1;
    int ineq_rows = 0;
    if (!committed) ineq_rows += 2 * n * n_modes;
    for (int i = 0; i < n_modes; ++i) {
        ineq_rows += prep.stage[i].num_faces() * N;
        ineq_rows += modes[i].X_tight.num_faces();
    }
    // obstacle separation rows and cardinality rows
    int sum_rows = 0;
    int obs_rows = 0;
    for (int i = 0; i < n_modes; ++i) {
        for (size_t l = 0; l < obstacles.size(); ++l) {
            sum_rows += lay.sets_per_stage_pair;
            for (int a = 0; a < lay.face_counts[l]; ++a) {
                const auto& fr = prep.faces[i][l][a];
                bool face_impossible = false;
                int kept = 0;
                for (int s = 0; s < M; ++s) {
                    if (fr.impossible[s]) face_impossible = true;
                    if (fr.sample_row[s].size() > 0) ++kept;
                }
                if (shared) {
                    if (face_impossible) continue;  // binaries fixed, no rows
                    obs_rows += kept * N;
                    if (!fr.terminal_always && !fr.terminal_impossible) obs_rows += 1;
                } else {
                    for (int j = 0; j < N; ++j) {
                        for (int s = 0; s < M; ++s) {
                            if (!fr.impossible[s] && fr.sample_row[s].size() > 0) ++obs_rows;
                        }
                    }
                    if (!fr.terminal_always && !fr.terminal_impossible) obs_rows += 1;
                }
            }
        }
    }
    ineq_rows += obs_rows + sum_rows;
    ineq_rows += 2 * n + 2 * n * N + 2 * m * N;  // epigraphs

    MixedIntegerLinearProgram milp;
    LinearProgram& lp = milp.lp;
    lp.c = Vec::Zero(lay.total);
    lp.G = Mat::Zero(ineq_rows, lay.total);
    lp.h = Vec::Zero(ineq_rows);
    lp.A = Mat::Zero(eq_rows, lay.total);
    lp.b = Vec::Zero(eq_rows);
    lp.lo = Vec::Constant(lay.total, -kInf);
    lp.hi = Vec::Constant(lay.total, kInf);

    // objective and simple bounds
    lp.c[lay.t_goal] = 1.0;
    for (int j = 0; j < N; ++j) {
        lp.c[lay.t_x(j)] = p.alpha_x;
        lp.c[lay.t_u(j)] = p.alpha_u;
        lp.lo[lay.t_x(j)] = 0.0;
        lp.lo[lay.t_u(j)] = 0.0;
    }
    lp.lo[lay.t_goal] = 0.0;
    for (int i = 0; i < n_modes; ++i) {
        for (int t = 0; t < lay.xi_len[i]; ++t) {
            lp.lo[lay.xi_base[i] + t] = -1.0;
            lp.hi[lay.xi_base[i] + t] = 1.0;
        }
        lp.lo[lay.d(i)] = 0.0;
        lp.hi[lay.d(i)] = usable[i] ? 1.0 : 0.0;
        milp.binary_indices.push_back(lay.d(i));
    }
    for (int i = 0; i < n_modes; ++i) {
        for (size_t l = 0; l < obstacles.size(); ++l) {
            for (int set = 0; set < lay.sets_per_stage_pair; ++set) {
                for (int a = 0; a < lay.face_counts[l]; ++a) {
                    const int idx = lay.b(i, static_cast<int>(l), set, a);
                    lp.lo[idx] = 0.0;
                    lp.hi[idx] = 1.0;
                    milp.binary_indices.push_back(idx);
                }
            }
        }
    }

    int er = 0;  // equality row cursor
    int ir = 0;  // inequality row cursor

    // dynamics x(j+1) = Ap x(j) + Bp u(j)
    for (int j = 0; j < N; ++j) {
        for (int r = 0; r < n; ++r) {
            lp.A(er, lay.x(j + 1, r)) = 1.0;
            for (int cidx = 0; cidx < n; ++cidx) {
                lp.A(er, lay.x(j, cidx)) -= model.Ap(r, cidx);
            }
            for (int cidx = 0; cidx < m; ++cidx) {
                lp.A(er, lay.u(j, cidx)) -= model.Bp(r, cidx);
            }
            lp.b[er] = 0.0;
            ++er;
        }
    }
    // terminal steady subspace
    for (int idx : model.steady_zero_idx) {
        lp.A(er, lay.x(N, idx)) = 1.0;
        lp.b[er] = 0.0;
        ++er;
    }
    if (committed) {
        for (int r = 0; r < n; ++r) {
            lp.A(er, lay.x(0, r)) = 1.0;
            lp.b[er] = (*p.committed_x0)[r];
            ++er;
        }
    } else {
        // initial contract membership, relaxed for inactive modes
        for (int i = 0; i < n_modes; ++i) {
            const Mat& Gi = modes[i].Z.G;
            for (int r = 0; r < n; ++r) {
                lp.G(ir, lay.x(0, r)) = 1.0;
                for (int t = 0; t < lay.xi_len[i]; ++t) {
                    lp.G(ir, lay.xi_base[i] + t) = Gi(r, t);
                }
                lp.G(ir, lay.d(i)) = p.big_m;
                lp.h[ir] = p.x0[r] + p.big_m;
                ++ir;
                lp.G(ir, lay.x(0, r)) = -1.0;
                for (int t = 0; t < lay.xi_len[i]; ++t) {
                    lp.G(ir, lay.xi_base[i] + t) = -Gi(r, t);
                }
                lp.G(ir, lay.d(i)) = p.big_m;
                lp.h[ir] = -p.x0[r] + p.big_m;
                ++ir;
            }
        }
    }

    // stage sets (state, input, inter-sample state), relaxed per mode
    for (int i = 0; i < n_modes; ++i) {
        const HPolytope& st = prep.stage[i];
        for (int j = 0; j < N; ++j) {
            for (int r = 0; r < st.num_faces(); ++r) {
                for (int cidx = 0; cidx < n; ++cidx) {
                    lp.G(ir, lay.x(j, cidx)) = st.F(r, cidx);
                }
                for (int cidx = 0; cidx < m; ++cidx) {
                    lp.G(ir, lay.u(j, cidx)) = st.F(r, n + cidx);
                }
                lp.G(ir, lay.d(i)) = p.big_m;
                lp.h[ir] = st.g[r] + p.big_m;
                ++ir;
            }
        }
        const HPolytope& xt = modes[i].X_tight;
        for (int r = 0; r < xt.num_faces(); ++r) {
            for (int cidx = 0; cidx < n; ++cidx) {
                lp.G(ir, lay.x(N, cidx)) = xt.F(r, cidx);
            }
            lp.G(ir, lay.d(i)) = p.big_m;
            lp.h[ir] = xt.g[r] + p.big_m;
            ++ir;
        }
    }

    // obstacle separation
    for (int i = 0; i < n_modes; ++i) {
        for (size_t l = 0; l < obstacles.size(); ++l) {
            const int q = lay.face_counts[l];
            for (int a = 0; a < q; ++a) {
                const auto& fr = prep.faces[i][l][a];
                bool face_impossible = false;
                for (int s = 0; s < M; ++s) {
                    if (fr.impossible[s]) face_impossible = true;
                }
                if (shared) {
                    if (face_impossible || fr.terminal_impossible) {
                        // a separating certificate can never hold at some
                        // sample: pin the whole face off
                        if (face_impossible) {
                            for (int j = 0; j < N; ++j) {
                                lp.lo[lay.b(i, static_cast<int>(l), j, a)] = 1.0;
                            }
                        } else {
                            lp.lo[lay.b(i, static_cast<int>(l), N - 1, a)] = 1.0;
                        }
                        if (face_impossible) continue;
                    }
                    for (int j = 0; j < N; ++j) {
                        const int bidx = lay.b(i, static_cast<int>(l), j, a);
                        for (int s = 0; s < M; ++s) {
                            const Vec& row = fr.sample_row[s];
                            if (row.size() == 0) continue;
                            for (int cidx = 0; cidx < n; ++cidx) {
                                lp.G(ir, lay.x(j, cidx)) = -row[cidx];
                            }
                            for (int cidx = 0; cidx < m; ++cidx) {
                                lp.G(ir, lay.u(j, cidx)) = -row[n + cidx];
                            }
                            lp.G(ir, bidx) = -p.big_m;
                            lp.h[ir] = -fr.rhs;
                            ++ir;
                        }
                    }
                    if (!fr.terminal_always && !fr.terminal_impossible) {
                        const int bidx = lay.b(i, static_cast<int>(l), N - 1, a);
                        for (int cidx = 0; cidx < n; ++cidx) {
                            lp.G(ir, lay.x(N, cidx)) = -fr.terminal_row[cidx];
                        }
                        lp.G(ir, bidx) = -p.big_m;
                        lp.h[ir] = -fr.terminal_rhs;
                        ++ir;
                    }
                } else {
                    for (int j = 0; j < N; ++j) {
                        for (int s = 0; s < M; ++s) {
                            const int set = j * M + s;
                            const int bidx = lay.b(i, static_cast<int>(l), set, a);
                            if (fr.impossible[s]) {
                                lp.lo[bidx] = 1.0;
                                continue;
                            }
                            const Vec& row = fr.sample_row[s];
                            if (row.size() == 0) continue;
                            for (int cidx = 0; cidx < n; ++cidx) {
                                lp.G(ir, lay.x(j, cidx)) = -row[cidx];
                            }
                            for (int cidx = 0; cidx < m; ++cidx) {
                                lp.G(ir, lay.u(j, cidx)) = -row[n + cidx];
                            }
                            lp.G(ir, bidx) = -p.big_m;
                            lp.h[ir] = -fr.rhs;
                            ++ir;
                        }
                    }
                    const int tset = N * M;
                    const int bidx = lay.b(i, static_cast<int>(l), tset, a);
                    if (fr.terminal_impossible) {
                        lp.lo[bidx] = 1.0;
                    } else if (!fr.terminal_always) {
                        for (int cidx = 0; cidx < n; ++cidx) {
                            lp.G(ir, lay.x(N, cidx)) = -fr.terminal_row[cidx];
                        }
                        lp.G(ir, bidx) = -p.big_m;
                        lp.h[ir] = -fr.terminal_rhs;
                        ++ir;
                    }
                }
            }
            // at least one active face for the chosen mode
            for (int set = 0; set < lay.sets_per_stage_pair; ++set) {
                for (int a = 0; a < q; ++a) {
                    lp.G(ir, lay.b(i, static_cast<int>(l), set, a)) = 1.0;
                }
                lp.G(ir, lay.d(i)) = 1.0;
                lp.h[ir] = static_cast<double>(q);
                ++ir;
            }
        }
    }

    // exactly one active mode
    for (int i = 0; i < n_modes; ++i) {
        lp.A(er, lay.d(i)) = 1.0;
    }
    lp.b[er] = 1.0;
    ++er;

    // infinity-norm epigraphs
    for (int r = 0; r < n; ++r) {
        lp.G(ir, lay.x(N, r)) = 1.0;
        lp.G(ir, lay.t_goal) = -1.0;
        lp.h[ir] = p.goal[r];
        ++ir;
        lp.G(ir, lay.x(N, r)) = -1.0;
        lp.G(ir, lay.t_goal) = -1.0;
        lp.h[ir] = -p.goal[r];
        ++ir;
    }
    for (int j = 0; j < N; ++j) {
        for (int r = 0; r < n; ++r) {
            lp.G(ir, lay.x(j, r)) = 1.0;
            lp.G(ir, lay.t_x(j)) = -1.0;
            lp.h[ir] = 0.0;
            ++ir;
            lp.G(ir, lay.x(j, r)) = -1.0;
            lp.G(ir, lay.t_x(j)) = -1.0;
            lp.h[ir] = 0.0;
            ++ir;
        }
        for (int r = 0; r < m; ++r) {
            lp.G(ir, lay.u(j, r)) = 1.0;
            lp.G(ir, lay.t_u(j)) = -1.0;
            lp.h[ir] = 0.0;
            ++ir;
            lp.G(ir, lay.u(j, r)) = -1.0;
            lp.G(ir, lay.t_u(j)) = -1.0;
            lp.h[ir] = 0.0;
            ++ir;
        }
    }

    if (ir != ineq_rows || er != static_cast<int>(lp.A.rows())) {
        throw std::logic_error("build_planning_milp: row count bookkeeping error");
    }
    return milp;
}

namespace {

void verify_plan(const PlanProblem& p, const PlanResult& res) {
    const double tol = 1e-6;
    const ModelBundle& model = *p.model;
    const Mode& mode = (*p.modes)[res.mode_index];
    const auto& obstacles = *p.obstacles;
    const PreparedPlanner& prep = *p.prep;
    const int N = p.N;
    const int M = model.steps_per_plan;
    auto fail = [&](const std::string& what) {
        throw std::runtime_error("plan re-verification failed: " + what);
    };

    for (int j = 0; j < N; ++j) {
        Vec resid = res.xp.col(j + 1) - model.Ap * res.xp.col(j) - model.Bp * res.up.col(j);
        if (resid.cwiseAbs().maxCoeff() > tol) fail("planning dynamics at j=" + std::to_string(j));
    }
    if (p.open_loop && p.committed_x0.has_value()) {
        if ((res.xp.col(0) - *p.committed_x0).cwiseAbs().maxCoeff() > tol) {
            fail("committed initial state");
        }
    } else {
        if (!zonotope_contains(mode.Z, p.x0 - res.xp.col(0), tol)) {
            fail("initial contract membership");
        }
    }
    for (int j = 0; j <= N; ++j) {
        if (!mode.X_tight.contains(res.xp.col(j), tol)) {
            fail("tightened state constraint at j=" + std::to_string(j));
        }
    }
    for (int j = 0; j < N; ++j) {
        if (!mode.U_tight.contains(res.up.col(j), tol)) {
            fail("tightened input constraint at j=" + std::to_string(j));
        }
        for (int s = 1; s < M; ++s) {
            Vec xi = prep.roll_A[s] * res.xp.col(j) + prep.roll_S[s] * res.up.col(j);
            if (!mode.X_tight.contains(xi, tol)) {
                fail("inter-sample state constraint at j=" + std::to_string(j) +
                     ", l=" + std::to_string(s));
            }
        }
    }
    for (int idx : model.steady_zero_idx) {
        if (std::abs(res.xp(idx, N)) > tol) fail("terminal steady subspace");
    }
    // enlarged-obstacle avoidance at every sample, terminal included
    const Mat& C = model.fine.C;
    auto clears = [&](const Vec& x) {
        for (size_t l = 0; l < obstacles.size(); ++l) {
            const Obstacle& ob = obstacles[l];
            bool ok = false;
            Vec y = C * x;
            for (int a = 0; a < ob.base.num_faces(); ++a) {
                if (ob.base.F.row(a).dot(y) >= ob.enlarged[res.mode_index][a] - tol) {
                    ok = true;
                    break;
                }
            }
            if (!ok) return false;
        }
        return true;
    };
    for (int j = 0; j < N; ++j) {
        for (int s = 0; s < M; ++s) {
            Vec xi = prep.roll_A[s] * res.xp.col(j) + prep.roll_S[s] * res.up.col(j);
            if (!clears(xi)) {
                fail("enlarged obstacle at j=" + std::to_string(j) + ", l=" + std::to_string(s));
            }
        }
    }
    if (!clears(res.xp.col(N))) fail("enlarged obstacle at the terminal state");
}

}  // namespace

PlanResult plan(const PlanProblem& p) {
    const auto t0 = std::chrono::steady_clock::now();
    PlanMilpLayout lay;
    MixedIntegerLinearProgram milp = build_planning_milp(p, &lay);
    optim::MilpSettings settings;
    settings.node_budget = p.node_budget;
    auto sol = optim::solve_milp(milp, settings);

    PlanResult res;
    res.status = sol.status;
    res.nodes = sol.nodes;
    res.lp_iterations = sol.lp_iterations;
    res.objective = sol.objective;
    res.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (sol.status != SolveStatus::Optimal) {
        return res;
    }

    int chosen = -1;
    for (int i = 0; i < lay.n_modes; ++i) {
        if (sol.x[lay.d(i)] > 0.5) {
            if (chosen >= 0) throw std::runtime_error("plan: multiple active modes reported");
            chosen = i;
        }
    }
    if (chosen < 0) throw std::runtime_error("plan: no active mode reported");
    res.mode_index = chosen;
    res.xp.resize(lay.n, p.N + 1);
    res.up.resize(lay.m, p.N);
    for (int j = 0; j <= p.N; ++j) {
        for (int r = 0; r < lay.n; ++r) res.xp(r, j) = sol.x[lay.x(j, r)];
    }
    for (int j = 0; j < p.N; ++j) {
        for (int r = 0; r < lay.m; ++r) res.up(r, j) = sol.x[lay.u(j, r)];
    }
    verify_plan(p, res);
    return res;
}

Mat extract_reference(const PlanResult& result, const ModelBundle& model) {
    if (result.status != SolveStatus::Optimal) {
        throw std::invalid_argument("extract_reference: result is not optimal");
    }
    const int n = model.n();
    const int M = model.steps_per_plan;
    Mat xref(n, M + 1);
    Vec x = result.xp.col(0);
    const Vec u = result.up.col(0);
    xref.col(0) = x;
    for (int j = 1; j <= M; ++j) {
        x = model.fine.A * x + model.fine.B * u;
        xref.col(j) = x;
    }
    return xref;
}

bool check_reference_safety(const Mat& xref, int mode_index,
                            const std::vector<Obstacle>& obstacles, const Mat& C) {
    for (int j = 0; j < xref.cols(); ++j) {
        const Vec y = C * xref.col(j);
        for (const Obstacle& ob : obstacles) {
            bool ok = false;
            for (int a = 0; a < ob.base.num_faces(); ++a) {
                if (ob.base.F.row(a).dot(y) >= ob.enlarged[mode_index][a]) {
                    ok = true;
                    break;
                }
            }
            if (!ok) return false;
        }
    }
    return true;
}

}  // namespace hiermpc
