#include "hiermpc/sim.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace hiermpc {

using optim::SolveStatus;

Vec step_plant(const LtiModel& model, const Vec& x, const Vec& u, const Vec& w) {
    if (x.size() != model.n() || u.size() != model.m() || w.size() != model.n()) {
        throw std::invalid_argument("step_plant: dimension mismatch");
    }
    return model.A * x + model.B * u + w;
}

Vec sample_disturbance(const DisturbancePolicy& policy, const Mode& mode, SimRng& rng,
                       int k) {
    const int n = mode.W.dim();
    const int gens = mode.W.num_generators();
    Vec w = Vec::Zero(n);
    switch (policy.kind) {
        case DisturbanceKind::None:
            break;
        case DisturbanceKind::UniformInModeSet: {
            Vec xi(gens);
            for (int i = 0; i < gens; ++i) xi[i] = rng.symmetric();
            w = policy.scale * (mode.W.G * xi);
            break;
        }
        case DisturbanceKind::VertexWorstCase: {
            Vec xi(gens);
            for (int i = 0; i < gens; ++i) xi[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
            w = policy.scale * (mode.W.G * xi);
            break;
        }
        case DisturbanceKind::WindGust: {
            Vec xi(gens);
            for (int i = 0; i < gens; ++i) xi[i] = rng.symmetric();
            w = policy.scale * (mode.W.G * xi);
            for (const auto& [lo, hi] : policy.gust_intervals) {
                if (k >= lo && k < hi) {
                    w += policy.gust_vector;
                    break;
                }
            }
            break;
        }
    }
    return w;
}

namespace {

double obstacle_margin_at(const Vec& y, const std::vector<Obstacle>& obstacles) {
    double margin = std::numeric_limits<double>::infinity();
    for (const Obstacle& ob : obstacles) {
        double best_face = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < ob.base.num_faces(); ++a) {
            best_face = std::max(best_face, ob.base.F.row(a).dot(y) - ob.base.g[a]);
        }
        margin = std::min(margin, best_face);
    }
    return obstacles.empty() ? std::numeric_limits<double>::infinity() : margin;
}

bool at_goal(const SimSetup& s, const Vec& x) {
    const Mat& C = s.model.fine.C;
    return (C * (x - s.goal)).cwiseAbs().maxCoeff() < s.goal_tol;
}

}  // namespace

ClosedLoopLog run_closed_loop(const SimSetup& setup, std::uint64_t seed) {
    const int M = setup.model.steps_per_plan;
    const LtiModel& fine = setup.model.fine;
    ClosedLoopLog log;
    SimRng rng(seed);

    Vec x = setup.x0;
    Mat xref;  // n x (M+1) for the current block
    int mode_idx = -1;
    Vec committed_next;  // x_p*(1) of the previous plan, for open-loop replanning

    for (int k = 0; k < setup.max_steps; ++k) {
        if (at_goal(setup, x)) {
            log.success = true;
            log.steps_to_goal = k;
            return log;
        }

        StepRecord rec;
        rec.k = k;
        rec.t = k * fine.dt;
        rec.x = x;

        if (k % M == 0) {
            if (k > 0 && mode_idx >= 0) {
                rec.contract_ok =
                    zonotope_contains(setup.modes[mode_idx].Z, x - xref.col(M), 1e-8);
            }
            PlanProblem pp;
            pp.x0 = x;
            pp.N = setup.N;
            pp.goal = setup.goal;
            pp.model = &setup.model;
            pp.modes = &setup.modes;
            pp.obstacles = &setup.obstacles;
            pp.prep = &setup.prep;
            pp.alpha_x = setup.alpha_x;
            pp.alpha_u = setup.alpha_u;
            pp.big_m = setup.big_m;
            pp.policy = setup.policy;
            pp.node_budget = setup.node_budget;
            if (setup.open_loop && committed_next.size() > 0) {
                pp.open_loop = true;
                pp.committed_x0 = committed_next;
            }
            ClosedLoopLog::PlanRecord pr;
            pr.k = k;
            pr.result = plan(pp);
            rec.plan_status = optim::to_string(pr.result.status);
            rec.plan_seconds = pr.result.solve_seconds;
            rec.plan_nodes = pr.result.nodes;
            if (pr.result.status != SolveStatus::Optimal) {
                log.failure = (k == 0) ? "initial plan not optimal" : "replanning failed";
                log.steps.push_back(std::move(rec));
                log.plans.push_back(std::move(pr));
                return log;
            }
            mode_idx = pr.result.mode_index;
            pr.xref = extract_reference(pr.result, setup.model);
            xref = pr.xref;
            committed_next = pr.result.xp.col(1);
            log.plans.push_back(std::move(pr));
        }

        const int r = k % M;
        const int L = cyclic_horizon(k, M);
        TrackerProblem tp;
        tp.x = x;
        tp.xref = xref.middleCols(r, L + 1);
        tp.mode = &setup.modes[mode_idx];
        tp.k = k;
        tp.M = M;
        tp.Q = setup.Q;
        tp.R = setup.R;
        tp.P = setup.P;
        tp.model = &fine;
        TrackerResult tr = control_step(tp);
        rec.qp_status = optim::to_string(tr.status);
        rec.qp_seconds = tr.solve_seconds;
        rec.mode = mode_idx;
        rec.L = L;
        if (tr.status != SolveStatus::Optimal) {
            rec.u = Vec::Zero(fine.m());
            rec.w = Vec::Zero(fine.n());
            rec.obstacle_margin = obstacle_margin_at(fine.C * x, setup.obstacles);
            log.failure = "tracker not optimal at k=" + std::to_string(k);
            log.steps.push_back(std::move(rec));
            return log;
        }
        Vec w = sample_disturbance(setup.disturbance, setup.modes[mode_idx], rng, k);
        rec.u = tr.u;
        rec.w = w;
        rec.obstacle_margin = obstacle_margin_at(fine.C * x, setup.obstacles);
        log.steps.push_back(std::move(rec));
        log.z_nom.push_back(tr.z);
        log.v_nom.push_back(tr.v);

        x = step_plant(fine, x, tr.u, w);
    }
    if (at_goal(setup, x)) {
        log.success = true;
        log.steps_to_goal = setup.max_steps;
    } else {
        log.failure = "goal not reached within max_steps";
    }
    return log;
}

VerificationReport verify_log(const ClosedLoopLog& log, const SimSetup& setup) {
    VerificationReport rep;
    rep.steps = static_cast<long>(log.steps.size());
    rep.success = log.success;
    rep.min_obstacle_margin = std::numeric_limits<double>::infinity();
    const Mat& C = setup.model.fine.C;
    const double tol = 1e-8;

    bool after_initial_optimal = false;
    for (const StepRecord& rec : log.steps) {
        if (rec.k == 0 && rec.plan_status == "optimal") {
            rep.initial_plan_optimal = true;
        }
        if (rec.mode < 0) continue;
        const Mode& mode = setup.modes[rec.mode];
        if (rec.u.size() > 0) {
            if (!mode.X.contains(rec.x, tol)) ++rep.state_violations;
            if (!mode.U.contains(rec.u, tol)) ++rep.input_violations;
        }
        const Vec y = C * rec.x;
        for (const Obstacle& ob : setup.obstacles) {
            bool inside = true;
            for (int a = 0; a < ob.base.num_faces(); ++a) {
                if (ob.base.F.row(a).dot(y) - ob.base.g[a] >= -1e-9) {
                    inside = false;
                    break;
                }
            }
            if (inside) {
                ++rep.obstacle_intrusions;
            }
        }
        rep.min_obstacle_margin = std::min(rep.min_obstacle_margin, rec.obstacle_margin);
        if (rec.w.size() > 0 && !zonotope_contains(mode.W, rec.w, tol)) {
            ++rep.out_of_bound_disturbances;
        }
        if (!rec.contract_ok) ++rep.contract_failures;
        if (after_initial_optimal) {
            if (rec.plan_status == "infeasible" || rec.qp_status == "infeasible") {
                ++rep.chain_breaks;
            }
        }
        if (rec.plan_status == "optimal") after_initial_optimal = true;
    }
    rep.disturbances_in_bound = rep.out_of_bound_disturbances == 0;
    rep.guarantees_in_force = rep.disturbances_in_bound && rep.initial_plan_optimal;

    // auxiliary-law tube replay over each logged horizon
    for (size_t i = 0; i < log.z_nom.size(); ++i) {
        const int L = static_cast<int>(log.v_nom[i].cols());
        if (i + static_cast<size_t>(L) > log.steps.size()) break;
        const int mode_idx = log.steps[i].mode;
        if (mode_idx < 0) continue;
        Mat w_seq(setup.model.n(), L);
        bool have = true;
        for (int j = 0; j < L; ++j) {
            const auto& r = log.steps[i + j];
            if (r.w.size() == 0) {
                have = false;
                break;
            }
            w_seq.col(j) = r.w;
        }
        if (!have) continue;
        if (!auxiliary_error_bound_check(log.z_nom[i], log.v_nom[i], w_seq,
                                         setup.modes[mode_idx], setup.K, setup.model.fine)) {
            ++rep.aux_tube_failures;
        }
    }
    return rep;
}

void write_log_csv(const ClosedLoopLog& log, const SimSetup& setup, const std::string& path) {
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("write_log_csv: cannot open " + path);
    }
    const int n = setup.model.n();
    const int m = setup.model.m();
    f << "k,t";
    for (int i = 0; i < n; ++i) f << ",x" << i;
    for (int i = 0; i < m; ++i) f << ",u" << i;
    for (int i = 0; i < n; ++i) f << ",w" << i;
    f << ",mode,L_k,plan_status,qp_status,contract_ok,obstacle_margin\n";
    f << std::setprecision(17);
    for (const StepRecord& r : log.steps) {
        f << r.k << "," << r.t;
        for (int i = 0; i < n; ++i) f << "," << r.x[i];
        for (int i = 0; i < m; ++i) f << "," << (r.u.size() ? r.u[i] : 0.0);
        for (int i = 0; i < n; ++i) f << "," << (r.w.size() ? r.w[i] : 0.0);
        f << "," << r.mode << "," << r.L << "," << r.plan_status << "," << r.qp_status << ","
          << (r.contract_ok ? 1 : 0) << "," << r.obstacle_margin << "\n";
    }
}

void write_log_json(const ClosedLoopLog& log, const SimSetup& setup, const std::string& path) {
    nlohmann::json j;
    j["success"] = log.success;
    j["steps_to_goal"] = log.steps_to_goal;
    j["failure"] = log.failure;
    j["dt"] = setup.model.fine.dt;
    auto vec_to_json = [](const Vec& v) {
        std::vector<double> out(v.data(), v.data() + v.size());
        return out;
    };
    nlohmann::json steps = nlohmann::json::array();
    for (const StepRecord& r : log.steps) {
        nlohmann::json s;
        s["k"] = r.k;
        s["t"] = r.t;
        s["x"] = vec_to_json(r.x);
        s["u"] = vec_to_json(r.u);
        s["w"] = vec_to_json(r.w);
        s["mode"] = r.mode;
        s["L"] = r.L;
        s["plan_status"] = r.plan_status;
        s["qp_status"] = r.qp_status;
        s["contract_ok"] = r.contract_ok;
        s["obstacle_margin"] = r.obstacle_margin;
        steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
    nlohmann::json plans = nlohmann::json::array();
    for (const auto& p : log.plans) {
        nlohmann::json pj;
        pj["k"] = p.k;
        pj["status"] = optim::to_string(p.result.status);
        pj["mode"] = p.result.mode_index;
        pj["objective"] = p.result.objective;
        pj["nodes"] = p.result.nodes;
        pj["solve_seconds"] = p.result.solve_seconds;
        plans.push_back(std::move(pj));
    }
    j["plans"] = std::move(plans);
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("write_log_json: cannot open " + path);
    }
    f << j.dump(2) << "\n";
}

}  // namespace hiermpc
