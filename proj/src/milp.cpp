#include "hiermpc/optim/milp.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>

namespace hiermpc::optim {

void MixedIntegerLinearProgram::validate() const {
    lp.validate();
    const int n = lp.num_vars();
    for (int j : binary_indices) {
        if (j < 0 || j >= n) {
            throw std::invalid_argument("MILP: binary index out of range");
        }
        double lo = lp.lo.size() ? lp.lo[j] : -kInf;
        double hi = lp.hi.size() ? lp.hi[j] : kInf;
        if (lo < -1e-12 || hi > 1.0 + 1e-12) {
            throw std::invalid_argument("MILP: binary variables must have bounds within [0,1]");
        }
    }
}

namespace {

struct Node {
    double bound;      // parent LP objective (lower bound)
    long id;
    int fix_var = -1;  // variable fixed relative to parent
    double fix_val = 0.0;
    std::shared_ptr<const Node> parent;
    std::shared_ptr<const Basis> warm;
};

struct NodeOrder {
    bool operator()(const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b) const {
        if (a->bound != b->bound) return a->bound > b->bound;  // min-heap on bound
        return a->id > b->id;
    }
};

void collect_fixings(const Node* node, Vec& lo, Vec& hi) {
    for (const Node* cur = node; cur != nullptr; cur = cur->parent.get()) {
        if (cur->fix_var >= 0) {
            lo[cur->fix_var] = cur->fix_val;
            hi[cur->fix_var] = cur->fix_val;
        }
    }
}

}  // namespace

MilpSolution solve_milp(const MixedIntegerLinearProgram& milp, const MilpSettings& st) {
    milp.validate();
    MilpSolution out;

    RowLp row = to_row_form(milp.lp);
    const Vec root_lo = row.lo;
    const Vec root_hi = row.hi;
    SimplexSolver solver(row);

    SimplexResult root = solver.solve();
    out.lp_iterations += root.iterations;
    out.nodes = 1;
    if (root.status == SolveStatus::Infeasible || root.status == SolveStatus::Unbounded ||
        root.status == SolveStatus::IterationLimit) {
        out.status = root.status;
        return out;
    }

    const auto& bins = milp.binary_indices;
    auto most_fractional = [&](const Vec& x) {
        int pick = -1;
        double best = st.integrality_tol;
        for (int j : bins) {
            double frac = std::min(x[j] - std::floor(x[j]), std::ceil(x[j]) - x[j]);
            frac = std::min(frac, std::min(std::abs(x[j]), std::abs(x[j] - 1.0)));
            if (frac > best + 1e-15) {
                best = frac;
                pick = j;
            }
        }
        return pick;
    };

    double incumbent = kInf;
    Vec incumbent_x;
    double global_bound = root.objective;

    std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>, NodeOrder>
        open;
    long next_id = 0;

    auto push_children = [&](const SimplexResult& res, const std::shared_ptr<Node>& parent,
                             int branch_var) {
        auto basis = std::make_shared<const Basis>(res.basis);
        for (double val : {0.0, 1.0}) {
            auto child = std::make_shared<Node>();
            child->bound = res.objective;
            child->id = next_id++;
            child->fix_var = branch_var;
            child->fix_val = val;
            child->parent = parent;
            child->warm = basis;
            open.push(child);
        }
    };

    // root node handling
    {
        int frac = most_fractional(root.x);
        if (frac < 0) {
            out.status = SolveStatus::Optimal;
            out.objective = root.objective;
            out.x = root.x;
            out.best_bound = root.objective;
            return out;
        }
        push_children(root, nullptr, frac);
    }

    SolveStatus final_status = SolveStatus::Optimal;
    while (!open.empty()) {
        if (out.nodes >= st.node_budget) {
            final_status = SolveStatus::IterationLimit;
            break;
        }
        auto node = open.top();
        open.pop();
        global_bound = node->bound;
        if (node->bound >= incumbent - st.absolute_gap) {
            // best-first: every remaining node is at least as bad
            break;
        }
        Vec lo = root_lo;
        Vec hi = root_hi;
        collect_fixings(node.get(), lo, hi);
        SimplexResult res = node->warm ? solver.solve_from_basis(*node->warm, lo, hi)
                                       : solver.solve();
        ++out.nodes;
        out.lp_iterations += res.iterations;
        if (res.status == SolveStatus::Infeasible) continue;
        if (res.status == SolveStatus::IterationLimit) {
            final_status = SolveStatus::IterationLimit;
            break;
        }
        if (res.status == SolveStatus::Unbounded) {
            out.status = SolveStatus::Unbounded;
            return out;
        }
        if (res.objective >= incumbent - st.absolute_gap) continue;
        int frac = most_fractional(res.x);
        if (frac < 0) {
            if (res.objective < incumbent) {
                incumbent = res.objective;
                incumbent_x = res.x;
            }
            continue;
        }
        push_children(res, node, frac);
    }

    if (std::isfinite(incumbent)) {
        out.status = final_status;
        out.objective = incumbent;
        out.x = incumbent_x;
        out.best_bound = std::min(global_bound, incumbent);
    } else {
        out.status = final_status == SolveStatus::IterationLimit ? SolveStatus::IterationLimit
                                                                 : SolveStatus::Infeasible;
    }
    return out;
}

}  // namespace hiermpc::optim
