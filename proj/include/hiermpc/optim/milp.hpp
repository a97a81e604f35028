#pragma once

#include "hiermpc/optim/lp.hpp"

namespace hiermpc::optim {

struct MixedIntegerLinearProgram {
    LinearProgram lp;
    std::vector<int> binary_indices;

    void validate() const;
};

struct MilpSettings {
    double integrality_tol = 1e-6;
    double absolute_gap = 1e-6;
    long node_budget = 200000;
};

struct MilpSolution {
    SolveStatus status = SolveStatus::IterationLimit;
    double objective = 0.0;
    Vec x;
    double best_bound = -kInf;
    long nodes = 0;
    long lp_iterations = 0;
};

/// Best-first branch and bound on LP relaxations; branches on the most
/// fractional binary, ties broken by lowest index. Deterministic.
MilpSolution solve_milp(const MixedIntegerLinearProgram& milp,
                        const MilpSettings& settings = {});

}  // namespace hiermpc::optim
