#pragma once

#include "hiermpc/linalg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hiermpc::optim {

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(SolveStatus s);

/// min c'x  s.t.  G x <= h,  A x = b,  lo <= x <= hi.
/// Empty lo/hi mean free variables.
struct LinearProgram {
    Vec c;
    Mat G;
    Vec h;
    Mat A;
    Vec b;
    Vec lo;
    Vec hi;

    int num_vars() const { return static_cast<int>(c.size()); }
    void validate() const;
};

struct LpSolution {
    SolveStatus status = SolveStatus::IterationLimit;
    double objective = 0.0;
    Vec x;
    Vec dual_ineq;       // multipliers for G x <= h (<= 0 at optimum)
    Vec dual_eq;         // multipliers for A x = b (free sign)
    Vec reduced_costs;   // bound multipliers per variable
    long iterations = 0;

    /// h'mu + b'nu + bound terms; equals the primal objective at optimality.
    double dual_objective(const LinearProgram& lp) const;
};

LpSolution solve_lp(const LinearProgram& lp);

/// CPLEX-LP-format dump for external cross-checking.
void write_lp_file(const LinearProgram& lp, const std::string& path,
                   const std::vector<int>& binary_indices = {});

// ---------------------------------------------------------------------------
// Computational core. Rows carry two-sided bounds; the MILP solver drives it
// directly for warm-started re-solves after bound changes.
// ---------------------------------------------------------------------------

/// min c'x  s.t.  rlo <= A x <= rhi,  lo <= x <= hi.
struct RowLp {
    Vec c;
    Mat A;       // m x n, dense
    Vec rlo, rhi;
    Vec lo, hi;

    int rows() const { return static_cast<int>(A.rows()); }
    int cols() const { return static_cast<int>(A.cols()); }
};

RowLp to_row_form(const LinearProgram& lp);

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, FreeNonbasic };

struct Basis {
    std::vector<VarStatus> status;  // n + m entries (structurals then logicals)
    std::vector<int> basic;         // m column indices into [0, n+m)
};

struct SimplexOptions {
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    double pivot_tol = 1e-10;
    int bland_after_degenerate = 50;
    int refactor_interval = 64;
    long max_iterations = -1;  // default 100*(rows+cols)
};

struct SimplexResult {
    SolveStatus status = SolveStatus::IterationLimit;
    double objective = 0.0;
    Vec x;          // structural values
    Vec row_duals;  // y, one per row
    Vec reduced_costs;
    long iterations = 0;
    Basis basis;
};

class SimplexSolver {
  public:
    explicit SimplexSolver(const RowLp& lp, SimplexOptions opts = {});

    /// Cold solve: phase 1 from the all-logical basis, then phase 2.
    SimplexResult solve();

    /// Re-solve after bound changes starting from a (dual-feasible) basis,
    /// using the dual simplex. Falls back to a cold solve if the basis
    /// cannot be repaired.
    SimplexResult solve_from_basis(const Basis& start, const Vec& new_lo, const Vec& new_hi);

  private:
    struct Impl;
    RowLp lp_;
    SimplexOptions opts_;
};

}  // namespace hiermpc::optim
