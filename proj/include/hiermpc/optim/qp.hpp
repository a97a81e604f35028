#pragma once

#include "hiermpc/optim/lp.hpp"

namespace hiermpc::optim {

/// min 0.5 x'Hx + q'x  s.t.  G x <= h,  A x = b.  H must be PSD.
struct QuadraticProgram {
    Mat H;
    Vec q;
    Mat G;
    Vec h;
    Mat A;
    Vec b;

    int num_vars() const { return static_cast<int>(q.size()); }
    void validate() const;
};

struct QpSettings {
    double eps_abs = 1e-8;
    double eps_rel = 1e-9;
    double sigma = 1e-6;
    double alpha = 1.6;      // over-relaxation
    int max_iterations = 20000;
    int check_interval = 25;
    double kkt_tol = 1e-6;   // required residual for Optimal after polish
};

struct QpSolution {
    SolveStatus status = SolveStatus::IterationLimit;
    double objective = 0.0;
    Vec x;
    Vec dual_ineq;  // >= 0 multipliers for G x <= h
    Vec dual_eq;
    int iterations = 0;
    double kkt_residual = kInf;
};

QpSolution solve_qp(const QuadraticProgram& qp, const QpSettings& settings = {});

}  // namespace hiermpc::optim
