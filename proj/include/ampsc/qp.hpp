#pragma once

#include "ampsc/core.hpp"

namespace ampsc::qp {

enum class Status { Optimal, Infeasible, SolverError };

// min 1/2 x'Gx + g0'x  s.t.  CE x = ce,  CI x <= ci   (G positive definite)
struct Problem {
    Mat G;
    Vec g0;
    Mat CE;
    Vec ce;
    Mat CI;
    Vec ci;
};

struct Result {
    Status status = Status::SolverError;
    Vec x;
    double objective = 0.0;   // 1/2 x'Gx + g0'x at the solution
    int iterations = 0;
    double max_violation = 0.0;  // recomputed constraint residual at x
};

// Dual active-set method: starts from the unconstrained minimum and adds
// violated constraints one at a time, keeping primal optimality throughout.
Result solve(const Problem& p, int max_iter = -1);

} // namespace ampsc::qp
