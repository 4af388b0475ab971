#pragma once

#include "ampsc/core.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace ampsc::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Status { Optimal, Infeasible, Unbounded, IterLimit, Cutoff };

// min c.x  s.t.  A x <= b,  E x = d,  lo <= x <= up
struct Problem {
    Vec c;
    Mat A;
    Vec b;
    Mat E;
    Vec d;
    Vec lo, up;

    Index nvars() const { return c.size(); }
    Index nrows() const { return A.rows() + E.rows(); }
};

struct Result {
    Status status = Status::IterLimit;
    Vec x;
    double objective = 0.0;
    int iterations = 0;
};

// Variable states for warm starts (structural variables then row slacks).
enum class VarState : std::int8_t { Basic, AtLower, AtUpper, Free };

struct Basis {
    std::vector<int> basic;       // m row indices -> variable index
    std::vector<VarState> state;  // n + m entries
};

// Revised simplex over bounded variables with an explicit dense basis inverse.
// The same instance can be re-solved after cost or rhs changes, reusing the
// previous basis (the hot path for Monte Carlo feasibility oracles).
class Solver {
  public:
    void set_problem(const Problem& p);

    Result solve(std::optional<double> cutoff = std::nullopt, int max_iter = -1);

    // Re-solve after modifying only objective coefficients.
    Result resolve_costs(const Vec& c, std::optional<double> cutoff = std::nullopt, int max_iter = -1);

    const Basis& basis() const { return basis_; }
    void set_basis(const Basis& b) { basis_ = b; has_basis_ = true; binv_valid_ = false; }
    void clear_basis() { has_basis_ = false; binv_valid_ = false; }

    // Multipliers of the rows (A rows then E rows) at the current basis.
    Vec row_duals() const;

  private:
    struct Bounds {
        double lo, up;
    };

    void default_basis();
    void factorize();
    double value_of(int j) const;
    void compute_basics();
    double infeasibility() const;
    Result run(std::optional<double> cutoff, int max_iter);
    void pivot(int enter, int leave, bool leave_to_upper, Vec& w);
    void phase1(int max_iter, int& used);
    Status iterate(std::optional<double> cutoff, int max_iter, int& used);

    Index n_ = 0, m_ = 0;               // structural vars, rows
    Mat cols_;                          // m x (n + m) full column matrix (structural + slack)
    Vec rhs_;
    Vec cost_;
    std::vector<Bounds> bnd_;           // n + m
    Mat binv_;
    Vec xb_;                            // basic values
    Basis basis_;
    bool has_basis_ = false;
    bool binv_valid_ = false;
    int since_refactor_ = 0;
};

// One-shot convenience call.
Result solve(const Problem& p, std::optional<double> cutoff = std::nullopt);

// max d.x over {H x <= h}. Returns the support value; status Unbounded means the
// polytope is unbounded in direction d, Infeasible means the polytope is empty.
struct SupportResult {
    Status status;
    double value;
    Vec maximizer;  // only when Optimal
};
SupportResult support(const Mat& H, const Vec& h, const Vec& d);

} // namespace ampsc::lp
