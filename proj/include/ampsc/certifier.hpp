#pragma once

#include "ampsc/core.hpp"
#include "ampsc/estimation.hpp"
#include "ampsc/plant.hpp"
#include "ampsc/terminal.hpp"
#include "ampsc/tube.hpp"

#include <optional>
#include <vector>

namespace ampsc {

// Solved backup plan: tube {z_l} + alpha_l X0 with inputs u = K x + v_l,
// ending in the terminal set via the convex weights. raw is the full decision
// vector of the certification problem (replayed for residual re-checks under
// later, smaller parameter boxes).
struct HomotheticTube {
    std::vector<Vec> z;
    std::vector<double> alpha;
    std::vector<Vec> v;
    Vec terminal_weights;
    Vec u0;                  // K x_k + v_0
    double objective = 0.0;  // ||u_learn - u0||^2, recomputed from the solution
    int solved_at = -1;
    int horizon = 0;
    ParamBox theta_snapshot;
    Vec raw;

    // Successor certificate of the terminal stage, resolved at solve time
    // from the terminal points' stored certificates.
    bool has_terminal_cert = false;
    Vec term_v;
    Vec term_z_next;
    double term_alpha_next = 0.0;
};

enum class QpStatus { Feasible, Infeasible, SolverError };

struct QpReport {
    QpStatus status = QpStatus::SolverError;
    std::optional<HomotheticTube> tube;
    double max_constraint_residual = 0.0;
    int iterations = 0;
};

// Active-set carry-over between consecutive solves; purely an accelerator
// (results are bit-verified against the full constraint system every call).
struct WarmStart {
    std::vector<Index> active;
};

// min ||u_learn - (K x_k + v_0)||^2 over tubes that start at x_k and end in
// the terminal set. horizon_override in [1, cfg.N] shortens the tube.
QpReport build_and_solve(const PlantModel& model, const Vec& x_k, const Vec& u_learn,
                         const ParamBox& theta, const TerminalSet& terminal,
                         const TubeConfig& cfg, int horizon_override = -1,
                         WarmStart* warm = nullptr);

// Same solve against an already-assembled constraint system (hot path: the
// system only changes when the parameter box or terminal set changes).
QpReport solve_tube_qp(const TubeSystem& sys, const TerminalSet& terminal,
                       const TubeConfig& cfg, const Vec& x_k, const Vec& u_learn,
                       const ParamBox& theta, WarmStart* warm = nullptr);

// ||u_learn - (K x_k + v_0*)||_2 of a feasible report.
double passthrough_gap(const QpReport& report, const Vec& u_learn);

// Residuals of a stored solution vector against a (possibly re-assembled)
// constraint system, with the sample block refreshed for the tube's own z_0
// start state x. Used to confirm plans stay valid when the box shrinks.
double replay_residual(const TubeSystem& sys, const Vec& raw, const Vec& x_k);

} // namespace ampsc
