#include "ampsc/certifier.hpp"

#include "ampsc/qp.hpp"

#include <algorithm>
#include <cmath>

namespace ampsc {

namespace {

constexpr double kResidualTol = 1e-6;
constexpr double kReg = 2e-8;  // keeps the QP Hessian positive definite

HomotheticTube extract_tube(const TubeSystem& sys, const TerminalSet& terminal,
                            const TubeConfig& cfg, const Vec& x_k, const Vec& u_learn,
                            const ParamBox& theta, const Vec& sol) {
    const int h = sys.horizon;
    HomotheticTube tube;
    tube.horizon = h;
    tube.theta_snapshot = theta;
    tube.raw = sol;
    tube.z.reserve(static_cast<size_t>(h) + 1);
    tube.alpha.reserve(static_cast<size_t>(h) + 1);
    tube.v.reserve(static_cast<size_t>(h));
    for (int l = 0; l <= h; ++l) {
        tube.z.push_back(sol.segment(sys.zi(l), sys.n));
        tube.alpha.push_back(std::max(0.0, sol(sys.ai(l))));
    }
    for (int l = 0; l < h; ++l) tube.v.push_back(sol.segment(sys.vi(l), sys.m));
    tube.terminal_weights = sol.segment(sys.off_lam, sys.nT);
    tube.u0 = cfg.K * x_k + tube.v.front();
    tube.objective = (u_learn - tube.u0).squaredNorm();

    tube.has_terminal_cert = true;
    tube.term_v = Vec::Zero(sys.m);
    tube.term_z_next = Vec::Zero(sys.n);
    tube.term_alpha_next = 0.0;
    for (Index t = 0; t < sys.nT; ++t) {
        const double w = tube.terminal_weights(t);
        if (w <= 1e-9) continue;
        const TerminalPoint& pt = terminal.points[static_cast<size_t>(t)];
        if (!pt.has_certificate) {
            tube.has_terminal_cert = false;
            break;
        }
        tube.term_v += w * pt.v;
        tube.term_z_next += w * pt.z_next;
        tube.term_alpha_next += w * pt.alpha_next;
    }
    if (!tube.has_terminal_cert) {
        tube.term_v.resize(0);
        tube.term_z_next.resize(0);
        tube.term_alpha_next = 0.0;
    }
    return tube;
}

struct QpPieces {
    Mat G;
    Vec g0;
};

QpPieces objective_pieces(const TubeSystem& sys, const Vec& residual_target) {
    QpPieces qp;
    qp.G = Mat::Identity(sys.nvars, sys.nvars) * kReg;
    qp.G.block(sys.vi(0), sys.vi(0), sys.m, sys.m) += 2.0 * Mat::Identity(sys.m, sys.m);
    qp.g0 = Vec::Zero(sys.nvars);
    qp.g0.segment(sys.vi(0), sys.m) = -2.0 * residual_target;
    return qp;
}

double residual_of(const TubeSystem& sys, const Vec& b, const Vec& x) {
    double r = (sys.A * x - b).maxCoeff();
    r = std::max(r, (sys.E * x - sys.d).cwiseAbs().maxCoeff());
    return r;
}

} // namespace

QpReport solve_tube_qp(const TubeSystem& sys, const TerminalSet& terminal,
                       const TubeConfig& cfg, const Vec& x_k, const Vec& u_learn,
                       const ParamBox& theta, WarmStart* warm) {
    require(x_k.size() == sys.n, "state dimension");
    require(u_learn.size() == sys.m, "input dimension");

    Vec b = sys.b;
    sys.set_sample(x_k, b);

    const Vec target = u_learn - cfg.K * x_k;  // desired v_0
    const QpPieces pieces = objective_pieces(sys, target);

    qp::Problem full;
    full.G = pieces.G;
    full.g0 = pieces.g0;
    full.CE = sys.E;
    full.ce = sys.d;
    full.CI = sys.A;
    full.ci = b;

    QpReport rep;
    qp::Result res;
    bool solved = false;

    if (warm && !warm->active.empty()) {
        std::vector<Index> rows;
        for (Index r : warm->active)
            if (r >= 0 && r < sys.A.rows()) rows.push_back(r);
        if (!rows.empty()) {
            qp::Problem reduced = full;
            reduced.CI.resize(static_cast<Index>(rows.size()), sys.nvars);
            reduced.ci.resize(static_cast<Index>(rows.size()));
            for (size_t i = 0; i < rows.size(); ++i) {
                reduced.CI.row(static_cast<Index>(i)) = sys.A.row(rows[i]);
                reduced.ci(static_cast<Index>(i)) = b(rows[i]);
            }
            const qp::Result guess = qp::solve(reduced);
            if (guess.status == qp::Status::Infeasible) {
                // relaxation infeasible => full problem infeasible
                rep.status = QpStatus::Infeasible;
                rep.iterations = guess.iterations;
                return rep;
            }
            if (guess.status == qp::Status::Optimal &&
                residual_of(sys, b, guess.x) <= kResidualTol) {
                res = guess;  // optimal for a relaxation and fully feasible
                solved = true;
            }
        }
    }

    if (!solved) res = qp::solve(full);
    rep.iterations = res.iterations;

    if (res.status == qp::Status::Infeasible) {
        rep.status = QpStatus::Infeasible;
        return rep;
    }
    if (res.status != qp::Status::Optimal) {
        rep.status = QpStatus::SolverError;
        return rep;
    }

    rep.max_constraint_residual = residual_of(sys, b, res.x);
    if (!(rep.max_constraint_residual <= kResidualTol)) {
        rep.status = QpStatus::SolverError;
        return rep;
    }

    rep.status = QpStatus::Feasible;
    rep.tube = extract_tube(sys, terminal, cfg, x_k, u_learn, theta, res.x);

    if (warm) {
        warm->active.clear();
        const Vec slack = sys.A * res.x - b;
        for (Index r = 0; r < slack.size(); ++r)
            if (slack(r) > -1e-7) warm->active.push_back(r);
    }
    return rep;
}

QpReport build_and_solve(const PlantModel& model, const Vec& x_k, const Vec& u_learn,
                         const ParamBox& theta, const TerminalSet& terminal,
                         const TubeConfig& cfg, int horizon_override, WarmStart* warm) {
    const int h = horizon_override > 0 ? horizon_override : cfg.N;
    const TubeSystem sys = assemble_tube(model, cfg, theta, terminal, h);
    return solve_tube_qp(sys, terminal, cfg, x_k, u_learn, theta, warm);
}

double passthrough_gap(const QpReport& report, const Vec& u_learn) {
    require(report.status == QpStatus::Feasible && report.tube.has_value(),
            "passthrough gap needs a feasible report");
    return (u_learn - report.tube->u0).norm();
}

double replay_residual(const TubeSystem& sys, const Vec& raw, const Vec& x_k) {
    require(raw.size() == sys.nvars, "stored solution does not match the system layout");
    Vec b = sys.b;
    sys.set_sample(x_k, b);
    return residual_of(sys, b, raw);
}

} // namespace ampsc
