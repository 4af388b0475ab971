#include "ampsc/filter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace ampsc {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool pure_input_row(const Mat& F, Index r) { return F.row(r).cwiseAbs().maxCoeff() <= 1e-12; }
bool pure_state_row(const Mat& G, Index r) { return G.row(r).cwiseAbs().maxCoeff() <= 1e-12; }

// Componentwise bounds implied by single-coefficient pure-input rows.
struct InputBounds {
    Vec lo, up;
};

InputBounds input_bounds(const PlantModel& model) {
    const Mat F = model.F();
    const Mat G = model.G();
    const Vec& z = model.z();
    InputBounds b;
    b.lo = Vec::Constant(model.m(), -1.0);
    b.up = Vec::Constant(model.m(), 1.0);
    Vec found_lo = Vec::Zero(model.m()), found_up = Vec::Zero(model.m());
    for (Index r = 0; r < G.rows(); ++r) {
        if (!pure_input_row(F, r)) continue;
        Index j = -1;
        int nz = 0;
        for (Index i = 0; i < G.cols(); ++i)
            if (std::abs(G(r, i)) > 1e-12) {
                j = i;
                ++nz;
            }
        if (nz != 1) continue;
        const double bound = z(r) / G(r, j);
        if (G(r, j) > 0) {
            b.up(j) = found_up(j) ? std::min(b.up(j), bound) : bound;
            found_up(j) = 1;
        } else {
            b.lo(j) = found_lo(j) ? std::max(b.lo(j), bound) : bound;
            found_lo(j) = 1;
        }
    }
    return b;
}

Vec state_envelope(const PlantModel& model) {
    const Mat F = model.F();
    const Mat G = model.G();
    const Vec& z = model.z();
    Vec env = Vec::Constant(model.n(), 1.0);
    Vec found = Vec::Zero(model.n());
    for (Index r = 0; r < F.rows(); ++r) {
        if (!pure_state_row(G, r)) continue;
        Index j = -1;
        int nz = 0;
        for (Index i = 0; i < F.cols(); ++i)
            if (std::abs(F(r, i)) > 1e-12) {
                j = i;
                ++nz;
            }
        if (nz != 1) continue;
        const double bound = z(r) / std::abs(F(r, j));
        env(j) = found(j) ? std::min(env(j), bound) : bound;
        found(j) = 1;
    }
    return env;
}

Vec saturate_input(const PlantModel& model, Vec u) {
    const Mat F = model.F();
    const Mat G = model.G();
    const Vec& z = model.z();
    for (Index r = 0; r < G.rows(); ++r) {
        if (!pure_input_row(F, r)) continue;
        Index j = -1;
        int nz = 0;
        for (Index i = 0; i < G.cols(); ++i)
            if (std::abs(G(r, i)) > 1e-12) {
                j = i;
                ++nz;
            }
        if (nz != 1) continue;
        const double bound = z(r) / G(r, j);
        if (G(r, j) > 0)
            u(j) = std::min(u(j), bound);
        else
            u(j) = std::max(u(j), bound);
    }
    // remaining coupled input rows: scale toward the origin (0 is interior)
    for (Index r = 0; r < G.rows(); ++r) {
        if (!pure_input_row(F, r)) continue;
        const double val = G.row(r).dot(u);
        if (val > z(r)) u *= z(r) / val;
    }
    return u;
}

constexpr int kVertexCap = 12;

} // namespace

const char* to_string(FilterMode mode) {
    switch (mode) {
        case FilterMode::Switching: return "switching";
        case FilterMode::Shrinking: return "shrinking";
        case FilterMode::Recursive: return "recursive";
    }
    return "?";
}

const char* to_string(Branch branch) {
    switch (branch) {
        case Branch::Passthrough: return "passthrough";
        case Branch::Corrected: return "corrected";
        case Branch::BackupReplay: return "backup_replay";
        case Branch::TerminalPolicy: return "terminal_policy";
    }
    return "?";
}

FilterMode filter_mode_from(const std::string& name) {
    if (name == "switching") return FilterMode::Switching;
    if (name == "shrinking") return FilterMode::Shrinking;
    if (name == "recursive") return FilterMode::Recursive;
    throw Error("unknown filter mode: " + name);
}

const char* to_string(LearnSource source) {
    switch (source) {
        case LearnSource::UniformRandom: return "uniform-random";
        case LearnSource::PdSetpoint: return "pd-setpoint";
        case LearnSource::AdversarialBound: return "adversarial-bound";
    }
    return "?";
}

LearnSource learn_source_from(const std::string& name) {
    if (name == "uniform-random") return LearnSource::UniformRandom;
    if (name == "pd-setpoint") return LearnSource::PdSetpoint;
    if (name == "adversarial-bound") return LearnSource::AdversarialBound;
    throw Error("unknown learning source: " + name);
}

FilterState make_filter_state(const TubeConfig& cfg, FilterMode mode) {
    FilterState st;
    st.N = cfg.N;
    st.k_inf = cfg.N - 1;
    st.mode = mode;
    return st;
}

Vec terminal_policy(const PlantModel& model, const Vec& u_learn, const Vec& x,
                    const ParamBox& theta, const TerminalSet& terminal, const TubeConfig& cfg,
                    const SafeSetUnion* safe, bool* envelope_exceeded) {
    SafeSetUnion local;
    if (!safe) {
        local.terminal = &terminal;
        local.X0 = &cfg.X0;
        safe = &local;
    }
    if (envelope_exceeded) *envelope_exceeded = false;

    bool ok = in_constraints(model, x, u_learn);
    // vertex successor check is only enumerable in moderate dimension;
    // otherwise keep the conservative fallback
    ok = ok && theta.p() <= kVertexCap && model.n() <= kVertexCap;
    if (ok) {
        const auto tvs = box_vertices(theta.box, kVertexCap);
        const auto wvs = box_vertices(model.disturbance, kVertexCap);
        for (const Vec& tv : tvs) {
            if (!ok) break;
            auto [A, B] = assemble(model, tv);
            const Vec base = A * x + B * u_learn;
            for (const Vec& w : wvs) {
                if (!union_membership(*safe, base + w)) {
                    ok = false;
                    break;
                }
            }
        }
    }
    if (ok) return u_learn;

    Vec u = saturate_input(model, cfg.K * x);
    if (envelope_exceeded && !in_constraints(model, x, u)) *envelope_exceeded = true;
    return u;
}

CertifiedStep certify(FilterState& state, const PlantModel& model, const Vec& x_k,
                      const Vec& u_learn, const ParamBox& theta, const TerminalSet& terminal,
                      const TubeConfig& cfg, const SafeSetUnion* safe) {
    const auto t0 = std::chrono::steady_clock::now();
    require(x_k.size() == model.n() && u_learn.size() == model.m(), "certify: dimensions");

    const bool stale = !state.has_cache || state.cache_terminal != terminal.count() ||
                       state.cache_center.size() != theta.center().size() ||
                       state.cache_center != theta.center() || state.cache_half != theta.radius();
    if (stale) {
        state.cache_sys = assemble_tube(model, cfg, theta, terminal, cfg.N);
        state.cache_center = theta.center();
        state.cache_half = theta.radius();
        state.cache_terminal = terminal.count();
        state.has_cache = true;
        state.warm.active.clear();
    }

    CertifiedStep out;
    out.qp = solve_tube_qp(state.cache_sys, terminal, cfg, x_k, u_learn, theta,
                           state.use_warm ? &state.warm : nullptr);
    bool feasible = out.qp.status == QpStatus::Feasible;

    if (!feasible && state.mode == FilterMode::Recursive) {
        std::ostringstream msg;
        msg << "certification infeasible in recursive mode at step " << state.step
            << " (status " << (out.qp.status == QpStatus::Infeasible ? "infeasible" : "solver")
            << ", residual " << out.qp.max_constraint_residual << ")";
        throw RecursiveFeasibilityBroken(msg.str());
    }

    auto accept = [&](QpReport rep) {
        rep.tube->solved_at = state.step;
        state.backup = rep.tube;
        out.qp = std::move(rep);
        out.gap = passthrough_gap(out.qp, u_learn);
        if (out.qp.tube->objective <= 1e-8 && in_constraints(model, x_k, u_learn)) {
            out.branch = Branch::Passthrough;
            out.u_applied = u_learn;
        } else {
            out.branch = Branch::Corrected;
            out.u_applied = out.qp.tube->u0;
        }
    };

    if (feasible) {
        state.k_inf = 0;
        accept(std::move(out.qp));
    } else {
        state.k_inf += 1;
        bool resolved = false;
        if (state.mode == FilterMode::Shrinking && state.k_inf <= state.N - 1) {
            // re-solve over the remaining window; the new (shorter) plan takes
            // over as the backup without resetting the window counter
            QpReport retry =
                build_and_solve(model, x_k, u_learn, theta, terminal, cfg, state.N - state.k_inf);
            if (retry.status == QpStatus::Feasible) {
                accept(std::move(retry));
                resolved = true;
            }
        }
        if (!resolved) {
            // replay indexes by age of the stored plan (= k_inf when every
            // backup came from a full-horizon solve)
            const int age = state.backup ? state.step - state.backup->solved_at : -1;
            if (state.backup && state.k_inf <= state.N - 1 && age >= 1 &&
                age < state.backup->horizon) {
                out.branch = Branch::BackupReplay;
                out.u_applied = cfg.K * x_k + state.backup->v[static_cast<size_t>(age)];
            } else {
                out.branch = Branch::TerminalPolicy;
                out.u_applied = terminal_policy(model, u_learn, x_k, theta, terminal, cfg, safe,
                                                &out.envelope_exceeded);
            }
        }
    }
    out.k_inf = state.k_inf;
    state.step += 1;
    out.solve_seconds = seconds_since(t0);
    return out;
}

namespace {

struct LearningPolicy {
    LearnSource source;
    Rng rng;
    InputBounds bounds;
    Vec envelope;
    Vec x_ref;
    int ref_age = 0;

    LearningPolicy(LearnSource s, Rng r, const PlantModel& model)
        : source(s), rng(r), bounds(input_bounds(model)), envelope(state_envelope(model)),
          x_ref(Vec::Zero(model.n())) {}

    Vec draw(const PlantModel& model, const TubeConfig& cfg, const Vec& x, const Vec& theta_c) {
        const Index m = model.m();
        Vec u(m);
        switch (source) {
            case LearnSource::UniformRandom:
                for (Index i = 0; i < m; ++i) u(i) = rng.uniform(bounds.lo(i), bounds.up(i));
                return u;
            case LearnSource::PdSetpoint: {
                if (ref_age == 0) {
                    for (Index j = 0; j < x_ref.size(); ++j)
                        x_ref(j) = rng.uniform(-0.5 * envelope(j), 0.5 * envelope(j));
                }
                ref_age = (ref_age + 1) % 25;
                return cfg.K * (x - x_ref);
            }
            case LearnSource::AdversarialBound: {
                // pick the pure-state row closest to activation, then the
                // input-box vertex that pushes the predicted state at it
                const Mat F = model.F();
                const Mat G = model.G();
                const Vec& z = model.z();
                Index worst = 0;
                double best = -1e300;
                for (Index r = 0; r < F.rows(); ++r) {
                    if (!pure_state_row(G, r)) continue;
                    const double ratio = F.row(r).dot(x) / z(r);
                    if (ratio > best) {
                        best = ratio;
                        worst = r;
                    }
                }
                auto [A, B] = assemble(model, theta_c);
                const Vec push = B.transpose() * F.row(worst).transpose();
                for (Index i = 0; i < m; ++i) u(i) = push(i) >= 0 ? bounds.up(i) : bounds.lo(i);
                return u;
            }
        }
        return Vec::Zero(m);
    }
};

} // namespace

RunLog run_closed_loop(TrueSystem& sys, const ParamBox& theta0, const TerminalSet& terminal,
                       const TubeConfig& cfg, const RunOptions& opt) {
    const PlantModel& model = sys.model();
    const auto wall0 = std::chrono::steady_clock::now();

    RunLog log;
    FilterState st = make_filter_state(cfg, opt.mode);
    st.use_warm = opt.use_warm;
    ParamBox theta = theta0;
    theta.step_index = 0;
    Vec x = opt.x0.size() ? opt.x0 : Vec::Zero(model.n());
    require(x.size() == model.n(), "run_closed_loop: x0 dimension");

    LearningPolicy learner(opt.source, Rng(opt.seed).child(0x4c4541524eull), model);

    SafeSetUnion safe;
    safe.terminal = &terminal;
    safe.X0 = &cfg.X0;
    safe.feas_oracle = [&](const Vec& xs) {
        return build_and_solve(model, xs, Vec::Zero(model.m()), theta, terminal, cfg).status ==
               QpStatus::Feasible;
    };

    {
        QpReport probe = build_and_solve(model, x, Vec::Zero(model.m()), theta, terminal, cfg);
        if (probe.status != QpStatus::Feasible) {
            SafeSetUnion bare;
            bare.terminal = &terminal;
            bare.X0 = &cfg.X0;
            log.unsafe_start_warning = !union_membership(bare, x);
        }
    }

    Vec x_prev, u_prev;
    bool have_prev = false;
    int interventions = 0;
    for (int k = 0; k < opt.steps; ++k) {
        const int cadence = std::max(1, opt.estimation_cadence);
        if (opt.adapt && have_prev && (k - 1) % cadence == 0) {
            UpdateOutcome up = update(theta, nonfalsified(model, {x_prev, u_prev, x}));
            log.model_violated = log.model_violated || up.model_violated;
            theta = up.box;
            theta.step_index = k;
        }

        const Vec u_learn = learner.draw(model, cfg, x, theta.center());
        CertifiedStep step = certify(st, model, x, u_learn, theta, terminal, cfg, &safe);

        if (!in_constraints(model, x, step.u_applied)) {
            log.violations += 1;
            std::ostringstream msg;
            msg << "constraint violated at step " << k << " branch " << to_string(step.branch)
                << "\n  x = " << x.transpose() << "\n  u = " << step.u_applied.transpose();
            throw ConstraintViolated(msg.str());
        }

        StepRecord rec;
        rec.step = k;
        rec.x = x;
        rec.u_learn = u_learn;
        rec.u_applied = step.u_applied;
        rec.branch = step.branch;
        rec.gap = step.gap;
        rec.k_inf = step.k_inf;
        rec.theta_center = theta.center();
        rec.theta_half = theta.radius();
        rec.solve_seconds = step.solve_seconds;
        rec.qp_feasible = step.qp.status == QpStatus::Feasible;
        log.steps.push_back(std::move(rec));
        if (step.qp.status == QpStatus::Feasible) log.plans.push_back(*step.qp.tube);
        if (step.branch != Branch::Passthrough) ++interventions;

        x_prev = x;
        u_prev = step.u_applied;
        have_prev = true;
        x = sys.step(x_prev, u_prev);
    }

    log.theta_final = theta;
    log.intervention_rate = opt.steps ? static_cast<double>(interventions) / opt.steps : 0.0;
    log.total_seconds = seconds_since(wall0);
    return log;
}

namespace {

void append_num(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    line += buf;
}

} // namespace

void write_run_csv(const RunLog& log, std::ostream& os) {
    if (log.steps.empty()) {
        os << "step\n";
        return;
    }
    const auto& first = log.steps.front();
    std::string header = "step";
    auto cols = [&](const char* stem, Index k) {
        for (Index i = 0; i < k; ++i) header += "," + std::string(stem) + std::to_string(i);
    };
    cols("x", first.x.size());
    cols("u_learn", first.u_learn.size());
    cols("u_applied", first.u_applied.size());
    header += ",branch,gap,k_inf";
    cols("theta_c", first.theta_center.size());
    cols("theta_h", first.theta_half.size());
    os << header << "\n";

    // wall-clock solve times stay out of the CSV so identical flags give
    // byte-identical files; timing aggregates live in the JSON summary
    for (const auto& r : log.steps) {
        std::string line = std::to_string(r.step);
        for (Index i = 0; i < r.x.size(); ++i) append_num(line, r.x(i));
        for (Index i = 0; i < r.u_learn.size(); ++i) append_num(line, r.u_learn(i));
        for (Index i = 0; i < r.u_applied.size(); ++i) append_num(line, r.u_applied(i));
        line += ",";
        line += to_string(r.branch);
        append_num(line, r.gap);
        line += "," + std::to_string(r.k_inf);
        for (Index i = 0; i < r.theta_center.size(); ++i) append_num(line, r.theta_center(i));
        for (Index i = 0; i < r.theta_half.size(); ++i) append_num(line, r.theta_half(i));
        os << line << "\n";
    }
}

} // namespace ampsc
