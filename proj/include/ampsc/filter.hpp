#pragma once

#include "ampsc/certifier.hpp"
#include "ampsc/estimation.hpp"
#include "ampsc/plant.hpp"
#include "ampsc/terminal.hpp"
#include "ampsc/tube.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ampsc {

// switching: on infeasibility fall back to the stored backup plan, then to the
//            terminal policy once the plan is exhausted.
// shrinking: like switching, but first retry the certification with the
//            remaining-window horizon before falling back.
// recursive: infeasibility is a hard error (requires an invariance-checked
//            terminal set and a frozen parameter box).
enum class FilterMode { Switching, Shrinking, Recursive };

enum class Branch { Passthrough, Corrected, BackupReplay, TerminalPolicy };

const char* to_string(FilterMode mode);
const char* to_string(Branch branch);
FilterMode filter_mode_from(const std::string& name);

struct FilterState {
    int N = 0;
    int k_inf = 0;  // consecutive infeasible steps; starts at N-1 (no backup yet)
    std::optional<HomotheticTube> backup;
    FilterMode mode = FilterMode::Switching;
    int step = 0;
    bool use_warm = true;
    WarmStart warm;

    // constraint-system cache, valid while the parameter box and terminal
    // set are unchanged
    bool has_cache = false;
    Vec cache_center, cache_half;
    Index cache_terminal = -1;
    TubeSystem cache_sys;
};

FilterState make_filter_state(const TubeConfig& cfg, FilterMode mode);

struct CertifiedStep {
    Vec u_applied;
    Branch branch = Branch::Corrected;
    double gap = 0.0;  // ||u_learn - u0*|| when the certification is feasible
    QpReport qp;
    int k_inf = 0;  // counter after this step; the replay index when replaying
    bool envelope_exceeded = false;
    double solve_seconds = 0.0;
};

// One filter step: certify u_learn at x_k, or fall back per the mode.
// `safe` feeds the terminal policy's successor check; when null only the
// terminal set itself is used as the safe region.
CertifiedStep certify(FilterState& state, const PlantModel& model, const Vec& x_k,
                      const Vec& u_learn, const ParamBox& theta, const TerminalSet& terminal,
                      const TubeConfig& cfg, const SafeSetUnion* safe = nullptr);

// u_learn if (x, u_learn) is constraint-admissible and every parameter-vertex /
// disturbance-vertex successor stays in the safe region; otherwise K x
// saturated into the input set. envelope_exceeded reports when even the
// fallback pair leaves the constraint set (x outside the state bounds).
Vec terminal_policy(const PlantModel& model, const Vec& u_learn, const Vec& x,
                    const ParamBox& theta, const TerminalSet& terminal, const TubeConfig& cfg,
                    const SafeSetUnion* safe = nullptr, bool* envelope_exceeded = nullptr);

enum class LearnSource { UniformRandom, PdSetpoint, AdversarialBound };

const char* to_string(LearnSource source);
LearnSource learn_source_from(const std::string& name);

struct RunOptions {
    int steps = 150;
    std::uint64_t seed = 0;
    FilterMode mode = FilterMode::Switching;
    LearnSource source = LearnSource::UniformRandom;
    bool adapt = true;          // set-membership updates on/off (ablation)
    int estimation_cadence = 1; // incorporate every c-th observation
    bool use_warm = true;       // QP warm starts on/off
    Vec x0;                     // empty = origin
};

struct StepRecord {
    int step = 0;
    Vec x;
    Vec u_learn;
    Vec u_applied;
    Branch branch = Branch::Corrected;
    double gap = 0.0;
    int k_inf = 0;
    Vec theta_center;
    Vec theta_half;
    double solve_seconds = 0.0;
    bool qp_feasible = false;
};

struct RunLog {
    std::vector<StepRecord> steps;
    std::vector<HomotheticTube> plans;  // every feasible certificate, in order
    ParamBox theta_final;
    int violations = 0;
    double intervention_rate = 0.0;
    bool model_violated = false;
    bool unsafe_start_warning = false;
    double total_seconds = 0.0;
};

// Closed loop: per step draw u_learn from the source, update the parameter
// box from the previous transition, certify, assert (x, u) admissible, apply.
RunLog run_closed_loop(TrueSystem& sys, const ParamBox& theta0, const TerminalSet& terminal,
                       const TubeConfig& cfg, const RunOptions& opt);

// Deterministic CSV emission (fixed %.17g formatting, byte-stable).
void write_run_csv(const RunLog& log, std::ostream& os);

} // namespace ampsc
