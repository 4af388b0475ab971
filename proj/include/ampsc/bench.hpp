#pragma once

#include "ampsc/core.hpp"
#include "ampsc/estimation.hpp"
#include "ampsc/filter.hpp"
#include "ampsc/geometry.hpp"
#include "ampsc/lp.hpp"
#include "ampsc/plant.hpp"
#include "ampsc/terminal.hpp"
#include "ampsc/tube.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ampsc {

// One ready-to-run benchmark instance: plant family with a random true
// parameter, tuned gain + certified tube cross-section, initial terminal set,
// the pure-state constraint box (sampling bounds), and recommended run
// settings.
struct Benchmark {
    std::string name;
    MsdChain chain;
    TubeConfig cfg;
    TerminalSet terminal;
    Box state_box;
    RunOptions run;
};

// "msd:<n>" mass chains. n = 3 uses an LQR gain with a balanced product-of-
// octagons cross-section and the vertex-exact tube; n >= 4 uses per-mass
// pole placement with decoupled octagon sections and the component-split
// tube. The seed draws the hidden true spring constants.
Benchmark make_benchmark(const std::string& name, std::uint64_t seed);

struct VolumeEstimate {
    double volume = 0.0;
    Index samples = 0;
    Index hits = 0;
    double ci95_halfwidth = 0.0;
    std::string oracle_tag;
};

// Uniform Monte Carlo over the box; identical (bounds, samples, seed) give an
// identical sample stream, so estimates for different oracles are paired.
VolumeEstimate mc_volume(const std::function<bool(const Vec&)>& oracle, const Box& bounds,
                         Index samples, std::uint64_t seed, std::string oracle_tag = {});

// Feasibility oracle over one assembled tube system: "does a feasible tube
// from x exist". Both decision problems are posed in dual form (one basis row
// per tube variable, warm across samples since only objective coefficients
// change) and every decision leaves a reusable cache entry:
//   - a feasible sample recovers the widest-initial-section tube through x
//     from the simplex multipliers; any later x' with H(x' - z0) <= a0 is
//     feasible with no solve,
//   - an infeasible sample stores a separating functional; any later x' it
//     separates is infeasible with no solve.
// Certificates remain valid in any system whose feasible set contains this
// one (smaller parameter box, enlarged terminal set): adopt_certs transfers
// them in that direction. Separating functionals are never transferred.
class FeasOracle {
  public:
    FeasOracle(const PlantModel& model, const TubeConfig& cfg, const ParamBox& theta,
               const TerminalSet& terminal, std::string tag = {});

    bool feasible(const Vec& x);
    void adopt_certs(const FeasOracle& donor);
    std::function<bool(const Vec&)> predicate();

    const std::string& tag() const { return tag_; }
    Index lp_calls() const { return lp_calls_; }
    Index cert_hits() const { return cert_hits_; }
    Index ray_hits() const { return ray_hits_; }
    const TubeSystem& system() const { return sys_; }

  private:
    struct Cert {
        Vec z0;
        double alpha0 = 0.0;
        Vec Hz0;  // precomputed rows . z0
    };
    struct Ray {
        Vec g;
        double c = 0.0;  // g . x > c separates x from the feasible set
    };

    bool decide_lp(const Vec& x, const Vec& hx);
    bool separation_feasible(const Vec& x, const Vec& hx);  // exact test; mints rays
    void store_cert(const Vec& x, const Vec& hx);
    void seed_widest_cert();

    TubeSystem sys_;
    Vec row_scale_;    // per-row equilibration of the inequality system
    Vec scaled_b_;     // row_scale .* b (constant tail of the dual costs)
    lp::Solver fat_;   // dual of "maximize alpha_0 through the sample"
    lp::Solver sep_;   // dual of the bare feasibility system, multipliers boxed
    Vec fat_cost_;
    Vec sep_cost_;
    Index ny_ = 0;
    std::vector<Cert> certs_;
    std::vector<Ray> rays_;
    bool widest_ok_ = false;  // certs_[0] is the widest-section tube
    std::string tag_;
    Index lp_calls_ = 0, cert_hits_ = 0, ray_hits_ = 0;
    Vec b_work_;
};

// Multi-seed volume study settings.
struct ExperimentConfig {
    std::string benchmark = "msd:3";
    int steps = 150;
    int horizon = 0;  // 0 = benchmark default
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    LearnSource source = LearnSource::UniformRandom;
    int estimation_cadence = 1;
    int enlargement_cadence = 1;  // every c-th stored plan feeds enlargement; 0 = off
    FilterMode mode = FilterMode::Switching;
    Index samples = 100000;
    std::uint64_t sample_seed = 9001;
    bool ablation_frozen = true;  // extra run with set-membership updates disabled
};

struct SeedReport {
    std::uint64_t seed = 0;
    int steps = 0;
    int violations = 0;
    double intervention_rate = 0.0;
    Box theta0;
    Box theta_final;
    Index terminal_points_before = 0;
    Index terminal_points_after = 0;
    VolumeEstimate vol_theta0;
    VolumeEstimate vol_theta_final;
    VolumeEstimate vol_enlarged;
    VolumeEstimate vol_frozen;  // ablation row; samples == 0 when disabled
    double gain_learning_pct = 0.0;  // theta0 -> theta_final
    double gain_total_pct = 0.0;     // theta0 -> enlarged terminal
    double run_seconds = 0.0;
    double volume_seconds = 0.0;
};

struct VolumeStudy {
    ExperimentConfig config;
    double box_volume = 0.0;
    std::vector<SeedReport> rows;
};

// Per seed: closed-loop run, post-run terminal enlargement from the stored
// plans, then paired Monte Carlo volumes of the feasible set under the
// initial box, the contracted box, and the contracted box with the enlarged
// terminal set, plus the frozen-box ablation.
VolumeStudy run_table1(const ExperimentConfig& cfg);

} // namespace ampsc
