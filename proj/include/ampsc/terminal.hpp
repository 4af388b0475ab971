#pragma once

#include "ampsc/core.hpp"
#include "ampsc/estimation.hpp"
#include "ampsc/geometry.hpp"
#include "ampsc/plant.hpp"
#include "ampsc/tube.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ampsc {

struct HomotheticTube;

enum class TerminalProvenance { Initial, Plan, VertexAugmented };

// One V-rep point (z, alpha) of the terminal set, optionally carrying the
// one-step certificate (v, z_next, alpha_next): applying u = Kx + v anywhere
// in {z} + alpha X0 lands in {z_next} + alpha_next X0 for all admissible
// parameters and disturbances.
struct TerminalPoint {
    Vec z;
    double alpha = 0.0;

    bool has_certificate = false;
    Vec v;
    Vec z_next;
    double alpha_next = 0.0;

    TerminalProvenance provenance = TerminalProvenance::Initial;
    int plan_step = -1;   // solve step the plan came from
    int plan_stage = -1;  // stage l within that plan
};

struct TerminalSet {
    std::vector<TerminalPoint> points;

    Index count() const { return static_cast<Index>(points.size()); }
    Index n() const { return points.empty() ? 0 : points.front().z.size(); }

    VrepSet lifted() const;  // points stacked as (z, alpha) in R^{n+1}
    Membership contains(const Vec& z, double alpha, double tol = 1e-7) const;
};

// {(0,0), (0,1)} with self-certificates (0, a) -> (0, lam a + margin).
// Verifies contractivity of X0 under K at the parameter vertices, constraint
// admissibility of X0 x {Kx}, and lam + margin <= 1.
TerminalSet initial_terminal(const PlantModel& model, const ParamBox& theta0,
                             const TubeConfig& cfg);

// Hull of the existing points and all (z*_l, alpha*_l) of the given plans,
// successor certificates chained along each plan; l = horizon successor uses
// the plan's stored terminal weights. Pruned afterwards.
TerminalSet enlarge_homothetic(const TerminalSet& terminal,
                               const std::vector<HomotheticTube>& plans,
                               const ParamBox& theta_now);

// Adds (z*_l + alpha*_l x^j, 0) for every X0 vertex x^j of every plan point,
// certified into the successor tube set. Requires X0 vertex enumeration.
TerminalSet augment_vertices(const TerminalSet& terminal,
                             const std::vector<HomotheticTube>& plans,
                             const TubeConfig& cfg, int vertex_cap = 12);

struct Assumption4Report {
    bool pass = false;
    double worst_margin = 0.0;  // negative = violated by that amount
    Index worst_point = -1;
    std::string detail;
};

// One-step invariance of every certified point under the current parameter
// box: containment of the propagated tube set and constraint admissibility.
Assumption4Report check_assumption4(const TerminalSet& terminal, const PlantModel& model,
                                    const ParamBox& theta, const TubeConfig& cfg,
                                    double tol = 1e-9);

// x safe iff certifier-feasible now, or (x, a) in the terminal set for some
// a >= 0, or inside the hull of stored initial tube sets.
struct SafeSetUnion {
    std::function<bool(const Vec&)> feas_oracle;
    const TerminalSet* terminal = nullptr;
    std::vector<std::pair<Vec, double>> initial_tubes;  // (z*_0, alpha*_0) pairs
    const CrossSection* X0 = nullptr;
};

bool union_membership(const SafeSetUnion& s, const Vec& x);

} // namespace ampsc
