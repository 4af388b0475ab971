#pragma once

#include "ampsc/core.hpp"
#include "ampsc/geometry.hpp"
#include "ampsc/plant.hpp"

namespace ampsc {

// Parameter hypercube at one estimation step: center + per-dimension radius.
struct ParamBox {
    Box box;
    int step_index = 0;

    Index p() const { return box.dim(); }
    const Vec& center() const { return box.center; }
    const Vec& radius() const { return box.half_widths; }
    bool contains(const Vec& candidate) const { return box.contains(candidate, 0.0); }
};

struct Observation {
    Vec x_prev;
    Vec u_prev;
    Vec x_next;
};

// Parameters consistent with one transition under the disturbance box:
// {theta : -H_w D theta <= h_w - H_w r}, D_i = A_i x_prev + B_i u_prev,
// r = x_next - A0 x_prev - B0 u_prev.
HPolytope nonfalsified(const PlantModel& model, const Observation& obs);

struct UpdateOutcome {
    ParamBox box;
    bool model_violated = false;  // empty intersection: box kept frozen
};

// Tight axis-aligned bounding box of theta.box intersected with delta via
// 2p LPs. An empty intersection leaves the box unchanged and flags it.
UpdateOutcome update(const ParamBox& theta, const HPolytope& delta);

} // namespace ampsc
