#pragma once

#include "ampsc/core.hpp"
#include "ampsc/estimation.hpp"
#include "ampsc/plant.hpp"
#include "ampsc/tube.hpp"

#include <vector>

namespace ampsc {

struct GainReport {
    Mat K;                             // u = K x + v convention
    std::vector<double> vertex_radii;  // closed-loop spectral radius per parameter vertex
    bool robust = false;               // all vertex radii < 1
};

// Discrete-time LQR at the center model; the vertex radii report whether the
// single gain stabilizes the whole parameter box (the contractivity check on
// the cross-section is the authoritative certificate).
GainReport synthesize_gain(const PlantModel& model, const ParamBox& theta0, const Mat& Q,
                           const Mat& R);

struct CrossSectionReport {
    bool ok = false;
    double worst_support = 0.0;  // max over vertices/rows of sup_{X0} h_s . A_cl x
    Index worst_row = -1;
    Index worst_vertex = -1;
    double lambda = 0.0;
};

// X0 is lambda-contractive for A_cl(theta) over the whole box iff
// worst_support <= lambda.
CrossSectionReport verify_cross_section(const PlantModel& model, const ParamBox& theta0,
                                        const Mat& K, const CrossSection& X0, double lambda);

// Backward-reachability refinement from the pure-state constraint box until
// A_cl(vertex) X <= lambda X holds; offsets normalized to 1.
HPolytope contractive_cross_section(const PlantModel& model, const ParamBox& theta0,
                                    const Mat& K, double lambda, int max_iter);

} // namespace ampsc
