#pragma once

#include "ampsc/core.hpp"
#include "ampsc/estimation.hpp"
#include "ampsc/geometry.hpp"
#include "ampsc/plant.hpp"

#include <functional>
#include <vector>

namespace ampsc {

struct TerminalSet;

// Tube cross-section {H x <= 1} with an optional analytic support function
// (product-of-polygons sections evaluate support in closed form; generic
// sections fall back to one LP per direction).
struct CrossSection {
    HPolytope set;
    std::function<double(const Vec&)> support_fn;

    CrossSection() = default;
    CrossSection(HPolytope s) : set(std::move(s)) {}  // NOLINT: implicit by design
    CrossSection(HPolytope s, std::function<double(const Vec&)> fn)
        : set(std::move(s)), support_fn(std::move(fn)) {}

    Index dim() const { return set.dim(); }
    Index rows() const { return set.rows(); }
    double support(const Vec& direction) const;
};

// How the parameter dependence of the state-tube recursion is handled:
// ThetaVertices enumerates the 2^p parameter vertices exactly;
// ComponentSplit bounds the deviation terms through per-component auxiliary
// variables (requires rank-1 A components and parameter-free B).
enum class TubeMode { ThetaVertices, ComponentSplit };

struct TubeConfig {
    int N = 10;
    Mat K;
    CrossSection X0;   // offsets normalized to 1
    TubeMode mode = TubeMode::ThetaVertices;

    Vec w_bar;  // per X0 row: support of the disturbance box
    Vec c_bar;  // per constraint row: support of X0 under F + G K

    // ComponentSplit data: A_i = gain_i * pattern_i^T (rank one)
    std::vector<Vec> split_gain;
    std::vector<Vec> split_pattern;
};

TubeConfig make_tube_config(const PlantModel& model, Mat K, CrossSection X0, int N,
                            TubeMode mode = TubeMode::ThetaVertices);

// Constraint system of the tube feasibility/certification problem over
// variables [z_0..z_h | alpha_0..alpha_h | v_0..v_{h-1} | D (split) | lam]:
//   rows 0..n5b-1:      -H z_0 - alpha_0 <= -H x_k      (per-sample RHS)
//   tube recursion rows, constraint rows, alpha >= 0, lam >= 0;
//   equalities: z_h = sum lam_t z^t, alpha_h = sum lam_t a^t, sum lam = 1.
struct TubeSystem {
    Mat A;
    Vec b;
    Mat E;
    Vec d;
    Index n5b = 0;
    Index off_z = 0, off_alpha = 0, off_v = 0, off_D = 0, off_lam = 0;
    Index nvars = 0;
    Index n = 0, m = 0, p = 0, nH = 0, nT = 0;
    int horizon = 0;
    Mat Hx;  // X0 rows, for per-sample RHS refresh

    Index zi(int l) const { return off_z + static_cast<Index>(l) * n; }
    Index ai(int l) const { return off_alpha + static_cast<Index>(l); }
    Index vi(int l) const { return off_v + static_cast<Index>(l) * m; }
    Index di(int l) const { return off_D + static_cast<Index>(l) * p; }

    // Refresh the sample-dependent block of b for state x.
    void set_sample(const Vec& x, Vec& b_out) const;
};

TubeSystem assemble_tube(const PlantModel& model, const TubeConfig& cfg,
                         const ParamBox& theta, const TerminalSet& terminal,
                         int horizon);

} // namespace ampsc
