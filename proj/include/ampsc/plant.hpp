#pragma once

#include "ampsc/core.hpp"
#include "ampsc/geometry.hpp"
#include "ampsc/rng.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace ampsc {

// x+ = (A0 + sum_i theta_i A_i) x + (B0 + sum_i theta_i B_i) u + w, w in the
// disturbance box, with joint constraints F x + G u <= z on (x, u).
struct PlantModel {
    Mat A0;
    Mat B0;
    std::vector<Mat> A_components;
    std::vector<Mat> B_components;
    Box disturbance;
    HPolytope constraints;  // over stacked (x, u)

    Index n() const { return A0.rows(); }
    Index m() const { return B0.cols(); }
    Index p() const { return static_cast<Index>(A_components.size()); }

    Mat F() const { return constraints.normals.leftCols(n()); }
    Mat G() const { return constraints.normals.rightCols(m()); }
    const Vec& z() const { return constraints.offsets; }

    void validate() const;
};

std::pair<Mat, Mat> assemble(const PlantModel& model, const Vec& theta);

bool in_constraints(const PlantModel& model, const Vec& x, const Vec& u);

enum class DisturbanceMode { Uniform, VertexAdversarial };

// Ground-truth simulator: fixed theta_star, seeded disturbance stream.
class TrueSystem {
  public:
    TrueSystem(PlantModel model, Vec theta_star, Rng rng,
               DisturbanceMode mode = DisturbanceMode::Uniform);

    Vec step(const Vec& x, const Vec& u);  // draws a disturbance, logs it
    const Vec& last_disturbance() const { return last_w_; }

    const PlantModel& model() const { return model_; }
    const Vec& theta_star() const { return theta_star_; }
    const Mat& A_true() const { return A_; }
    const Mat& B_true() const { return B_; }

  private:
    Vec draw();

    PlantModel model_;
    Vec theta_star_;
    Mat A_, B_;
    Rng rng_;
    DisturbanceMode mode_;
    Vec last_w_;
};

struct MsdChain {
    PlantModel model;
    Vec theta_star;
    Box theta0;
};

// Chain of n_msd mass elements, states ordered (p_1, v_1, p_2, v_2, ...),
// one force input per element, springs between neighbours uncertain in
// [0.05, 0.25], dampers fixed at 0.1, free ends.
MsdChain msd_chain(int n_msd, std::uint64_t seed);

} // namespace ampsc
