#include "ampsc/estimation.hpp"

#include "ampsc/lp.hpp"

#include <algorithm>

namespace ampsc {

HPolytope nonfalsified(const PlantModel& model, const Observation& obs) {
    const Index n = model.n();
    const Index p = model.p();
    require(obs.x_prev.size() == n && obs.u_prev.size() == model.m() &&
                obs.x_next.size() == n,
            "nonfalsified: observation dimensions");

    Mat D(n, p);
    for (Index i = 0; i < p; ++i)
        D.col(i) = model.A_components[static_cast<size_t>(i)] * obs.x_prev +
                   model.B_components[static_cast<size_t>(i)] * obs.u_prev;
    const Vec r = obs.x_next - model.A0 * obs.x_prev - model.B0 * obs.u_prev;

    const HPolytope w = HPolytope::from_box(model.disturbance);
    return {-(w.normals * D), w.offsets - w.normals * r};
}

UpdateOutcome update(const ParamBox& theta, const HPolytope& delta) {
    const Index p = theta.p();
    require(delta.dim() == p, "update: delta dimension");

    lp::Problem prob;
    prob.c = Vec::Zero(p);
    prob.A = delta.normals;
    prob.b = delta.offsets;
    prob.E = Mat(0, p);
    prob.d = Vec(0);
    prob.lo = theta.box.center - theta.box.half_widths;
    prob.up = theta.box.center + theta.box.half_widths;

    lp::Solver solver;
    solver.set_problem(prob);

    Vec lo(p), up(p);
    for (Index i = 0; i < p; ++i) {
        Vec c = Vec::Zero(p);
        c(i) = 1.0;
        auto rmin = solver.resolve_costs(c);
        if (rmin.status == lp::Status::Infeasible) {
            UpdateOutcome frozen{theta, true};
            frozen.box.step_index = theta.step_index + 1;
            return frozen;
        }
        require(rmin.status == lp::Status::Optimal, "update: LP not optimal");
        auto rmax = solver.resolve_costs(-c);
        require(rmax.status == lp::Status::Optimal, "update: LP not optimal");
        lo(i) = std::max(rmin.objective, prob.lo(i));
        up(i) = std::min(-rmax.objective, prob.up(i));
    }

    UpdateOutcome out;
    out.box.box = Box((lo + up) / 2.0, ((up - lo) / 2.0).cwiseMax(0.0));
    out.box.step_index = theta.step_index + 1;
    return out;
}

} // namespace ampsc
