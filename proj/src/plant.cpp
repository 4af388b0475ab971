#include "ampsc/plant.hpp"

namespace ampsc {

namespace {
constexpr double kTs = 0.2;
constexpr double kDamping = 0.1;
} // namespace

void PlantModel::validate() const {
    require(A0.rows() == A0.cols(), "PlantModel: A0 square");
    require(B0.rows() == A0.rows(), "PlantModel: B0 rows");
    require(A_components.size() == B_components.size(), "PlantModel: component counts");
    for (const auto& Ai : A_components)
        require(Ai.rows() == n() && Ai.cols() == n(), "PlantModel: A component shape");
    for (const auto& Bi : B_components)
        require(Bi.rows() == n() && Bi.cols() == m(), "PlantModel: B component shape");
    require(disturbance.dim() == n(), "PlantModel: disturbance dimension");
    require(constraints.dim() == n() + m(), "PlantModel: constraint dimension");
    require(constraints.rows() == 0 || constraints.offsets.minCoeff() > 0.0,
            "PlantModel: origin not strictly inside constraints");
}

std::pair<Mat, Mat> assemble(const PlantModel& model, const Vec& theta) {
    require(theta.size() == model.p(), "assemble: theta length");
    Mat A = model.A0;
    Mat B = model.B0;
    for (Index i = 0; i < model.p(); ++i) {
        A += theta(i) * model.A_components[static_cast<size_t>(i)];
        B += theta(i) * model.B_components[static_cast<size_t>(i)];
    }
    return {std::move(A), std::move(B)};
}

bool in_constraints(const PlantModel& model, const Vec& x, const Vec& u) {
    require(x.size() == model.n() && u.size() == model.m(), "in_constraints: dimensions");
    Vec xu(x.size() + u.size());
    xu << x, u;
    return model.constraints.contains(xu, 0.0);
}

TrueSystem::TrueSystem(PlantModel model, Vec theta_star, Rng rng, DisturbanceMode mode)
    : model_(std::move(model)), theta_star_(std::move(theta_star)), rng_(rng), mode_(mode) {
    model_.validate();
    std::tie(A_, B_) = assemble(model_, theta_star_);
    last_w_ = Vec::Zero(model_.n());
}

Vec TrueSystem::draw() {
    const Box& w = model_.disturbance;
    Vec out(w.dim());
    for (Index i = 0; i < w.dim(); ++i) {
        if (mode_ == DisturbanceMode::Uniform) {
            out(i) = w.center(i) + rng_.uniform(-w.half_widths(i), w.half_widths(i));
        } else {
            const bool plus = rng_.uniform(0.0, 1.0) < 0.5;
            out(i) = w.center(i) + (plus ? w.half_widths(i) : -w.half_widths(i));
        }
    }
    return out;
}

Vec TrueSystem::step(const Vec& x, const Vec& u) {
    require(x.size() == model_.n() && u.size() == model_.m(), "step: dimensions");
    last_w_ = draw();
    return A_ * x + B_ * u + last_w_;
}

namespace {

// Literal per-element recursion: p+ = p + Ts v;
// v+ = v - Ts c_l (p_i - p_{i-1}) - Ts d_l (v_i - v_{i-1})
//        + Ts c_r (p_{i+1} - p_i) - Ts d_r (v_{i+1} - v_i) + u_i
Mat msd_a_matrix(int n_msd, const Vec& springs) {
    const Index n = 2 * n_msd;
    Mat A = Mat::Zero(n, n);
    auto spring = [&](int i) { return (i >= 1 && i <= n_msd - 1) ? springs(i - 1) : 0.0; };
    auto damper = [&](int i) { return (i >= 1 && i <= n_msd - 1) ? kDamping : 0.0; };
    for (int i = 1; i <= n_msd; ++i) {
        const Index pi = 2 * (i - 1), vi = pi + 1;
        A(pi, pi) = 1.0;
        A(pi, vi) = kTs;
        A(vi, vi) += 1.0;
        if (i >= 2) {
            const Index pj = 2 * (i - 2), vj = pj + 1;
            A(vi, pi) += -kTs * spring(i - 1);
            A(vi, pj) += kTs * spring(i - 1);
            A(vi, vi) += -kTs * damper(i - 1);
            A(vi, vj) += kTs * damper(i - 1);
        }
        if (i <= n_msd - 1) {
            const Index pj = 2 * i, vj = pj + 1;
            A(vi, pi) += -kTs * spring(i);
            A(vi, pj) += kTs * spring(i);
            A(vi, vi) += kTs * damper(i);
            A(vi, vj) += -kTs * damper(i);
        }
    }
    return A;
}

} // namespace

MsdChain msd_chain(int n_msd, std::uint64_t seed) {
    require(n_msd >= 1, "msd_chain: n_msd >= 1");
    const Index n = 2 * n_msd;
    const Index m = n_msd;
    const Index p = n_msd - 1;

    MsdChain out;
    out.model.A0 = msd_a_matrix(n_msd, Vec::Zero(p));
    out.model.B0 = Mat::Zero(n, m);
    for (int i = 0; i < n_msd; ++i) out.model.B0(2 * i + 1, i) = 1.0;
    for (Index j = 0; j < p; ++j) {
        Vec unit = Vec::Zero(p);
        unit(j) = 1.0;
        out.model.A_components.push_back(msd_a_matrix(n_msd, unit) - out.model.A0);
        out.model.B_components.push_back(Mat::Zero(n, m));
    }

    out.model.disturbance = Box(Vec::Zero(n), Vec::Constant(n, 1e-3));

    Mat fg = Mat::Zero(2 * (n + m), n + m);
    fg.topRows(n + m) = Mat::Identity(n + m, n + m);
    fg.bottomRows(n + m) = -Mat::Identity(n + m, n + m);
    Vec lim(2 * (n + m));
    lim.segment(0, n).setConstant(2.3);
    lim.segment(n, m).setConstant(3.5);
    lim.segment(n + m, n).setConstant(2.3);
    lim.segment(2 * n + m, m).setConstant(3.5);
    out.model.constraints = HPolytope(std::move(fg), std::move(lim));

    out.theta0 = Box(Vec::Constant(p, 1.0), Vec::Constant(p, 0.125));
    Rng rng = Rng(seed).child(0x7468657461ull);  // independent stream for theta*
    out.theta_star = Vec(p);
    for (Index j = 0; j < p; ++j) out.theta_star(j) = rng.uniform(0.875, 1.125);

    out.model.validate();
    return out;
}

} // namespace ampsc
