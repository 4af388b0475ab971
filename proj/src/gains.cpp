#include "ampsc/gains.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <vector>

namespace ampsc {

namespace {

double spectral_radius(const Mat& M) {
    return M.eigenvalues().cwiseAbs().maxCoeff();
}

// Redundant rows removed: row i is dropped when its support over the other
// rows does not exceed its own offset.
HPolytope prune_rows(const HPolytope& X, double tol) {
    const Index r = X.rows();
    std::vector<bool> keep(static_cast<size_t>(r), true);
    for (Index i = 0; i < r; ++i) {
        Index cnt = 0;
        for (Index j = 0; j < r; ++j) cnt += (j != i && keep[static_cast<size_t>(j)]) ? 1 : 0;
        if (cnt == 0) continue;
        Mat Ho(cnt, X.dim());
        Vec ho(cnt);
        Index w = 0;
        for (Index j = 0; j < r; ++j) {
            if (j == i || !keep[static_cast<size_t>(j)]) continue;
            Ho.row(w) = X.normals.row(j);
            ho(w) = X.offsets(j);
            ++w;
        }
        try {
            if (support(HPolytope(Ho, ho), X.normals.row(i).transpose()) <= X.offsets(i) + tol)
                keep[static_cast<size_t>(i)] = false;
        } catch (const Unbounded&) {
            // row is essential for boundedness
        }
    }
    Index cnt = 0;
    for (bool k : keep) cnt += k ? 1 : 0;
    Mat Hn(cnt, X.dim());
    Vec hn(cnt);
    Index w = 0;
    for (Index j = 0; j < r; ++j) {
        if (!keep[static_cast<size_t>(j)]) continue;
        Hn.row(w) = X.normals.row(j);
        hn(w) = X.offsets(j);
        ++w;
    }
    return {Hn, hn};
}

std::vector<Mat> closed_loop_at_vertices(const PlantModel& model, const ParamBox& theta0,
                                         const Mat& K) {
    std::vector<Mat> out;
    for (const Vec& th : box_vertices(theta0.box)) {
        auto [A, B] = assemble(model, th);
        out.push_back(A + B * K);
    }
    return out;
}

} // namespace

GainReport synthesize_gain(const PlantModel& model, const ParamBox& theta0, const Mat& Q,
                           const Mat& R) {
    model.validate();
    const Index n = model.n();
    const Index m = model.m();
    require(Q.rows() == n && Q.cols() == n, "Q must be n x n");
    require(R.rows() == m && R.cols() == m, "R must be m x m");
    require(theta0.p() == model.p(), "parameter box dimension");
    if (Eigen::LLT<Mat>(R).info() != Eigen::Success)
        throw NotStabilizable("input weight R must be positive definite");

    auto [A, B] = assemble(model, theta0.center());

    Mat P = Q;
    Mat K;
    bool converged = false;
    for (int it = 0; it < 20000; ++it) {
        const Mat BtP = B.transpose() * P;
        K = -(R + BtP * B).ldlt().solve(BtP * A);
        const Mat Pn = Q + A.transpose() * P * A + A.transpose() * P * B * K;
        const double delta = (Pn - P).cwiseAbs().maxCoeff();
        const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
        P = Pn;
        if (!P.allFinite() || P.cwiseAbs().maxCoeff() > 1e14)
            throw NotStabilizable("Riccati iteration diverged at the centre model");
        if (delta < 1e-13 * scale) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NotStabilizable("Riccati iteration did not converge at the centre model");
    const Mat BtP = B.transpose() * P;
    K = -(R + BtP * B).ldlt().solve(BtP * A);

    GainReport rep;
    rep.K = K;
    rep.robust = true;
    for (const Mat& Acl : closed_loop_at_vertices(model, theta0, K)) {
        rep.vertex_radii.push_back(spectral_radius(Acl));
        if (rep.vertex_radii.back() >= 1.0) rep.robust = false;
    }
    return rep;
}

CrossSectionReport verify_cross_section(const PlantModel& model, const ParamBox& theta0,
                                        const Mat& K, const CrossSection& X0, double lambda) {
    require(K.rows() == model.m() && K.cols() == model.n(), "gain shape");
    require(X0.dim() == model.n(), "cross-section dimension");
    CrossSectionReport rep;
    rep.lambda = lambda;
    rep.worst_support = -std::numeric_limits<double>::infinity();
    const auto verts = closed_loop_at_vertices(model, theta0, K);
    for (size_t j = 0; j < verts.size(); ++j) {
        for (Index s = 0; s < X0.rows(); ++s) {
            const double val =
                X0.support(verts[j].transpose() * X0.set.normals.row(s).transpose()) /
                X0.set.offsets(s);
            if (val > rep.worst_support) {
                rep.worst_support = val;
                rep.worst_row = s;
                rep.worst_vertex = static_cast<Index>(j);
            }
        }
    }
    rep.ok = rep.worst_support <= lambda + 1e-12;
    return rep;
}

HPolytope contractive_cross_section(const PlantModel& model, const ParamBox& theta0,
                                    const Mat& K, double lambda, int max_iter) {
    require(lambda > 0.0 && lambda <= 1.0, "contraction factor must lie in (0, 1]");
    const Index n = model.n();
    const Mat F = model.F();
    const Mat G = model.G();

    std::vector<Index> state_rows;
    for (Index r = 0; r < model.constraints.rows(); ++r)
        if (G.row(r).cwiseAbs().maxCoeff() <= 1e-14 && F.row(r).cwiseAbs().maxCoeff() > 1e-14)
            state_rows.push_back(r);

    Mat H;
    if (state_rows.empty()) {
        H = Mat(2 * n, n);
        H << Mat::Identity(n, n), -Mat::Identity(n, n);
    } else {
        H.resize(static_cast<Index>(state_rows.size()), n);
        for (size_t i = 0; i < state_rows.size(); ++i)
            H.row(static_cast<Index>(i)) = F.row(state_rows[i]) / model.z()(state_rows[i]);
    }

    // The recursion needs a bounded start.
    {
        HPolytope probe(H, Vec::Ones(H.rows()));
        bool bounded = true;
        for (Index i = 0; i < n && bounded; ++i) {
            Vec e = Vec::Zero(n);
            for (double sgn : {1.0, -1.0}) {
                e(i) = sgn;
                try {
                    support(probe, e);
                } catch (const Unbounded&) {
                    bounded = false;
                    break;
                }
            }
        }
        if (!bounded) {
            Mat Hb(H.rows() + 2 * n, n);
            Hb << H, Mat::Identity(n, n), -Mat::Identity(n, n);
            H = Hb;
        }
    }

    const auto verts = closed_loop_at_vertices(model, theta0, K);
    const double tol = 1e-9;

    std::vector<Vec> rows;
    for (Index s = 0; s < H.rows(); ++s) rows.push_back(H.row(s).transpose());
    std::vector<Vec> frontier = rows;

    auto as_polytope = [&]() {
        Mat Hc(static_cast<Index>(rows.size()), n);
        for (size_t s = 0; s < rows.size(); ++s) Hc.row(static_cast<Index>(s)) = rows[s].transpose();
        return HPolytope(Hc, Vec::Ones(Hc.rows()));
    };

    for (int it = 0; it < max_iter; ++it) {
        std::vector<Vec> added;
        for (const Vec& row : frontier) {
            for (const Mat& Acl : verts) {
                Vec cand = Acl.transpose() * row / lambda;
                if (support(as_polytope(), cand) > 1.0 + tol) {
                    rows.push_back(cand);
                    added.push_back(std::move(cand));
                }
            }
        }
        if (added.empty()) return prune_rows(as_polytope(), tol);
        frontier = std::move(added);
    }
    throw NoConvergence("contractive cross-section iteration hit the iteration limit");
}

} // namespace ampsc
