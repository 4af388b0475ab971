#include "ampsc/tube.hpp"

#include "ampsc/terminal.hpp"

#include <Eigen/SVD>
#include <limits>
#include <cmath>
#include <utility>

namespace ampsc {

double CrossSection::support(const Vec& direction) const {
    if (support_fn) return support_fn(direction);
    return ampsc::support(set, direction);
}

namespace {

// A_cl(theta) = A(theta) + B(theta) K and B(theta) at each box vertex.
struct VertexData {
    Mat Acl;
    Mat B;
};

std::vector<VertexData> closed_loop_vertices(const PlantModel& model, const ParamBox& theta,
                                             const Mat& K) {
    std::vector<VertexData> out;
    for (const Vec& th : box_vertices(theta.box)) {
        auto [A, B] = assemble(model, th);
        out.push_back({A + B * K, std::move(B)});
    }
    return out;
}

} // namespace

TubeConfig make_tube_config(const PlantModel& model, Mat K, CrossSection X0, int N,
                            TubeMode mode) {
    model.validate();
    const Index n = model.n();
    const Index m = model.m();
    require(K.rows() == m && K.cols() == n, "tube gain must be m x n");
    require(X0.dim() == n, "cross-section dimension must match the state");
    require(N >= 1, "horizon must be positive");
    require(X0.rows() >= 1, "cross-section needs at least one row");
    if (X0.set.offsets.minCoeff() <= 0.0)
        throw CrossSectionNotCertified("cross-section must contain the origin strictly");

    for (Index s = 0; s < X0.rows(); ++s) X0.set.normals.row(s) /= X0.set.offsets(s);
    X0.set.offsets.setOnes();

    // Bounded in every coordinate direction (support throws Unbounded otherwise).
    for (Index i = 0; i < n; ++i) {
        Vec e = Vec::Zero(n);
        e(i) = 1.0;
        support(X0.set, e);
        e(i) = -1.0;
        support(X0.set, e);
    }

    TubeConfig cfg;
    cfg.N = N;
    cfg.K = std::move(K);
    cfg.mode = mode;

    cfg.w_bar.resize(X0.rows());
    for (Index s = 0; s < X0.rows(); ++s)
        cfg.w_bar(s) = support(model.disturbance, X0.set.normals.row(s).transpose());

    const Mat FGK = model.F() + model.G() * cfg.K;
    cfg.c_bar.resize(FGK.rows());
    for (Index r = 0; r < FGK.rows(); ++r) cfg.c_bar(r) = X0.support(FGK.row(r).transpose());

    if (mode == TubeMode::ComponentSplit) {
        for (const Mat& Bc : model.B_components)
            if (Bc.cwiseAbs().maxCoeff() > 1e-12)
                throw Error("component-split tube mode requires a parameter-free input matrix");
        for (const Mat& Ac : model.A_components) {
            Eigen::JacobiSVD<Mat> svd(Ac, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const Vec& sv = svd.singularValues();
            if (sv(0) <= 1e-14) {
                cfg.split_gain.push_back(Vec::Zero(n));
                cfg.split_pattern.push_back(Vec::Zero(n));
                continue;
            }
            if (sv.size() > 1 && sv(1) > 1e-9 * sv(0))
                throw Error("component-split tube mode requires rank-one dynamics components");
            cfg.split_gain.push_back(svd.matrixU().col(0) * sv(0));
            cfg.split_pattern.push_back(svd.matrixV().col(0));
        }
    }

    cfg.X0 = std::move(X0);
    return cfg;
}

TubeSystem assemble_tube(const PlantModel& model, const TubeConfig& cfg,
                         const ParamBox& theta, const TerminalSet& terminal,
                         int horizon) {
    const Index n = model.n();
    const Index m = model.m();
    const Index p = model.p();
    const Index nH = cfg.X0.rows();
    const Index nc = model.constraints.rows();
    const Index T = terminal.count();
    const int h = horizon;

    require(h >= 1 && h <= cfg.N, "horizon must lie in [1, N]");
    require(theta.p() == p, "parameter box dimension");
    require(T >= 1, "terminal set must have at least one point");
    require(terminal.n() == n, "terminal point dimension");
    require(cfg.w_bar.size() == nH && cfg.c_bar.size() == nc, "config constants out of date");

    const bool split = cfg.mode == TubeMode::ComponentSplit;
    if (split)
        require(static_cast<Index>(cfg.split_gain.size()) == p &&
                    static_cast<Index>(cfg.split_pattern.size()) == p,
                "component-split factors missing");

    TubeSystem sys;
    sys.n = n;
    sys.m = m;
    sys.p = p;
    sys.nH = nH;
    sys.nT = T;
    sys.horizon = h;
    sys.off_z = 0;
    sys.off_alpha = n * (h + 1);
    sys.off_v = sys.off_alpha + (h + 1);
    sys.off_D = sys.off_v + m * h;
    sys.off_lam = sys.off_D + (split ? p * h : 0);
    sys.nvars = sys.off_lam + T;
    sys.Hx = cfg.X0.set.normals;
    sys.n5b = nH;

    const auto verts = closed_loop_vertices(model, theta, cfg.K);
    const Index nv = static_cast<Index>(verts.size());

    Index rows = nH;                                  // (5b)
    rows += split ? h * (nH + 2 * p) : h * nv * nH;   // (5c)
    rows += h * nc;                                   // (5d)
    rows += (h + 1) + T;                              // alpha >= 0, lam >= 0

    sys.A = Mat::Zero(rows, sys.nvars);
    sys.b = Vec::Zero(rows);

    Index r = 0;
    for (Index s = 0; s < nH; ++s, ++r) {
        sys.A.block(r, sys.zi(0), 1, n) = -sys.Hx.row(s);
        sys.A(r, sys.ai(0)) = -1.0;
    }

    if (!split) {
        std::vector<Vec> xi(verts.size());
        std::vector<Mat> HA(verts.size()), HB(verts.size());
        for (size_t j = 0; j < verts.size(); ++j) {
            HA[j] = sys.Hx * verts[j].Acl;
            HB[j] = sys.Hx * verts[j].B;
            xi[j].resize(nH);
            for (Index s = 0; s < nH; ++s)
                xi[j](s) = cfg.X0.support(verts[j].Acl.transpose() * sys.Hx.row(s).transpose());
        }
        for (int l = 0; l < h; ++l) {
            for (size_t j = 0; j < verts.size(); ++j) {
                for (Index s = 0; s < nH; ++s, ++r) {
                    sys.A.block(r, sys.zi(l), 1, n) = HA[j].row(s);
                    sys.A(r, sys.ai(l)) = xi[j](s);
                    sys.A.block(r, sys.vi(l), 1, m) = HB[j].row(s);
                    sys.A.block(r, sys.zi(l + 1), 1, n) = -sys.Hx.row(s);
                    sys.A(r, sys.ai(l + 1)) = -1.0;
                    sys.b(r) = -cfg.w_bar(s);
                }
            }
        }
    } else {
        auto [Abar, Bbar] = assemble(model, theta.center());
        const Mat Acl = Abar + Bbar * cfg.K;
        const Mat HA = sys.Hx * Acl;
        const Mat HB = sys.Hx * Bbar;
        Vec xi_bar = Vec::Constant(nH, -std::numeric_limits<double>::infinity());
        for (const auto& v : verts)
            for (Index s = 0; s < nH; ++s)
                xi_bar(s) = std::max(xi_bar(s),
                                     cfg.X0.support(v.Acl.transpose() * sys.Hx.row(s).transpose()));
        Mat cs(nH, p);
        for (Index i = 0; i < p; ++i) cs.col(i) = sys.Hx * cfg.split_gain[static_cast<size_t>(i)];
        const Vec& eta = theta.radius();
        for (int l = 0; l < h; ++l) {
            for (Index s = 0; s < nH; ++s, ++r) {
                sys.A.block(r, sys.zi(l), 1, n) = HA.row(s);
                sys.A(r, sys.ai(l)) = xi_bar(s);
                sys.A.block(r, sys.vi(l), 1, m) = HB.row(s);
                sys.A.block(r, sys.zi(l + 1), 1, n) = -sys.Hx.row(s);
                sys.A(r, sys.ai(l + 1)) = -1.0;
                for (Index i = 0; i < p; ++i)
                    sys.A(r, sys.di(l) + i) = eta(i) * std::abs(cs(s, i));
                sys.b(r) = -cfg.w_bar(s);
            }
            for (Index i = 0; i < p; ++i) {
                const Vec& pat = cfg.split_pattern[static_cast<size_t>(i)];
                sys.A.block(r, sys.zi(l), 1, n) = pat.transpose();
                sys.A(r, sys.di(l) + i) = -1.0;
                ++r;
                sys.A.block(r, sys.zi(l), 1, n) = -pat.transpose();
                sys.A(r, sys.di(l) + i) = -1.0;
                ++r;
            }
        }
    }

    const Mat FGK = model.F() + model.G() * cfg.K;
    const Mat& G = model.G();
    for (int l = 0; l < h; ++l) {
        for (Index c = 0; c < nc; ++c, ++r) {
            sys.A.block(r, sys.zi(l), 1, n) = FGK.row(c);
            sys.A.block(r, sys.vi(l), 1, m) = G.row(c);
            sys.A(r, sys.ai(l)) = cfg.c_bar(c);
            sys.b(r) = model.z()(c);
        }
    }

    for (int l = 0; l <= h; ++l, ++r) sys.A(r, sys.ai(l)) = -1.0;
    for (Index t = 0; t < T; ++t, ++r) sys.A(r, sys.off_lam + t) = -1.0;
    require(r == rows, "row count bookkeeping");

    sys.E = Mat::Zero(n + 2, sys.nvars);
    sys.d = Vec::Zero(n + 2);
    for (Index c = 0; c < n; ++c) {
        sys.E(c, sys.zi(h) + c) = 1.0;
        for (Index t = 0; t < T; ++t)
            sys.E(c, sys.off_lam + t) = -terminal.points[static_cast<size_t>(t)].z(c);
    }
    sys.E(n, sys.ai(h)) = 1.0;
    for (Index t = 0; t < T; ++t)
        sys.E(n, sys.off_lam + t) = -terminal.points[static_cast<size_t>(t)].alpha;
    sys.E.row(n + 1).segment(sys.off_lam, T).setOnes();
    sys.d(n + 1) = 1.0;

    return sys;
}

void TubeSystem::set_sample(const Vec& x, Vec& b_out) const {
    require(x.size() == n, "sample dimension");
    require(b_out.size() == b.size(), "rhs size");
    b_out.head(n5b) = -Hx * x;
}

} // namespace ampsc
