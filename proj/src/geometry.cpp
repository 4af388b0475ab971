#include "ampsc/geometry.hpp"

#include "ampsc/lp.hpp"

#include <cmath>

namespace ampsc {

Box::Box(Vec c, Vec h) : center(std::move(c)), half_widths(std::move(h)) {
    require(center.size() == half_widths.size(), "Box: center/half_widths size");
    require(half_widths.size() == 0 || half_widths.minCoeff() >= 0.0,
            "Box: negative half width");
}

bool Box::contains(const Vec& x, double tol) const {
    require(x.size() == dim(), "Box::contains: dimension");
    return ((x - center).cwiseAbs() - half_widths).maxCoeff() <= tol;
}

HPolytope::HPolytope(Mat n, Vec o) : normals(std::move(n)), offsets(std::move(o)) {
    require(normals.rows() == offsets.size(), "HPolytope: rows/offsets size");
}

bool HPolytope::contains(const Vec& x, double tol) const {
    return max_residual(x) <= tol;
}

double HPolytope::max_residual(const Vec& x) const {
    require(x.size() == dim(), "HPolytope::max_residual: dimension");
    if (rows() == 0) return 0.0;
    return (normals * x - offsets).maxCoeff();
}

HPolytope HPolytope::from_box(const Box& b) {
    const Index d = b.dim();
    Mat n(2 * d, d);
    Vec o(2 * d);
    n.topRows(d) = Mat::Identity(d, d);
    n.bottomRows(d) = -Mat::Identity(d, d);
    o.head(d) = b.center + b.half_widths;
    o.tail(d) = b.half_widths - b.center;
    return {std::move(n), std::move(o)};
}

Index VrepSet::dim() const {
    return points.empty() ? 0 : points.front().size();
}

double support(const Box& b, const Vec& direction) {
    require(direction.size() == b.dim(), "support(Box): dimension");
    return direction.dot(b.center) + direction.cwiseAbs().dot(b.half_widths);
}

double support(const HPolytope& p, const Vec& direction) {
    require(direction.size() == p.dim(), "support(HPolytope): dimension");
    auto r = lp::support(p.normals, p.offsets, direction);
    switch (r.status) {
    case lp::Status::Optimal:
        return r.value;
    case lp::Status::Infeasible:
        throw EmptySet("support: polytope is empty");
    case lp::Status::Unbounded:
        throw Unbounded("support: unbounded in the given direction");
    default:
        throw NoConvergence("support: LP did not converge");
    }
}

std::vector<Vec> box_vertices(const Box& b, int cap) {
    const Index d = b.dim();
    if (d > cap)
        throw DimensionCap("box_vertices: dimension " + std::to_string(d) +
                           " exceeds cap " + std::to_string(cap));
    std::vector<Vec> out;
    out.reserve(static_cast<size_t>(1) << d);
    for (size_t mask = 0; mask < (static_cast<size_t>(1) << d); ++mask) {
        Vec v = b.center;
        for (Index i = 0; i < d; ++i) {
            const bool plus = (mask >> (d - 1 - i)) & 1u;
            v(i) += plus ? b.half_widths(i) : -b.half_widths(i);
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<Vec> hpoly_vertices(const HPolytope& p, int dim_cap, double basis_budget) {
    const Index n = p.dim();
    const Index r = p.rows();
    if (n > dim_cap) throw DimensionCap("hpoly_vertices: dimension above the cap");
    require(n >= 1, "hpoly_vertices: dimension");
    require(r >= n, "hpoly_vertices: not enough rows to form vertices");

    double combos = 1.0;
    for (Index i = 0; i < n; ++i) combos *= static_cast<double>(r - i) / static_cast<double>(i + 1);
    if (combos > basis_budget) throw DimensionCap("hpoly_vertices: row-subset count above the budget");

    std::vector<Vec> verts;
    std::vector<Index> pick(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) pick[static_cast<size_t>(i)] = i;

    Mat S(n, n);
    Vec rhs(n);
    const double feas_tol = 1e-9;
    while (true) {
        for (Index i = 0; i < n; ++i) {
            S.row(i) = p.normals.row(pick[static_cast<size_t>(i)]);
            rhs(i) = p.offsets(pick[static_cast<size_t>(i)]);
        }
        Eigen::FullPivLU<Mat> lu(S);
        if (lu.isInvertible()) {
            const Vec x = lu.solve(rhs);
            if (p.contains(x, feas_tol)) {
                bool fresh = true;
                for (const Vec& v : verts)
                    if ((v - x).cwiseAbs().maxCoeff() <= 1e-8) {
                        fresh = false;
                        break;
                    }
                if (fresh) verts.push_back(x);
            }
        }
        // next lexicographic subset
        Index i = n - 1;
        while (i >= 0 && pick[static_cast<size_t>(i)] == r - n + i) --i;
        if (i < 0) break;
        ++pick[static_cast<size_t>(i)];
        for (Index j = i + 1; j < n; ++j)
            pick[static_cast<size_t>(j)] = pick[static_cast<size_t>(j - 1)] + 1;
    }
    return verts;
}

Membership vrep_contains(const VrepSet& s, const Vec& point, double tol) {
    require(!s.points.empty(), "vrep_contains: empty point list");
    require(point.size() == s.dim(), "vrep_contains: dimension");
    const Index k = s.size();
    const Index d = s.dim();

    // min t  s.t.  -t <= (P lam - point)_i <= t,  sum lam = 1,  lam >= 0
    lp::Problem prob;
    prob.c = Vec::Zero(k + 1);
    prob.c(k) = 1.0;
    prob.A = Mat::Zero(2 * d, k + 1);
    prob.b = Vec(2 * d);
    for (Index j = 0; j < k; ++j) {
        prob.A.col(j).head(d) = s.points[static_cast<size_t>(j)];
        prob.A.col(j).tail(d) = -s.points[static_cast<size_t>(j)];
    }
    prob.A.col(k).setConstant(-1.0);
    prob.b.head(d) = point;
    prob.b.tail(d) = -point;
    prob.E = Mat::Ones(1, k + 1);
    prob.E(0, k) = 0.0;
    prob.d = Vec::Ones(1);
    prob.lo = Vec::Zero(k + 1);
    prob.up = Vec::Constant(k + 1, lp::kInf);

    auto r = lp::solve(prob);
    Membership m;
    if (r.status != lp::Status::Optimal) return m;  // cannot happen: always feasible
    m.inside = r.objective <= tol;
    if (m.inside) m.weights = r.x.head(k);
    return m;
}

VrepSet prune_vrep(const VrepSet& s, double tol) {
    require(!s.points.empty(), "prune_vrep: empty point list");
    std::vector<Vec> kept = s.points;
    size_t i = 0;
    while (i < kept.size() && kept.size() > 1) {
        VrepSet rest;
        rest.points.reserve(kept.size() - 1);
        for (size_t j = 0; j < kept.size(); ++j)
            if (j != i) rest.points.push_back(kept[j]);
        if (vrep_contains(rest, kept[i], tol).inside) {
            kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }
    VrepSet out;
    out.points = std::move(kept);
    return out;
}

} // namespace ampsc
