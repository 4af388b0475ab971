#pragma once

#include "ampsc/core.hpp"

#include <vector>

namespace ampsc {

// Axis-aligned box {center} + diag(half_widths) * [-1,1]^d.
struct Box {
    Vec center;
    Vec half_widths;

    Box() = default;
    Box(Vec c, Vec h);

    Index dim() const { return center.size(); }
    bool contains(const Vec& x, double tol = 0.0) const;
};

// {x : normals * x <= offsets}. May be empty or unbounded; operations that
// cannot handle either throw EmptySet / Unbounded.
struct HPolytope {
    Mat normals;
    Vec offsets;

    HPolytope() = default;
    HPolytope(Mat n, Vec o);

    Index dim() const { return normals.cols(); }
    Index rows() const { return normals.rows(); }
    bool contains(const Vec& x, double tol = 0.0) const;
    double max_residual(const Vec& x) const;  // max_i (normals.row(i).x - offsets_i)

    static HPolytope from_box(const Box& b);
};

// Convex hull of a nonempty point list.
struct VrepSet {
    std::vector<Vec> points;

    Index size() const { return static_cast<Index>(points.size()); }
    Index dim() const;
};

double support(const Box& b, const Vec& direction);
double support(const HPolytope& p, const Vec& direction);  // throws EmptySet / Unbounded

// All 2^d corners in lexicographic sign order (-,+ per coordinate, first
// coordinate slowest). Throws DimensionCap above the cap.
std::vector<Vec> box_vertices(const Box& b, int cap = 12);

// Vertices of a bounded polytope by enumerating nonsingular row subsets.
// Throws DimensionCap when the dimension exceeds dim_cap or the subset count
// exceeds basis_budget.
std::vector<Vec> hpoly_vertices(const HPolytope& p, int dim_cap = 12,
                                double basis_budget = 5e5);

struct Membership {
    bool inside = false;
    Vec weights;  // convex weights over the point list; only valid when inside
};

// point in conv(points) within tol (componentwise, via a min-max LP).
Membership vrep_contains(const VrepSet& s, const Vec& point, double tol = 1e-7);

// Subset of points with the same hull; every removed point is contained in
// the hull of the survivors within tol.
VrepSet prune_vrep(const VrepSet& s, double tol = 1e-7);

} // namespace ampsc
