#include "ampsc/terminal.hpp"

#include "ampsc/certifier.hpp"
#include "ampsc/gains.hpp"
#include "ampsc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ampsc {

namespace {

Vec lift(const TerminalPoint& pt) {
    Vec q(pt.z.size() + 1);
    q.head(pt.z.size()) = pt.z;
    q(pt.z.size()) = pt.alpha;
    return q;
}

// Greedy redundancy removal that keeps certificates attached to survivors.
void prune_points(std::vector<TerminalPoint>& points, double tol) {
    if (points.size() <= 1) return;
    size_t i = 0;
    while (i < points.size() && points.size() > 1) {
        VrepSet rest;
        for (size_t j = 0; j < points.size(); ++j)
            if (j != i) rest.points.push_back(lift(points[j]));
        if (vrep_contains(rest, lift(points[i]), tol).inside) {
            points.erase(points.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }
}

bool covers(const ParamBox& outer, const ParamBox& inner, double tol) {
    if (outer.p() != inner.p()) return false;
    const Vec gap = outer.radius() - inner.radius() -
                    (outer.center() - inner.center()).cwiseAbs();
    return gap.minCoeff() >= -tol;
}

} // namespace

VrepSet TerminalSet::lifted() const {
    VrepSet s;
    s.points.reserve(points.size());
    for (const TerminalPoint& pt : points) s.points.push_back(lift(pt));
    return s;
}

Membership TerminalSet::contains(const Vec& z, double alpha, double tol) const {
    require(!points.empty(), "terminal set is empty");
    Vec q(z.size() + 1);
    q.head(z.size()) = z;
    q(z.size()) = alpha;
    return vrep_contains(lifted(), q, tol);
}

TerminalSet initial_terminal(const PlantModel& model, const ParamBox& theta0,
                             const TubeConfig& cfg) {
    const Index n = model.n();
    const CrossSectionReport contraction =
        verify_cross_section(model, theta0, cfg.K, cfg.X0, 1.0);
    const double lam = contraction.worst_support;
    const double margin = cfg.w_bar.size() ? cfg.w_bar.maxCoeff() : 0.0;
    if (!(lam + margin <= 1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "cross-section not invariant under the gain: contraction " << lam
            << " + disturbance margin " << margin << " exceeds 1";
        throw CrossSectionNotCertified(msg.str());
    }
    // constraint admissibility of X0 x {Kx}: support of every constraint row
    // over the unit tube must fit the offset
    for (Index r = 0; r < cfg.c_bar.size(); ++r)
        if (cfg.c_bar(r) > model.z()(r) + 1e-12)
            throw CrossSectionNotCertified(
                "cross-section violates the state/input constraints under the gain");

    TerminalSet out;
    for (double a : {0.0, 1.0}) {
        TerminalPoint pt;
        pt.z = Vec::Zero(n);
        pt.alpha = a;
        pt.has_certificate = true;
        pt.v = Vec::Zero(model.m());
        pt.z_next = Vec::Zero(n);
        pt.alpha_next = lam * a + margin;
        pt.provenance = TerminalProvenance::Initial;
        out.points.push_back(std::move(pt));
    }
    return out;
}

TerminalSet enlarge_homothetic(const TerminalSet& terminal,
                               const std::vector<HomotheticTube>& plans,
                               const ParamBox& theta_now) {
    TerminalSet out = terminal;
    for (const HomotheticTube& plan : plans) {
        if (!plan.has_terminal_cert || plan.terminal_weights.size() == 0)
            throw MissingCertificate("plan lacks its terminal-membership certificate");
        require(covers(plan.theta_snapshot, theta_now, 1e-9),
                "plan solved under a box that does not cover the current one");
        const int h = plan.horizon;
        for (int l = 0; l <= h; ++l) {
            TerminalPoint pt;
            pt.z = plan.z[static_cast<size_t>(l)];
            pt.alpha = plan.alpha[static_cast<size_t>(l)];
            pt.has_certificate = true;
            if (l < h) {
                pt.v = plan.v[static_cast<size_t>(l)];
                pt.z_next = plan.z[static_cast<size_t>(l) + 1];
                pt.alpha_next = plan.alpha[static_cast<size_t>(l) + 1];
            } else {
                pt.v = plan.term_v;
                pt.z_next = plan.term_z_next;
                pt.alpha_next = plan.term_alpha_next;
            }
            pt.provenance = TerminalProvenance::Plan;
            pt.plan_step = plan.solved_at;
            pt.plan_stage = l;
            out.points.push_back(std::move(pt));
        }
    }
    prune_points(out.points, 1e-9);
    return out;
}

TerminalSet augment_vertices(const TerminalSet& terminal,
                             const std::vector<HomotheticTube>& plans,
                             const TubeConfig& cfg, int vertex_cap) {
    const std::vector<Vec> corners = hpoly_vertices(cfg.X0.set, vertex_cap);
    TerminalSet out = terminal;
    for (const HomotheticTube& plan : plans) {
        if (!plan.has_terminal_cert || plan.terminal_weights.size() == 0)
            throw MissingCertificate("plan lacks its terminal-membership certificate");
        const int h = plan.horizon;
        for (int l = 0; l <= h; ++l) {
            const Vec& z = plan.z[static_cast<size_t>(l)];
            const double a = plan.alpha[static_cast<size_t>(l)];
            for (const Vec& x : corners) {
                TerminalPoint pt;
                pt.z = z + a * x;
                pt.alpha = 0.0;
                pt.has_certificate = true;
                if (l < h) {
                    pt.v = plan.v[static_cast<size_t>(l)];
                    pt.z_next = plan.z[static_cast<size_t>(l) + 1];
                    pt.alpha_next = plan.alpha[static_cast<size_t>(l) + 1];
                } else {
                    pt.v = plan.term_v;
                    pt.z_next = plan.term_z_next;
                    pt.alpha_next = plan.term_alpha_next;
                }
                pt.provenance = TerminalProvenance::VertexAugmented;
                pt.plan_step = plan.solved_at;
                pt.plan_stage = l;
                out.points.push_back(std::move(pt));
            }
        }
    }
    prune_points(out.points, 1e-9);
    return out;
}

Assumption4Report check_assumption4(const TerminalSet& terminal, const PlantModel& model,
                                    const ParamBox& theta, const TubeConfig& cfg,
                                    double tol) {
    Assumption4Report rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    if (terminal.points.empty()) {
        rep.pass = false;
        rep.detail = "terminal set is empty";
        return rep;
    }

    const Mat& Hx = cfg.X0.set.normals;
    const Index nH = Hx.rows();
    const Mat FGK = model.F() + model.G() * cfg.K;
    const Mat& G = model.G();

    struct VertexData {
        Mat Acl;
        Mat B;
        Vec xi;  // per row: support of X0 under A_cl' h_s
    };
    std::vector<VertexData> verts;
    for (const Vec& th : box_vertices(theta.box)) {
        auto [A, B] = assemble(model, th);
        VertexData vd;
        vd.Acl = A + B * cfg.K;
        vd.B = std::move(B);
        vd.xi.resize(nH);
        for (Index s = 0; s < nH; ++s)
            vd.xi(s) = cfg.X0.support(vd.Acl.transpose() * Hx.row(s).transpose());
        verts.push_back(std::move(vd));
    }

    const VrepSet hull = terminal.lifted();
    bool pass = true;
    std::ostringstream detail;

    for (size_t ip = 0; ip < terminal.points.size(); ++ip) {
        const TerminalPoint& pt = terminal.points[ip];
        if (!pt.has_certificate) {
            pass = false;
            detail << "point " << ip << " lacks a certificate; ";
            if (rep.worst_point < 0) rep.worst_point = static_cast<Index>(ip);
            continue;
        }
        double margin = std::numeric_limits<double>::infinity();
        // one-step containment rows
        for (const VertexData& vd : verts) {
            const Vec lhs = Hx * (vd.Acl * pt.z + vd.B * pt.v - pt.z_next) + pt.alpha * vd.xi +
                            cfg.w_bar;
            margin = std::min(margin, (Vec::Constant(nH, pt.alpha_next) - lhs).minCoeff());
        }
        // constraint admissibility over the tube set
        const Vec adm = Vec(model.z() - FGK * pt.z - G * pt.v) - pt.alpha * cfg.c_bar;
        margin = std::min(margin, adm.minCoeff());
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_point = static_cast<Index>(ip);
        }
        if (margin < -tol) pass = false;
        // successor stays in the terminal set
        Vec q(pt.z_next.size() + 1);
        q.head(pt.z_next.size()) = pt.z_next;
        q(pt.z_next.size()) = pt.alpha_next;
        if (!vrep_contains(hull, q, 1e-7).inside) {
            pass = false;
            detail << "successor of point " << ip << " leaves the terminal set; ";
        }
    }
    rep.pass = pass;
    rep.detail = detail.str();
    return rep;
}

bool union_membership(const SafeSetUnion& s, const Vec& x) {
    if (s.terminal && !s.terminal->points.empty()) {
        VrepSet proj;
        proj.points.reserve(s.terminal->points.size());
        for (const TerminalPoint& pt : s.terminal->points) proj.points.push_back(pt.z);
        if (vrep_contains(proj, x, 1e-7).inside) return true;
    }
    if (!s.initial_tubes.empty()) {
        require(s.X0 != nullptr, "stored tube hull needs the cross-section");
        const Mat& H = s.X0->set.normals;
        const Vec& off = s.X0->set.offsets;
        const Index n = x.size();
        const Index nH = H.rows();
        const Index k = static_cast<Index>(s.initial_tubes.size());
        // x = sum_i (mu_i z_i + s_i), H s_i <= mu_i alpha_i off, sum mu = 1, mu >= 0
        lp::Problem prob;
        const Index nv = k + k * n;
        prob.c = Vec::Zero(nv);
        prob.lo = Vec::Constant(nv, -lp::kInf);
        prob.up = Vec::Constant(nv, lp::kInf);
        prob.lo.head(k).setZero();
        prob.A = Mat::Zero(k * nH, nv);
        prob.b = Vec::Zero(k * nH);
        for (Index i = 0; i < k; ++i) {
            const double ai = s.initial_tubes[static_cast<size_t>(i)].second;
            prob.A.block(i * nH, k + i * n, nH, n) = H;
            prob.A.block(i * nH, i, nH, 1) = -ai * off;
        }
        prob.E = Mat::Zero(n + 1, nv);
        prob.d = Vec::Zero(n + 1);
        for (Index i = 0; i < k; ++i) {
            prob.E.block(0, k + i * n, n, n) = Mat::Identity(n, n);
            prob.E.block(0, i, n, 1) = s.initial_tubes[static_cast<size_t>(i)].first;
        }
        prob.d.head(n) = x;
        prob.E.row(n).head(k).setOnes();
        prob.d(n) = 1.0;
        if (lp::solve(prob).status == lp::Status::Optimal) return true;
    }
    if (s.feas_oracle && s.feas_oracle(x)) return true;
    return false;
}

} // namespace ampsc
