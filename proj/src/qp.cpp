#include "ampsc/qp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace ampsc::qp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTol = 1e-10;

double distance(double a, double b) {
    const double a1 = std::abs(a), b1 = std::abs(b);
    if (a1 > b1) {
        const double t = b1 / a1;
        return a1 * std::sqrt(1.0 + t * t);
    }
    if (b1 > a1) {
        const double t = a1 / b1;
        return b1 * std::sqrt(1.0 + t * t);
    }
    return a1 * std::sqrt(2.0);
}
} // namespace

Result solve(const Problem& p, int max_iter) {
    const Index n = p.G.rows();
    const Index me = p.CE.rows();
    const Index mi = p.CI.rows();
    require(p.G.cols() == n && p.g0.size() == n, "qp: G/g0 shape");
    require(me == 0 || p.CE.cols() == n, "qp: CE shape");
    require(mi == 0 || p.CI.cols() == n, "qp: CI shape");
    if (max_iter < 0) max_iter = 50 + 12 * static_cast<int>(me + mi);

    Result res;
    Eigen::LLT<Mat> llt(p.G);
    if (llt.info() != Eigen::Success) return res;

    // J = L^-T so that J J^T = G^-1
    Mat J = Mat::Identity(n, n);
    llt.matrixL().transpose().solveInPlace(J);
    Vec x = -llt.solve(p.g0);

    Mat R = Mat::Zero(n, n);
    std::vector<int> active;           // constraint ids: [0, me) equalities, me + i inequalities
    Vec u = Vec::Zero(n + 1);          // duals of active set
    Index q = 0;

    Vec d(n), z(n), r(n), np(n);
    int iters = 0;

    auto add_constraint = [&]() -> bool {
        // d = J^T np given; rotate d[q+1..n-1] to zero, update J, append R column
        for (Index j = n - 1; j > q; --j) {
            const double cc = d(j - 1), ss = d(j);
            const double h = distance(cc, ss);
            if (h < kTol) continue;
            const double c1 = cc / h, s1 = ss / h;
            d(j - 1) = h;
            d(j) = 0.0;
            // apply rotation to columns j-1, j of J
            for (Index i = 0; i < n; ++i) {
                const double t1 = J(i, j - 1), t2 = J(i, j);
                J(i, j - 1) = t1 * c1 + t2 * s1;
                J(i, j) = -t1 * s1 + t2 * c1;
            }
        }
        if (std::abs(d(q)) < 1e-12) return false;  // degenerate: constraint dependent on active set
        R.col(q).head(q + 1) = d.head(q + 1);
        ++q;
        return true;
    };

    auto drop_constraint = [&](Index l) {
        // remove active[l]; restore triangular R via Givens on adjacent rows
        for (Index j = l; j + 1 < q; ++j) {
            R.col(j).head(n) = R.col(j + 1).head(n);
            active[static_cast<size_t>(j)] = active[static_cast<size_t>(j + 1)];
            u(j) = u(j + 1);
        }
        active.pop_back();
        --q;
        for (Index j = l; j < q; ++j) {
            const double cc = R(j, j), ss = R(j + 1, j);
            const double h = distance(cc, ss);
            if (h < kTol) continue;
            const double c1 = cc / h, s1 = ss / h;
            for (Index k = j; k < q; ++k) {
                const double t1 = R(j, k), t2 = R(j + 1, k);
                R(j, k) = t1 * c1 + t2 * s1;
                R(j + 1, k) = -t1 * s1 + t2 * c1;
            }
            for (Index i = 0; i < n; ++i) {
                const double t1 = J(i, j), t2 = J(i, j + 1);
                J(i, j) = t1 * c1 + t2 * s1;
                J(i, j + 1) = -t1 * s1 + t2 * c1;
            }
        }
        R.col(q).setZero();
    };

    auto finish = [&](Status st) {
        res.status = st;
        res.x = x;
        res.iterations = iters;
        res.objective = 0.5 * x.dot(p.G * x) + p.g0.dot(x);
        double viol = 0.0;
        if (me) viol = std::max(viol, (p.CE * x - p.ce).cwiseAbs().maxCoeff());
        if (mi) viol = std::max(viol, (p.CI * x - p.ci).maxCoeff());
        res.max_violation = std::max(viol, 0.0);
        return res;
    };

    // Phase A: install equality constraints (full steps, nothing blocks).
    for (Index e = 0; e < me; ++e) {
        np = p.CE.row(e).transpose();
        d.noalias() = J.transpose() * np;
        z.setZero();
        if (q < n) z.noalias() = J.rightCols(n - q) * d.tail(n - q);
        if (q > 0)
            r.head(q) = R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q));
        const double s = np.dot(x) - p.ce(e);
        if (std::abs(s) < 1e-13) {
            // already satisfied; still register it to pin the subspace
            active.push_back(static_cast<int>(e));
            u(q) = 0.0;
            if (!add_constraint()) active.pop_back();  // dependent -> redundant
        } else {
            const double zn = z.dot(np);
            if (std::abs(zn) < kTol)  // normal in span of active set but s != 0
                return finish(Status::Infeasible);
            const double t = -s / zn;
            x += t * z;
            if (q > 0) u.head(q) -= t * r.head(q);
            u(q) = t;
            active.push_back(static_cast<int>(e));
            if (!add_constraint()) {
                active.pop_back();
                return finish(Status::SolverError);
            }
        }
        ++iters;
    }

    if (mi == 0) return finish(Status::Optimal);

    // Phase B: dual active-set loop on inequalities (a.x <= b as -a.x >= -b).
    while (iters < max_iter) {
        ++iters;
        // most violated inequality
        Vec s = p.CI * x - p.ci;
        Index worst = 0;
        double sv = 0.0;
        for (Index i = 0; i < mi; ++i) {
            bool in_active = false;
            for (Index a = 0; a < q; ++a)
                if (active[static_cast<size_t>(a)] == static_cast<int>(me + i)) {
                    in_active = true;
                    break;
                }
            if (in_active) continue;
            if (s(i) > sv) {
                sv = s(i);
                worst = i;
            }
        }
        if (sv <= 1e-9) return finish(Status::Optimal);
        np = -p.CI.row(worst).transpose();
        double sviol = -sv;  // s in >= convention, negative when violated
        double u_plus = 0.0;
        while (true) {
            d.noalias() = J.transpose() * np;
            z.setZero();
            if (q < n) z.noalias() = J.rightCols(n - q) * d.tail(n - q);
            if (q > 0)
                r.head(q) = R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q));
            // dual step bound (only inequality members can be dropped)
            double t1 = kInf;
            Index drop = 0;
            for (Index k = 0; k < q; ++k) {
                if (active[static_cast<size_t>(k)] < static_cast<int>(me)) continue;
                if (r(k) > kTol) {
                    const double cand = u(k) / r(k);
                    if (cand < t1) {
                        t1 = cand;
                        drop = k;
                    }
                }
            }
            const double zn = z.dot(np);
            const double t2 = (z.norm() > kTol && zn > kTol) ? -sviol / zn : kInf;
            const double t = std::min(t1, t2);
            if (!std::isfinite(t)) return finish(Status::Infeasible);
            if (!std::isfinite(t2)) {
                // dual-only step
                if (q > 0) u.head(q) -= t * r.head(q);
                u_plus += t;
                drop_constraint(drop);
                continue;
            }
            x += t * z;
            if (q > 0) u.head(q) -= t * r.head(q);
            u_plus += t;
            sviol += t * zn;
            if (t == t2) {  // full step: constraint satisfied, enters active set
                u(q) = u_plus;
                active.push_back(static_cast<int>(me + worst));
                if (!add_constraint()) {
                    active.pop_back();
                    return finish(Status::SolverError);
                }
                break;
            }
            drop_constraint(drop);  // partial step: blocking dual hit zero
            if (iters++ > max_iter) return finish(Status::SolverError);
        }
    }
    return finish(Status::SolverError);
}

} // namespace ampsc::qp
