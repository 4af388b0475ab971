#include "ampsc/lp.hpp"

#include <algorithm>
#include <cmath>

namespace ampsc::lp {

namespace {
constexpr double kPivTol = 1e-9;
constexpr double kFeasTol = 1e-8;
constexpr double kOptTol = 1e-9;
constexpr int kRefactorEvery = 128;
} // namespace

void Solver::set_problem(const Problem& p) {
    require(p.A.size() == 0 || p.A.cols() == p.c.size(), "lp: A column count");
    require(p.E.size() == 0 || p.E.cols() == p.c.size(), "lp: E column count");
    require(p.lo.size() == p.c.size() && p.up.size() == p.c.size(), "lp: bound sizes");
    n_ = p.c.size();
    const Index mi = p.A.rows(), me = p.E.rows();
    m_ = mi + me;
    cols_.resize(m_, n_ + m_);
    cols_.setZero();
    if (mi) cols_.block(0, 0, mi, n_) = p.A;
    if (me) cols_.block(mi, 0, me, n_) = p.E;
    cols_.block(0, n_, m_, m_).setIdentity();
    rhs_.resize(m_);
    if (mi) rhs_.head(mi) = p.b;
    if (me) rhs_.tail(me) = p.d;
    cost_ = Vec::Zero(n_ + m_);
    cost_.head(n_) = p.c;
    bnd_.resize(static_cast<size_t>(n_ + m_));
    for (Index j = 0; j < n_; ++j) bnd_[static_cast<size_t>(j)] = {p.lo[j], p.up[j]};
    for (Index i = 0; i < mi; ++i) bnd_[static_cast<size_t>(n_ + i)] = {0.0, kInf};
    for (Index i = 0; i < me; ++i) bnd_[static_cast<size_t>(n_ + mi + i)] = {0.0, 0.0};
    has_basis_ = false;
    binv_valid_ = false;
}

double Solver::value_of(int j) const {
    const auto& b = bnd_[static_cast<size_t>(j)];
    switch (basis_.state[static_cast<size_t>(j)]) {
        case VarState::AtLower: return b.lo;
        case VarState::AtUpper: return b.up;
        default: return 0.0;
    }
}

void Solver::factorize() {
    Mat B(m_, m_);
    for (Index i = 0; i < m_; ++i) B.col(i) = cols_.col(basis_.basic[static_cast<size_t>(i)]);
    binv_ = B.partialPivLu().inverse();
    since_refactor_ = 0;
    binv_valid_ = true;
}

void Solver::compute_basics() {
    Vec r = rhs_;
    for (Index j = 0; j < n_ + m_; ++j) {
        if (basis_.state[static_cast<size_t>(j)] == VarState::Basic) continue;
        const double v = value_of(static_cast<int>(j));
        if (v != 0.0) r -= cols_.col(j) * v;
    }
    xb_.noalias() = binv_ * r;
}

double Solver::infeasibility() const {
    double s = 0.0;
    for (Index i = 0; i < m_; ++i) {
        const auto& b = bnd_[static_cast<size_t>(basis_.basic[static_cast<size_t>(i)])];
        if (xb_[i] < b.lo) s += b.lo - xb_[i];
        if (xb_[i] > b.up) s += xb_[i] - b.up;
    }
    return s;
}

Vec Solver::row_duals() const {
    Vec cb(m_);
    for (Index i = 0; i < m_; ++i) cb[i] = cost_[basis_.basic[static_cast<size_t>(i)]];
    return binv_.transpose() * cb;
}

void Solver::default_basis() {
    basis_.basic.resize(static_cast<size_t>(m_));
    basis_.state.assign(static_cast<size_t>(n_ + m_), VarState::AtLower);
    for (Index j = 0; j < n_; ++j) {
        const auto& b = bnd_[static_cast<size_t>(j)];
        if (std::isfinite(b.lo))
            basis_.state[static_cast<size_t>(j)] = VarState::AtLower;
        else if (std::isfinite(b.up))
            basis_.state[static_cast<size_t>(j)] = VarState::AtUpper;
        else
            basis_.state[static_cast<size_t>(j)] = VarState::Free;
    }
    for (Index i = 0; i < m_; ++i) {
        basis_.basic[static_cast<size_t>(i)] = static_cast<int>(n_ + i);
        basis_.state[static_cast<size_t>(n_ + i)] = VarState::Basic;
    }
    has_basis_ = true;
    binv_valid_ = false;
}

Result Solver::solve(std::optional<double> cutoff, int max_iter) {
    if (!has_basis_) default_basis();
    return run(cutoff, max_iter);
}

Result Solver::resolve_costs(const Vec& c, std::optional<double> cutoff, int max_iter) {
    require(c.size() == n_, "lp: cost size");
    cost_.head(n_) = c;
    if (!has_basis_) default_basis();
    return run(cutoff, max_iter);
}

Result Solver::run(std::optional<double> cutoff, int max_iter) {
    if (max_iter < 0) max_iter = 400 + 60 * static_cast<int>(m_ + n_);
    if (!binv_valid_) factorize();
    compute_basics();
    int used = 0;
    Result res;
    if (infeasibility() > kFeasTol) {
        phase1(max_iter, used);
        if (infeasibility() > kFeasTol) {
            res.status = Status::Infeasible;
            res.iterations = used;
            return res;
        }
    }
    res.status = iterate(cutoff, max_iter, used);
    res.iterations = used;
    res.x.resize(n_);
    for (Index j = 0; j < n_; ++j) res.x[j] = value_of(static_cast<int>(j));
    for (Index i = 0; i < m_; ++i) {
        const int bj = basis_.basic[static_cast<size_t>(i)];
        if (bj < n_) res.x[bj] = xb_[i];
    }
    res.objective = cost_.head(n_).dot(res.x);
    // A blown-up factorization poisons every comparison (NaNs price as
    // "optimal"); surface it as a retryable failure instead.
    if (!res.x.allFinite() || !std::isfinite(res.objective)) {
        res.status = Status::IterLimit;
        clear_basis();
    }
    return res;
}

void Solver::pivot(int enter, int leave, bool leave_to_upper, Vec& w) {
    const int out = basis_.basic[static_cast<size_t>(leave)];
    basis_.state[static_cast<size_t>(out)] = leave_to_upper ? VarState::AtUpper : VarState::AtLower;
    basis_.basic[static_cast<size_t>(leave)] = enter;
    basis_.state[static_cast<size_t>(enter)] = VarState::Basic;
    const double piv = w[leave];
    Vec brow = binv_.row(leave) / piv;
    w[leave] = 0.0;
    binv_.noalias() -= w * brow.transpose();
    binv_.row(leave) = brow;
    if (++since_refactor_ >= kRefactorEvery) factorize();
    compute_basics();
}

void Solver::phase1(int max_iter, int& used) {
    int stall = 0;
    bool bland = false;
    while (used < max_iter) {
        if (infeasibility() <= kFeasTol) return;
        Vec g = Vec::Zero(m_);
        for (Index i = 0; i < m_; ++i) {
            const auto& b = bnd_[static_cast<size_t>(basis_.basic[static_cast<size_t>(i)])];
            if (xb_[i] < b.lo - kFeasTol) g[i] = -1.0;
            else if (xb_[i] > b.up + kFeasTol) g[i] = 1.0;
        }
        Vec pi = binv_.transpose() * g;
        Vec red = cols_.transpose() * pi;  // moving x_j by +t changes phi at rate -red[j]
        int enter = -1, dir = 1;
        double best = kOptTol;
        for (Index j = 0; j < n_ + m_; ++j) {
            if (basis_.state[static_cast<size_t>(j)] == VarState::Basic) continue;
            const auto& b = bnd_[static_cast<size_t>(j)];
            if (b.lo == b.up) continue;
            const auto st = basis_.state[static_cast<size_t>(j)];
            const double rc = red[j];
            if ((st == VarState::AtLower || st == VarState::Free) && rc > best) {
                enter = static_cast<int>(j); dir = 1;
                if (bland) break;
                best = rc;
            }
            if ((st == VarState::AtUpper || st == VarState::Free) && -rc > best) {
                enter = static_cast<int>(j); dir = -1;
                if (bland) break;
                best = -rc;
            }
        }
        if (enter < 0) return;  // no improving direction; stays infeasible
        Vec w = binv_ * cols_.col(enter);
        const auto& be = bnd_[static_cast<size_t>(enter)];
        double t = std::isfinite(be.up - be.lo) ? be.up - be.lo : kInf;
        int leave = -1;
        bool leave_to_upper = false;
        for (Index i = 0; i < m_; ++i) {
            const double wi = w[i] * dir;
            if (std::abs(wi) < kPivTol) continue;
            const auto& b = bnd_[static_cast<size_t>(basis_.basic[static_cast<size_t>(i)])];
            double cand = kInf;
            bool to_upper = false;
            if (xb_[i] < b.lo - kFeasTol) {
                if (wi < 0.0) { cand = (b.lo - xb_[i]) / (-wi); to_upper = false; }
            } else if (xb_[i] > b.up + kFeasTol) {
                if (wi > 0.0) { cand = (xb_[i] - b.up) / wi; to_upper = true; }
            } else {
                if (wi > 0.0 && std::isfinite(b.lo)) { cand = (xb_[i] - b.lo) / wi; to_upper = false; }
                else if (wi < 0.0 && std::isfinite(b.up)) { cand = (b.up - xb_[i]) / (-wi); to_upper = true; }
            }
            if (cand < t - 1e-12 ||
                (cand < t + 1e-12 && leave >= 0 && std::abs(w[i]) > std::abs(w[leave]))) {
                t = cand;
                leave = static_cast<int>(i);
                leave_to_upper = to_upper;
            }
        }
        if (!std::isfinite(t)) return;
        ++used;
        if (t <= 1e-11) { if (++stall > 60) bland = true; }
        else { stall = 0; bland = false; }
        if (leave < 0) {
            basis_.state[static_cast<size_t>(enter)] = (dir > 0) ? VarState::AtUpper : VarState::AtLower;
            compute_basics();
        } else {
            pivot(enter, leave, leave_to_upper, w);
        }
    }
}

Status Solver::iterate(std::optional<double> cutoff, int max_iter, int& used) {
    int stall = 0;
    bool bland = false;
    while (used < max_iter) {
        Vec cb(m_);
        for (Index i = 0; i < m_; ++i) cb[i] = cost_[basis_.basic[static_cast<size_t>(i)]];
        Vec pi = binv_.transpose() * cb;
        Vec red = cost_ - cols_.transpose() * pi;
        int enter = -1, dir = 1;
        double best = kOptTol;
        for (Index j = 0; j < n_ + m_; ++j) {
            if (basis_.state[static_cast<size_t>(j)] == VarState::Basic) continue;
            const auto& b = bnd_[static_cast<size_t>(j)];
            if (b.lo == b.up) continue;
            const auto st = basis_.state[static_cast<size_t>(j)];
            const double rc = red[j];
            if ((st == VarState::AtLower || st == VarState::Free) && -rc > best) {
                enter = static_cast<int>(j); dir = 1;
                if (bland) break;
                best = -rc;
            }
            if ((st == VarState::AtUpper || st == VarState::Free) && rc > best) {
                enter = static_cast<int>(j); dir = -1;
                if (bland) break;
                best = rc;
            }
        }
        if (enter < 0) return Status::Optimal;
        Vec w = binv_ * cols_.col(enter);
        const auto& be = bnd_[static_cast<size_t>(enter)];
        double t = std::isfinite(be.up - be.lo) ? be.up - be.lo : kInf;
        int leave = -1;
        bool leave_to_upper = false;
        for (Index i = 0; i < m_; ++i) {
            const double wi = w[i] * dir;
            if (std::abs(wi) < kPivTol) continue;
            const auto& b = bnd_[static_cast<size_t>(basis_.basic[static_cast<size_t>(i)])];
            double cand = kInf;
            bool to_upper = false;
            if (wi > 0.0 && std::isfinite(b.lo)) { cand = (xb_[i] - b.lo) / wi; to_upper = false; }
            else if (wi < 0.0 && std::isfinite(b.up)) { cand = (b.up - xb_[i]) / (-wi); to_upper = true; }
            if (cand < t - 1e-12 ||
                (cand < t + 1e-12 && leave >= 0 && std::abs(w[i]) > std::abs(w[leave]))) {
                t = cand;
                leave = static_cast<int>(i);
                leave_to_upper = to_upper;
            }
        }
        if (!std::isfinite(t)) return Status::Unbounded;
        ++used;
        if (t <= 1e-11) { if (++stall > 60) bland = true; }
        else { stall = 0; bland = false; }
        if (leave < 0) {
            basis_.state[static_cast<size_t>(enter)] = (dir > 0) ? VarState::AtUpper : VarState::AtLower;
            compute_basics();
        } else {
            pivot(enter, leave, leave_to_upper, w);
        }
        if (cutoff) {
            double obj = 0.0;
            for (Index j = 0; j < n_ + m_; ++j)
                if (basis_.state[static_cast<size_t>(j)] != VarState::Basic)
                    obj += cost_[j] * value_of(static_cast<int>(j));
            for (Index i = 0; i < m_; ++i) obj += cost_[basis_.basic[static_cast<size_t>(i)]] * xb_[i];
            if (obj < *cutoff) return Status::Cutoff;
        }
    }
    return Status::IterLimit;
}

Result solve(const Problem& p, std::optional<double> cutoff) {
    Solver s;
    s.set_problem(p);
    return s.solve(cutoff);
}

SupportResult support(const Mat& H, const Vec& h, const Vec& d) {
    // dual form: min h.y  s.t.  H^T y = d,  y >= 0
    const Index f = H.rows();
    Problem p;
    p.c = h;
    p.A.resize(0, f);
    p.b.resize(0);
    p.E = H.transpose();
    p.d = d;
    p.lo = Vec::Zero(f);
    p.up = Vec::Constant(f, kInf);
    Solver s;
    s.set_problem(p);
    Result r = s.solve();
    SupportResult out;
    if (r.status == Status::Optimal) {
        out.status = Status::Optimal;
        out.value = r.objective;
        out.maximizer = s.row_duals();
    } else if (r.status == Status::Infeasible) {
        out.status = Status::Unbounded;  // no y reproduces d: polytope unbounded along d
        out.value = kInf;
    } else {
        out.status = Status::Infeasible;  // cost unbounded below: empty polytope
        out.value = -kInf;
    }
    return out;
}

} // namespace ampsc::lp
