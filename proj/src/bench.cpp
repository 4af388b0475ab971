#include "ampsc/bench.hpp"

#include "ampsc/certifier.hpp"
#include "ampsc/gains.hpp"
#include "ampsc/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <utility>

namespace ampsc {

namespace {

constexpr double kPi = 3.14159265358979323846;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Facet normals of the regular k-gon, inradius 1.
Mat polygon_normals(int k) {
    Mat g(k, 2);
    for (int j = 0; j < k; ++j) {
        const double a = 2.0 * kPi * j / k;
        g(j, 0) = std::cos(a);
        g(j, 1) = std::sin(a);
    }
    return g;
}

// Support of that k-gon: max over its vertices (circumradius 1/cos(pi/k)).
double polygon_support(int k, double y0, double y1) {
    const double R = 1.0 / std::cos(kPi / k);
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
        const double a = 2.0 * kPi * (j + 0.5) / k;
        best = std::max(best, R * (std::cos(a) * y0 + std::sin(a) * y1));
    }
    return best;
}

struct ModalBasis {
    Mat V;                                   // real modal basis, unit columns
    std::vector<std::pair<int, int>> blocks;  // (start column, size 1 or 2)
};

// Real block decomposition of a matrix spectrum: one column per real
// eigenvalue, a (real, imag) column pair per complex conjugate pair.
ModalBasis modal_blocks(const Mat& M) {
    Eigen::EigenSolver<Mat> es(M);
    require(es.info() == Eigen::Success, "modal basis: eigendecomposition failed");
    const auto lam = es.eigenvalues();
    const auto vecs = es.eigenvectors();
    const Index n = M.rows();
    std::vector<bool> used(static_cast<size_t>(n), false);
    ModalBasis mb;
    mb.V.resize(n, n);
    int col = 0;
    for (Index i = 0; i < n; ++i) {
        if (used[static_cast<size_t>(i)]) continue;
        used[static_cast<size_t>(i)] = true;
        if (std::abs(lam[i].imag()) < 1e-9) {
            mb.V.col(col) = vecs.col(i).real();
            mb.blocks.emplace_back(col, 1);
            col += 1;
        } else {
            for (Index j = i + 1; j < n; ++j) {
                if (!used[static_cast<size_t>(j)] && std::abs(lam[j] - std::conj(lam[i])) < 1e-8) {
                    used[static_cast<size_t>(j)] = true;
                    break;
                }
            }
            mb.V.col(col) = vecs.col(i).real();
            mb.V.col(col + 1) = vecs.col(i).imag();
            mb.blocks.emplace_back(col, 2);
            col += 2;
        }
    }
    require(col == n, "modal basis: block count");
    for (Index c = 0; c < n; ++c) mb.V.col(c) /= mb.V.col(c).norm();
    return mb;
}

// Product of per-block sets in the basis V: an interval per real block, a
// scaled regular k-gon per complex block. Support evaluates block by block,
// which is exact for product sets.
struct ProductSection {
    Mat Vt;  // V transposed (support path)
    std::vector<std::pair<int, int>> blocks;
    Vec scales;
    int k = 8;
    Mat H;
    std::vector<int> rowblock;

    void build(const Mat& V) {
        Vt = V.transpose();
        const Index n = V.rows();
        Mat Vi = V.inverse();
        const Mat G = polygon_normals(k);
        Index nrows = 0;
        for (const auto& blk : blocks) nrows += (blk.second == 1) ? 2 : k;
        H.resize(nrows, n);
        rowblock.clear();
        Index r = 0;
        for (size_t b = 0; b < blocks.size(); ++b) {
            const auto [st, sz] = blocks[b];
            const double s = scales[static_cast<Index>(b)];
            if (sz == 1) {
                H.row(r++) = Vi.row(st) / s;
                H.row(r++) = -Vi.row(st) / s;
                rowblock.push_back(static_cast<int>(b));
                rowblock.push_back(static_cast<int>(b));
            } else {
                for (int j = 0; j < k; ++j) {
                    H.row(r++) = (G(j, 0) * Vi.row(st) + G(j, 1) * Vi.row(st + 1)) / s;
                    rowblock.push_back(static_cast<int>(b));
                }
            }
        }
    }

    double support(const Vec& d) const {
        const Vec y = Vt * d;
        double tot = 0.0;
        for (size_t b = 0; b < blocks.size(); ++b) {
            const auto [st, sz] = blocks[b];
            const double s = scales[static_cast<Index>(b)];
            if (sz == 1) tot += s * std::abs(y[st]);
            else tot += s * polygon_support(k, y[st], y[st + 1]);
        }
        return tot;
    }
};

std::vector<Mat> closed_loop_vertices(const PlantModel& model, const ParamBox& theta,
                                      const Mat& K) {
    std::vector<Mat> out;
    for (const Vec& th : box_vertices(theta.box)) {
        auto [A, B] = assemble(model, th);
        out.push_back(A + B * K);
    }
    return out;
}

// Single-gain admissibility margin: the largest uniform scaling of the
// section that keeps {x in X0, u = K x} inside the constraints.
double constraint_fit(const PlantModel& model, const Mat& K, const ProductSection& X) {
    double sigma = std::numeric_limits<double>::infinity();
    const Mat F = model.F();
    const Mat G = model.G();
    const Vec& z = model.z();
    for (Index r = 0; r < F.rows(); ++r) {
        const Vec dir = F.row(r).transpose() + K.transpose() * G.row(r).transpose();
        const double sup = X.support(dir);
        if (sup > 1e-12) sigma = std::min(sigma, z[r] / sup);
    }
    require(std::isfinite(sigma) && sigma > 0.0, "cross-section: constraint fit");
    return sigma;
}

// Balance per-block scales so every facet carries a comparable contraction +
// disturbance load, then scale the whole section to fill the constraints.
CrossSection balanced_section(const PlantModel& model, const ParamBox& theta, const Mat& K,
                              int k, int iters) {
    auto [Acen, Bcen] = assemble(model, theta.center());
    ModalBasis mb = modal_blocks(Acen + Bcen * K);
    const auto Acls = closed_loop_vertices(model, theta, K);
    const int nb = static_cast<int>(mb.blocks.size());

    ProductSection X;
    X.blocks = mb.blocks;
    X.k = k;
    X.scales = Vec::Ones(nb);
    for (int it = 0; it < iters; ++it) {
        X.build(mb.V);
        const Index nr = X.H.rows();
        const double sigma = constraint_fit(model, K, X);
        Vec load = Vec::Zero(nb);
        for (Index r = 0; r < nr; ++r) {
            double lam_r = 0.0;
            for (const Mat& Acl : Acls)
                lam_r = std::max(lam_r, X.support(Acl.transpose() * X.H.row(r).transpose()));
            const double wbar_r = support(model.disturbance, X.H.row(r).transpose()) / sigma;
            const int b = X.rowblock[static_cast<size_t>(r)];
            load[b] = std::max(load[b], lam_r + wbar_r);
        }
        X.scales = X.scales.array() * (load.array() / load.mean()).pow(0.35);
        X.scales /= X.scales.maxCoeff();
    }
    X.build(mb.V);
    X.scales *= constraint_fit(model, K, X);
    X.build(mb.V);

    double lam = 0.0, wb = 0.0;
    for (Index r = 0; r < X.H.rows(); ++r) {
        for (const Mat& Acl : Acls)
            lam = std::max(lam, X.support(Acl.transpose() * X.H.row(r).transpose()));
        wb = std::max(wb, support(model.disturbance, X.H.row(r).transpose()));
    }
    if (lam + wb >= 1.0) {
        std::ostringstream msg;
        msg << "balanced section not contractive enough: lam " << lam << " + wbar " << wb;
        throw NoConvergence(msg.str());
    }

    HPolytope set{X.H, Vec::Ones(X.H.rows())};
    ProductSection frozen = X;
    return CrossSection{std::move(set),
                        [frozen](const Vec& d) { return frozen.support(d); }};
}

// Per-mass decoupling gain: each input cancels its own velocity row of the
// center model and re-places it at the (pos, vel) coefficients (a, b).
Mat decoupled_gain(const PlantModel& model, const Vec& theta_center, double a, double b) {
    auto [Abar, B] = assemble(model, theta_center);
    const Index n = model.n();
    const Index m = model.m();
    Mat K = Mat::Zero(m, n);
    for (Index i = 0; i < m; ++i) {
        const Index vi = 2 * i + 1;
        require(std::abs(B(vi, i)) > 1e-12, "decoupled gain: actuator row");
        Vec des = Vec::Zero(n);
        des[2 * i] = a;
        des[2 * i + 1] = b;
        K.row(i) = (des.transpose() - Abar.row(vi)) / B(vi, i);
    }
    return K;
}

// Product of per-mass k-gons expressed in the local (pos, vel) modal basis.
CrossSection per_mass_section(Index n_msd, const Mat& V2, double s1, double s2, int k) {
    const Index n = 2 * n_msd;
    Mat VS = V2 * Eigen::DiagonalMatrix<double, 2>(s1, s2);
    Mat Vi2 = VS.inverse();
    const Mat G = polygon_normals(k);
    Mat H = Mat::Zero(n_msd * k, n);
    for (Index bm = 0; bm < n_msd; ++bm)
        for (int j = 0; j < k; ++j)
            H.row(bm * k + j).segment(2 * bm, 2) = G.row(j) * Vi2;
    Mat VSt = VS.transpose();
    auto fn = [n_msd, VSt, k](const Vec& d) {
        double tot = 0.0;
        for (Index bm = 0; bm < n_msd; ++bm) {
            const Eigen::Vector2d y = VSt * d.segment(2 * bm, 2);
            tot += polygon_support(k, y[0], y[1]);
        }
        return tot;
    };
    return CrossSection{HPolytope{std::move(H), Vec::Ones(n_msd * k)}, std::move(fn)};
}

Box pure_state_box(const PlantModel& model) {
    const Mat F = model.F();
    const Mat G = model.G();
    const Vec& z = model.z();
    const Index n = model.n();
    Vec lo = Vec::Constant(n, -lp::kInf);
    Vec up = Vec::Constant(n, lp::kInf);
    for (Index r = 0; r < F.rows(); ++r) {
        if (G.row(r).cwiseAbs().maxCoeff() > 1e-12) continue;
        Index nz = -1;
        int count = 0;
        for (Index c = 0; c < n; ++c)
            if (std::abs(F(r, c)) > 1e-12) {
                nz = c;
                ++count;
            }
        if (count != 1) continue;
        const double coef = F(r, nz);
        if (coef > 0.0) up[nz] = std::min(up[nz], z[r] / coef);
        else lo[nz] = std::max(lo[nz], z[r] / coef);
    }
    for (Index i = 0; i < n; ++i)
        require(std::isfinite(lo[i]) && std::isfinite(up[i]) && lo[i] < up[i],
                "state sampling box: unbounded state dimension");
    return Box{(lo + up) / 2.0, (up - lo) / 2.0};
}

double box_volume(const Box& b) {
    double v = 1.0;
    for (Index i = 0; i < b.dim(); ++i) v *= 2.0 * b.half_widths[i];
    return v;
}

Benchmark build_msd_exact(int n_msd, std::uint64_t seed) {
    Benchmark out;
    out.chain = msd_chain(n_msd, seed);
    const PlantModel& model = out.chain.model;
    ParamBox theta0{out.chain.theta0, 0};
    GainReport gr = synthesize_gain(model, theta0, Mat::Identity(model.n(), model.n()),
                                    Mat::Identity(model.m(), model.m()));
    CrossSection X0 = balanced_section(model, theta0, gr.K, 8, 30);
    out.cfg = make_tube_config(model, gr.K, std::move(X0), 10, TubeMode::ThetaVertices);
    out.terminal = initial_terminal(model, theta0, out.cfg);
    out.state_box = pure_state_box(model);
    return out;
}

Benchmark build_msd_split(int n_msd, std::uint64_t seed) {
    Benchmark out;
    out.chain = msd_chain(n_msd, seed);
    const PlantModel& model = out.chain.model;
    ParamBox theta0{out.chain.theta0, 0};
    const double Ts = model.A0(0, 1);
    const double mu1 = 0.5, mu2 = 0.6;
    const double b = mu1 + mu2 - 1.0;
    const double a = (b - mu1 * mu2) / Ts;
    Mat V2(2, 2);
    V2.col(0) = Eigen::Vector2d(Ts, mu1 - 1.0).normalized();
    V2.col(1) = Eigen::Vector2d(Ts, mu2 - 1.0).normalized();
    Mat K = decoupled_gain(model, theta0.center(), a, b);
    CrossSection X0 = per_mass_section(n_msd, V2, 0.8, 0.8, 8);
    out.cfg = make_tube_config(model, std::move(K), std::move(X0), 6, TubeMode::ComponentSplit);
    out.terminal = initial_terminal(model, theta0, out.cfg);
    out.state_box = pure_state_box(model);
    return out;
}

} // namespace

Benchmark make_benchmark(const std::string& name, std::uint64_t seed) {
    const std::string prefix = "msd:";
    if (name.rfind(prefix, 0) != 0)
        throw Error("unknown benchmark '" + name + "' (expected msd:<n>)");
    int n_msd = 0;
    try {
        n_msd = std::stoi(name.substr(prefix.size()));
    } catch (const std::exception&) {
        throw Error("unknown benchmark '" + name + "' (expected msd:<n>)");
    }
    require(n_msd >= 2, "benchmark: need at least two mass elements");
    Benchmark out = (n_msd <= 3) ? build_msd_exact(n_msd, seed) : build_msd_split(n_msd, seed);
    out.name = name;
    out.run.seed = seed;
    return out;
}

VolumeEstimate mc_volume(const std::function<bool(const Vec&)>& oracle, const Box& bounds,
                         Index samples, std::uint64_t seed, std::string oracle_tag) {
    require(samples >= 1, "mc_volume: samples");
    require(bounds.dim() >= 1, "mc_volume: bounds");
    Rng rng = Rng(seed).child(0x766f6c756d65ull);
    const Index n = bounds.dim();
    Vec x(n);
    Index hits = 0;
    for (Index s = 0; s < samples; ++s) {
        for (Index i = 0; i < n; ++i) {
            const double c = bounds.center[i], h = bounds.half_widths[i];
            x[i] = rng.uniform(c - h, c + h);
        }
        if (oracle(x)) ++hits;
    }
    VolumeEstimate est;
    est.samples = samples;
    est.hits = hits;
    est.oracle_tag = std::move(oracle_tag);
    const double vol_box = box_volume(bounds);
    const double phat = static_cast<double>(hits) / static_cast<double>(samples);
    est.volume = phat * vol_box;
    est.ci95_halfwidth = 1.96 * std::sqrt(phat * (1.0 - phat) / static_cast<double>(samples)) * vol_box;
    return est;
}

FeasOracle::FeasOracle(const PlantModel& model, const TubeConfig& cfg, const ParamBox& theta,
                       const TerminalSet& terminal, std::string tag)
    : sys_(assemble_tube(model, cfg, theta, terminal, cfg.N)), tag_(std::move(tag)) {
    const Index nA = sys_.A.rows();
    const Index nE = sys_.E.rows();
    ny_ = nA;

    // Equilibrate the inequality rows (the tube stacks rows four orders of
    // magnitude apart, which wrecks the dense basis updates). A positive row
    // scaling leaves the row multipliers and the feasible set untouched.
    row_scale_ = sys_.A.cwiseAbs().rowwise().maxCoeff().cwiseMax(1e-12).cwiseInverse();
    const Mat As = row_scale_.asDiagonal() * sys_.A;
    scaled_b_ = row_scale_.cwiseProduct(sys_.b);

    // Dual of "maximize the initial section scaling through the sample".
    // Only objective coefficients change between samples, so the basis stays
    // warm, and at an optimum the row multipliers are exactly the widest
    // feasible tube anchored at the sample.
    lp::Problem fat;
    fat.c.resize(nA + nE);
    fat.c.head(nA) = scaled_b_;
    fat.c.tail(nE) = sys_.d;
    fat.A.resize(0, nA + nE);
    fat.b.resize(0);
    fat.E.resize(sys_.nvars, nA + nE);
    fat.E << As.transpose(), sys_.E.transpose();
    fat.d = Vec::Zero(sys_.nvars);
    fat.d[sys_.ai(0)] = 1.0;
    fat.lo.resize(nA + nE);
    fat.lo.head(nA).setZero();
    fat.lo.tail(nE).setConstant(-lp::kInf);
    fat.up = Vec::Constant(nA + nE, lp::kInf);
    fat_.set_problem(fat);
    fat_cost_ = fat.c;

    // Dual of the bare feasibility system with the equality multipliers split
    // into nonnegative halves: the all-zero vertex is feasible for every
    // cost, so no solve ever needs a phase 1. Optimum 0 = sample feasible; a
    // negative value scales to a separating functional.
    lp::Problem sep;
    sep.c.resize(nA + 2 * nE);
    sep.c.head(nA) = scaled_b_;
    sep.c.segment(nA, nE) = sys_.d;
    sep.c.tail(nE) = -sys_.d;
    sep.A.resize(0, nA + 2 * nE);
    sep.b.resize(0);
    sep.E.resize(sys_.nvars, nA + 2 * nE);
    sep.E << As.transpose(), sys_.E.transpose(), -sys_.E.transpose();
    sep.d = Vec::Zero(sys_.nvars);
    sep.lo = Vec::Zero(nA + 2 * nE);
    sep.up = Vec::Ones(nA + 2 * nE);
    sep_.set_problem(sep);
    sep_cost_ = sep.c;

    b_work_ = sys_.b;
    seed_widest_cert();
}

// Widest feasible initial cross-section overall: solve "maximize alpha_0"
// with the sample rows dropped, again in dual form. Anything inside
// {z0 + alpha0 X0} is feasible.
void FeasOracle::seed_widest_cert() {
    const Index nE = sys_.E.rows();
    const Index tail = sys_.A.rows() - sys_.n5b;
    if (tail <= 0) return;
    lp::Problem wide;
    wide.c.resize(tail + nE);
    wide.c.head(tail) = scaled_b_.tail(tail);
    wide.c.tail(nE) = sys_.d;
    wide.A.resize(0, tail + nE);
    wide.b.resize(0);
    wide.E.resize(sys_.nvars, tail + nE);
    wide.E << (row_scale_.tail(tail).asDiagonal() * sys_.A.bottomRows(tail)).transpose(),
        sys_.E.transpose();
    wide.d = Vec::Zero(sys_.nvars);
    wide.d[sys_.ai(0)] = 1.0;
    wide.lo.resize(tail + nE);
    wide.lo.head(tail).setZero();
    wide.lo.tail(nE).setConstant(-lp::kInf);
    wide.up = Vec::Constant(tail + nE, lp::kInf);
    lp::Solver ws;
    ws.set_problem(wide);
    if (ws.solve().status != lp::Status::Optimal) return;
    const Vec pi = ws.row_duals();
    const double r1 = (sys_.A.bottomRows(tail) * pi - sys_.b.tail(tail)).maxCoeff();
    const double r2 = (sys_.E * pi - sys_.d).cwiseAbs().maxCoeff();
    if (!(std::max(r1, r2) <= 1e-7)) return;
    Cert cert;
    cert.z0 = pi.segment(sys_.zi(0), sys_.n);
    cert.alpha0 = pi[sys_.ai(0)];
    cert.Hz0 = sys_.Hx * cert.z0;
    certs_.push_back(std::move(cert));
    widest_ok_ = true;
}

bool FeasOracle::feasible(const Vec& x) {
    require(x.size() == sys_.n, "volume oracle: state dimension");
    const Vec hx = sys_.Hx * x;
    if (widest_ok_) {
        const Cert& w = certs_.front();
        if (((hx - w.Hz0).array() <= w.alpha0 + 1e-9).all()) {
            ++cert_hits_;
            return true;
        }
    }
    const size_t first = widest_ok_ ? 1 : 0;
    for (size_t i = certs_.size(); i > first; --i) {
        const Cert& c = certs_[i - 1];
        if (((hx - c.Hz0).array() <= c.alpha0 + 1e-9).all()) {
            ++cert_hits_;
            return true;
        }
    }
    for (size_t i = rays_.size(); i > 0; --i) {
        const Ray& r = rays_[i - 1];
        if (r.g.dot(x) > r.c + 1e-7) {
            ++ray_hits_;
            return false;
        }
    }
    return decide_lp(x, hx);
}

bool FeasOracle::decide_lp(const Vec& x, const Vec& hx) {
    ++lp_calls_;
    fat_cost_.head(sys_.n5b) = -row_scale_.head(sys_.n5b).cwiseProduct(hx);
    lp::Result res = fat_.resolve_costs(fat_cost_, -1e-7);
    if (res.status == lp::Status::IterLimit || res.status == lp::Status::Infeasible) {
        fat_.clear_basis();
        res = fat_.resolve_costs(fat_cost_, -1e-7);
        if (res.status == lp::Status::IterLimit || res.status == lp::Status::Infeasible)
            throw NoConvergence("volume oracle: anchored tube solve stalled");
    }
    if (res.status == lp::Status::Optimal) {
        store_cert(x, hx);
        return true;
    }
    return separation_feasible(x, hx);
}

// Exact feasibility via the separation dual; also mints a reusable
// separating functional on the infeasible side.
bool FeasOracle::separation_feasible(const Vec& x, const Vec& hx) {
    sep_cost_.head(sys_.n5b) = -row_scale_.head(sys_.n5b).cwiseProduct(hx);
    lp::Result res = sep_.resolve_costs(sep_cost_, -1e-6);
    if (res.status == lp::Status::IterLimit || res.status == lp::Status::Infeasible) {
        sep_.clear_basis();
        res = sep_.resolve_costs(sep_cost_, -1e-6);
        if (res.status == lp::Status::IterLimit || res.status == lp::Status::Infeasible)
            throw NoConvergence("volume oracle: separation solve stalled");
    }
    if (res.status == lp::Status::Optimal && res.objective >= -1e-7) {
        // boundary disagreement with the anchored solve: keep the sample
        // itself certified so repeat queries stay consistent
        Cert cert;
        cert.z0 = x;
        cert.alpha0 = 0.0;
        cert.Hz0 = hx;
        certs_.push_back(std::move(cert));
        return true;
    }
    const Index nE = sys_.E.rows();
    if (res.x.size() == ny_ + 2 * nE) {
        const Vec y = row_scale_.cwiseProduct(res.x.head(ny_));
        const Vec mu = res.x.segment(ny_, nE) - res.x.tail(nE);
        const Vec resid = sys_.A.transpose() * y + sys_.E.transpose() * mu;
        if (resid.cwiseAbs().maxCoeff() <= 1e-7) {
            Ray r;
            r.g = sys_.Hx.transpose() * y.head(sys_.n5b);
            const Index tail = ny_ - sys_.n5b;
            r.c = sys_.b.tail(tail).dot(y.tail(tail)) + sys_.d.dot(mu);
            if (r.g.dot(x) > r.c + 1e-7) rays_.push_back(std::move(r));
        }
    }
    return false;
}

void FeasOracle::store_cert(const Vec& x, const Vec& hx) {
    Cert cert;
    const Vec pi = fat_.row_duals();
    sys_.set_sample(x, b_work_);
    const double r1 = (sys_.A * pi - b_work_).maxCoeff();
    const double r2 = (sys_.E * pi - sys_.d).cwiseAbs().maxCoeff();
    if (std::max(r1, r2) <= 1e-7) {
        cert.z0 = pi.segment(sys_.zi(0), sys_.n);
        cert.alpha0 = pi[sys_.ai(0)];
        cert.Hz0 = sys_.Hx * cert.z0;
    } else {
        // fall back to the sample itself so this exact point stays certified
        cert.z0 = x;
        cert.alpha0 = 0.0;
        cert.Hz0 = hx;
    }
    certs_.push_back(std::move(cert));
}

void FeasOracle::adopt_certs(const FeasOracle& donor) {
    require(donor.sys_.n == sys_.n && donor.sys_.nH == sys_.nH,
            "adopt_certs: cross-section mismatch");
    certs_.insert(certs_.end(), donor.certs_.begin(), donor.certs_.end());
}

std::function<bool(const Vec&)> FeasOracle::predicate() {
    return [this](const Vec& x) { return feasible(x); };
}

VolumeStudy run_table1(const ExperimentConfig& cfg) {
    require(!cfg.seeds.empty(), "experiment: at least one seed");
    require(cfg.samples >= 1, "experiment: samples");
    VolumeStudy out;
    out.config = cfg;
    for (std::uint64_t seed : cfg.seeds) {
        Benchmark bench = make_benchmark(cfg.benchmark, seed);
        if (cfg.horizon > 0) bench.cfg.N = cfg.horizon;
        const PlantModel& model = bench.chain.model;
        ParamBox theta0{bench.chain.theta0, 0};

        RunOptions opt = bench.run;
        opt.steps = cfg.steps;
        opt.seed = seed;
        opt.mode = cfg.mode;
        opt.source = cfg.source;
        opt.estimation_cadence = cfg.estimation_cadence;

        SeedReport row;
        row.seed = seed;
        row.theta0 = bench.chain.theta0;
        row.terminal_points_before = bench.terminal.count();

        const auto t_run = std::chrono::steady_clock::now();
        TrueSystem sys(model, bench.chain.theta_star, Rng(seed).child(0x73696d2d76ull),
                       DisturbanceMode::Uniform);
        RunLog log = run_closed_loop(sys, theta0, bench.terminal, bench.cfg, opt);
        row.run_seconds = seconds_since(t_run);
        row.steps = static_cast<int>(log.steps.size());
        row.violations = log.violations;
        row.intervention_rate = log.intervention_rate;
        row.theta_final = log.theta_final.box;

        TerminalSet enlarged = bench.terminal;
        if (cfg.enlargement_cadence > 0 && !log.plans.empty()) {
            std::vector<HomotheticTube> picked;
            for (size_t i = 0; i < log.plans.size();
                 i += static_cast<size_t>(cfg.enlargement_cadence))
                picked.push_back(log.plans[i]);
            enlarged = enlarge_homothetic(bench.terminal, picked, log.theta_final);
        }
        row.terminal_points_after = enlarged.count();

        const auto t_vol = std::chrono::steady_clock::now();
        FeasOracle o0(model, bench.cfg, theta0, bench.terminal, "theta0");
        row.vol_theta0 =
            mc_volume(o0.predicate(), bench.state_box, cfg.samples, cfg.sample_seed, o0.tag());

        FeasOracle oF(model, bench.cfg, log.theta_final, bench.terminal, "theta_final");
        oF.adopt_certs(o0);
        row.vol_theta_final =
            mc_volume(oF.predicate(), bench.state_box, cfg.samples, cfg.sample_seed, oF.tag());

        FeasOracle oE(model, bench.cfg, log.theta_final, enlarged, "enlarged_terminal");
        oE.adopt_certs(oF);
        row.vol_enlarged =
            mc_volume(oE.predicate(), bench.state_box, cfg.samples, cfg.sample_seed, oE.tag());

        if (cfg.ablation_frozen) {
            RunOptions frozen = opt;
            frozen.adapt = false;
            TrueSystem sys2(model, bench.chain.theta_star, Rng(seed).child(0x73696d2d76ull),
                            DisturbanceMode::Uniform);
            RunLog logf = run_closed_loop(sys2, theta0, bench.terminal, bench.cfg, frozen);
            FeasOracle oz(model, bench.cfg, logf.theta_final, bench.terminal, "frozen_theta0");
            oz.adopt_certs(o0);
            row.vol_frozen =
                mc_volume(oz.predicate(), bench.state_box, cfg.samples, cfg.sample_seed, oz.tag());
        }
        row.volume_seconds = seconds_since(t_vol);

        if (row.vol_theta0.volume > 0.0) {
            row.gain_learning_pct =
                100.0 * (row.vol_theta_final.volume - row.vol_theta0.volume) / row.vol_theta0.volume;
            row.gain_total_pct =
                100.0 * (row.vol_enlarged.volume - row.vol_theta0.volume) / row.vol_theta0.volume;
        }
        out.box_volume = box_volume(bench.state_box);
        out.rows.push_back(std::move(row));
    }
    return out;
}

} // namespace ampsc
