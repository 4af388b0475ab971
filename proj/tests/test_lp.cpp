#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ampsc/lp.hpp"
#include "ampsc/rng.hpp"

#include <cmath>
#include <vector>

using namespace ampsc;
using lp::kInf;
using lp::Status;

namespace {

// Brute-force oracle for min c.x over {A x <= b, lo <= x <= up} in d <= 3:
// enumerate all d-subsets of the row set (rows plus bound faces), solve the
// square system, keep feasible vertices, return the best objective.
struct Oracle {
    bool feasible = false;
    double objective = 0.0;
};

Oracle brute_min(const Vec& c, const Mat& A, const Vec& b, const Vec& lo, const Vec& up) {
    const Index d = c.size();
    Mat rows(A.rows() + 2 * d, d);
    Vec rhs(A.rows() + 2 * d);
    rows.topRows(A.rows()) = A;
    rhs.head(A.rows()) = b;
    for (Index i = 0; i < d; ++i) {
        rows.row(A.rows() + 2 * i) = Vec::Unit(d, i).transpose();
        rhs(A.rows() + 2 * i) = up(i);
        rows.row(A.rows() + 2 * i + 1) = -Vec::Unit(d, i).transpose();
        rhs(A.rows() + 2 * i + 1) = -lo(i);
    }
    const int R = static_cast<int>(rows.rows());
    Oracle out;
    std::vector<int> idx(static_cast<size_t>(d));
    auto try_vertex = [&](const std::vector<int>& sel) {
        Mat M(d, d);
        Vec v(d);
        for (Index i = 0; i < d; ++i) {
            M.row(i) = rows.row(sel[static_cast<size_t>(i)]);
            v(i) = rhs(sel[static_cast<size_t>(i)]);
        }
        Eigen::FullPivLU<Mat> lu(M);
        if (!lu.isInvertible()) return;
        Vec x = lu.solve(v);
        if (((rows * x).array() > rhs.array() + 1e-7).any()) return;
        const double obj = c.dot(x);
        if (!out.feasible || obj < out.objective) {
            out.feasible = true;
            out.objective = obj;
        }
    };
    if (d == 1) {
        for (int i = 0; i < R; ++i) try_vertex({i});
    } else if (d == 2) {
        for (int i = 0; i < R; ++i)
            for (int j = i + 1; j < R; ++j) try_vertex({i, j});
    } else {
        for (int i = 0; i < R; ++i)
            for (int j = i + 1; j < R; ++j)
                for (int k = j + 1; k < R; ++k) try_vertex({i, j, k});
    }
    return out;
}

} // namespace

TEST_CASE("basic bounded minimum") {
    lp::Problem p;
    p.c = Vec::Constant(2, 1.0);
    p.A = Mat(1, 2);
    p.A << -1.0, -1.0;
    p.b = Vec::Constant(1, -1.0);  // x0 + x1 >= 1
    p.E.resize(0, 2);
    p.d.resize(0);
    p.lo = Vec::Zero(2);
    p.up = Vec::Constant(2, kInf);
    auto r = lp::solve(p);
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.objective == doctest::Approx(1.0));
}

TEST_CASE("equality constraint and negative costs") {
    lp::Problem p;
    p.c = Vec(3);
    p.c << -1.0, -2.0, 0.5;
    p.A.resize(0, 3);
    p.b.resize(0);
    p.E = Mat(1, 3);
    p.E << 1.0, 1.0, 1.0;
    p.d = Vec::Constant(1, 1.0);
    p.lo = Vec::Zero(3);
    p.up = Vec::Constant(3, 1.0);
    auto r = lp::solve(p);
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.objective == doctest::Approx(-2.0));
    CHECK(r.x(1) == doctest::Approx(1.0));
}

TEST_CASE("infeasible detected") {
    lp::Problem p;
    p.c = Vec::Zero(1);
    p.A = Mat(2, 1);
    p.A << 1.0, -1.0;
    p.b = Vec(2);
    p.b << 1.0, -2.0;  // x <= 1 and x >= 2
    p.E.resize(0, 1);
    p.d.resize(0);
    p.lo = Vec::Constant(1, -kInf);
    p.up = Vec::Constant(1, kInf);
    auto r = lp::solve(p);
    CHECK(r.status == Status::Infeasible);
}

TEST_CASE("unbounded detected") {
    lp::Problem p;
    p.c = Vec::Constant(1, -1.0);
    p.A = Mat(1, 1);
    p.A << -1.0;
    p.b = Vec::Constant(1, 0.0);  // x >= 0
    p.E.resize(0, 1);
    p.d.resize(0);
    p.lo = Vec::Constant(1, -kInf);
    p.up = Vec::Constant(1, kInf);
    auto r = lp::solve(p);
    CHECK(r.status == Status::Unbounded);
}

TEST_CASE("randomized vs brute force oracle") {
    Rng rng(20240817);
    int solved = 0;
    for (int trial = 0; trial < 1200; ++trial) {
        const Index d = 1 + static_cast<Index>(rng.next_u64() % 3);
        const Index m = 1 + static_cast<Index>(rng.next_u64() % 6);
        Vec c(d), lo(d), up(d);
        for (Index i = 0; i < d; ++i) {
            c(i) = rng.uniform(-2.0, 2.0);
            lo(i) = rng.uniform(-3.0, 0.0);
            up(i) = lo(i) + rng.uniform(0.2, 4.0);
        }
        Mat A(m, d);
        Vec b(m);
        for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < d; ++j) A(i, j) = rng.uniform(-1.5, 1.5);
            b(i) = rng.uniform(-1.0, 2.0);
        }
        auto want = brute_min(c, A, b, lo, up);
        lp::Problem p;
        p.c = c;
        p.A = A;
        p.b = b;
        p.E.resize(0, d);
        p.d.resize(0);
        p.lo = lo;
        p.up = up;
        auto got = lp::solve(p);
        if (want.feasible) {
            REQUIRE_MESSAGE(got.status == Status::Optimal, "trial ", trial);
            REQUIRE_MESSAGE(got.objective == doctest::Approx(want.objective).epsilon(1e-6),
                            "trial ", trial);
            ++solved;
        } else {
            REQUIRE_MESSAGE(got.status == Status::Infeasible, "trial ", trial);
        }
    }
    CHECK(solved > 300);  // the generator must exercise plenty of feasible cases
}

TEST_CASE("support function vs vertex enumeration") {
    Rng rng(7);
    for (int trial = 0; trial < 400; ++trial) {
        const Index d = 2 + static_cast<Index>(rng.next_u64() % 2);
        // random bounded polytope: box plus extra cuts
        const Index extra = 1 + static_cast<Index>(rng.next_u64() % 4);
        Mat H(2 * d + extra, d);
        Vec h(2 * d + extra);
        for (Index i = 0; i < d; ++i) {
            H.row(2 * i) = Vec::Unit(d, i).transpose();
            h(2 * i) = rng.uniform(0.3, 2.0);
            H.row(2 * i + 1) = -Vec::Unit(d, i).transpose();
            h(2 * i + 1) = rng.uniform(0.3, 2.0);
        }
        for (Index e = 0; e < extra; ++e) {
            for (Index j = 0; j < d; ++j) H(2 * d + e, j) = rng.uniform(-1.0, 1.0);
            h(2 * d + e) = rng.uniform(0.1, 1.5);
        }
        Vec dir(d);
        for (Index j = 0; j < d; ++j) dir(j) = rng.uniform(-1.0, 1.0);
        // oracle: maximize via brute_min of -dir
        Vec lo = Vec::Constant(d, -10.0), up = Vec::Constant(d, 10.0);
        auto want = brute_min(-dir, H, h, lo, up);
        auto got = lp::support(H, h, dir);
        REQUIRE(want.feasible);
        REQUIRE(got.status == Status::Optimal);
        CHECK(got.value == doctest::Approx(-want.objective).epsilon(1e-6));
        CHECK((H * got.maximizer - h).maxCoeff() < 1e-6);
        CHECK(dir.dot(got.maximizer) == doctest::Approx(got.value).epsilon(1e-6));
    }
}

TEST_CASE("support of empty and unbounded sets") {
    Mat H(2, 1);
    H << 1.0, -1.0;
    Vec h(2);
    h << -2.0, 1.0;  // x <= -2 and x >= -1: empty
    auto r = lp::support(H, h, Vec::Constant(1, 1.0));
    CHECK(r.status == Status::Infeasible);

    Mat H2(1, 2);
    H2 << 1.0, 0.0;  // x0 <= 1, x1 free
    auto r2 = lp::support(H2, Vec::Constant(1, 1.0), Vec::Unit(2, 1));
    CHECK(r2.status == Status::Unbounded);
}

TEST_CASE("warm restart with new costs matches cold solve") {
    Rng rng(99);
    const Index d = 3, m = 8;
    Mat A(m, d);
    Vec b(m);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < d; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
        b(i) = rng.uniform(0.5, 2.0);
    }
    lp::Problem p;
    p.c = Vec::Zero(d);
    p.A = A;
    p.b = b;
    p.E.resize(0, d);
    p.d.resize(0);
    p.lo = Vec::Constant(d, -5.0);
    p.up = Vec::Constant(d, 5.0);
    lp::Solver warm;
    warm.set_problem(p);
    REQUIRE(warm.solve().status == Status::Optimal);
    for (int k = 0; k < 50; ++k) {
        Vec c(d);
        for (Index j = 0; j < d; ++j) c(j) = rng.uniform(-1.0, 1.0);
        auto fast = warm.resolve_costs(c);
        lp::Problem pc = p;
        pc.c = c;
        auto cold = lp::solve(pc);
        REQUIRE(fast.status == Status::Optimal);
        REQUIRE(cold.status == Status::Optimal);
        CHECK(fast.objective == doctest::Approx(cold.objective).epsilon(1e-7));
    }
}

TEST_CASE("cutoff terminates early") {
    lp::Problem p;
    p.c = Vec::Constant(1, 1.0);
    p.A = Mat(1, 1);
    p.A << -1.0;
    p.b = Vec::Constant(1, 5.0);  // x >= -5
    p.E.resize(0, 1);
    p.d.resize(0);
    p.lo = Vec::Constant(1, -10.0);
    p.up = Vec::Constant(1, 10.0);
    auto r = lp::solve(p, -2.0);
    CHECK((r.status == Status::Cutoff || (r.status == Status::Optimal && r.objective < -2.0)));
}
