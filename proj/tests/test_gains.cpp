#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ampsc/gains.hpp"
#include "ampsc/rng.hpp"

#include <cmath>

using namespace ampsc;

namespace {

PlantModel fixed_model(Mat A, Mat B, double state_lim = 10.0, double input_lim = 10.0) {
    PlantModel md;
    const Index n = A.rows();
    const Index m = B.cols();
    md.A0 = std::move(A);
    md.B0 = std::move(B);
    md.disturbance = Box(Vec::Zero(n), Vec::Zero(n));
    Mat rows = Mat::Zero(2 * (n + m), n + m);
    rows.topRows(n + m) = Mat::Identity(n + m, n + m);
    rows.bottomRows(n + m) = -Mat::Identity(n + m, n + m);
    Vec off(2 * (n + m));
    for (Index i = 0; i < n + m; ++i) {
        const double lim = i < n ? state_lim : input_lim;
        off(i) = lim;
        off(n + m + i) = lim;
    }
    md.constraints = HPolytope(rows, off);
    return md;
}

ParamBox empty_params() {
    ParamBox t;
    t.box = Box(Vec(), Vec());
    return t;
}

ParamBox param_interval(double lo, double up) {
    ParamBox t;
    t.box = Box(Vec::Constant(1, (lo + up) / 2), Vec::Constant(1, (up - lo) / 2));
    return t;
}

} // namespace

TEST_CASE("scalar Riccati fixed point") {
    PlantModel md = fixed_model(Mat::Ones(1, 1), Mat::Ones(1, 1));
    GainReport rep = synthesize_gain(md, empty_params(), Mat::Ones(1, 1), Mat::Ones(1, 1));
    // u = Kx with K = -(sqrt(5)-1)/2 for A=B=Q=R=1
    CHECK(rep.K(0, 0) == doctest::Approx(-(std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-9));
    REQUIRE(rep.vertex_radii.size() == 1);
    CHECK(rep.vertex_radii[0] == doctest::Approx(1.0 + rep.K(0, 0)).epsilon(1e-9));
    CHECK(rep.robust);
}

TEST_CASE("deadbeat plant needs no feedback") {
    PlantModel md = fixed_model(Mat::Zero(2, 2), (Mat(2, 1) << 0.0, 1.0).finished());
    GainReport rep = synthesize_gain(md, empty_params(), Mat::Identity(2, 2), Mat::Ones(1, 1));
    CHECK(rep.K.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(rep.vertex_radii[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("unstabilizable and ill-posed inputs are rejected") {
    // unstable mode invisible to the input
    Mat A = Mat::Zero(2, 2);
    A(0, 0) = 2.0;
    A(1, 1) = 0.5;
    Mat B = Mat::Zero(2, 1);
    B(1, 0) = 1.0;
    PlantModel md = fixed_model(A, B);
    CHECK_THROWS_AS(synthesize_gain(md, empty_params(), Mat::Identity(2, 2), Mat::Ones(1, 1)),
                    NotStabilizable);

    PlantModel ok = fixed_model(Mat::Ones(1, 1), Mat::Ones(1, 1));
    CHECK_THROWS_AS(synthesize_gain(ok, empty_params(), Mat::Ones(1, 1), -Mat::Ones(1, 1)),
                    NotStabilizable);
}

TEST_CASE("three-mass chain gain is robust across the parameter box") {
    MsdChain chain = msd_chain(3, 42);
    ParamBox theta0;
    theta0.box = chain.theta0;
    GainReport rep = synthesize_gain(chain.model, theta0, Mat::Identity(6, 6),
                                     Mat::Identity(3, 3));
    REQUIRE(rep.vertex_radii.size() == 4);
    for (double r : rep.vertex_radii) CHECK(r < 1.0);
    CHECK(rep.robust);
}

TEST_CASE("cross-section verification detects contraction factors") {
    // A_cl = 0.5 I via A = 0.5 I, K = 0
    PlantModel md = fixed_model(0.5 * Mat::Identity(2, 2), Mat::Identity(2, 2));
    CrossSection box{HPolytope::from_box(Box(Vec::Zero(2), Vec::Ones(2)))};
    CrossSectionReport rep =
        verify_cross_section(md, empty_params(), Mat::Zero(2, 2), box, 0.5);
    CHECK(rep.ok);
    CHECK(rep.worst_support == doctest::Approx(0.5).epsilon(1e-9));

    PlantModel hot = fixed_model(1.1 * Mat::Identity(2, 2), Mat::Identity(2, 2));
    CrossSectionReport bad = verify_cross_section(hot, empty_params(), Mat::Zero(2, 2), box, 1.0);
    CHECK_FALSE(bad.ok);
    CHECK(bad.worst_support == doctest::Approx(1.1).epsilon(1e-9));
}

TEST_CASE("already contractive start is a fixed point") {
    PlantModel md = fixed_model(0.5 * Mat::Identity(1, 1), Mat::Identity(1, 1), 1.0, 1.0);
    HPolytope X = contractive_cross_section(md, empty_params(), Mat::Zero(1, 1), 0.9, 3);
    REQUIRE(X.rows() == 2);
    CHECK(X.offsets.isApprox(Vec::Ones(2)));
    CHECK(support(X, Vec::Ones(1)) == doctest::Approx(1.0));
    CHECK(support(X, -Vec::Ones(1)) == doctest::Approx(1.0));
}

TEST_CASE("scaled rotation converges in a few iterations") {
    Mat A(2, 2);
    A << 0.0, -0.5, 0.5, 0.0;
    PlantModel md = fixed_model(A, Mat::Identity(2, 2), 1.0, 1.0);
    HPolytope X = contractive_cross_section(md, empty_params(), Mat::Zero(2, 2), 0.8, 5);
    CrossSectionReport rep =
        verify_cross_section(md, empty_params(), Mat::Zero(2, 2), CrossSection{X}, 0.8);
    CHECK(rep.ok);
    CHECK(X.contains(Vec::Zero(2), 0.0));
}

TEST_CASE("unstable closed loop never converges") {
    PlantModel md = fixed_model(1.1 * Mat::Identity(1, 1), Mat::Identity(1, 1), 1.0, 1.0);
    CHECK_THROWS_AS(contractive_cross_section(md, empty_params(), Mat::Zero(1, 1), 0.9, 40),
                    NoConvergence);
}

TEST_CASE("three-mass chain admits a contractive cross-section") {
    MsdChain chain = msd_chain(3, 9);
    ParamBox theta0;
    theta0.box = chain.theta0;
    GainReport g = synthesize_gain(chain.model, theta0, Mat::Identity(6, 6), Mat::Identity(3, 3));

    HPolytope X = contractive_cross_section(chain.model, theta0, g.K, 0.99, 30);
    CHECK(X.offsets.isApprox(Vec::Ones(X.rows())));
    CHECK(X.contains(Vec::Zero(6), 0.0));

    CrossSectionReport rep = verify_cross_section(chain.model, theta0, g.K, CrossSection{X}, 0.99);
    CHECK(rep.ok);

    // contraction is real: sampled states map into the shrunken set
    Rng rng(3);
    const auto corners = box_vertices(theta0.box);
    for (int trial = 0; trial < 200; ++trial) {
        Vec x(6);
        for (Index i = 0; i < 6; ++i) x(i) = rng.uniform(-2.0, 2.0);
        if (!X.contains(x, 0.0)) continue;
        for (const Vec& th : corners) {
            auto [A, B] = assemble(chain.model, th);
            const Vec xn = (A + B * g.K) * x;
            CHECK(X.max_residual(xn / 0.99) <= 1e-9);
        }
    }
}
