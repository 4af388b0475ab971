#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ampsc/certifier.hpp"
#include "ampsc/gains.hpp"
#include "ampsc/terminal.hpp"

#include <cmath>
#include <vector>

using namespace ampsc;

namespace {

PlantModel toy(double w_half = 0.01) {
    PlantModel md;
    md.A0.resize(2, 2);
    md.A0 << 1.0, 0.2, 0.0, 1.0;
    md.B0.resize(2, 1);
    md.B0 << 0.0, 0.2;
    Mat A1 = Mat::Zero(2, 2);
    A1(1, 0) = -0.2;
    md.A_components = {A1};
    md.B_components = {Mat::Zero(2, 1)};
    md.disturbance = Box(Vec::Zero(2), Vec::Constant(2, w_half));
    Mat n(6, 3);
    n << 1, 0, 0, 0, 1, 0, -1, 0, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1;
    Vec o(6);
    o << 2.0, 2.0, 2.0, 2.0, 3.0, 3.0;
    md.constraints = HPolytope(n, o);
    return md;
}

ParamBox param_interval(double lo, double up) {
    ParamBox t;
    t.box = Box(Vec::Constant(1, (lo + up) / 2), Vec::Constant(1, (up - lo) / 2));
    return t;
}

struct Setup {
    PlantModel md;
    ParamBox th0;
    TubeConfig cfg;
    TerminalSet ts;
};

Setup make_setup(double w_half = 0.01, int N = 6) {
    Setup s;
    s.md = toy(w_half);
    s.th0 = param_interval(0.0, 1.2);
    Mat K(1, 2);
    K << -0.71, -1.57;
    HPolytope X = contractive_cross_section(s.md, s.th0, K, 0.95, 60);
    X.normals /= 0.6;
    s.cfg = make_tube_config(s.md, K, CrossSection{X}, N);
    s.ts = initial_terminal(s.md, s.th0, s.cfg);
    return s;
}

HomotheticTube solve_plan(const Setup& s, const TerminalSet& ts, const Vec& x,
                          int horizon = -1) {
    QpReport rep = build_and_solve(s.md, x, Vec::Zero(1), s.th0, ts, s.cfg, horizon);
    REQUIRE(rep.status == QpStatus::Feasible);
    return *rep.tube;
}

} // namespace

TEST_CASE("initial terminal points and membership") {
    Setup s = make_setup();
    CHECK(s.ts.count() == 2);
    CHECK(s.ts.n() == 2);
    for (const auto& pt : s.ts.points) {
        CHECK(pt.z.cwiseAbs().maxCoeff() == 0.0);
        CHECK(pt.has_certificate);
        CHECK(pt.v.cwiseAbs().maxCoeff() == 0.0);
        CHECK(pt.z_next.cwiseAbs().maxCoeff() == 0.0);
        CHECK(pt.alpha_next >= 0.0);
        CHECK(pt.alpha_next <= 1.0 + 1e-12);
        CHECK(pt.provenance == TerminalProvenance::Initial);
    }
    CHECK(s.ts.points[0].alpha == 0.0);
    CHECK(s.ts.points[1].alpha == 1.0);
    CHECK(s.ts.points[1].alpha_next > s.ts.points[0].alpha_next);

    CHECK(s.ts.contains(Vec::Zero(2), 0.5).inside);
    CHECK(s.ts.contains(Vec::Zero(2), 1.0).inside);
    CHECK_FALSE(s.ts.contains(Vec::Zero(2), 1.2).inside);
    Vec off(2);
    off << 0.3, 0.0;
    CHECK_FALSE(s.ts.contains(off, 0.0).inside);
}

TEST_CASE("initial terminal rejects bad gains and tight inputs") {
    PlantModel md = toy();
    ParamBox th0 = param_interval(0.0, 1.2);

    // zero gain: the open-loop double integrator cannot contract any section
    Mat K0 = Mat::Zero(1, 2);
    Mat n(4, 2);
    n << 1, 0, -1, 0, 0, 1, 0, -1;
    CrossSection unit_box{HPolytope(n, Vec::Ones(4))};
    TubeConfig cfg0 = make_tube_config(md, K0, unit_box, 4);
    CHECK_THROWS_AS(initial_terminal(md, th0, cfg0), CrossSectionNotCertified);

    // sound gain and section, but the input budget cannot cover K over X0
    Setup s = make_setup();
    PlantModel tight = toy();
    tight.constraints.offsets(4) = 0.5;
    tight.constraints.offsets(5) = 0.5;
    TubeConfig cfg_tight = make_tube_config(tight, s.cfg.K, s.cfg.X0, 4);
    CHECK_THROWS_AS(initial_terminal(tight, th0, cfg_tight), CrossSectionNotCertified);
}

TEST_CASE("invariance check accepts the initial terminal and flags corruption") {
    Setup s = make_setup();
    Assumption4Report ok = check_assumption4(s.ts, s.md, s.th0, s.cfg);
    CHECK(ok.pass);
    CHECK(ok.worst_margin >= -1e-9);

    TerminalSet broken = s.ts;
    broken.points[1].alpha_next -= 0.5;
    Assumption4Report bad = check_assumption4(broken, s.md, s.th0, s.cfg);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst_margin <= -0.3);
    CHECK(bad.worst_point == 1);

    TerminalSet astray = s.ts;
    astray.points[1].z_next = Vec::Constant(2, 5.0);
    Assumption4Report lost = check_assumption4(astray, s.md, s.th0, s.cfg);
    CHECK_FALSE(lost.pass);
    CHECK(!lost.detail.empty());

    TerminalSet uncert = s.ts;
    TerminalPoint extra;
    extra.z = Vec::Constant(2, 0.1);
    extra.alpha = 0.1;
    uncert.points.push_back(extra);
    Assumption4Report miss = check_assumption4(uncert, s.md, s.th0, s.cfg);
    CHECK_FALSE(miss.pass);
    CHECK(!miss.detail.empty());
}

TEST_CASE("enlargement with no plans or an origin plan changes nothing visible") {
    Setup s = make_setup();
    TerminalSet same = enlarge_homothetic(s.ts, {}, s.th0);
    CHECK(same.count() == 2);

    HomotheticTube origin = solve_plan(s, s.ts, Vec::Zero(2));
    TerminalSet after = enlarge_homothetic(s.ts, {origin}, s.th0);
    CHECK(after.contains(Vec::Zero(2), 0.0).inside);
    CHECK(after.contains(Vec::Zero(2), 1.0).inside);
    CHECK_FALSE(after.contains(Vec::Zero(2), 1.05).inside);
    Vec off(2);
    off << 0.05, 0.0;
    CHECK_FALSE(after.contains(off, 0.0).inside);
    for (const auto& pt : after.points) CHECK(pt.has_certificate);
}

TEST_CASE("a plan away from the origin grows the terminal set") {
    Setup s = make_setup();
    Vec x(2);
    x << 1.2, 0.6;
    HomotheticTube plan = solve_plan(s, s.ts, x);

    CHECK_FALSE(s.ts.contains(plan.z[0], plan.alpha[0]).inside);
    TerminalSet grown = enlarge_homothetic(s.ts, {plan}, s.th0);
    CHECK(grown.contains(plan.z[0], plan.alpha[0]).inside);
    CHECK(grown.contains(Vec::Zero(2), 1.0).inside);  // old hull kept
    for (const auto& pt : grown.points) {
        CHECK(pt.has_certificate);
        if (pt.provenance == TerminalProvenance::Plan) CHECK(pt.plan_stage >= 0);
    }

    Assumption4Report rep = check_assumption4(grown, s.md, s.th0, s.cfg);
    CHECK(rep.pass);
    CHECK(rep.worst_margin >= -1e-6);

    // still invariant under any smaller parameter box
    Assumption4Report rep2 = check_assumption4(grown, s.md, param_interval(0.5, 0.7), s.cfg);
    CHECK(rep2.pass);
}

TEST_CASE("enlargement guards its preconditions") {
    Setup s = make_setup();
    HomotheticTube plan = solve_plan(s, s.ts, Vec::Zero(2));

    HomotheticTube nocert = plan;
    nocert.has_terminal_cert = false;
    CHECK_THROWS_AS(enlarge_homothetic(s.ts, {nocert}, s.th0), MissingCertificate);

    // plans certified under a smaller box must not enlarge a wider one
    CHECK_THROWS_AS(enlarge_homothetic(s.ts, {plan}, param_interval(-0.1, 1.3)),
                    DimensionMismatch);
}

TEST_CASE("vertex augmentation pins section corners at zero scaling") {
    Setup s = make_setup();
    Vec x(2);
    x << 1.2, 0.6;
    HomotheticTube plan = solve_plan(s, s.ts, x);
    TerminalSet grown = enlarge_homothetic(s.ts, {plan}, s.th0);

    TerminalSet aug = augment_vertices(grown, {plan}, s.cfg);
    const auto corners = hpoly_vertices(s.cfg.X0.set);
    REQUIRE(corners.size() >= 3);
    for (size_t l = 0; l < plan.z.size(); ++l) {
        for (const Vec& c : corners) {
            const Vec pt = plan.z[l] + plan.alpha[l] * c;
            CHECK(aug.contains(pt, 0.0).inside);
        }
    }
    // everything previously reachable stays reachable
    CHECK(aug.contains(plan.z[0], plan.alpha[0]).inside);
    CHECK(aug.contains(Vec::Zero(2), 1.0).inside);
    Assumption4Report rep = check_assumption4(aug, s.md, s.th0, s.cfg);
    CHECK(rep.pass);

    CHECK_THROWS_AS(augment_vertices(grown, {plan}, s.cfg, 1), DimensionCap);
}

TEST_CASE("union membership prefers cheap certificates before the oracle") {
    Setup s = make_setup();
    Vec x(2);
    x << 1.2, 0.6;
    HomotheticTube plan = solve_plan(s, s.ts, x);
    TerminalSet grown = enlarge_homothetic(s.ts, {plan}, s.th0);

    int oracle_calls = 0;
    SafeSetUnion u;
    u.terminal = &grown;
    u.X0 = &s.cfg.X0;
    u.initial_tubes.push_back({plan.z[0], plan.alpha[0]});
    u.feas_oracle = [&](const Vec&) {
        ++oracle_calls;
        return false;
    };

    CHECK(union_membership(u, Vec::Zero(2)));  // terminal branch
    CHECK(oracle_calls == 0);
    CHECK(union_membership(u, plan.z[0]));  // stored-tube branch
    CHECK(oracle_calls == 0);

    Vec far(2);
    far << -1.9, 1.9;
    CHECK_FALSE(union_membership(u, far));
    CHECK(oracle_calls == 1);

    u.feas_oracle = [](const Vec&) { return true; };
    CHECK(union_membership(u, far));

    u.feas_oracle = nullptr;
    CHECK_FALSE(union_membership(u, far));
}

TEST_CASE("enlargement unlocks short-horizon certificates") {
    Setup s = make_setup();
    Vec x(2);
    x << 1.2, 0.6;

    QpReport pre = build_and_solve(s.md, x, Vec::Zero(1), s.th0, s.ts, s.cfg, 1);
    REQUIRE(pre.status == QpStatus::Infeasible);

    HomotheticTube plan = solve_plan(s, s.ts, x);
    TerminalSet grown = enlarge_homothetic(s.ts, {plan}, s.th0);

    QpReport post = build_and_solve(s.md, x, Vec::Zero(1), s.th0, grown, s.cfg, 1);
    CHECK(post.status == QpStatus::Feasible);
}
