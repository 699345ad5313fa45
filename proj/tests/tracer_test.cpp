#include "polyflow/tracer.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace polyflow;

namespace {

double wrap01(double x)
{
    double r = x - std::floor(x);
    return r >= 1.0 ? 0.0 : r;
}

// Distance on the circle R/Z.
double circle_gap(double a, double b)
{
    double d = std::fabs(wrap01(a) - wrap01(b));
    return std::min(d, 1.0 - d);
}

Direction<double> sqrt23() { return parse_direction<double>("sqrt:2,sqrt:3,1", 3); }

}  // namespace

TEST(Trace, VerticalFlowOnTorusCrossesTwice)
{
    Manifold m = fixture("torus3");
    auto tr = trace(m, ManifoldPoint<double>{CellId{}, {0.5, 0.5, 0.5}}, parse_direction<double>("0,0,1", 3), 2.0);
    ASSERT_EQ(tr.events.size(), 2u);
    for (const auto& e : tr.events) {
        EXPECT_EQ(e.face.axis, Axis::Z);
        EXPECT_EQ(e.kind, EventKind::PairingTransport);
    }
    EXPECT_EQ(tr.terminated_by, Termination::TMax);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(tr.end.local[i], 0.5, 1e-15);
}

TEST(Trace, IrrationalFlowFromCornerOfTorus)
{
    Manifold m = fixture("torus3");
    auto tr = trace(m, ManifoldPoint<double>{CellId{}, {0, 0, 0}}, sqrt23(), 10.0);
    EXPECT_EQ(tr.terminated_by, Termination::TMax);
    EXPECT_LT(circle_gap(tr.end.local[0], 10 * std::sqrt(2.0)), 1e-12);
    EXPECT_LT(circle_gap(tr.end.local[1], 10 * std::sqrt(3.0)), 1e-12);
    EXPECT_LT(circle_gap(tr.end.local[2], 0.0), 1e-12);
}

TEST(Trace, ProjectionCommutesWithTorusFlow)
{
    Manifold m = fixture("figure2");
    Direction<double> d = sqrt23();
    ManifoldPoint<double> start{CellId{{1, 1, 0}}, {0.31, 0.77, 0.12}};
    auto tr = trace(m, start, d, 200.0);
    ASSERT_EQ(tr.terminated_by, Termination::TMax);
    for (int k = 0; k <= 1000; ++k) {
        double t = 0.2 * k;
        auto p = point_at(tr, t);
        for (int i = 0; i < 3; ++i) EXPECT_LT(circle_gap(project_mod1(p)[i], start.local[i] + t * d.v[i]), 1e-9) << "t=" << t;
    }
}

TEST(Trace, EventCountIsBoundedByCrossingRate)
{
    for (const char* name : {"torus3", "figure2", "u6", "gated2z"}) {
        SCOPED_TRACE(name);
        Manifold m = fixture(name);
        Direction<double> d = sqrt23();
        auto tr = trace(m, ManifoldPoint<double>{m.cells()[0], {0.2, 0.4, 0.6}}, d, 50.0);
        double bound = std::ceil(50.0 * (d.v[0] + d.v[1] + d.v[2])) + 3;
        EXPECT_LE(static_cast<double>(tr.events.size()), bound);
        for (std::size_t i = 1; i < tr.events.size(); ++i) EXPECT_LT(tr.events[i - 1].time, tr.events[i].time);
        for (std::size_t i = 1; i < tr.segments.size(); ++i) EXPECT_EQ(tr.segments[i - 1].t1, tr.segments[i].t0);
    }
}

TEST(Trace, BackFlowFromBarrierEdgeEndsThere)
{
    // Top edge of the wall between (0,0,0) and (1,0,0): x = 1, y = 1.
    Manifold m = fixture("figure2");
    Direction<double> d = sqrt23();
    ManifoldPoint<double> on_edge{CellId{}, {1.0, 1.0, 0.3}};
    auto back = trace(m, on_edge, d.negated(), 5.0);
    ASSERT_EQ(back.terminated_by, Termination::TMax);
    auto fwd = trace(m, back.end, d, 6.0);
    ASSERT_EQ(fwd.terminated_by, Termination::SingularHit);
    const auto& hit = fwd.events.back();
    EXPECT_NEAR(hit.time, 5.0, 1e-9);
    ASSERT_TRUE(hit.edge.has_value());
    EXPECT_EQ(hit.edge->kind, EdgeKind::CubeEdge);
    EXPECT_EQ(hit.edge->direction, Axis::Z);
    EXPECT_EQ(hit.edge->from[0], Rational(1));
    EXPECT_EQ(hit.edge->from[1], Rational(1));
}

TEST(Trace, ObliqueGateEdgeIsSingular)
{
    // Aim at the point (1/3, 1/3) of the edge x + 2y = 1 on the A/B face.
    Manifold m = fixture("gated2z");
    Direction<Rational> d = parse_direction<Rational>("1/4,1/8,1", 3);
    ManifoldPoint<Rational> start{CellId{}, {Rational(1, 3) - Rational(1, 8), Rational(1, 3) - Rational(1, 16), Rational(1, 2)}};
    auto tr = trace(m, start, d, Rational(2));
    ASSERT_EQ(tr.terminated_by, Termination::SingularHit);
    EXPECT_EQ(tr.events.back().time, Rational(1, 2));
    ASSERT_TRUE(tr.events.back().edge.has_value());
    EXPECT_EQ(tr.events.back().edge->kind, EdgeKind::FaceEdge);
    EXPECT_EQ(tr.events.back().edge->c2, Rational(2));
}

TEST(Trace, GatePassesAndBarrierTurnsBack)
{
    Manifold m = fixture("gated2z");
    Direction<Rational> up = parse_direction<Rational>("0,0,1", 3);
    // Inside T1: goes to B.
    auto a = trace(m, ManifoldPoint<Rational>{CellId{}, {Rational(1, 10), Rational(1, 10), Rational(1, 2)}}, up, Rational(1));
    ASSERT_EQ(a.events.size(), 1u);
    EXPECT_EQ(a.events[0].kind, EventKind::GateCrossing);
    EXPECT_EQ(a.end.cell, (CellId{{0, 0, 1}}));
    // Inside T2: returns to A.
    auto b = trace(m, ManifoldPoint<Rational>{CellId{}, {Rational(9, 10), Rational(9, 10), Rational(1, 2)}}, up, Rational(1));
    ASSERT_EQ(b.events.size(), 1u);
    EXPECT_EQ(b.events[0].kind, EventKind::PairingTransport);
    EXPECT_EQ(b.end.cell, CellId{});
}

TEST(Trace, ZeroComponentInsideFaceIsRejected)
{
    Manifold m = fixture("torus3");
    try {
        trace(m, ManifoldPoint<double>{CellId{}, {0.0, 0.5, 0.5}}, parse_direction<double>("0,1/2,1", 3), 1.0);
        FAIL();
    } catch (const TraceError& e) {
        EXPECT_EQ(e.kind(), TraceErrorKind::InvalidStart);
    }
}

TEST(Trace, RationalAndFloatAgree)
{
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> num(1, 97);
    const char* names[] = {"torus3", "figure2", "u6", "gated2z", "stack2"};
    int compared = 0;
    for (int k = 0; k < 100; ++k) {
        Manifold m = fixture(names[k % 5]);
        Rational a1(num(rng), 101), a2(num(rng), 103);
        Vec3<Rational> s{Rational(num(rng), 107), Rational(num(rng), 109), Rational(num(rng), 113)};
        Direction<Rational> dq = make_direction<Rational>({QuadSurd(a1), QuadSurd(a2), QuadSurd(1)});
        Direction<double> df = make_direction<double>({QuadSurd(a1), QuadSurd(a2), QuadSurd(1)});
        const CellId c = m.cells()[k % m.size()];
        auto tq = trace(m, ManifoldPoint<Rational>{c, s}, dq, Rational(12));
        auto tf = trace(m, ManifoldPoint<double>{c, {to_double(s[0]), to_double(s[1]), to_double(s[2])}}, df, 12.0);
        ASSERT_EQ(tq.events.size(), tf.events.size());
        ASSERT_EQ(tq.terminated_by, tf.terminated_by);
        for (std::size_t i = 0; i < tq.events.size(); ++i) {
            EXPECT_NEAR(to_double(tq.events[i].time), tf.events[i].time, 1e-9);
            EXPECT_EQ(tq.events[i].face, tf.events[i].face);
        }
        ++compared;
    }
    EXPECT_EQ(compared, 100);
}

TEST(Reverse, TorusRoundTripIsExact)
{
    Manifold m = fixture("torus3");
    Direction<Rational> d = parse_direction<Rational>("7/5,3/11,1", 3);
    // Chosen so that no two coordinates are ever integers at the same time.
    ManifoldPoint<Rational> s{CellId{}, {Rational(1, 3), Rational(1, 5), Rational(5, 9)}};
    auto tr = trace(m, s, d, Rational(37, 3));
    auto back = reverse(m, tr);
    EXPECT_EQ(back.end.cell, s.cell);
    EXPECT_EQ(back.end.local, s.local);
}

TEST(Reverse, WalledBlockRoundTripWithinTolerance)
{
    Manifold m = fixture("figure2");
    auto tr = trace(m, ManifoldPoint<double>{CellId{{0, 1, 0}}, {0.4, 0.3, 0.8}}, sqrt23(), 13.0);
    ASSERT_GE(tr.events.size(), 50u);
    auto back = reverse(m, tr);
    EXPECT_EQ(back.end.cell, tr.start.cell);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(back.end.local[i], tr.start.local[i], 1e-9);
}

TEST(Reverse, SingularTraceIsNotReversible)
{
    Manifold m = fixture("figure2");
    auto tr = trace(m, ManifoldPoint<double>{CellId{}, {0.5, 0.5, 0.5}}, parse_direction<double>("1,1,1", 3), 3.0);
    ASSERT_EQ(tr.terminated_by, Termination::SingularHit);
    try {
        reverse(m, tr);
        FAIL();
    } catch (const TraceError& e) {
        EXPECT_EQ(e.kind(), TraceErrorKind::NotReversible);
    }
}

TEST(Trace, IdenticalInputsGiveIdenticalTraces)
{
    Manifold m = fixture("u6");
    auto a = trace(m, ManifoldPoint<double>{CellId{{2, 1, 0}}, {0.1, 0.2, 0.3}}, sqrt23(), 40.0);
    auto b = trace(m, ManifoldPoint<double>{CellId{{2, 1, 0}}, {0.1, 0.2, 0.3}}, sqrt23(), 40.0);
    ASSERT_EQ(a.segments.size(), b.segments.size());
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
        EXPECT_EQ(a.segments[i].t0, b.segments[i].t0);
        EXPECT_EQ(a.segments[i].to, b.segments[i].to);
        EXPECT_EQ(a.segments[i].cell, b.segments[i].cell);
    }
}

TEST(ProjectMod1, ForgetsTheCell)
{
    ManifoldPoint<double> a{CellId{{2, 1, 0}}, {0.25, 0.5, 0.75}};
    ManifoldPoint<double> b{CellId{{0, 0, 0}}, {0.25, 0.5, 0.75}};
    EXPECT_EQ(project_mod1(a), (Vec3<double>{0.25, 0.5, 0.75}));
    EXPECT_EQ(project_mod1(a), project_mod1(b));
}

TEST(Surface, DiagonalThroughRegularCornersOfTorus)
{
    Manifold m = fixture("torus2");
    auto tr = trace(m, ManifoldPoint<Rational>{CellId{}, {Rational(0), Rational(0), Rational(0)}}, parse_direction<Rational>("1", 2), Rational(3));
    EXPECT_EQ(tr.terminated_by, Termination::TMax);
    // Each pass through the corner is one merged event.
    ASSERT_EQ(tr.events.size(), 2u);
    EXPECT_EQ(tr.events[0].time, Rational(1));
    EXPECT_EQ(tr.events[1].time, Rational(2));
    EXPECT_EQ(tr.end.local[0], Rational(1));
    EXPECT_EQ(tr.end.local[1], Rational(1));
}

TEST(Surface, ConePointStartIsSingular)
{
    Manifold m = fixture("figure2_base");
    auto tr = trace(m, ManifoldPoint<double>{CellId{{0, 1, 0}}, {0.0, 0.0, 0.0}}, parse_direction<double>("sqrt:2", 2), 3.0);
    EXPECT_EQ(tr.terminated_by, Termination::SingularHit);
    EXPECT_EQ(tr.events.back().time, 0.0);
    EXPECT_TRUE(tr.events.back().vertex.has_value());
}

TEST(Surface, RegularBreakpointIsTransparent)
{
    // The +X side of a torus split at y = 1/2 into two rectangles that both
    // glue straight across: same surface as the plain torus.
    Manifold split = from_json(R"({
      "dim": 2, "cells": [[0,0,0]], "wraparound": true,
      "gated_faces": [{"face": {"cell":[0,0,0],"axis":"X","side":"+"},
        "red": [{"polygon": [[0,0],["1/2",0],["1/2",1],[0,1]],
                 "target_face": {"cell":[0,0,0],"axis":"X","side":"-"},
                 "target_polygon": [[0,0],["1/2",0],["1/2",1],[0,1]]},
                {"polygon": [["1/2",0],[1,0],[1,1],["1/2",1]],
                 "target_face": {"cell":[0,0,0],"axis":"X","side":"-"},
                 "target_polygon": [["1/2",0],[1,0],[1,1],["1/2",1]]}]}]})");
    ASSERT_EQ(split.vertices().size(), 2u);
    for (const auto& v : split.vertices()) EXPECT_FALSE(v.singular);
    Manifold plain = fixture("torus2");
    Direction<Rational> d = parse_direction<Rational>("1/3", 2);
    // Passes through (1, 1/2) at t = 1/2.
    ManifoldPoint<Rational> s{CellId{}, {Rational(1, 2), Rational(1, 3), Rational(0)}};
    auto a = trace(split, s, d, Rational(7));
    auto b = trace(plain, s, d, Rational(7));
    EXPECT_EQ(a.terminated_by, Termination::TMax);
    EXPECT_EQ(a.end.local, b.end.local);
    EXPECT_EQ(a.events.size(), b.events.size());
}
