#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace polyflow;

namespace {

const char* kHalfGate = R"({
  "dim": 3,
  "cells": [[0,0,0],[1,0,0]],
  "wraparound": true,
  "gated_faces": [
    {"face": {"cell":[0,0,0],"axis":"X","side":"+"},
     "green": [[[0,0],["1/2",0],["1/2",1],[0,1]]],
     "red": [{"polygon": [["1/2",0],[1,0],[1,1],["1/2",1]],
              "target_face": {"cell":[0,0,0],"axis":"X","side":"-"},
              "target_polygon": [["1/2",0],[1,0],[1,1],["1/2",1]]}]},
    {"face": {"cell":[1,0,0],"axis":"X","side":"-"},
     "red": [{"polygon": [["1/2",0],[1,0],[1,1],["1/2",1]],
              "target_face": {"cell":[1,0,0],"axis":"X","side":"+"},
              "target_polygon": [["1/2",0],[1,0],[1,1],["1/2",1]]}]},
    {"face": {"cell":[1,0,0],"axis":"X","side":"+"},
     "red": [{"polygon": [[0,0],["1/2",0],["1/2",1],[0,1]],
              "target_face": {"cell":[0,0,0],"axis":"X","side":"-"},
              "target_polygon": [[0,0],["1/2",0],["1/2",1],[0,1]]}]}
  ]
})";

// X faces split along v = 1/4 in one cube and v = 1/2 in the other by
// self-pairings that are otherwise the identity.
const char* kTwoLines = R"({
  "dim": 3,
  "cells": [[0,0,0],[0,1,0]],
  "wraparound": true,
  "gated_faces": [
    {"face": {"cell":[0,0,0],"axis":"X","side":"+"},
     "red": [{"polygon": [[0,0],[1,0],[1,"1/4"],[0,"1/4"]],
              "target_face": {"cell":[0,0,0],"axis":"X","side":"-"},
              "target_polygon": [[0,0],[1,0],[1,"1/4"],[0,"1/4"]]},
             {"polygon": [[0,"1/4"],[1,"1/4"],[1,1],[0,1]],
              "target_face": {"cell":[0,0,0],"axis":"X","side":"-"},
              "target_polygon": [[0,"1/4"],[1,"1/4"],[1,1],[0,1]]}]},
    {"face": {"cell":[0,1,0],"axis":"X","side":"+"},
     "red": [{"polygon": [[0,0],[1,0],[1,"1/2"],[0,"1/2"]],
              "target_face": {"cell":[0,1,0],"axis":"X","side":"-"},
              "target_polygon": [[0,0],[1,0],[1,"1/2"],[0,"1/2"]]},
             {"polygon": [[0,"1/2"],[1,"1/2"],[1,1],[0,1]],
              "target_face": {"cell":[0,1,0],"axis":"X","side":"-"},
              "target_polygon": [[0,"1/2"],[1,"1/2"],[1,1],[0,1]]}]}
  ]
})";

std::size_t count_pairings(const Manifold& m) { return m.pairings().size(); }

std::vector<SplittingEdge> face_edges(const Manifold& m)
{
    std::vector<SplittingEdge> out;
    for (const auto& e : m.splitting_edges())
        if (e.kind == EdgeKind::FaceEdge) out.push_back(e);
    return out;
}

}  // namespace

TEST(Build, TorusHasOneCellAndThreePairings)
{
    Manifold m = fixture("torus3");
    EXPECT_EQ(m.size(), 1u);
    EXPECT_EQ(count_pairings(m), 3u);
    EXPECT_EQ(m.volume(), Rational(1));
    // 12 cube edges, every one of them on the torus lattice.
    EXPECT_EQ(m.splitting_edges().size(), 12u);
    EXPECT_TRUE(face_edges(m).empty());
}

TEST(Build, ShippedFixturesAreValid)
{
    for (const char* name : {"torus2", "torus3", "stack2", "figure2", "figure2_base", "u6", "gated2z"}) {
        SCOPED_TRACE(name);
        Manifold m = fixture(name);
        EXPECT_EQ(m.volume(), Rational(static_cast<long long>(m.size())));
    }
    EXPECT_EQ(fixture("figure2").size(), 4u);
    EXPECT_EQ(fixture("u6").size(), 6u);
}

TEST(Build, NonAdjacentCellsAreDisconnected)
{
    auto e = build_error(R"({
      "dim": 3,
      "cells": [[0,0,0],[2,0,0]],
      "pairings": [
        {"a": {"cell":[0,0,0],"axis":"X","side":"+"}, "b": {"cell":[0,0,0],"axis":"X","side":"-"}},
        {"a": {"cell":[0,0,0],"axis":"Y","side":"+"}, "b": {"cell":[0,0,0],"axis":"Y","side":"-"}},
        {"a": {"cell":[0,0,0],"axis":"Z","side":"+"}, "b": {"cell":[0,0,0],"axis":"Z","side":"-"}},
        {"a": {"cell":[2,0,0],"axis":"X","side":"+"}, "b": {"cell":[2,0,0],"axis":"X","side":"-"}},
        {"a": {"cell":[2,0,0],"axis":"Y","side":"+"}, "b": {"cell":[2,0,0],"axis":"Y","side":"-"}},
        {"a": {"cell":[2,0,0],"axis":"Z","side":"+"}, "b": {"cell":[2,0,0],"axis":"Z","side":"-"}}
      ]
    })");
    EXPECT_EQ(e.kind(), GeometryErrorKind::DisconnectedRegion);
    EXPECT_EQ(e.line(), 3);
}

TEST(Build, DuplicateCellOverlaps)
{
    auto e = build_error(R"({"dim": 3, "cells": [[0,0,0],
      [0,0,0]], "wraparound": true})");
    EXPECT_EQ(e.kind(), GeometryErrorKind::OverlappingCells);
    EXPECT_EQ(e.line(), 2);
}

TEST(Build, MissingPairingIsReportedWithFace)
{
    auto e = build_error(R"({
      "dim": 3,
      "cells": [[0,0,0]],
      "pairings": [
        {"a": {"cell":[0,0,0],"axis":"Y","side":"+"}, "b": {"cell":[0,0,0],"axis":"Y","side":"-"}},
        {"a": {"cell":[0,0,0],"axis":"Z","side":"+"}, "b": {"cell":[0,0,0],"axis":"Z","side":"-"}}
      ]
    })");
    EXPECT_EQ(e.kind(), GeometryErrorKind::UnpairedBoundaryFace);
    EXPECT_NE(std::string(e.what()).find("UnpairedBoundaryFace cell=(0,0,0) +X"), std::string::npos) << e.what();
    EXPECT_EQ(e.line(), 3);
}

TEST(Build, GateWithoutTheRestOfTheFaceLeavesAGap)
{
    auto e = build_error(R"({
      "dim": 3,
      "cells": [[0,0,0],[1,0,0]],
      "wraparound": true,
      "gated_faces": [{"face": {"cell":[0,0,0],"axis":"X","side":"+"},
                       "green": [[[0,0],["1/2",0],["1/2",1],[0,1]]]}]
    })");
    EXPECT_EQ(e.kind(), GeometryErrorKind::PolygonTilingGap);
}

TEST(Build, OverlappingPolygonsLeaveAGap)
{
    auto e = build_error(R"({
      "dim": 3,
      "cells": [[0,0,0],[1,0,0]],
      "wraparound": true,
      "gated_faces": [{"face": {"cell":[0,0,0],"axis":"X","side":"+"},
                       "green": [[[0,0],["3/4",0],["3/4",1],[0,1]], [["1/2",0],[1,0],[1,1],["1/2",1]]]}]
    })");
    EXPECT_EQ(e.kind(), GeometryErrorKind::PolygonTilingGap);
}

TEST(Build, RedTargetMustBeATranslate)
{
    auto e = build_error(R"({
      "dim": 3,
      "cells": [[0,0,0]],
      "wraparound": true,
      "gated_faces": [{"face": {"cell":[0,0,0],"axis":"X","side":"+"},
                       "red": [{"polygon": [[0,0],[1,0],[1,1],[0,1]],
                                "target_face": {"cell":[0,0,0],"axis":"X","side":"-"},
                                "target_polygon": [[0,0],[1,0],[0,1]]}]}]
    })");
    EXPECT_EQ(e.kind(), GeometryErrorKind::IncongruentRedPairing);
    EXPECT_EQ(e.line(), 8);
}

TEST(Build, RedTargetMustFaceTheOtherWay)
{
    auto e = build_error(R"({
      "dim": 3,
      "cells": [[0,0,0]],
      "wraparound": true,
      "gated_faces": [{"face": {"cell":[0,0,0],"axis":"X","side":"+"},
                       "red": [{"polygon": [[0,0],[1,0],[1,1],[0,1]],
                                "target_face": {"cell":[0,0,0],"axis":"X","side":"+"},
                                "target_polygon": [[0,0],[1,0],[1,1],[0,1]]}]}]
    })");
    EXPECT_EQ(e.kind(), GeometryErrorKind::IncongruentRedPairing);
}

TEST(Build, RejectsUnknownFieldsWithLine)
{
    auto e = build_error("{\n\"dim\": 3,\n\"cells\": [[0,0,0]],\n\"wrap\": true\n}");
    EXPECT_EQ(e.kind(), GeometryErrorKind::InvalidDescription);
    EXPECT_EQ(e.line(), 4);
}

TEST(Build, MalformedJsonReportsLine)
{
    auto e = build_error("{\n\"dim\": 3,\n\"cells\": [[0,0,0]\n}");
    EXPECT_EQ(e.kind(), GeometryErrorKind::InvalidDescription);
    EXPECT_EQ(e.line(), 4);
}

TEST(Build, SurfaceGatesMustBeRectangles)
{
    auto e = build_error(R"({
      "dim": 2,
      "cells": [[0,0,0],[1,0,0]],
      "wraparound": true,
      "gated_faces": [{"face": {"cell":[0,0,0],"axis":"X","side":"+"},
                       "green": [[[0,0],[1,0],[0,1]]]}]
    })");
    EXPECT_EQ(e.kind(), GeometryErrorKind::InvalidDescription);
}

TEST(Census, EveryFaceIsClassifiedOnce)
{
    for (const char* name : {"torus3", "stack2", "figure2", "u6", "gated2z"}) {
        SCOPED_TRACE(name);
        Manifold m = fixture(name);
        std::size_t interior = 0, gated = 0, paired = 0;
        for (const auto& f : m.all_faces()) {
            switch (m.face_class(f)) {
            case FaceClass::Interior: ++interior; break;
            case FaceClass::Gated: ++gated; break;
            case FaceClass::Paired: ++paired; break;
            }
        }
        EXPECT_EQ(interior + gated + paired, 6 * m.size());
        EXPECT_EQ(paired, 2 * m.pairings().size());
    }
    Manifold g = fixture("gated2z");
    std::size_t gated = 0;
    for (const auto& f : g.all_faces()) gated += g.face_class(f) == FaceClass::Gated;
    EXPECT_EQ(gated, 4u);
}

TEST(Transport, TorusWrapsX)
{
    Manifold m = fixture("torus3");
    ManifoldPoint<double> p{CellId{}, {1.0, 0.3, 0.7}};
    auto q = m.transport(p, FaceRef{CellId{}, Axis::X, Side::Plus});
    EXPECT_EQ(q.cell, CellId{});
    EXPECT_DOUBLE_EQ(q.local[0], 0.0);
    EXPECT_DOUBLE_EQ(q.local[1], 0.3);
    EXPECT_DOUBLE_EQ(q.local[2], 0.7);
}

TEST(Transport, GreenHalfPassesRedHalfReturns)
{
    Manifold m = from_json(kHalfGate);
    FaceRef face{CellId{}, Axis::X, Side::Plus};
    auto through = m.transport(ManifoldPoint<double>{CellId{}, {1.0, 0.2, 0.5}}, face);
    EXPECT_EQ(through.cell, (CellId{{1, 0, 0}}));
    EXPECT_DOUBLE_EQ(through.local[0], 0.0);
    EXPECT_DOUBLE_EQ(through.local[1], 0.2);
    auto back = m.transport(ManifoldPoint<double>{CellId{}, {1.0, 0.7, 0.5}}, face);
    EXPECT_EQ(back.cell, CellId{});
    EXPECT_DOUBLE_EQ(back.local[0], 0.0);
    EXPECT_DOUBLE_EQ(back.local[1], 0.7);
}

TEST(Transport, OnPolygonBoundaryIsSingular)
{
    Manifold m = from_json(kHalfGate);
    FaceRef face{CellId{}, Axis::X, Side::Plus};
    try {
        m.transport(ManifoldPoint<double>{CellId{}, {1.0, 0.5, 0.5}}, face);
        FAIL() << "expected OnSplittingEdge";
    } catch (const GeometryError& e) {
        EXPECT_EQ(e.kind(), GeometryErrorKind::OnSplittingEdge);
    }
    EXPECT_THROW(m.transport(ManifoldPoint<Rational>{CellId{}, {Rational(1), Rational(1, 2), Rational(1, 3)}}, face), GeometryError);
}

TEST(Transport, RoundTripIsIdentity)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (const char* name : {"torus3", "figure2", "u6", "gated2z"}) {
        SCOPED_TRACE(name);
        Manifold m = fixture(name);
        for (const auto& f : m.all_faces()) {
            for (int k = 0; k < 20; ++k) {
                ManifoldPoint<double> p{f.cell, {u(rng), u(rng), u(rng)}};
                p.local[index(f.axis)] = f.side == Side::Plus ? 1.0 : 0.0;
                ManifoldPoint<double> q;
                try {
                    q = m.transport(p, f);
                } catch (const GeometryError&) {
                    continue;
                }
                FaceRef partner{q.cell, f.axis, opposite(f.side)};
                auto r = m.transport(q, partner);
                EXPECT_EQ(r.cell, p.cell);
                for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.local[i], p.local[i], 1e-12);
            }
        }
    }
    // Exact in rational mode.
    Manifold g = fixture("gated2z");
    FaceRef top{CellId{}, Axis::Z, Side::Plus};
    ManifoldPoint<Rational> p{CellId{}, {Rational(1, 5), Rational(1, 7), Rational(1)}};
    auto q = g.transport(p, top);
    EXPECT_EQ(q.cell, (CellId{{0, 0, 1}}));
    auto r = g.transport(q, FaceRef{q.cell, Axis::Z, Side::Minus});
    EXPECT_EQ(r.cell, p.cell);
    EXPECT_EQ(r.local, p.local);
}

TEST(Splitting, LinesFromTwoFacesAreStampedOnBoth)
{
    Manifold m = from_json(kTwoLines);
    const auto& gamma = m.face_edge_set(Axis::X);
    ASSERT_EQ(gamma.size(), 2u);
    auto edges = face_edges(m);
    // Each of the two Plus X faces carries both lines.
    ASSERT_EQ(edges.size(), 4u);
    for (const auto& c : m.cells()) {
        std::set<Rational> heights;
        for (const auto& e : edges)
            if (e.face->cell == c) {
                EXPECT_EQ(e.direction, Axis::Y);
                heights.insert(e.from[2]);
                EXPECT_EQ(e.c1, Rational(0));
                // Integer form of v = h: (0, 1/h, 1) for h = 1/4, 1/2.
                EXPECT_EQ(e.c3, Rational(1));
                EXPECT_EQ(e.c2 * e.from[2], e.c3);
            }
        EXPECT_EQ(heights, (std::set<Rational>{Rational(1, 4), Rational(1, 2)}));
    }
}

TEST(Splitting, HarmonizeIsIdempotent)
{
    for (const char* name : {"torus3", "figure2", "gated2z"}) {
        SCOPED_TRACE(name);
        Manifold m = fixture(name);
        Manifold once = harmonize_splitting_edges(m);
        Manifold twice = harmonize_splitting_edges(once);
        ASSERT_EQ(once.splitting_edges().size(), twice.splitting_edges().size());
        for (std::size_t i = 0; i < once.splitting_edges().size(); ++i) {
            EXPECT_EQ(once.splitting_edges()[i].from, twice.splitting_edges()[i].from);
            EXPECT_EQ(once.splitting_edges()[i].to, twice.splitting_edges()[i].to);
        }
        EXPECT_EQ(once.splitting_edges().size(), m.splitting_edges().size());
    }
}

TEST(Splitting, WholeFaceBarriersAddNoFaceEdges)
{
    // Barriers cover entire faces, so the union of their interior boundaries is empty.
    Manifold m = fixture("figure2");
    for (int a = 0; a < 3; ++a) EXPECT_TRUE(m.face_edge_set(axis_from(a)).empty());
    // 2x2x1 block: 9 vertical, 12 x-direction and 12 y-direction lattice edges.
    EXPECT_EQ(m.splitting_edges().size(), 33u);
}

TEST(Splitting, ObliqueGateEdgeCoefficients)
{
    Manifold m = fixture("gated2z");
    auto edges = face_edges(m);
    ASSERT_EQ(edges.size(), 2u);  // stamped on A+Z and B+Z
    for (const auto& e : edges) {
        EXPECT_FALSE(e.direction.has_value());
        EXPECT_EQ(e.c1, Rational(1));
        EXPECT_EQ(e.c2, Rational(2));
        EXPECT_EQ(e.c3, Rational(1));
    }
}

TEST(Vertices, TorusHasOneRegularVertex)
{
    Manifold m = fixture("torus2");
    ASSERT_EQ(m.vertices().size(), 1u);
    EXPECT_EQ(m.vertices()[0].angle_quarters, 4);
    EXPECT_FALSE(m.vertices()[0].singular);
}

TEST(Vertices, WalledBlockHasTwoConePoints)
{
    // Two vertex classes (y = 1 line and y = 0 line); Euler characteristic -2
    // puts 4*pi at each.
    Manifold m = fixture("figure2_base");
    ASSERT_EQ(m.vertices().size(), 2u);
    for (const auto& v : m.vertices()) {
        EXPECT_EQ(v.angle_quarters, 8);
        EXPECT_TRUE(v.singular);
    }
    EXPECT_NE(m.vertex_at(CellId{}, {Rational(0), Rational(1)}), m.vertex_at(CellId{}, {Rational(0), Rational(0)}));
}
