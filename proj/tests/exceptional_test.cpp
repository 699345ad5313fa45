#include "polyflow/exceptional.hpp"
#include "polyflow/kronecker.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace polyflow;

TEST(Exceptional, AxisEdgeGivesVerticalLine)
{
    auto l = exceptional_line(Rational(1), Rational(0), 1, 1, 0);
    EXPECT_EQ(l.a, 1);
    EXPECT_EQ(l.b, 0);
    EXPECT_EQ(l.c, 1);
    EXPECT_TRUE(l.contains(Rational(1), Rational(7, 3)));
    EXPECT_FALSE(l.contains(Rational(2), Rational(0)));
}

TEST(Exceptional, DiagonalEdge)
{
    auto l = exceptional_line(Rational(1), Rational(1), 2, 1, 1);
    EXPECT_EQ(l.a, 2);
    EXPECT_EQ(l.b, 2);
    EXPECT_EQ(l.c, 2);
    EXPECT_TRUE(l.contains(parse_surd("sqrt:2"), parse_surd("1-sqrt:2")));
}

TEST(Exceptional, Errors)
{
    EXPECT_THROW(exceptional_lines(Rational(0), Rational(0), 3), DegenerateEdge);
    EXPECT_THROW(exceptional_line(Rational(1), Rational(2), 0, 1, 1), std::invalid_argument);
}

TEST(Exceptional, FamilySize)
{
    auto ls = exceptional_lines(Rational(1), Rational(2), 2);
    EXPECT_EQ(ls.size(), 4u * 5u * 5u);
    for (const auto& l : ls) {
        EXPECT_NE(l.dm, 0);
        EXPECT_FALSE(l.a == 0 && l.b == 0);
    }
}

TEST(Exceptional, FromFixtureEdge)
{
    Manifold m = fixture("gated2z");
    int checked = 0;
    for (const auto& e : m.splitting_edges()) {
        if (e.kind != EdgeKind::FaceEdge) continue;
        auto ls = exceptional_lines(e, 1);
        ASSERT_FALSE(ls.empty());
        EXPECT_EQ(ls.front().c1, e.c1);
        ++checked;
    }
    EXPECT_GT(checked, 0);
    for (const auto& e : m.splitting_edges())
        if (e.kind == EdgeKind::CubeEdge) EXPECT_THROW(exceptional_lines(e, 1), std::invalid_argument);
}

// Points on lines with rational data always carry the line's own relation,
// so the exact test must find a witness no higher than the line's.
TEST(Exceptional, SampledPointsAreNotKronecker)
{
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> small(-9, 9), den(1, 9);
    const long long squarefree[] = {2, 3, 5, 7};
    for (const auto& l : exceptional_lines(Rational(1), Rational(2), 2)) {
        for (int k = 0; k < 20; ++k) {
            QuadSurd s = QuadSurd(Rational(small(rng), den(rng))) + QuadSurd(Rational(small(rng), den(rng))) * QuadSurd::sqrt_of(squarefree[k % 4]);
            auto [x, y] = l.point(s);
            ASSERT_TRUE(l.contains(x, y));
            KroneckerVerdict v = kronecker_test(x, y, 1000);
            ASSERT_TRUE(v.relation) << l.str() << " at " << x.str() << ", " << y.str();
            auto [a, b, c] = v.witness;
            EXPECT_TRUE(QuadSurd(a) * x + QuadSurd(b) * y + QuadSurd(c) == QuadSurd());
        }
    }
}
