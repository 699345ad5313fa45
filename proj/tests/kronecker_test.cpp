#include "polyflow/kronecker.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace polyflow;

namespace {

// Independent check: substitute the witness.
bool satisfies(const KroneckerVerdict& v, const QuadSurd& x, const QuadSurd& y)
{
    return (QuadSurd(Rational(v.witness[0])) * x + QuadSurd(Rational(v.witness[1])) * y + QuadSurd(Rational(v.witness[2]))).is_zero();
}

bool satisfies(const KroneckerVerdict& v, double x, double y)
{
    long double r = v.witness[0] * static_cast<long double>(x) + v.witness[1] * static_cast<long double>(y) + v.witness[2];
    return std::fabs(static_cast<double>(r)) <= 1e-9 * static_cast<double>(v.height());
}

}  // namespace

TEST(Surd, ParsesSymbolicForms)
{
    EXPECT_EQ(parse_surd("sqrt:2"), QuadSurd::sqrt_of(2));
    EXPECT_EQ(parse_surd("1-sqrt:2"), QuadSurd(1) - QuadSurd::sqrt_of(2));
    EXPECT_EQ(parse_surd("2*sqrt:3"), QuadSurd(2) * QuadSurd::sqrt_of(3));
    EXPECT_EQ(parse_surd("sqrt:8"), QuadSurd(2) * QuadSurd::sqrt_of(2));
    EXPECT_EQ(parse_surd("1/2+1/2*sqrt:5"), parse_surd("phi"));
    EXPECT_EQ(parse_surd("-3/4"), QuadSurd(Rational(-3, 4)));
    EXPECT_EQ(parse_surd("1e-3"), QuadSurd(Rational(1, 1000)));
    EXPECT_NEAR(parse_surd("phi").to_double(), (1 + std::sqrt(5.0)) / 2, 1e-15);
    EXPECT_EQ(QuadSurd::sqrt_of(2) * QuadSurd::sqrt_of(3), QuadSurd::sqrt_of(6));
    EXPECT_EQ(QuadSurd::sqrt_of(2) * QuadSurd::sqrt_of(2), QuadSurd(2));
    EXPECT_THROW(parse_surd("sqrt:x"), std::invalid_argument);
    EXPECT_THROW(parse_surd(""), std::invalid_argument);
}

TEST(Surd, DirectionShorthands)
{
    auto d3 = parse_direction<double>("sqrt:2,sqrt:3", 3);
    EXPECT_EQ(d3.dim, 3);
    EXPECT_DOUBLE_EQ(d3.v[2], 1.0);
    auto d2 = parse_direction<Rational>("1/3", 2);
    EXPECT_EQ(d2.v[0], Rational(1));
    EXPECT_EQ(d2.v[1], Rational(1, 3));
    EXPECT_THROW(parse_direction<Rational>("sqrt:2", 2), std::invalid_argument);
    EXPECT_THROW(parse_direction<double>("1,2,3,4", 3), std::invalid_argument);
}

TEST(Kronecker, HalfAndThirdHaveASmallRelation)
{
    auto v = kronecker_test(Rational(1, 2), Rational(1, 3), 10);
    ASSERT_TRUE(v.relation);
    EXPECT_TRUE(satisfies(v, QuadSurd(Rational(1, 2)), QuadSurd(Rational(1, 3))));
    // (2, 3, -2) works; the smallest height is 2, e.g. (2, 0, -1).
    EXPECT_EQ(v.height(), 2);
    auto f = kronecker_test(0.5, 1.0 / 3.0, 10);
    ASSERT_TRUE(f.relation);
    EXPECT_EQ(f.height(), 2);
    EXPECT_TRUE(satisfies(f, 0.5, 1.0 / 3.0));
}

TEST(Kronecker, ForcedSumRelation)
{
    auto v = kronecker_test(parse_surd("sqrt:2"), parse_surd("1-sqrt:2"), 10);
    ASSERT_TRUE(v.relation);
    EXPECT_EQ(v.witness, (std::array<long long, 3>{1, 1, -1}));
    auto f = kronecker_test(std::sqrt(2.0), 1 - std::sqrt(2.0), 10);
    ASSERT_TRUE(f.relation);
    EXPECT_EQ(f.witness, (std::array<long long, 3>{1, 1, -1}));
}

TEST(Kronecker, Sqrt2Sqrt3AreIndependent)
{
    auto v = kronecker_test(parse_surd("sqrt:2"), parse_surd("sqrt:3"), 10000);
    EXPECT_FALSE(v.relation);
    EXPECT_TRUE(v.proven);
    EXPECT_EQ(v.bound, 10000);
    auto f = kronecker_test(std::sqrt(2.0), std::sqrt(3.0), 10000);
    EXPECT_FALSE(f.relation);
    EXPECT_EQ(f.bound, 10000);
}

TEST(Kronecker, FloatCertificateIsCappedByPrecision)
{
    auto f = kronecker_test(std::sqrt(2.0), std::sqrt(3.0), 1000000);
    EXPECT_FALSE(f.relation);
    EXPECT_LE(f.bound, kFloatHeightCap);
    EXPECT_GT(f.bound, kExhaustiveHeight);
}

TEST(Kronecker, FloatLatticeRouteFindsLargeRelation)
{
    // 1234*x + 2345*y = 3001 with x = sqrt(2): a relation beyond the exhaustive range.
    double x = std::sqrt(2.0);
    double y = (3001.0 - 1234.0 * x) / 2345.0;
    auto f = kronecker_test(x, y, 5000);
    ASSERT_TRUE(f.relation);
    EXPECT_TRUE(satisfies(f, x, y));
    EXPECT_EQ(f.witness, (std::array<long long, 3>{1234, 2345, -3001}));
}

TEST(Kronecker, ExactHeightAboveBoundIsNoRelation)
{
    auto v = kronecker_test(parse_surd("sqrt:2"), parse_surd("1/50*sqrt:2"), 10);
    EXPECT_FALSE(v.relation);
    EXPECT_FALSE(v.proven);
    auto w = kronecker_test(parse_surd("sqrt:2"), parse_surd("1/50*sqrt:2"), 100);
    ASSERT_TRUE(w.relation);
    EXPECT_EQ(w.witness, (std::array<long long, 3>{1, -50, 0}));
}

TEST(Kronecker, DirectionDispatch)
{
    EXPECT_FALSE(kronecker_test(parse_direction<double>("sqrt:2,sqrt:3,1", 3), 100).relation);
    EXPECT_TRUE(kronecker_test(parse_direction<double>("1/2,1/3,1", 3), 100).relation);
    EXPECT_FALSE(kronecker_test(parse_direction<double>("phi", 2), 100).relation);
}
