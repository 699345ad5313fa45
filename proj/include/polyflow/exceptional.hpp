#pragma once

// Lines of exceptional directions (alpha1, alpha2) attached to an oblique
// edge c1*u + c2*v = c3 on a Z-face. A flow segment leaving the edge and
// returning to it after climbing dm layers, with horizontal lattice shifts
// n2 and q2, forces
//     c1*dm*alpha1 + c2*dm*alpha2 = c1*n2 + c2*q2.

#include "polyflow/direction.hpp"
#include "polyflow/manifold.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace polyflow {

struct DegenerateEdge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// a*alpha1 + b*alpha2 = c.
struct ExceptionalLine {
    Rational c1, c2;
    long long dm = 0, n2 = 0, q2 = 0;
    Rational a, b, c;

    bool contains(const Rational& x, const Rational& y) const { return a * x + b * y == c; }
    bool contains(const QuadSurd& x, const QuadSurd& y) const { return QuadSurd(a) * x + QuadSurd(b) * y == QuadSurd(c); }

    /// A point of the line with free parameter s: alpha1 = s unless the line is vertical.
    std::pair<QuadSurd, QuadSurd> point(const QuadSurd& s) const
    {
        if (b == 0) return {QuadSurd(c / a), s};
        return {s, (QuadSurd(c) - QuadSurd(a) * s) / b};
    }

    std::string str() const { return to_string(a) + "*a1 + " + to_string(b) + "*a2 = " + to_string(c); }
};

inline ExceptionalLine exceptional_line(const Rational& c1, const Rational& c2, long long dm, long long n2, long long q2)
{
    if (c1 == 0 && c2 == 0) throw DegenerateEdge("edge has c1 = c2 = 0");
    if (dm == 0) throw std::invalid_argument("exceptional line needs m2 != m1");
    ExceptionalLine l;
    l.c1 = c1;
    l.c2 = c2;
    l.dm = dm;
    l.n2 = n2;
    l.q2 = q2;
    l.a = c1 * dm;
    l.b = c2 * dm;
    l.c = c1 * n2 + c2 * q2;
    return l;
}

/// Every line with 0 < |dm| <= B and |n2|, |q2| <= B.
inline std::vector<ExceptionalLine> exceptional_lines(const Rational& c1, const Rational& c2, long long B)
{
    if (c1 == 0 && c2 == 0) throw DegenerateEdge("edge has c1 = c2 = 0");
    if (B < 1) throw std::invalid_argument("bound must be at least 1");
    std::vector<ExceptionalLine> out;
    out.reserve(static_cast<std::size_t>(2 * B * (2 * B + 1) * (2 * B + 1)));
    for (long long dm = -B; dm <= B; ++dm) {
        if (dm == 0) continue;
        for (long long n2 = -B; n2 <= B; ++n2)
            for (long long q2 = -B; q2 <= B; ++q2) out.push_back(exceptional_line(c1, c2, dm, n2, q2));
    }
    return out;
}

inline std::vector<ExceptionalLine> exceptional_lines(const SplittingEdge& edge, long long B)
{
    if (edge.kind != EdgeKind::FaceEdge) throw std::invalid_argument("exceptional lines need a face edge");
    return exceptional_lines(edge.c1, edge.c2, B);
}

}  // namespace polyflow
