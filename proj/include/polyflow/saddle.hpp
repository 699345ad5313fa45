#pragma once

// Saddle connections of a polysquare surface: straight segments joining two
// vertices with no vertex in between.
//
// Holonomy vectors of such segments lie in (1/D) Z^2, D the common
// denominator of the gluing data, so every connection of length <= L points
// along a primitive integer vector (p, q) with |(p, q)| <= L*D. Each vertex
// sector is traced exactly along each of those directions and stopped at
// the first vertex. Directions running along a cell edge are walked along
// the edge instead.

#include "polyflow/parallel.hpp"
#include "polyflow/tracer.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

namespace polyflow {

struct SaddleConnection {
    int v0 = -1, v1 = -1;
    Rational dx, dy;  /// holonomy
    double length = 0;
    /// Start point of the segment on the surface.
    CellId cell;
    Point2Q local;

    /// Slope dy/dx as (num, den) in lowest terms; den == 0 for vertical.
    std::pair<BigInt, BigInt> slope() const
    {
        if (dx == 0) return {BigInt(1), BigInt(0)};
        Rational s = dy / dx;
        return {numerator(s), denominator(s)};
    }

    friend bool operator<(const SaddleConnection& a, const SaddleConnection& b)
    {
        return std::tie(a.v0, a.v1, a.dx, a.dy) < std::tie(b.v0, b.v1, b.dx, b.dy);
    }
};

namespace detail {

/// The quarter-turn rays: unit directions and the face each one runs along.
inline Vec2<int> ray_direction(int quarter)
{
    static const Vec2<int> dirs[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return dirs[((quarter % 4) + 4) % 4];
}

/// Angle of (p, q) in quarter turns as (quadrant, on_ray).
inline std::pair<int, bool> quadrant_of(long long p, long long q)
{
    if (q == 0) return {p > 0 ? 0 : 2, true};
    if (p == 0) return {q > 0 ? 1 : 3, true};
    if (p > 0 && q > 0) return {0, false};
    if (p < 0 && q > 0) return {1, false};
    if (p < 0 && q < 0) return {2, false};
    return {3, false};
}

/// Whether direction (p, q) lies in [start, start + width) quarter turns.
/// Quarter k holds the ray at angle k and the open quadrant after it.
inline bool in_sector(const VertexSector& s, long long p, long long q)
{
    const int quad = quadrant_of(p, q).first;
    for (int k = 0; k < s.width_quarters; ++k)
        if (quad == (s.start_quarter + k) % 4) return true;
    return false;
}

/// Walks from the vertex along the first ray of its sector to the next breakpoint.
inline std::optional<SaddleConnection> edge_walk(const Manifold& m, const SurfaceVertex& v, const VertexSector& s)
{
    static const std::pair<Axis, Side> faces[4] = {{Axis::Y, Side::Minus}, {Axis::X, Side::Plus}, {Axis::Y, Side::Plus}, {Axis::X, Side::Minus}};
    const int q = s.start_quarter % 4;
    FaceRef f{s.cell, faces[q].first, faces[q].second};
    const int tangent = tangential_axes(f.axis)[0];
    const Rational u = s.local[tangent];
    const bool forward = q == 0 || q == 1;
    std::optional<Breakpoint> next;
    for (const auto& b : m.breakpoints(f)) {
        bool beyond = forward ? b.u > u : b.u < u;
        if (!beyond) continue;
        if (!next || (forward ? b.u < next->u : b.u > next->u)) next = b;
    }
    if (!next) return std::nullopt;
    SaddleConnection c;
    c.v0 = v.id;
    c.v1 = next->vertex;
    Rational len = forward ? Rational(next->u - u) : Rational(u - next->u);
    Vec2<int> e = ray_direction(q);
    c.dx = len * e[0];
    c.dy = len * e[1];
    c.length = to_double(len);
    c.cell = s.cell;
    c.local = s.local;
    return c;
}

}  // namespace detail

/// All saddle connections of length <= L, oriented (a segment and its
/// reverse are both listed), sorted by (v0, v1, dx, dy).
inline std::vector<SaddleConnection> saddle_connections(const Manifold& m, const Rational& L, unsigned threads = 0)
{
    if (m.dim() != 2) throw std::invalid_argument("saddle connections need a surface");
    std::vector<SaddleConnection> found;
    if (L <= 0) return found;
    const BigInt D = m.denominator();
    const Rational R = L * Rational(D);
    const long long r = static_cast<long long>(std::floor(to_double(R))) + 1;

    std::vector<Vec2<long long>> directions;
    for (long long p = -r; p <= r; ++p)
        for (long long q = -r; q <= r; ++q) {
            if ((p == 0 && q == 0) || std::gcd(std::llabs(p), std::llabs(q)) != 1) continue;
            if (Rational(p * p + q * q) > R * R) continue;
            directions.push_back({p, q});
        }

    struct Job {
        const SurfaceVertex* vertex;
        const VertexSector* sector;
    };
    std::vector<Job> jobs;
    for (const auto& v : m.vertices())
        for (const auto& s : v.sectors) jobs.push_back({&v, &s});

    const Rational L2 = L * L;
    auto results = parallel_map<std::vector<SaddleConnection>>(
        jobs.size(),
        [&](std::size_t j) {
            std::vector<SaddleConnection> out;
            const auto& [vertex, sector] = jobs[j];
            if (auto c = detail::edge_walk(m, *vertex, *sector); c && Rational(c->dx * c->dx + c->dy * c->dy) <= L2) out.push_back(*c);
            for (const auto& [p, q] : directions) {
                if (!detail::in_sector(*sector, p, q)) continue;
                // Rays on the sector's own first edge were walked above.
                if (detail::quadrant_of(p, q).second && detail::quadrant_of(p, q).first == sector->start_quarter % 4) continue;
                Direction<Rational> d = numeric_direction<Rational>({Rational(p), Rational(q), Rational(0)}, 2);
                Rational t_max = (L + 1) / std::max(std::llabs(p), std::llabs(q));
                ManifoldPoint<Rational> start{sector->cell, {sector->local[0], sector->local[1], Rational(0)}};
                std::optional<int> end_vertex;
                struct Sink {
                    std::optional<int>& end;
                    void on_segment(const Segment<Rational>&) {}
                    void on_event(const Event<Rational>& e)
                    {
                        if (e.kind == EventKind::SingularHit) end = e.vertex;
                    }
                } sink{end_vertex};
                WalkResult<Rational> w = walk(m, start, d, t_max, sink, TraceOptions{StopRule::AllVertices});
                if (w.terminated_by == Termination::TMax || !end_vertex) continue;
                SaddleConnection c;
                c.v0 = vertex->id;
                c.v1 = *end_vertex;
                c.dx = w.end_time * p;
                c.dy = w.end_time * q;
                Rational len2 = c.dx * c.dx + c.dy * c.dy;
                if (len2 > L2) continue;
                c.length = std::sqrt(to_double(len2));
                c.cell = sector->cell;
                c.local = sector->local;
                out.push_back(c);
            }
            return out;
        },
        threads);

    std::set<std::tuple<int, int, Rational, Rational>> seen;
    for (auto& chunk : results)
        for (auto& c : chunk)
            if (seen.insert({c.v0, c.v1, c.dx, c.dy}).second) found.push_back(std::move(c));
    std::sort(found.begin(), found.end());
    return found;
}

inline std::vector<SaddleConnection> saddle_connections(const Manifold& m, double L, unsigned threads = 0)
{
    return saddle_connections(m, parse_rational(std::to_string(L)), threads);
}

/// True iff slope alpha is the slope dy/dx of a saddle connection of length <= L.
inline bool is_bad_slope(const std::vector<SaddleConnection>& connections, const Rational& alpha)
{
    for (const auto& c : connections)
        if (c.dx != 0 && c.dy / c.dx == alpha) return true;
    return false;
}

inline bool is_bad_slope(const std::vector<SaddleConnection>& connections, double alpha)
{
    for (const auto& c : connections)
        if (c.dx != 0 && std::fabs(to_double(Rational(c.dy / c.dx)) - alpha) <= 1e-12) return true;
    return false;
}

/// Symbolic slope: irrational slopes are never bad on a polysquare surface.
inline bool is_bad_slope(const std::vector<SaddleConnection>& connections, const QuadSurd& alpha)
{
    return alpha.is_rational() && is_bad_slope(connections, alpha.rational_part());
}

template <class A>
bool is_bad_slope(const Manifold& m, const A& alpha, const Rational& L)
{
    return is_bad_slope(saddle_connections(m, L), alpha);
}

}  // namespace polyflow
