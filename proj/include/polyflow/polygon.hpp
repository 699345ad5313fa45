#pragma once

// Simple planar polygons on a unit face, with exact rational vertices.

#include "polyflow/lattice.hpp"
#include "polyflow/rational.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace polyflow {

using Point2Q = Vec2<Rational>;

struct Segment2Q {
    Point2Q a, b;

    friend bool operator==(const Segment2Q&, const Segment2Q&) = default;
};

/// Key used to deduplicate segments regardless of orientation.
inline std::pair<Point2Q, Point2Q> canonical(const Segment2Q& s)
{
    return s.b < s.a ? std::pair{s.b, s.a} : std::pair{s.a, s.b};
}

template <class T>
T cross(const Vec2<T>& o, const Vec2<T>& a, const Vec2<T>& b)
{
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

template <class T>
T signed_area(const std::vector<Vec2<T>>& pts)
{
    T twice = 0;
    for (std::size_t i = 0, n = pts.size(); i < n; ++i) {
        const auto& p = pts[i];
        const auto& q = pts[(i + 1) % n];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    return twice / 2;
}

/// Strict interior test by crossing number. Callers check boundary proximity
/// separately, so points on edges may land either way.
template <class T>
bool contains_point(const std::vector<Vec2<T>>& pts, const Vec2<T>& p)
{
    bool inside = false;
    for (std::size_t i = 0, n = pts.size(), j = n - 1; i < n; j = i++) {
        const auto& a = pts[i];
        const auto& b = pts[j];
        if ((a[1] > p[1]) != (b[1] > p[1])) {
            T x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if (p[0] < x) inside = !inside;
        }
    }
    return inside;
}

/// Squared distance from p to the closed segment ab.
template <class T>
T segment_distance2(const Vec2<T>& a, const Vec2<T>& b, const Vec2<T>& p)
{
    T dx = b[0] - a[0], dy = b[1] - a[1];
    T len2 = dx * dx + dy * dy;
    T s = len2 == 0 ? T(0) : ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2;
    if (s < 0) s = 0;
    if (s > 1) s = 1;
    T ex = a[0] + s * dx - p[0], ey = a[1] + s * dy - p[1];
    return ex * ex + ey * ey;
}

class Polygon {
public:
    Polygon() = default;

    explicit Polygon(std::vector<Point2Q> vertices) : vertices_(std::move(vertices))
    {
        if (vertices_.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
        if (signed_area(vertices_) < 0) std::reverse(vertices_.begin(), vertices_.end());
        if (area() == 0) throw std::invalid_argument("polygon has zero area");
        as_double_.reserve(vertices_.size());
        for (const auto& v : vertices_) as_double_.push_back({to_double(v[0]), to_double(v[1])});
    }

    static Polygon unit_square()
    {
        return Polygon({{Rational(0), Rational(0)}, {Rational(1), Rational(0)}, {Rational(1), Rational(1)}, {Rational(0), Rational(1)}});
    }

    const std::vector<Point2Q>& vertices() const { return vertices_; }

    template <class T>
    const std::vector<Vec2<T>>& vertices_as() const
    {
        if constexpr (std::is_same_v<T, double>) {
            return as_double_;
        } else {
            return vertices_;
        }
    }

    Rational area() const { return signed_area(vertices_); }

    std::vector<Segment2Q> edges() const
    {
        std::vector<Segment2Q> out;
        for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) out.push_back({vertices_[i], vertices_[(i + 1) % n]});
        return out;
    }

    Polygon translated(const Point2Q& d) const
    {
        std::vector<Point2Q> v = vertices_;
        for (auto& p : v) {
            p[0] += d[0];
            p[1] += d[1];
        }
        return Polygon(std::move(v));
    }

    bool within_unit_square() const
    {
        return std::all_of(vertices_.begin(), vertices_.end(), [](const Point2Q& p) {
            return p[0] >= 0 && p[0] <= 1 && p[1] >= 0 && p[1] <= 1;
        });
    }

    bool is_unit_square() const { return area() == 1 && within_unit_square(); }

    template <class T>
    bool contains(const Vec2<T>& p) const
    {
        return contains_point(vertices_as<T>(), p);
    }

    /// Squared distance to the nearest edge.
    template <class T>
    T boundary_distance2(const Vec2<T>& p) const
    {
        const auto& v = vertices_as<T>();
        T best = segment_distance2(v.back(), v.front(), p);
        for (std::size_t i = 0; i + 1 < v.size(); ++i) best = std::min(best, segment_distance2(v[i], v[i + 1], p));
        return best;
    }

    /// Ear-clipping triangulation (vertices are counter-clockwise).
    std::vector<std::array<Point2Q, 3>> triangulate() const
    {
        std::vector<std::array<Point2Q, 3>> tris;
        std::vector<Point2Q> poly = vertices_;
        while (poly.size() > 3) {
            bool clipped = false;
            for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
                const auto& a = poly[(i + n - 1) % n];
                const auto& b = poly[i];
                const auto& c = poly[(i + 1) % n];
                Rational turn = cross(a, b, c);
                if (turn < 0) continue;
                if (turn == 0) {
                    // Collinear vertex: drop it without emitting a triangle.
                    poly.erase(poly.begin() + static_cast<long>(i));
                    clipped = true;
                    break;
                }
                bool empty = true;
                for (std::size_t j = 0; j < n && empty; ++j) {
                    if (j == i || j == (i + 1) % n || j == (i + n - 1) % n) continue;
                    const auto& p = poly[j];
                    if (cross(a, b, p) >= 0 && cross(b, c, p) >= 0 && cross(c, a, p) >= 0) empty = false;
                }
                if (!empty) continue;
                tris.push_back({a, b, c});
                poly.erase(poly.begin() + static_cast<long>(i));
                clipped = true;
                break;
            }
            if (!clipped) throw std::invalid_argument("polygon is not simple");
        }
        if (cross(poly[0], poly[1], poly[2]) > 0) tris.push_back({poly[0], poly[1], poly[2]});
        return tris;
    }

private:
    std::vector<Point2Q> vertices_;
    std::vector<Vec2<double>> as_double_;
};

namespace detail {

/// Sutherland-Hodgman: clip `subject` by the counter-clockwise convex `clip`.
inline std::vector<Point2Q> clip_convex(std::vector<Point2Q> subject, const std::array<Point2Q, 3>& clip)
{
    for (std::size_t e = 0; e < 3 && !subject.empty(); ++e) {
        const Point2Q& a = clip[e];
        const Point2Q& b = clip[(e + 1) % 3];
        std::vector<Point2Q> out;
        for (std::size_t i = 0, n = subject.size(); i < n; ++i) {
            const Point2Q& p = subject[i];
            const Point2Q& q = subject[(i + 1) % n];
            Rational sp = cross(a, b, p), sq = cross(a, b, q);
            if (sp >= 0) out.push_back(p);
            if ((sp > 0 && sq < 0) || (sp < 0 && sq > 0)) {
                Rational s = sp / (sp - sq);
                out.push_back({p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])});
            }
        }
        subject = std::move(out);
    }
    return subject;
}

}  // namespace detail

/// Exact area of the intersection of two simple polygons.
inline Rational overlap_area(const Polygon& p, const Polygon& q)
{
    Rational total = 0;
    auto tp = p.triangulate();
    auto tq = q.triangulate();
    for (const auto& a : tp) {
        for (const auto& b : tq) {
            auto piece = detail::clip_convex({a[0], a[1], a[2]}, b);
            if (piece.size() >= 3) total += signed_area(piece);
        }
    }
    return total;
}

/// If `target` equals `source` translated by some vector, return that vector.
inline std::optional<Point2Q> translation_between(const Polygon& source, const Polygon& target)
{
    const auto& s = source.vertices();
    const auto& t = target.vertices();
    if (s.size() != t.size()) return std::nullopt;
    for (std::size_t shift = 0; shift < t.size(); ++shift) {
        Point2Q d{t[shift][0] - s[0][0], t[shift][1] - s[0][1]};
        bool match = true;
        for (std::size_t i = 0; i < s.size() && match; ++i) {
            const auto& ti = t[(i + shift) % t.size()];
            match = ti[0] - s[i][0] == d[0] && ti[1] - s[i][1] == d[1];
        }
        if (match) return d;
    }
    return std::nullopt;
}

}  // namespace polyflow
