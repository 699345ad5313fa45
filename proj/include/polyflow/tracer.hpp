#pragma once

// Event-driven straight-line flow through a Manifold. Between face crossings
// the motion is p + t*v inside one cell; at a crossing the point is moved
// through the portal that contains it.

#include "polyflow/direction.hpp"
#include "polyflow/manifold.hpp"

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyflow {

enum class EventKind { InteriorCrossing, GateCrossing, PairingTransport, SingularHit };

inline const char* to_string(EventKind k)
{
    switch (k) {
    case EventKind::InteriorCrossing: return "interior-crossing";
    case EventKind::GateCrossing: return "gate-crossing";
    case EventKind::PairingTransport: return "pairing-transport";
    case EventKind::SingularHit: return "singular-hit";
    }
    return "?";
}

enum class Termination { TMax, SingularHit, VertexHit };

inline const char* to_string(Termination t)
{
    switch (t) {
    case Termination::TMax: return "t_max";
    case Termination::SingularHit: return "singular-hit";
    case Termination::VertexHit: return "vertex-hit";
    }
    return "?";
}

/// SingularOnly stops at singular points; AllVertices also stops at regular
/// surface vertices (used when searching for vertex-to-vertex segments).
enum class StopRule { SingularOnly, AllVertices };

enum class TraceErrorKind { NotReversible, InvalidStart };

class TraceError : public std::runtime_error {
public:
    TraceError(TraceErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(kind == TraceErrorKind::NotReversible ? "NotReversible" : "InvalidStart") + ": " + what), kind_(kind)
    {
    }
    TraceErrorKind kind() const { return kind_; }

private:
    TraceErrorKind kind_;
};

template <class T>
struct Event {
    T time{};
    FaceRef face;
    EventKind kind = EventKind::InteriorCrossing;
    std::optional<SplittingEdge> edge;
    std::optional<int> vertex;
};

template <class T>
struct Segment {
    CellId cell;
    Vec3<T> from{}, to{};
    T t0{}, t1{};
};

template <class T>
struct Trace {
    ManifoldPoint<T> start;
    Direction<T> direction;
    T t_max{};
    std::vector<Segment<T>> segments;
    std::vector<Event<T>> events;
    Termination terminated_by = Termination::TMax;
    ManifoldPoint<T> end;
    T end_time{};

    const Event<T>* singular_event() const
    {
        return terminated_by == Termination::TMax || events.empty() ? nullptr : &events.back();
    }
};

struct TraceOptions {
    StopRule stop = StopRule::SingularOnly;
    std::size_t max_events = 100'000'000;
};

/// Result of a streaming walk; the visitor saw every segment and event.
template <class T>
struct WalkResult {
    Termination terminated_by = Termination::TMax;
    ManifoldPoint<T> end;
    T end_time{};
    std::size_t events = 0;
};

namespace detail {

template <class T>
Vec2<T> face_uv(const Manifold& m, Axis a, const Vec3<T>& p)
{
    auto [t0, t1] = tangential_axes(a);
    return {p[t0], m.dim() == 2 ? T(1) / 2 : p[t1]};
}

template <class T>
bool at_bound(const T& x)
{
    return near_zero<T>(x) || near_equal<T>(x, T(1));
}

inline Rational round_unit(double x) { return Rational(x < 0.5 ? 0 : 1); }
inline Rational round_unit(const Rational& x) { return x < Rational(1, 2) ? Rational(0) : Rational(1); }

/// Splitting edge met at point p on face f of a 3-manifold.
template <class T>
SplittingEdge edge_at(const Manifold& m, const FaceRef& f, const Vec3<T>& p)
{
    SplittingEdge e;
    auto [t0, t1] = tangential_axes(f.axis);
    const int n = index(f.axis);
    Vec3<Rational> base{Rational(f.cell.index[0]), Rational(f.cell.index[1]), Rational(f.cell.index[2])};
    auto lattice_edge = [&](int along) {
        e.kind = EdgeKind::CubeEdge;
        e.direction = axis_from(along);
        for (int i = 0; i < 3; ++i) e.from[i] = base[i] + (i == along ? Rational(0) : round_unit(p[i]));
        e.from[n] = base[n] + (f.side == Side::Plus ? 1 : 0);
        e.to = e.from;
        e.to[along] += 1;
    };
    if (m.dim() == 2) {
        lattice_edge(2);
        // Surface vertices may sit inside an edge; keep the exact breakpoint.
        Vec2<T> uv = face_uv(m, f.axis, p);
        for (const auto& b : m.breakpoints(f))
            if (near_equal<T>(uv[0], ScalarTraits<T>::from(b.u))) e.from[t0] = e.to[t0] = base[t0] + b.u;
        return e;
    }
    Vec2<T> uv = face_uv(m, f.axis, p);
    if (at_bound(uv[0])) {
        lattice_edge(t1);
        return e;
    }
    if (at_bound(uv[1])) {
        lattice_edge(t0);
        return e;
    }
    e.kind = EdgeKind::FaceEdge;
    e.face = f;
    T best = std::numeric_limits<double>::max();
    for (const auto& s : m.face_edge_set(f.axis)) {
        Vec2<T> a{ScalarTraits<T>::from(s.a[0]), ScalarTraits<T>::from(s.a[1])};
        Vec2<T> b{ScalarTraits<T>::from(s.b[0]), ScalarTraits<T>::from(s.b[1])};
        T d = segment_distance2(a, b, uv);
        if (d < best) {
            best = d;
            for (auto* pt : {&e.from, &e.to}) {
                const Point2Q& q = pt == &e.from ? s.a : s.b;
                (*pt)[n] = base[n] + (f.side == Side::Plus ? 1 : 0);
                (*pt)[t0] = base[t0] + q[0];
                (*pt)[t1] = base[t1] + q[1];
            }
            e.direction.reset();
            if (s.a[0] == s.b[0]) e.direction = axis_from(t1);
            else if (s.a[1] == s.b[1]) e.direction = axis_from(t0);
            e.c1 = s.b[1] - s.a[1];
            e.c2 = s.a[0] - s.b[0];
            e.c3 = e.c1 * s.a[0] + e.c2 * s.a[1];
            normalize_line(e.c1, e.c2, e.c3);
        }
    }
    return e;
}

/// Surface vertex at face point u of f (within tolerance), with the exact u.
template <class T>
std::optional<Breakpoint> breakpoint_at(const Manifold& m, const FaceRef& f, const T& u)
{
    for (const auto& b : m.breakpoints(f))
        if (near_equal<T>(u, ScalarTraits<T>::from(b.u))) return b;
    return std::nullopt;
}

inline int sign_of(double x) { return (x > 0) - (x < 0); }
inline int sign_of(const Rational& x) { return x.sign(); }

}  // namespace detail

/// Streams the flow from `start`. The visitor needs on_segment(const
/// Segment<T>&) and on_event(const Event<T>&); it may return early by
/// throwing, the walk itself never allocates per step.
template <class T, class Visitor>
WalkResult<T> walk(const Manifold& m, const ManifoldPoint<T>& start, const Direction<T>& dir, const T& t_max, Visitor&& visitor,
                   const TraceOptions& options = {})
{
    using S = ScalarTraits<T>;
    const int dim = m.dim();
    if (dir.dim != dim) throw TraceError(TraceErrorKind::InvalidStart, "direction has wrong dimension");
    if (!m.has_cell(start.cell)) throw TraceError(TraceErrorKind::InvalidStart, "start cell " + to_string(start.cell) + " is not in the manifold");
    const Vec3<T>& v = dir.v;
    for (int a = 0; a < dim; ++a) {
        if (start.local[a] < T(0) || start.local[a] > T(1)) throw TraceError(TraceErrorKind::InvalidStart, "local coordinate outside [0,1]");
        if (v[a] == T(0) && detail::at_bound(start.local[a]))
            throw TraceError(TraceErrorKind::InvalidStart, "direction runs inside a face of the start cell");
    }
    // Left normal of the surface direction; a virtual sideways shift along it
    // decides the order of simultaneous crossings at regular vertices.
    const Vec2<int> shift = dim == 2 ? Vec2<int>{-detail::sign_of(v[1]), detail::sign_of(v[0])} : Vec2<int>{0, 0};

    WalkResult<T> out;
    CellId cell = start.cell;
    Vec3<T> p = start.local;
    T t = 0;
    std::optional<T> last_event_time;

    auto finish_singular = [&](const FaceRef& f, std::optional<int> vertex, Termination why) {
        Event<T> e{t, f, EventKind::SingularHit, detail::edge_at(m, f, p), vertex};
        visitor.on_event(e);
        out.terminated_by = why;
        out.end = {cell, p};
        out.end_time = t;
        out.events++;
        return out;
    };

    // A surface start exactly on a cone point is already singular. In 3D a
    // start on an edge is fine as long as the motion leaves it into the cell;
    // an immediate crossing at the edge is caught by the main loop.
    if (options.stop == StopRule::SingularOnly && dim == 2) {
        for (int a = 0; a < dim; ++a) {
            if (!detail::at_bound(p[a])) continue;
            FaceRef f{cell, axis_from(a), near_zero<T>(p[a]) ? Side::Minus : Side::Plus};
            auto b = detail::breakpoint_at(m, f, detail::face_uv(m, f.axis, p)[0]);
            if (b && m.vertices()[b->vertex].singular) return finish_singular(f, b->vertex, Termination::SingularHit);
        }
    }

    while (true) {
        // Next axis-plane crossing; ties broken by the virtual shift.
        int axis = -1;
        T tau = 0;
        int key = 0;
        for (int a = 0; a < dim; ++a) {
            if (v[a] == T(0)) continue;
            T ta = v[a] > T(0) ? T((T(1) - p[a]) / v[a]) : T(-p[a] / v[a]);
            if (ta < T(0)) ta = 0;
            // Perturbed exit time is ta - delta * shift[a] / v[a]; smaller key wins a tie.
            int ka = dim == 2 ? -shift[a] * detail::sign_of(v[a]) : 0;
            if (axis < 0 || (ta < tau && !near_equal<T>(ta, tau)) || (near_equal<T>(ta, tau) && ka < key)) {
                axis = a;
                tau = ta;
                key = ka;
            }
        }
        if (axis < 0) throw TraceError(TraceErrorKind::InvalidStart, "zero direction");
        if (t + tau >= t_max) {
            T dt = t_max - t;
            Segment<T> seg{cell, p, p, t, t_max};
            for (int a = 0; a < dim; ++a) seg.to[a] = p[a] + dt * v[a];
            if (dt > T(0)) visitor.on_segment(seg);
            out.terminated_by = Termination::TMax;
            out.end = {cell, seg.to};
            out.end_time = t_max;
            return out;
        }
        Segment<T> seg{cell, p, p, t, T(t + tau)};
        for (int a = 0; a < dim; ++a) seg.to[a] = p[a] + tau * v[a];
        const Side side = v[axis] > T(0) ? Side::Plus : Side::Minus;
        seg.to[axis] = side == Side::Plus ? T(1) : T(0);
        if (tau > T(0)) visitor.on_segment(seg);
        p = seg.to;
        t = seg.t1;

        FaceRef f{cell, axis_from(axis), side};
        Vec2<T> uv = detail::face_uv(m, f.axis, p);
        const Portal* portal = nullptr;
        std::optional<int> vertex;
        if (dim == 3) {
            if (m.on_splitting_edge(f.axis, uv)) return finish_singular(f, std::nullopt, Termination::SingularHit);
            portal = m.find_portal(f, uv);
        } else {
            const int tangent = tangential_axes(f.axis)[0];
            if (auto b = detail::breakpoint_at(m, f, uv[0])) {
                vertex = b->vertex;
                // Snap so later comparisons see the exact vertex.
                p[tangent] = S::from(b->u);
                uv[0] = p[tangent];
                if (m.vertices()[b->vertex].singular) return finish_singular(f, vertex, Termination::SingularHit);
                if (options.stop == StopRule::AllVertices && t > T(0)) return finish_singular(f, vertex, Termination::VertexHit);
                portal = m.find_portal(f, uv, Vec2<int>{shift[tangent], 0});
            } else {
                portal = m.find_portal(f, uv);
            }
        }
        if (!portal) return finish_singular(f, vertex, Termination::SingularHit);

        ManifoldPoint<T> next = m.enter(ManifoldPoint<T>{cell, p}, *portal);
        EventKind kind = portal->kind == PortalKind::Interior ? EventKind::InteriorCrossing
                         : portal->kind == PortalKind::Gate   ? EventKind::GateCrossing
                                                              : EventKind::PairingTransport;
        // Simultaneous crossings at a regular vertex form one event.
        if (!last_event_time || !near_equal<T>(*last_event_time, t)) {
            visitor.on_event(Event<T>{t, f, kind, std::nullopt, vertex});
            out.events++;
            last_event_time = t;
        }
        cell = next.cell;
        p = next.local;
        if (out.events > options.max_events) throw TraceError(TraceErrorKind::InvalidStart, "event limit exceeded");
    }
}

template <class T>
Trace<T> trace(const Manifold& m, const ManifoldPoint<T>& start, const Direction<T>& dir, const T& t_max, const TraceOptions& options = {})
{
    Trace<T> tr;
    tr.start = start;
    tr.direction = dir;
    tr.t_max = t_max;
    struct Collect {
        Trace<T>& tr;
        void on_segment(const Segment<T>& s) { tr.segments.push_back(s); }
        void on_event(const Event<T>& e) { tr.events.push_back(e); }
    } collect{tr};
    WalkResult<T> r = walk(m, start, dir, t_max, collect, options);
    tr.terminated_by = r.terminated_by;
    tr.end = r.end;
    tr.end_time = r.end_time;
    return tr;
}

template <class T>
Vec3<T> project_mod1(const ManifoldPoint<T>& p)
{
    return p.local;
}

/// Point of the trace at flow time t (t within the traced interval).
template <class T>
ManifoldPoint<T> point_at(const Trace<T>& tr, const T& t)
{
    for (const auto& s : tr.segments)
        if (t >= s.t0 && t <= s.t1) {
            ManifoldPoint<T> p{s.cell, s.from};
            for (int a = 0; a < tr.direction.dim; ++a) p.local[a] = s.from[a] + (t - s.t0) * tr.direction.v[a];
            return p;
        }
    return tr.end;
}

/// Flows back from the end of `tr` for the same time.
template <class T>
Trace<T> reverse(const Manifold& m, const Trace<T>& tr, const TraceOptions& options = {})
{
    if (tr.terminated_by != Termination::TMax) throw TraceError(TraceErrorKind::NotReversible, "trace ended in a singular hit");
    return trace(m, tr.end, tr.direction.negated(), tr.end_time, options);
}

}  // namespace polyflow
