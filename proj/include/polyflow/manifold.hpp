#pragma once

// Polysquare surfaces and polycube 3-manifolds built from unit cells by
// gluing faces with translations.
//
// Every FaceRef (one side of one unit face) is tiled by portals. A portal
// glues a polygon on that face to a congruent polygon on a face with the
// opposite inward normal. Interior faces, gates, barriers and boundary
// pairings are all portals; they differ only in where they lead.
//
// Surfaces (dim 2) use the same representation with the z axis frozen: faces
// are unit edges times a unit z-interval, and gate polygons must be
// rectangles spanning that interval.

#include "polyflow/description.hpp"
#include "polyflow/lattice.hpp"
#include "polyflow/polygon.hpp"
#include "polyflow/rational.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace polyflow {

enum class PortalKind { Interior, Gate, Barrier, Pairing };

struct Portal {
    Polygon region;  /// face-local coordinates on the source face
    FaceRef target;
    Point2Q offset;  /// target polygon = region + offset
    PortalKind kind = PortalKind::Interior;
};

struct FacePairing {
    FaceRef a, b;
    bool generated = false;  /// produced by the wraparound rule
};

struct RedPart {
    Polygon polygon;
    FaceRef target_face;
    Polygon target_polygon;
};

struct GatedFace {
    FaceRef face;
    std::vector<Polygon> green;
    std::vector<RedPart> red;
};

enum class FaceClass { Interior, Gated, Paired };

enum class EdgeKind { CubeEdge, FaceEdge };

struct SplittingEdge {
    EdgeKind kind = EdgeKind::CubeEdge;
    /// Axis the segment runs along; empty for oblique face edges.
    std::optional<Axis> direction;
    Vec3<Rational> from, to;  /// ambient lattice coordinates
    /// Face edges: the face carrying it and c1*u + c2*v = c3 in face-local coordinates.
    std::optional<FaceRef> face;
    Rational c1 = 0, c2 = 0, c3 = 0;
};

/// One angular sector of a surface vertex: directions at angles in
/// [start, start + width) quarter turns, leaving `local` into `cell`.
struct VertexSector {
    CellId cell;
    Point2Q local;
    int start_quarter = 0;
    int width_quarters = 1;
};

struct SurfaceVertex {
    int id = 0;
    int angle_quarters = 0;  /// cone angle in units of pi/2
    bool singular = false;   /// cone angle differs from 2*pi
    std::vector<VertexSector> sectors;
};

struct Breakpoint {
    Rational u;
    int vertex = -1;
};

template <class T>
struct ManifoldPoint {
    CellId cell;
    Vec3<T> local{};  /// in [0,1]^3; z is 0 for surfaces
};

class Manifold {
public:
    int dim() const { return dim_; }
    const std::string& name() const { return name_; }
    std::size_t size() const { return cells_.size(); }
    const std::vector<CellId>& cells() const { return cells_; }
    std::optional<std::size_t> cell_index(const CellId& c) const
    {
        auto it = index_.find(c);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    bool has_cell(const CellId& c) const { return index_.count(c) > 0; }

    const std::vector<Portal>& portals(const FaceRef& f) const { return portals_.at(slot(f)); }
    FaceClass face_class(const FaceRef& f) const { return classes_.at(slot(f)); }
    const std::vector<FacePairing>& pairings() const { return pairings_; }
    const std::vector<GatedFace>& gated_faces() const { return gated_; }
    const std::vector<SplittingEdge>& splitting_edges() const { return splitting_edges_; }
    /// Face-edge set stamped on every face normal to `a` (mod 1 coordinates).
    const std::vector<Segment2Q>& face_edge_set(Axis a) const { return face_edges_[index(a)]; }

    const std::vector<SurfaceVertex>& vertices() const { return vertices_; }
    const std::vector<Breakpoint>& breakpoints(const FaceRef& f) const { return breakpoints_.at(slot(f)); }
    std::optional<int> vertex_at(const CellId& c, const Point2Q& local) const
    {
        auto i = cell_index(c);
        if (!i) return std::nullopt;
        auto it = vertex_keys_.find({*i, local});
        if (it == vertex_keys_.end()) return std::nullopt;
        return it->second;
    }

    /// Least common denominator of all gluing data; holonomy of saddle
    /// connections lies in (1/D) Z^2.
    const BigInt& denominator() const { return denominator_; }

    Rational volume() const { return Rational(static_cast<long long>(cells_.size())); }

    /// All FaceRefs of the cells that the flow can cross (X,Y and, in 3D, Z).
    std::vector<FaceRef> all_faces() const
    {
        std::vector<FaceRef> out;
        for (const auto& c : cells_)
            for (int a = 0; a < dim_; ++a)
                for (Side s : {Side::Plus, Side::Minus}) out.push_back({c, axis_from(a), s});
        return out;
    }

    /// Portal containing point `uv` of face `f`. `bias` selects the side when
    /// `uv` sits on a portal boundary (points are moved by nudge*bias first).
    template <class T>
    const Portal* find_portal(const FaceRef& f, Vec2<T> uv, Vec2<int> bias = {0, 0}) const
    {
        const T eps = ScalarTraits<T>::nudge();
        uv[0] += eps * bias[0];
        uv[1] += eps * bias[1];
        for (const auto& p : portals(f))
            if (p.region.contains(uv)) return &p;
        return nullptr;
    }

    /// Whether face point `uv` on a face normal to `a` lies on a splitting edge
    /// (lattice boundary of the face or a stamped face edge).
    template <class T>
    bool on_splitting_edge(Axis a, const Vec2<T>& uv) const
    {
        if (dim_ == 2) {
            for (const auto& s : face_edges_[index(a)])
                if (near_equal<T>(uv[0], ScalarTraits<T>::from(s.a[0]))) return true;
            return near_zero<T>(uv[0]) || near_equal<T>(uv[0], T(1));
        }
        for (int i = 0; i < 2; ++i)
            if (near_zero<T>(uv[i]) || near_equal<T>(uv[i], T(1))) return true;
        const T tol = ScalarTraits<T>::tolerance();
        for (const auto& s : face_edges_[index(a)]) {
            Vec2<T> p{ScalarTraits<T>::from(s.a[0]), ScalarTraits<T>::from(s.a[1])};
            Vec2<T> q{ScalarTraits<T>::from(s.b[0]), ScalarTraits<T>::from(s.b[1])};
            if (segment_distance2(p, q, uv) <= tol * tol) return true;
        }
        return false;
    }

    /// Identified point on the partner face. `point` must lie on `face`.
    template <class T>
    ManifoldPoint<T> transport(const ManifoldPoint<T>& point, const FaceRef& face) const
    {
        auto [t0, t1] = tangential_axes(face.axis);
        Vec2<T> uv{point.local[t0], dim_ == 2 ? T(1) / 2 : point.local[t1]};
        if (on_splitting_edge(face.axis, uv))
            throw GeometryError(GeometryErrorKind::OnSplittingEdge, to_string(face));
        const Portal* p = find_portal(face, uv);
        if (!p) throw GeometryError(GeometryErrorKind::OnSplittingEdge, to_string(face));
        return enter(point, *p);
    }

    /// Moves a point sitting on a portal's source face through that portal.
    template <class T>
    ManifoldPoint<T> enter(const ManifoldPoint<T>& point, const Portal& p) const
    {
        auto [t0, t1] = tangential_axes(p.target.axis);
        ManifoldPoint<T> out{p.target.cell, point.local};
        out.local[t0] += ScalarTraits<T>::from(p.offset[0]);
        if (dim_ == 3) out.local[t1] += ScalarTraits<T>::from(p.offset[1]);
        out.local[index(p.target.axis)] = p.target.side == Side::Minus ? T(0) : T(1);
        return out;
    }

    friend Manifold build_manifold(const ManifoldDescription& d);
    friend Manifold harmonize_splitting_edges(Manifold m);

private:
    std::size_t slot(const FaceRef& f) const { return index_.at(f.cell) * 6 + index(f.axis) * 2 + static_cast<int>(f.side); }

    void add_glue(const FaceRef& h, const Polygon& region, const FaceRef& t, const Point2Q& off, PortalKind kind)
    {
        auto same = [&](const Portal& p, const Polygon& r, const FaceRef& target) {
            return p.target == target && translation_between(p.region, r) == Point2Q{Rational(0), Rational(0)};
        };
        auto& hs = portals_[slot(h)];
        if (std::none_of(hs.begin(), hs.end(), [&](const Portal& p) { return same(p, region, t); }))
            hs.push_back({region, t, off, kind});
        Polygon back = region.translated(off);
        auto& ts = portals_[slot(t)];
        if (std::none_of(ts.begin(), ts.end(), [&](const Portal& p) { return same(p, back, h); }))
            ts.push_back({back, h, {-off[0], -off[1]}, kind});
    }

    void compute_face_edges();
    void compute_splitting_edges();
    void compute_vertices();

    int dim_ = 3;
    std::string name_;
    std::vector<CellId> cells_;
    std::map<CellId, std::size_t> index_;
    std::vector<std::vector<Portal>> portals_;
    std::vector<FaceClass> classes_;
    std::vector<FacePairing> pairings_;
    std::vector<GatedFace> gated_;
    std::array<std::vector<Segment2Q>, 3> face_edges_;
    std::vector<SplittingEdge> splitting_edges_;
    std::vector<SurfaceVertex> vertices_;
    std::vector<std::vector<Breakpoint>> breakpoints_;
    std::map<std::pair<std::size_t, Point2Q>, int> vertex_keys_;
    BigInt denominator_ = 1;
};

namespace detail {

inline bool on_square_boundary(const Segment2Q& s)
{
    for (int i = 0; i < 2; ++i)
        if (s.a[i] == s.b[i] && (s.a[i] == 0 || s.a[i] == 1)) return true;
    return false;
}

inline BigInt lcm(const BigInt& a, const BigInt& b) { return a / boost::multiprecision::gcd(a, b) * b; }

/// Scales (c1, c2, c3) to coprime integers with the first nonzero of c1, c2 positive.
inline void normalize_line(Rational& c1, Rational& c2, Rational& c3)
{
    BigInt den = lcm(lcm(denominator(c1), denominator(c2)), denominator(c3));
    BigInt a = numerator(Rational(c1 * den)), b = numerator(Rational(c2 * den)), c = numerator(Rational(c3 * den));
    BigInt g = boost::multiprecision::gcd(boost::multiprecision::gcd(abs(a), abs(b)), abs(c));
    if (g == 0) g = 1;
    a /= g;
    b /= g;
    c /= g;
    if (a < 0 || (a == 0 && b < 0)) {
        a = -a;
        b = -b;
        c = -c;
    }
    c1 = Rational(a);
    c2 = Rational(b);
    c3 = Rational(c);
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x)
    {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace detail

inline void Manifold::compute_face_edges()
{
    for (int a = 0; a < 3; ++a) {
        std::set<std::pair<Point2Q, Point2Q>> unique;
        for (const auto& existing : face_edges_[a]) unique.insert(canonical(existing));
        for (const auto& f : all_faces()) {
            if (index(f.axis) != a) continue;
            for (const auto& p : portals(f)) {
                if (p.region.is_unit_square()) continue;
                for (const auto& e : p.region.edges())
                    if (!detail::on_square_boundary(e)) unique.insert(canonical(e));
            }
        }
        face_edges_[a].clear();
        for (const auto& [p, q] : unique) face_edges_[a].push_back({p, q});
    }
}

inline void Manifold::compute_splitting_edges()
{
    splitting_edges_.clear();
    std::set<std::pair<Vec3<Rational>, int>> lattice;
    for (const auto& c : cells_) {
        Vec3<Rational> base{Rational(c.index[0]), Rational(c.index[1]), Rational(c.index[2])};
        if (dim_ == 2) {
            // Surface vertices appear as unit z-segments of the frozen slab.
            for (int dx = 0; dx < 2; ++dx)
                for (int dy = 0; dy < 2; ++dy) lattice.insert({{base[0] + dx, base[1] + dy, Rational(0)}, 2});
            continue;
        }
        for (int dir = 0; dir < 3; ++dir) {
            auto [o0, o1] = tangential_axes(axis_from(dir));
            for (int s0 = 0; s0 < 2; ++s0)
                for (int s1 = 0; s1 < 2; ++s1) {
                    Vec3<Rational> from = base;
                    from[o0] += s0;
                    from[o1] += s1;
                    lattice.insert({from, dir});
                }
        }
    }
    for (const auto& [from, dir] : lattice) {
        SplittingEdge e;
        e.kind = EdgeKind::CubeEdge;
        e.direction = axis_from(dir);
        e.from = from;
        e.to = from;
        e.to[dir] += 1;
        splitting_edges_.push_back(e);
    }
    // Face edges are stamped on the Plus side of every face; each point of a
    // face of the manifold has exactly one Plus-side representative.
    for (const auto& c : cells_) {
        for (int a = 0; a < dim_; ++a) {
            auto [t0, t1] = tangential_axes(axis_from(a));
            for (const auto& s : face_edges_[a]) {
                SplittingEdge e;
                e.kind = EdgeKind::FaceEdge;
                e.face = FaceRef{c, axis_from(a), Side::Plus};
                for (auto* pt : {&e.from, &e.to}) {
                    const Point2Q& local = pt == &e.from ? s.a : s.b;
                    (*pt)[a] = Rational(c.index[a] + 1);
                    (*pt)[t0] = c.index[t0] + local[0];
                    (*pt)[t1] = c.index[t1] + local[1];
                }
                if (s.a[0] == s.b[0]) e.direction = axis_from(t1);
                else if (s.a[1] == s.b[1]) e.direction = axis_from(t0);
                e.c1 = s.b[1] - s.a[1];
                e.c2 = s.a[0] - s.b[0];
                e.c3 = e.c1 * s.a[0] + e.c2 * s.a[1];
                detail::normalize_line(e.c1, e.c2, e.c3);
                splitting_edges_.push_back(e);
            }
        }
    }
}

inline void Manifold::compute_vertices()
{
    vertices_.clear();
    vertex_keys_.clear();
    breakpoints_.assign(cells_.size() * 6, {});
    if (dim_ != 2) return;

    auto face_point = [](const FaceRef& f, const Rational& u) -> Point2Q {
        Rational fixed = f.side == Side::Plus ? Rational(1) : Rational(0);
        return f.axis == Axis::X ? Point2Q{fixed, u} : Point2Q{u, fixed};
    };

    std::vector<std::pair<std::size_t, Point2Q>> keys;
    std::map<std::pair<std::size_t, Point2Q>, std::size_t> key_index;
    auto key_of = [&](const CellId& c, const Point2Q& p) {
        auto k = std::pair{index_.at(c), p};
        auto [it, inserted] = key_index.emplace(k, keys.size());
        if (inserted) keys.push_back(k);
        return it->second;
    };

    std::vector<std::vector<Rational>> face_breaks(cells_.size() * 6);
    for (const auto& f : all_faces()) {
        std::set<Rational> us{Rational(0), Rational(1)};
        for (const auto& p : portals(f))
            for (const auto& v : p.region.vertices()) us.insert(v[0]);
        face_breaks[slot(f)].assign(us.begin(), us.end());
        for (const auto& u : us) key_of(f.cell, face_point(f, u));
    }

    // Gluings first register every key they touch, then the classes are merged.
    std::vector<std::pair<std::size_t, std::size_t>> links;
    for (const auto& f : all_faces()) {
        for (const auto& u : face_breaks[slot(f)]) {
            std::size_t k = key_of(f.cell, face_point(f, u));
            for (const auto& p : portals(f)) {
                const auto& v = p.region.vertices();
                auto [lo, hi] = std::minmax_element(v.begin(), v.end(), [](const Point2Q& a, const Point2Q& b) { return a[0] < b[0]; });
                if (u < (*lo)[0] || u > (*hi)[0]) continue;
                links.push_back({k, key_of(p.target.cell, face_point(p.target, u + p.offset[0]))});
            }
        }
    }
    detail::UnionFind uf(keys.size());
    for (const auto& [a, b] : links) uf.unite(a, b);

    std::map<std::size_t, int> root_id;
    for (std::size_t k = 0; k < keys.size(); ++k) {
        std::size_t root = uf.find(k);
        auto [it, inserted] = root_id.emplace(root, static_cast<int>(vertices_.size()));
        if (inserted) vertices_.push_back(SurfaceVertex{it->second, 0, false, {}});
        SurfaceVertex& v = vertices_[it->second];
        const auto& [ci, p] = keys[k];
        bool x_edge = p[0] == 0 || p[0] == 1, y_edge = p[1] == 0 || p[1] == 1;
        VertexSector sec{cells_[ci], p, 0, 2};
        if (x_edge && y_edge) {
            sec.width_quarters = 1;
            if (p[0] == 0 && p[1] == 0) sec.start_quarter = 0;
            else if (p[0] == 1 && p[1] == 0) sec.start_quarter = 1;
            else if (p[0] == 1 && p[1] == 1) sec.start_quarter = 2;
            else sec.start_quarter = 3;
        } else if (x_edge) {
            sec.start_quarter = p[0] == 0 ? 3 : 1;
        } else {
            sec.start_quarter = p[1] == 0 ? 0 : 2;
        }
        v.angle_quarters += sec.width_quarters;
        v.sectors.push_back(sec);
        vertex_keys_[keys[k]] = it->second;
    }
    for (auto& v : vertices_) v.singular = v.angle_quarters != 4;

    for (const auto& f : all_faces())
        for (const auto& u : face_breaks[slot(f)])
            breakpoints_[slot(f)].push_back({u, vertex_keys_.at({index_.at(f.cell), face_point(f, u)})});
}

/// Builds and validates a manifold. Throws GeometryError on invalid input.
inline Manifold build_manifold(const ManifoldDescription& d)
{
    using K = GeometryErrorKind;
    Manifold m;
    m.dim_ = d.dim;
    m.name_ = d.name;
    if (d.cells.empty()) throw GeometryError(K::InvalidDescription, "cell list is empty", d.line_of("/cells"));
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
        if (m.index_.count(d.cells[i]))
            throw GeometryError(K::OverlappingCells, "cell=" + to_string(d.cells[i]) + " listed twice", d.line_of("/cells/" + std::to_string(i)));
        m.index_[d.cells[i]] = m.cells_.size();
        m.cells_.push_back(d.cells[i]);
    }
    auto cell_line = [&](const CellId& c) {
        auto it = std::find(d.cells.begin(), d.cells.end(), c);
        return d.line_of("/cells/" + std::to_string(it - d.cells.begin()));
    };
    m.portals_.assign(m.cells_.size() * 6, {});
    m.classes_.assign(m.cells_.size() * 6, FaceClass::Interior);

    auto require_cell = [&](const FaceRef& f, const std::string& pointer) {
        if (!m.has_cell(f.cell)) throw GeometryError(K::InvalidDescription, "unknown " + to_string(f), d.line_of(pointer));
        if (d.dim == 2 && f.axis == Axis::Z) throw GeometryError(K::InvalidDescription, "surfaces have no Z faces", d.line_of(pointer));
    };
    auto check_surface_polygon = [&](const Polygon& p, const std::string& pointer) {
        if (d.dim != 2) return;
        const auto& v = p.vertices();
        auto [lo, hi] = std::minmax_element(v.begin(), v.end(), [](const Point2Q& a, const Point2Q& b) { return a[0] < b[0]; });
        bool spans = std::all_of(v.begin(), v.end(), [](const Point2Q& q) { return q[1] == 0 || q[1] == 1; });
        if (!spans || p.area() != (*hi)[0] - (*lo)[0])
            throw GeometryError(K::InvalidDescription, "surface gate polygons must be rectangles [a,b]x[0,1]", d.line_of(pointer));
    };

    for (const auto& g : d.gated) {
        require_cell(g.face, g.pointer + "/face");
        GatedFace record{g.face, g.green, {}};
        m.classes_[m.slot(g.face)] = FaceClass::Gated;
        for (std::size_t k = 0; k < g.green.size(); ++k) {
            std::string ptr = g.pointer + "/green/" + std::to_string(k);
            check_surface_polygon(g.green[k], ptr);
            FaceRef other = across(g.face);
            if (!m.has_cell(other.cell))
                throw GeometryError(K::InvalidDescription, "green polygon on a face with no neighbouring cell: " + to_string(g.face), d.line_of(ptr));
            m.add_glue(g.face, g.green[k], other, {Rational(0), Rational(0)}, PortalKind::Gate);
            m.classes_[m.slot(other)] = FaceClass::Gated;
        }
        for (const auto& r : g.red) {
            require_cell(r.target_face, r.pointer + "/target_face");
            check_surface_polygon(r.polygon, r.pointer + "/polygon");
            check_surface_polygon(r.target_polygon, r.pointer + "/target_polygon");
            if (r.target_face.axis != g.face.axis || r.target_face.side == g.face.side)
                throw GeometryError(K::IncongruentRedPairing, "target " + to_string(r.target_face) + " must have the opposite inward normal of " + to_string(g.face),
                                    d.line_of(r.pointer + "/target_face"));
            auto off = translation_between(r.polygon, r.target_polygon);
            if (!off || (d.dim == 2 && (*off)[1] != 0))
                throw GeometryError(K::IncongruentRedPairing, "target polygon is not a translate of the red polygon on " + to_string(g.face),
                                    d.line_of(r.pointer + "/target_polygon"));
            m.add_glue(g.face, r.polygon, r.target_face, *off, PortalKind::Barrier);
            m.classes_[m.slot(r.target_face)] = FaceClass::Gated;
            record.red.push_back({r.polygon, r.target_face, r.target_polygon});
        }
        m.gated_.push_back(std::move(record));
    }

    for (const auto& p : d.pairings) {
        require_cell(p.a, p.pointer + "/a");
        require_cell(p.b, p.pointer + "/b");
        if (p.a.axis != p.b.axis || p.a.side == p.b.side)
            throw GeometryError(K::InvalidDescription, "paired faces must have opposite inward normals: " + to_string(p.a) + " / " + to_string(p.b),
                                d.line_of(p.pointer));
        m.add_glue(p.a, Polygon::unit_square(), p.b, {Rational(0), Rational(0)}, PortalKind::Pairing);
        m.classes_[m.slot(p.a)] = m.classes_[m.slot(p.b)] = FaceClass::Paired;
        m.pairings_.push_back({p.a, p.b, false});
    }

    auto untouched = [&](const FaceRef& f) { return m.portals_[m.slot(f)].empty(); };
    for (const auto& c : m.cells_) {
        for (int a = 0; a < d.dim; ++a) {
            FaceRef h{c, axis_from(a), Side::Plus};
            FaceRef k = across(h);
            if (!m.has_cell(k.cell) || !untouched(h) || !untouched(k)) continue;
            m.add_glue(h, Polygon::unit_square(), k, {Rational(0), Rational(0)}, PortalKind::Interior);
        }
    }

    if (d.wraparound) {
        for (int a = 0; a < d.dim; ++a) {
            // Lattice lines parallel to axis a, keyed by the other coordinates.
            std::map<std::array<int, 2>, std::vector<CellId>> lines;
            auto [o0, o1] = tangential_axes(axis_from(a));
            for (const auto& c : m.cells_) lines[{c.index[o0], c.index[o1]}].push_back(c);
            for (auto& [key, cells] : lines) {
                std::sort(cells.begin(), cells.end(), [a](const CellId& x, const CellId& y) { return x.index[a] < y.index[a]; });
                std::vector<FaceRef> plus, minus;
                for (const auto& c : cells) {
                    FaceRef lo{c, axis_from(a), Side::Minus}, hi{c, axis_from(a), Side::Plus};
                    if (!m.has_cell(across(lo).cell) && untouched(lo)) minus.push_back(lo);
                    if (!m.has_cell(across(hi).cell) && untouched(hi)) plus.push_back(hi);
                }
                if (plus.size() != minus.size() || plus.empty()) continue;
                // Each run's upper end glues to the next run's lower end, cyclically.
                for (std::size_t i = 0; i < plus.size(); ++i) {
                    const FaceRef& hi = plus[i];
                    const FaceRef& lo = minus[(i + 1) % minus.size()];
                    m.add_glue(hi, Polygon::unit_square(), lo, {Rational(0), Rational(0)}, PortalKind::Pairing);
                    m.classes_[m.slot(hi)] = m.classes_[m.slot(lo)] = FaceClass::Paired;
                    m.pairings_.push_back({hi, lo, true});
                }
            }
        }
    }

    for (const auto& f : m.all_faces()) {
        const auto& ps = m.portals(f);
        if (ps.empty()) throw GeometryError(K::UnpairedBoundaryFace, to_string(f), cell_line(f.cell));
        Rational total = 0;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (!ps[i].region.within_unit_square())
                throw GeometryError(K::PolygonTilingGap, to_string(f) + ": polygon leaves the unit face", cell_line(f.cell));
            total += ps[i].region.area();
            for (std::size_t j = i + 1; j < ps.size(); ++j)
                if (overlap_area(ps[i].region, ps[j].region) > 0)
                    throw GeometryError(K::PolygonTilingGap, to_string(f) + ": polygons overlap", cell_line(f.cell));
        }
        if (total != 1)
            throw GeometryError(K::PolygonTilingGap, to_string(f) + ": polygons cover area " + to_string(total) + " of 1", cell_line(f.cell));
    }

    detail::UnionFind uf(m.cells_.size());
    for (const auto& f : m.all_faces())
        for (const auto& p : m.portals(f))
            if (p.kind != PortalKind::Barrier) uf.unite(m.index_.at(f.cell), m.index_.at(p.target.cell));
    for (std::size_t i = 1; i < m.cells_.size(); ++i)
        if (uf.find(i) != uf.find(0))
            throw GeometryError(K::DisconnectedRegion, "cell=" + to_string(m.cells_[i]) + " is not joined to cell=" + to_string(m.cells_[0]),
                                cell_line(m.cells_[i]));

    for (const auto& f : m.all_faces())
        for (const auto& p : m.portals(f)) {
            for (const auto& v : p.region.vertices())
                for (const auto& x : v) m.denominator_ = detail::lcm(m.denominator_, denominator(x));
            for (const auto& x : p.offset) m.denominator_ = detail::lcm(m.denominator_, denominator(x));
        }

    m.compute_face_edges();
    m.compute_splitting_edges();
    m.compute_vertices();
    return m;
}

/// Stamps the union of every face's polygon edges (mod 1) onto all faces of
/// the same orientation. Colour polygons are untouched; the stamped edges
/// are markers only. Idempotent.
inline Manifold harmonize_splitting_edges(Manifold m)
{
    m.compute_face_edges();
    m.compute_splitting_edges();
    return m;
}

inline Manifold load_manifold(const std::string& path) { return build_manifold(load_description(path)); }

}  // namespace polyflow
