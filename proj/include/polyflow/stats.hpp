#pragma once

// Density and visiting-frequency measurements along flow lines.

#include "polyflow/parallel.hpp"
#include "polyflow/sampling.hpp"
#include "polyflow/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyflow {

struct StartPathological : std::runtime_error {
    double t = 0;
    StartPathological(const std::string& what, double at) : std::runtime_error(what), t(at) {}
};

struct HorizonTooSmall : std::runtime_error {
    double missed_fraction = 0;
    HorizonTooSmall(const std::string& what, double missed) : std::runtime_error(what), missed_fraction(missed) {}
};

// ---------------------------------------------------------------------------
// Targets

/// An open ball inside one cell, or the whole manifold.
struct TargetSet {
    enum class Shape { Ball, Whole } shape = Shape::Ball;
    ManifoldPoint<double> center;
    double radius = 0;

    static TargetSet whole() { return TargetSet{Shape::Whole, {}, 0}; }
    static TargetSet ball(const CellId& cell, const Vec3<double>& local, double r) { return TargetSet{Shape::Ball, {cell, local}, r}; }

    /// Same centre, half the radius.
    TargetSet halved() const
    {
        TargetSet g = *this;
        g.radius /= 2;
        return g;
    }

    bool contains(int dim, const ManifoldPoint<double>& p) const
    {
        if (shape == Shape::Whole) return true;
        if (p.cell != center.cell) return false;
        double d2 = 0;
        for (int a = 0; a < dim; ++a) d2 += (p.local[a] - center.local[a]) * (p.local[a] - center.local[a]);
        return d2 < radius * radius;
    }

    /// Volume relative to one cell.
    double measure(int dim) const
    {
        if (shape == Shape::Whole) return std::numeric_limits<double>::infinity();
        return dim == 2 ? M_PI * radius * radius : 4.0 / 3.0 * M_PI * radius * radius * radius;
    }
};

inline void validate_target(const Manifold& m, const TargetSet& g)
{
    if (g.shape == TargetSet::Shape::Whole) return;
    if (!m.has_cell(g.center.cell)) throw std::invalid_argument("target cell " + to_string(g.center.cell) + " is not in the manifold");
    if (!(g.radius > 0)) throw std::invalid_argument("target radius must be positive");
    for (int a = 0; a < m.dim(); ++a)
        if (!(g.center.local[a] - g.radius >= 0 && g.center.local[a] + g.radius <= 1)) throw std::invalid_argument("target ball must lie inside its cell");
}

namespace detail {

/// Parameter interval (s0, s1) of {p + s v : |. - c| < r}, if nonempty.
inline std::optional<std::pair<double, double>> ball_chord(int dim, const Vec3<double>& p, const Vec3<double>& v, const Vec3<double>& c, double r)
{
    double a = 0, b = 0, k = 0;
    for (int i = 0; i < dim; ++i) {
        const double w = p[i] - c[i];
        a += v[i] * v[i];
        b += w * v[i];
        k += w * w;
    }
    k -= r * r;
    const double disc = b * b - a * k;
    if (a == 0 || disc <= 0) return std::nullopt;
    const double sq = std::sqrt(disc);
    // Stable roots of a s^2 + 2 b s + k.
    const double q = b >= 0 ? -(b + sq) : -(b - sq);
    double s0 = q / a, s1 = q != 0 ? k / q : s0;
    if (s0 > s1) std::swap(s0, s1);
    return std::pair{s0, s1};
}

struct StopWalk {};

struct Ignore {
    void on_segment(const Segment<double>&) {}
    void on_event(const Event<double>&) {}
};

inline Vec3<double> sample_local(const std::vector<double>& u, int dim)
{
    Vec3<double> p{0, 0, 0};
    for (int a = 0; a < dim; ++a) p[a] = u[a];
    return p;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pathological starts

struct StartClass {
    bool pathological = false;
    double t_hit = 0;
    std::optional<SplittingEdge> edge;
    std::optional<int> vertex;
    double horizon = 0;
};

inline StartClass classify_start(const Manifold& m, const ManifoldPoint<double>& q, const Direction<double>& dir, double horizon)
{
    if (!(horizon > 0)) throw std::invalid_argument("horizon must be positive");
    StartClass out;
    out.horizon = horizon;
    struct Sink {
        StartClass& out;
        void on_segment(const Segment<double>&) {}
        void on_event(const Event<double>& e)
        {
            if (e.kind != EventKind::SingularHit) return;
            out.edge = e.edge;
            out.vertex = e.vertex;
        }
    } sink{out};
    WalkResult<double> w = walk(m, q, dir, horizon, sink);
    out.pathological = w.terminated_by == Termination::SingularHit;
    out.t_hit = out.pathological ? w.end_time : 0;
    return out;
}

// ---------------------------------------------------------------------------
// Hitting times

/// First time the flow from q enters G, or nullopt if not within the horizon.
/// Throws StartPathological if the flow hits a singular element first.
inline std::optional<double> hitting_time(const Manifold& m, const ManifoldPoint<double>& q, const Direction<double>& dir, const TargetSet& g,
                                          double horizon)
{
    const int dim = m.dim();
    if (g.contains(dim, q)) return 0.0;
    std::optional<double> hit;
    struct Sink {
        int dim;
        const Direction<double>& dir;
        const TargetSet& g;
        std::optional<double>& hit;
        void on_segment(const Segment<double>& s)
        {
            if (s.cell != g.center.cell) return;
            auto chord = detail::ball_chord(dim, s.from, dir.v, g.center.local, g.radius);
            if (!chord) return;
            const double dur = s.t1 - s.t0;
            auto [s0, s1] = *chord;
            if (s1 <= 0 || s0 >= dur) return;
            hit = s.t0 + std::max(s0, 0.0);
            throw detail::StopWalk{};
        }
        void on_event(const Event<double>&) {}
    } sink{dim, dir, g, hit};
    WalkResult<double> w;
    try {
        w = walk(m, q, dir, horizon, sink);
    } catch (const detail::StopWalk&) {
        return hit;
    }
    if (w.terminated_by != Termination::TMax) throw StartPathological("flow hits a singular element at t=" + std::to_string(w.end_time), w.end_time);
    return std::nullopt;
}

struct TStarReport {
    double t_star = 0;       /// arc length
    double t_star_time = 0;  /// flow time
    double forward_max = 0, backward_max = 0;  /// flow time, per direction
    std::size_t n_starts = 0;
    std::size_t pathological = 0;  /// starts skipped in one direction
    double missed_fraction = 0;
    double horizon = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::size_t, double>> history;  /// (n_starts, t_star)
    bool stable = true;
};

namespace detail {

inline std::vector<ManifoldPoint<double>> spread_starts(const Manifold& m, std::size_t n, std::uint64_t seed)
{
    std::vector<ManifoldPoint<double>> out;
    out.reserve(n);
    const auto pts = sobol_points(m.dim(), n, seed);
    for (std::size_t k = 0; k < n; ++k) out.push_back({m.cells()[k % m.size()], sample_local(pts[k], m.dim())});
    return out;
}

}  // namespace detail

/// Largest hitting time of G over spread starts, flowing both ways.
inline TStarReport estimate_t_star(const Manifold& m, const Direction<double>& dir, const TargetSet& g, std::size_t n_starts, double horizon,
                                   std::uint64_t seed = 0, unsigned threads = 0)
{
    if (n_starts < 100) throw std::invalid_argument("estimate_t_star needs at least 100 starts");
    validate_target(m, g);
    TStarReport rep;
    rep.n_starts = n_starts;
    rep.horizon = horizon;
    rep.seed = seed;
    if (g.shape == TargetSet::Shape::Whole) return rep;

    const auto starts = detail::spread_starts(m, n_starts, seed);
    const Direction<double> back = dir.negated();
    struct One {
        double fwd = 0, bwd = 0;
        bool missed = false;
        int pathological = 0;
    };
    auto res = parallel_map<One>(
        starts.size(),
        [&](std::size_t i) {
            One o;
            for (int way = 0; way < 2; ++way) {
                try {
                    auto t = hitting_time(m, starts[i], way == 0 ? dir : back, g, horizon);
                    if (!t) o.missed = true;
                    else (way == 0 ? o.fwd : o.bwd) = *t;
                } catch (const StartPathological&) {
                    o.pathological++;
                }
            }
            return o;
        },
        threads);
    std::size_t missed = 0;
    for (const auto& o : res) {
        rep.forward_max = std::max(rep.forward_max, o.fwd);
        rep.backward_max = std::max(rep.backward_max, o.bwd);
        rep.pathological += o.pathological;
        missed += o.missed;
    }
    rep.missed_fraction = static_cast<double>(missed) / starts.size();
    rep.t_star_time = std::max(rep.forward_max, rep.backward_max);
    rep.t_star = rep.t_star_time * dir.speed();
    rep.history.push_back({n_starts, rep.t_star});
    if (missed > 0)
        throw HorizonTooSmall(std::to_string(missed) + " of " + std::to_string(starts.size()) + " starts do not reach the target by t=" + std::to_string(horizon),
                              rep.missed_fraction);
    return rep;
}

/// Doubles the number of starts from 100 until T* moves by less than 1%.
inline TStarReport estimate_t_star_stable(const Manifold& m, const Direction<double>& dir, const TargetSet& g, double horizon, std::size_t max_starts = 25600,
                                          std::uint64_t seed = 0, unsigned threads = 0)
{
    std::vector<std::pair<std::size_t, double>> history;
    TStarReport rep;
    for (std::size_t n = 100; n <= max_starts; n *= 2) {
        TStarReport next = estimate_t_star(m, dir, g, n, horizon, seed, threads);
        history.push_back({n, next.t_star});
        const bool settled = history.size() >= 2 && std::fabs(next.t_star - rep.t_star) <= 0.01 * std::max(rep.t_star, next.t_star);
        rep = next;
        if (settled || rep.t_star == 0) {
            rep.history = history;
            rep.stable = true;
            return rep;
        }
    }
    rep.history = history;
    rep.stable = false;
    return rep;
}

// ---------------------------------------------------------------------------
// Visiting frequency

struct FrequencySample {
    ManifoldPoint<double> start;
    bool backward = false;  /// segment runs along -v from the start
    double length = 0;      /// |L|, arc length
    double inside = 0;      /// arc length of L inside G
    double ratio() const { return length > 0 ? inside / length : 0; }
};

struct FrequencyReport {
    TargetSet g;
    std::string direction;
    std::vector<FrequencySample> samples;
    double t_star = 0;  /// arc length
    double c5 = 0;      /// 2 * t_star
    double bound = 0;   /// r / (8 t_star)
    double min_ratio = 0;
    double mean_ratio = 0;
    std::size_t rejected = 0;  /// starts pathological both ways
    std::size_t chain_failures = 0;
    std::uint64_t seed = 0;
};

/// Arc length of the flow segment of length |L| from q inside G.
/// Throws StartPathological if the segment is cut short by a singular element.
inline double length_inside(const Manifold& m, const ManifoldPoint<double>& q, const Direction<double>& dir, const TargetSet& g, double length)
{
    const double speed = dir.speed();
    if (g.shape == TargetSet::Shape::Whole) {
        WalkResult<double> w = walk(m, q, dir, length / speed, detail::Ignore{});
        if (w.terminated_by != Termination::TMax) throw StartPathological("segment meets a singular element", w.end_time);
        return length;
    }
    double inside = 0;
    struct Sink {
        int dim;
        const Direction<double>& dir;
        const TargetSet& g;
        double& inside;
        void on_segment(const Segment<double>& s)
        {
            if (s.cell != g.center.cell) return;
            auto chord = detail::ball_chord(dim, s.from, dir.v, g.center.local, g.radius);
            if (!chord) return;
            const double lo = std::max(chord->first, 0.0), hi = std::min(chord->second, s.t1 - s.t0);
            if (hi > lo) inside += hi - lo;
        }
        void on_event(const Event<double>&) {}
    } sink{m.dim(), dir, g, inside};
    WalkResult<double> w = walk(m, q, dir, length / speed, sink);
    if (w.terminated_by != Termination::TMax) throw StartPathological("segment meets a singular element", w.end_time);
    return inside * speed;
}

/// The chain lambda >= (r/2)(floor(|L|/T*) - 1) >= r |L| / (8 T*), term by term.
inline bool frequency_chain_holds(const FrequencySample& s, const TargetSet& g, double t_star)
{
    if (g.shape == TargetSet::Shape::Whole) return s.inside >= s.length * (1 - 1e-12);
    if (!(t_star > 0)) return false;
    const double r = g.radius;
    const double middle = r / 2 * (std::floor(s.length / t_star) - 1);
    const double slack = 1e-9 * std::max(1.0, s.length);
    return s.inside + slack >= middle && middle + slack >= r * s.length / (8 * t_star);
}

/// Samples segments of each given arc length and measures their time in G.
/// t_star is the arc-length hitting bound for the half-radius target.
inline FrequencyReport visiting_frequency(const Manifold& m, const Direction<double>& dir, const TargetSet& g, double t_star,
                                          const std::vector<double>& lengths, std::size_t per_length, std::uint64_t seed = 0, unsigned threads = 0)
{
    validate_target(m, g);
    FrequencyReport rep;
    rep.g = g;
    rep.direction = dir.str();
    rep.t_star = t_star;
    rep.c5 = 2 * t_star;
    rep.seed = seed;
    rep.bound = g.shape == TargetSet::Shape::Whole ? 1.0 : (t_star > 0 ? g.radius / (8 * t_star) : std::numeric_limits<double>::infinity());
    for (double L : lengths)
        if (L < rep.c5) throw std::invalid_argument("segment length " + std::to_string(L) + " is below 2 T* = " + std::to_string(rep.c5));

    const auto starts = detail::spread_starts(m, per_length * lengths.size(), seed);
    const Direction<double> back = dir.negated();
    struct One {
        std::optional<FrequencySample> s;
    };
    auto res = parallel_map<One>(
        starts.size(),
        [&](std::size_t i) {
            One o;
            const double L = lengths[i / per_length];
            for (int way = 0; way < 2 && !o.s; ++way) {
                try {
                    double in = length_inside(m, starts[i], way == 0 ? dir : back, g, L);
                    o.s = FrequencySample{starts[i], way == 1, L, in};
                } catch (const StartPathological&) {
                }
            }
            return o;
        },
        threads);

    double sum = 0;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& o : res) {
        if (!o.s) {
            rep.rejected++;
            continue;
        }
        rep.samples.push_back(*o.s);
        rep.min_ratio = std::min(rep.min_ratio, o.s->ratio());
        sum += o.s->ratio();
        if (!frequency_chain_holds(*o.s, g, t_star)) rep.chain_failures++;
    }
    if (!rep.samples.empty()) rep.mean_ratio = sum / rep.samples.size();
    else rep.min_ratio = 0;
    return rep;
}

// ---------------------------------------------------------------------------
// Coverage

struct CoverageReport {
    double eps = 0;
    int n = 0;                       /// subdivisions per axis
    std::vector<double> first_visit;  /// per subcell, cell-major; negative if unvisited
    std::size_t visited = 0;
    bool complete = false;
    double t_cover = 0;  /// max first visit when complete
    double horizon = 0;
};

/// First-visit times of the ceil(1/eps)^dim subcells of every cube.
inline CoverageReport coverage_time(const Manifold& m, const ManifoldPoint<double>& q, const Direction<double>& dir, double eps, double horizon)
{
    if (!(eps > 0 && eps <= 1)) throw std::invalid_argument("eps must lie in (0, 1]");
    const int dim = m.dim();
    CoverageReport rep;
    rep.eps = eps;
    rep.n = static_cast<int>(std::ceil(1 / eps - 1e-12));
    rep.horizon = horizon;
    std::size_t per_cell = 1;
    for (int a = 0; a < dim; ++a) per_cell *= rep.n;
    rep.first_visit.assign(per_cell * m.size(), -1);

    struct Sink {
        const Manifold& m;
        const Direction<double>& dir;
        CoverageReport& rep;
        std::size_t per_cell;
        std::vector<double> cuts;
        void visit(const CellId& cell, const Vec3<double>& p, double t)
        {
            std::size_t k = 0;
            for (int a = m.dim() - 1; a >= 0; --a) k = k * rep.n + std::clamp(static_cast<int>(std::floor(p[a] * rep.n)), 0, rep.n - 1);
            double& slot = rep.first_visit[*m.cell_index(cell) * per_cell + k];
            if (slot >= 0) return;
            slot = t;
            if (++rep.visited == rep.first_visit.size()) throw detail::StopWalk{};
        }
        void on_segment(const Segment<double>& s)
        {
            const double dur = s.t1 - s.t0;
            cuts.assign({0.0, dur});
            for (int a = 0; a < m.dim(); ++a) {
                if (dir.v[a] == 0) continue;
                for (int j = 1; j < rep.n; ++j) {
                    double c = (static_cast<double>(j) / rep.n - s.from[a]) / dir.v[a];
                    if (c > 0 && c < dur) cuts.push_back(c);
                }
            }
            std::sort(cuts.begin(), cuts.end());
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                if (cuts[i + 1] - cuts[i] <= 0) continue;
                const double mid = (cuts[i] + cuts[i + 1]) / 2;
                Vec3<double> p = s.from;
                for (int a = 0; a < m.dim(); ++a) p[a] += mid * dir.v[a];
                visit(s.cell, p, s.t0 + cuts[i]);
            }
        }
        void on_event(const Event<double>&) {}
    } sink{m, dir, rep, per_cell, {}};
    try {
        WalkResult<double> w = walk(m, q, dir, horizon, sink);
        if (w.terminated_by != Termination::TMax) throw StartPathological("flow hits a singular element at t=" + std::to_string(w.end_time), w.end_time);
    } catch (const detail::StopWalk&) {
    }
    rep.complete = rep.visited == rep.first_visit.size();
    if (rep.complete) rep.t_cover = *std::max_element(rep.first_visit.begin(), rep.first_visit.end());
    return rep;
}

}  // namespace polyflow
