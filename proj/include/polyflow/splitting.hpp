#pragma once

// Ball spreading and colour splitting.
//
// A ball is a deterministic cloud of sample points. Its projection to the
// unit torus is a translated ball at every time, so at "clean" checkpoints,
// when that projection stays clear of every face, each sample lies in the
// interior of one cube. Two samples belong to the same fragment iff they
// occupy the same cubes at every clean checkpoint.

#include "polyflow/parallel.hpp"
#include "polyflow/sampling.hpp"
#include "polyflow/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyflow {

enum class Colour { White, Silver, Uncoloured };

inline const char* to_string(Colour c)
{
    switch (c) {
    case Colour::White: return "white";
    case Colour::Silver: return "silver";
    case Colour::Uncoloured: return "uncoloured";
    }
    return "?";
}

struct InvalidBall : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Ball {
    ManifoldPoint<double> center;
    double radius = 0.25;
    Colour colour = Colour::Uncoloured;
};

inline void validate_ball(const Manifold& m, const Ball& b)
{
    if (!m.has_cell(b.center.cell)) throw InvalidBall("ball centre cell " + to_string(b.center.cell) + " is not in the manifold");
    if (!(b.radius > 0)) throw InvalidBall("ball radius must be positive");
    for (int a = 0; a < m.dim(); ++a) {
        double x = b.center.local[a];
        if (!(x - b.radius > 0 && x + b.radius < 1)) throw InvalidBall("ball does not fit inside its cube");
    }
}

/// Times k*dt in [0, t_max] (plus t_max itself) at which the projected ball
/// of radius r about `center` moved along `v` keeps a margin from every face.
inline std::vector<double> clean_checkpoints(int dim, const Vec3<double>& center, const Vec3<double>& v, double r, double t_max, double dt = 1.0 / 64)
{
    auto clean = [&](double t) {
        for (int a = 0; a < dim; ++a) {
            double x = center[a] + t * v[a];
            x -= std::floor(x);
            if (std::min(x, 1 - x) <= r + 1e-9) return false;
        }
        return true;
    };
    std::vector<double> out;
    const auto n = static_cast<long long>(std::floor(t_max / dt + 1e-12));
    for (long long k = 0; k <= n; ++k)
        if (clean(k * dt)) out.push_back(k * dt);
    if ((out.empty() || out.back() < t_max) && clean(t_max)) out.push_back(t_max);
    return out;
}

/// Flow of one sample: the cell index at each checkpoint.
struct SampleTrack {
    ManifoldPoint<double> start, end;
    std::vector<int> cells;
    bool lost = false;  /// terminated on a splitting edge
    double lost_at = 0;
};

inline std::vector<SampleTrack> track_samples(const Manifold& m, const std::vector<ManifoldPoint<double>>& starts, const Direction<double>& dir,
                                              double t_max, const std::vector<double>& checkpoints, unsigned threads = 0)
{
    return parallel_map<SampleTrack>(
        starts.size(),
        [&](std::size_t i) {
            SampleTrack s;
            s.start = starts[i];
            struct Sink {
                const Manifold& m;
                const std::vector<double>& cps;
                std::vector<int>& cells;
                void on_segment(const Segment<double>& seg)
                {
                    while (cells.size() < cps.size() && cps[cells.size()] <= seg.t1) cells.push_back(static_cast<int>(*m.cell_index(seg.cell)));
                }
                void on_event(const Event<double>&) {}
            } sink{m, checkpoints, s.cells};
            WalkResult<double> w = walk(m, starts[i], dir, t_max, sink);
            s.end = w.end;
            if (w.terminated_by != Termination::TMax) {
                s.lost = true;
                s.lost_at = w.end_time;
            } else {
                while (s.cells.size() < checkpoints.size()) s.cells.push_back(static_cast<int>(*m.cell_index(w.end.cell)));
            }
            return s;
        },
        threads);
}

struct BallFragment {
    std::vector<int> itinerary;        /// cell index at each clean checkpoint
    std::vector<std::size_t> samples;  /// indices into the ball's sample list
    double white_fraction = 0;
};

struct EvolveResult {
    std::vector<double> checkpoints;
    std::vector<SampleTrack> samples;
    std::vector<BallFragment> fragments;
    std::vector<std::size_t> lost;
};

inline std::vector<ManifoldPoint<double>> ball_samples(const Manifold& m, const Ball& b, std::size_t n, std::uint64_t seed = 0)
{
    std::vector<ManifoldPoint<double>> out;
    out.reserve(n);
    for (const auto& o : ball_offsets(m.dim(), b.radius, n, seed)) {
        ManifoldPoint<double> p = b.center;
        for (int a = 0; a < m.dim(); ++a) p.local[a] += o[a];
        out.push_back(p);
    }
    return out;
}

/// Flows `n_samples` points of the ball for t_max and groups them into fragments.
inline EvolveResult evolve_ball(const Manifold& m, const Ball& ball, const Direction<double>& dir, double t_max, std::size_t n_samples,
                                std::uint64_t seed = 0, unsigned threads = 0)
{
    validate_ball(m, ball);
    if (n_samples < 100) throw std::invalid_argument("evolve_ball needs at least 100 samples");
    EvolveResult r;
    r.checkpoints = clean_checkpoints(m.dim(), ball.center.local, dir.v, ball.radius, t_max);
    r.samples = track_samples(m, ball_samples(m, ball, n_samples, seed), dir, t_max, r.checkpoints, threads);
    std::map<std::vector<int>, std::size_t> by_itinerary;
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        if (r.samples[i].lost) {
            r.lost.push_back(i);
            continue;
        }
        auto [it, inserted] = by_itinerary.emplace(r.samples[i].cells, r.fragments.size());
        if (inserted) r.fragments.push_back({r.samples[i].cells, {}, ball.colour == Colour::White ? 1.0 : 0.0});
        r.fragments[it->second].samples.push_back(i);
    }
    // Largest first, ties by itinerary, so output does not depend on sample order.
    std::sort(r.fragments.begin(), r.fragments.end(), [](const BallFragment& a, const BallFragment& b) {
        return a.samples.size() != b.samples.size() ? a.samples.size() > b.samples.size() : a.itinerary < b.itinerary;
    });
    return r;
}

/// Normals of the cutting planes spanned by v and each axis.
inline std::array<Vec3<double>, 3> cut_normals(const Vec3<double>& v)
{
    std::array<Vec3<double>, 3> out;
    for (int a = 0; a < 3; ++a) {
        Vec3<double> e{0, 0, 0};
        e[a] = 1;
        out[a] = {v[1] * e[2] - v[2] * e[1], v[2] * e[0] - v[0] * e[2], v[0] * e[1] - v[1] * e[0]};
    }
    return out;
}

inline bool pairwise_non_parallel(const std::array<Vec3<double>, 3>& n, double tol = 1e-9)
{
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const Vec3<double>& a = n[i];
            const Vec3<double>& b = n[j];
            Vec3<double> c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
            double na = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
            double nb = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
            double nc = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
            if (na <= tol || nb <= tol || nc <= tol * na * nb) return false;
        }
    return true;
}

// ---------------------------------------------------------------------------
// Colour experiment

enum class SplitCase { Case1, Case2, Inconclusive };

inline const char* to_string(SplitCase c)
{
    switch (c) {
    case SplitCase::Case1: return "Case1";
    case SplitCase::Case2: return "Case2";
    case SplitCase::Inconclusive: return "Inconclusive";
    }
    return "?";
}

struct ColourWitness {
    double t = 0;
    std::size_t itinerary_length = 0;  /// checkpoints up to and including t
    double white_fraction = 0;
    CellId cell;
};

struct ColourReport {
    SplitCase result = SplitCase::Case2;
    std::optional<ColourWitness> witness;
    std::vector<Colour> per_cube_colours;  /// by cell index, at the last checkpoint
    std::size_t samples = 0, samples_lost = 0;
    double t_max = 0;
    std::size_t checkpoints = 0;
};

struct ColourOptions {
    double radius = 0.25;  /// coverage radius r; balls evolve at r/2
    Vec3<double> position{0.5, 0.5, 0.5};
    std::set<int> white{0};  /// cell indices coloured white, the rest silver
    double mixed_threshold = 0.05;
    double loss_threshold = 0.01;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

inline ColourReport colour_experiment(const Manifold& m, const Direction<double>& dir, double t_max, std::size_t n_samples, const ColourOptions& o = {})
{
    if (m.size() < 2) throw std::invalid_argument("colour experiment needs at least 2 cells");
    const double r = o.radius / 2;
    const std::size_t s = m.size();

    std::vector<ManifoldPoint<double>> starts;
    std::vector<Colour> colour;
    for (std::size_t c = 0; c < s; ++c) {
        Ball b{{m.cells()[c], o.position}, r, o.white.count(static_cast<int>(c)) ? Colour::White : Colour::Silver};
        validate_ball(m, b);
        for (auto& p : ball_samples(m, b, n_samples, o.seed)) {
            starts.push_back(p);
            colour.push_back(b.colour);
        }
    }
    const auto checkpoints = clean_checkpoints(m.dim(), o.position, dir.v, r, t_max);
    const auto tracks = track_samples(m, starts, dir, t_max, checkpoints, o.threads);

    ColourReport rep;
    rep.samples = starts.size();
    rep.t_max = t_max;
    rep.checkpoints = checkpoints.size();
    for (const auto& tr : tracks) rep.samples_lost += tr.lost;

    std::vector<std::size_t> white(s), silver(s);
    for (std::size_t k = 0; k < checkpoints.size(); ++k) {
        std::fill(white.begin(), white.end(), 0);
        std::fill(silver.begin(), silver.end(), 0);
        for (std::size_t i = 0; i < tracks.size(); ++i) {
            if (tracks[i].lost) continue;
            (colour[i] == Colour::White ? white : silver)[tracks[i].cells[k]]++;
        }
        for (std::size_t c = 0; c < s; ++c) {
            const double total = static_cast<double>(white[c] + silver[c]);
            if (total == 0) continue;
            const double wf = white[c] / total;
            if (!rep.witness && wf >= o.mixed_threshold && 1 - wf >= o.mixed_threshold) rep.witness = ColourWitness{checkpoints[k], k + 1, wf, m.cells()[c]};
        }
        if (rep.witness) break;
    }
    // Colours at the last checkpoint (or the start when there is none).
    rep.per_cube_colours.assign(s, Colour::Uncoloured);
    std::fill(white.begin(), white.end(), 0);
    std::fill(silver.begin(), silver.end(), 0);
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        if (tracks[i].lost) continue;
        std::size_t c = checkpoints.empty() ? *m.cell_index(starts[i].cell) : static_cast<std::size_t>(tracks[i].cells.back());
        (colour[i] == Colour::White ? white : silver)[c]++;
    }
    for (std::size_t c = 0; c < s; ++c)
        if (white[c] + silver[c] > 0) rep.per_cube_colours[c] = white[c] >= silver[c] ? Colour::White : Colour::Silver;

    if (rep.witness) rep.result = SplitCase::Case1;
    else if (rep.samples_lost > o.loss_threshold * rep.samples) rep.result = SplitCase::Inconclusive;
    else rep.result = SplitCase::Case2;
    return rep;
}

// ---------------------------------------------------------------------------
// Multiplicity

struct MultiplicityReport {
    int grid_n = 0;
    std::vector<int> m_hat;            /// distinct cells seen per torus grid cell
    std::vector<std::size_t> records;  /// flowed positions binned per grid cell
    int m0 = 0;
    std::size_t samples = 0;
    double t_max = 0;
    bool stable = true;
    std::vector<std::pair<double, int>> history;  /// (t_max, m0) of the doubling runs
};

inline MultiplicityReport estimate_multiplicity(const Manifold& m, const Ball& ball, const Direction<double>& dir, double t_max, int grid_n,
                                                std::size_t n_samples, std::uint64_t seed = 0, unsigned threads = 0)
{
    validate_ball(m, ball);
    if (grid_n < 4) throw std::invalid_argument("grid must be at least 4");
    const int dim = m.dim();
    std::size_t bins = 1;
    for (int a = 0; a < dim; ++a) bins *= static_cast<std::size_t>(grid_n);
    double vmax = 0;
    for (int a = 0; a < dim; ++a) vmax = std::max(vmax, std::fabs(dir.v[a]));
    const double dt = 1.0 / (2.0 * grid_n * vmax);

    auto bin_of = [&](const Vec3<double>& p) {
        std::size_t b = 0;
        for (int a = dim - 1; a >= 0; --a) {
            int k = std::clamp(static_cast<int>(std::floor(p[a] * grid_n)), 0, grid_n - 1);
            b = b * grid_n + k;
        }
        return b;
    };

    struct Local {
        std::vector<std::pair<std::size_t, int>> hits;  /// (bin, cell index)
    };
    const auto starts = ball_samples(m, ball, n_samples, seed);
    auto per_sample = parallel_map<Local>(
        starts.size(),
        [&](std::size_t i) {
            Local out;
            struct Sink {
                const Manifold& m;
                const Direction<double>& dir;
                double dt;
                long long next = 0;
                Local& out;
                decltype(bin_of)& bin;
                void on_segment(const Segment<double>& s)
                {
                    const int c = static_cast<int>(*m.cell_index(s.cell));
                    while (next * dt < s.t1 || (next * dt == s.t1 && next * dt == s.t0)) {
                        double t = next * dt;
                        Vec3<double> p = s.from;
                        for (int a = 0; a < m.dim(); ++a) p[a] += (t - s.t0) * dir.v[a];
                        out.hits.push_back({bin(p), c});
                        ++next;
                    }
                }
                void on_event(const Event<double>&) {}
            } sink{m, dir, dt, 0, out, bin_of};
            WalkResult<double> w = walk(m, starts[i], dir, t_max, sink);
            if (w.terminated_by == Termination::TMax && sink.next * dt <= t_max)
                out.hits.push_back({bin_of(w.end.local), static_cast<int>(*m.cell_index(w.end.cell))});
            return out;
        },
        threads);

    MultiplicityReport rep;
    rep.grid_n = grid_n;
    rep.samples = starts.size();
    rep.t_max = t_max;
    rep.records.assign(bins, 0);
    std::vector<std::set<int>> seen(bins);
    for (const auto& l : per_sample)
        for (const auto& [b, c] : l.hits) {
            rep.records[b]++;
            seen[b].insert(c);
        }
    rep.m_hat.resize(bins);
    std::map<int, std::size_t> votes;
    for (std::size_t b = 0; b < bins; ++b) {
        rep.m_hat[b] = static_cast<int>(seen[b].size());
        if (rep.records[b] >= 10) votes[rep.m_hat[b]]++;
    }
    // Mode; ties go to the larger value.
    std::size_t best = 0;
    for (const auto& [val, n] : votes)
        if (n >= best) {
            best = n;
            rep.m0 = val;
        }
    rep.history.push_back({t_max, rep.m0});
    return rep;
}

/// Doubles t_max from t_start until m0 is unchanged over two doublings.
inline MultiplicityReport estimate_multiplicity_stable(const Manifold& m, const Ball& ball, const Direction<double>& dir, double t_start, int grid_n,
                                                       std::size_t n_samples, int max_doublings = 8, std::uint64_t seed = 0, unsigned threads = 0)
{
    std::vector<std::pair<double, int>> history;
    MultiplicityReport rep;
    double t = t_start;
    for (int k = 0; k <= max_doublings; ++k, t *= 2) {
        rep = estimate_multiplicity(m, ball, dir, t, grid_n, n_samples, seed, threads);
        history.push_back({t, rep.m0});
        const std::size_t h = history.size();
        if (h >= 3 && history[h - 1].second == history[h - 2].second && history[h - 2].second == history[h - 3].second) {
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
// No-return check

template <class T>
struct NoReturnResult {
    bool returned = false;
    T t{};
    std::optional<SplittingEdge> edge;
    std::size_t starts = 0;
    std::size_t skipped = 0;  /// start points that could not be placed (barriers)
    T t_max{};
};

namespace detail {

/// The manifold point through which the flow leaves the y-edge point `q`
/// (ambient coordinates) in direction v.
template <class T>
std::optional<ManifoldPoint<T>> leave_edge(const Manifold& m, const Vec3<T>& q, const Vec3<T>& v)
{
    using S = ScalarTraits<T>;
    std::optional<ManifoldPoint<T>> at;
    auto floor_int = [](const T& x) { return static_cast<int>(std::floor(S::to_double(x) + 1e-12)); };
    const int y = floor_int(q[1]);
    // Prefer the cube the flow enters; otherwise any cube holding the edge.
    for (int pass = 0; pass < 2 && !at; ++pass)
        for (int dx : {0, -1})
            for (int dz : {0, -1}) {
                if (at) break;
                const int X = floor_int(q[0]) + dx, Z = floor_int(q[2]) + dz;
                const bool inward = (dx == 0) == (v[0] > T(0)) && (dz == 0) == (v[2] > T(0));
                if (pass == 0 && !inward) continue;
                CellId c{{X, y, Z}};
                if (!m.has_cell(c)) continue;
                at = ManifoldPoint<T>{c, {T(q[0] - T(X)), T(q[1] - T(y)), T(q[2] - T(Z))}};
            }
    if (!at) return std::nullopt;
    for (int step = 0; step < 2; ++step) {
        bool moved = false;
        for (int a : {0, 2}) {
            const bool out = (v[a] > T(0) && at->local[a] == T(1)) || (v[a] < T(0) && at->local[a] == T(0));
            if (!out) continue;
            FaceRef f{at->cell, axis_from(a), v[a] > T(0) ? Side::Plus : Side::Minus};
            auto [t0, t1] = tangential_axes(f.axis);
            // Leaving through both faces at once: cross this one first, as if
            // from just inside the other.
            auto bias = [&](int t) {
                const bool outward = (v[t] > T(0) && at->local[t] == T(1)) || (v[t] < T(0) && at->local[t] == T(0));
                return outward ? -sign_of(v[t]) : sign_of(v[t]);
            };
            const Portal* p = m.find_portal(f, face_uv(m, f.axis, at->local), Vec2<int>{bias(t0), bias(t1)});
            if (!p) return std::nullopt;
            at = m.enter(*at, *p);
            moved = true;
        }
        if (!moved) break;
    }
    return at;
}

}  // namespace detail

/// Flows from `n_points` points spread along the y-edge and reports the
/// earliest time any of them meets a y-direction splitting edge.
template <class T>
NoReturnResult<T> check_no_return(const Manifold& m, const Direction<T>& dir, const SplittingEdge& edge, const T& t_max, std::size_t n_points = 64,
                                  unsigned threads = 0)
{
    if (m.dim() != 3) throw std::invalid_argument("no-return check needs a 3-manifold");
    if (edge.kind != EdgeKind::CubeEdge || edge.direction != Axis::Y) throw std::invalid_argument("no-return check needs a y-direction edge");
    if (dir.v[0] == T(0) || dir.v[2] == T(0)) throw std::invalid_argument("direction must be transversal to the edge");

    NoReturnResult<T> out;
    out.t_max = t_max;
    if (!(t_max > T(0))) return out;
    struct Hit {
        bool hit = false, skipped = false;
        T t{};
        SplittingEdge edge;
    };
    const T length = T(ScalarTraits<T>::from(Rational(edge.to[1] - edge.from[1])));
    auto hits = parallel_map<Hit>(
        n_points,
        [&](std::size_t k) {
            Hit h;
            Vec3<T> q{ScalarTraits<T>::from(edge.from[0]), ScalarTraits<T>::from(edge.from[1]), ScalarTraits<T>::from(edge.from[2])};
            q[1] += length * T(2 * static_cast<long long>(k) + 1) / T(2 * static_cast<long long>(n_points));
            auto start = detail::leave_edge<T>(m, q, dir.v);
            if (!start) {
                h.skipped = true;
                return h;
            }
            struct Sink {
                Hit& h;
                void on_segment(const Segment<T>&) {}
                void on_event(const Event<T>& e)
                {
                    if (e.kind == EventKind::SingularHit && e.edge && e.edge->direction == Axis::Y) {
                        h.hit = true;
                        h.t = e.time;
                        h.edge = *e.edge;
                    }
                }
            } sink{h};
            walk(m, *start, dir, t_max, sink);
            return h;
        },
        threads);
    out.starts = n_points;
    for (const auto& h : hits) {
        out.skipped += h.skipped;
        if (h.hit && (!out.returned || h.t < out.t)) {
            out.returned = true;
            out.t = h.t;
            out.edge = h.edge;
        }
    }
    return out;
}

/// All y-direction splitting edges of the manifold.
inline std::vector<SplittingEdge> y_edges(const Manifold& m)
{
    std::vector<SplittingEdge> out;
    for (const auto& e : m.splitting_edges())
        if (e.kind == EdgeKind::CubeEdge && e.direction == Axis::Y) out.push_back(e);
    return out;
}

}  // namespace polyflow
