#pragma once

// CSV, JSON and SVG writers for traces and experiment results.

#include "polyflow/exceptional.hpp"
#include "polyflow/kronecker.hpp"
#include "polyflow/saddle.hpp"
#include "polyflow/splitting.hpp"
#include "polyflow/stats.hpp"

#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <string>

namespace polyflow::report {

using nlohmann::json;

/// Shortest text that reads back to the same double.
inline std::string num(double x)
{
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}
inline std::string num(const Rational& q) { return to_string(q); }

inline json cell_json(const CellId& c) { return json::array({c.index[0], c.index[1], c.index[2]}); }

/// Leading comment line carrying the run configuration, so the body stays
/// comparable across runs.
inline void csv_config(std::ostream& out, const json& config)
{
    if (!config.is_null()) out << "# config " << config.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Traces

template <class T>
void trace_csv(std::ostream& out, const Trace<T>& tr, const json& config = {})
{
    csv_config(out, config);
    out << "t_enter,t_exit,cell_i,cell_j,cell_k,x0,y0,z0,x1,y1,z1,event_kind\n";
    std::size_t e = 0;
    for (const auto& s : tr.segments) {
        while (e < tr.events.size() && tr.events[e].time < s.t1 && !near_equal<T>(tr.events[e].time, s.t1)) ++e;
        std::string kind = "t_max";
        if (e < tr.events.size() && near_equal<T>(tr.events[e].time, s.t1)) kind = to_string(tr.events[e].kind);
        else if (tr.terminated_by != Termination::TMax && &s == &tr.segments.back()) kind = to_string(tr.terminated_by);
        out << num(s.t0) << ',' << num(s.t1);
        for (int a = 0; a < 3; ++a) out << ',' << s.cell.index[a];
        for (int a = 0; a < 3; ++a) out << ',' << num(s.from[a]);
        for (int a = 0; a < 3; ++a) out << ',' << num(s.to[a]);
        out << ',' << kind << '\n';
    }
}

template <class T>
json trace_json(const Trace<T>& tr)
{
    json j;
    j["terminated_by"] = to_string(tr.terminated_by);
    j["end_time"] = num(tr.end_time);
    j["end_cell"] = cell_json(tr.end.cell);
    j["end_local"] = json::array({num(tr.end.local[0]), num(tr.end.local[1]), num(tr.end.local[2])});
    j["segments"] = tr.segments.size();
    j["events"] = tr.events.size();
    if (!tr.events.empty() && tr.events.back().kind == EventKind::SingularHit) {
        const auto& ev = tr.events.back();
        json hit;
        if (ev.vertex) hit["vertex"] = *ev.vertex;
        if (ev.edge) {
            hit["edge_from"] = json::array({num(ev.edge->from[0]), num(ev.edge->from[1]), num(ev.edge->from[2])});
            hit["edge_to"] = json::array({num(ev.edge->to[0]), num(ev.edge->to[1]), num(ev.edge->to[2])});
        }
        j["singular_hit"] = hit;
    }
    return j;
}

namespace detail {

/// Bounding box of the cells in the (x, y) plane.
inline std::array<int, 4> plane_box(const Manifold& m)
{
    std::array<int, 4> b{1 << 30, 1 << 30, -(1 << 30), -(1 << 30)};
    for (const auto& c : m.cells()) {
        b[0] = std::min(b[0], c.index[0]);
        b[1] = std::min(b[1], c.index[1]);
        b[2] = std::max(b[2], c.index[0] + 1);
        b[3] = std::max(b[3], c.index[1] + 1);
    }
    return b;
}

inline void svg_open(std::ostream& out, const std::array<int, 4>& b, double scale)
{
    const double w = (b[2] - b[0]) * scale + 20, h = (b[3] - b[1]) * scale + 20;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h) << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h)
        << "\">\n";
}

}  // namespace detail

/// The cells of a surface with the trace drawn on top, y pointing up.
template <class T>
void trace_svg(std::ostream& out, const Manifold& m, const Trace<T>& tr, double scale = 200)
{
    if (m.dim() != 2) throw std::invalid_argument("SVG export needs a surface");
    const auto b = detail::plane_box(m);
    auto X = [&](double x) { return num(10 + (x - b[0]) * scale); };
    auto Y = [&](double y) { return num(10 + (b[3] - y) * scale); };
    detail::svg_open(out, b, scale);
    for (const auto& c : m.cells())
        out << "<rect x=\"" << X(c.index[0]) << "\" y=\"" << Y(c.index[1] + 1) << "\" width=\"" << num(scale) << "\" height=\"" << num(scale)
            << "\" fill=\"#f4f4f4\" stroke=\"#888\"/>\n";
    for (const auto& s : tr.segments) {
        const double x0 = s.cell.index[0] + ScalarTraits<T>::to_double(s.from[0]), y0 = s.cell.index[1] + ScalarTraits<T>::to_double(s.from[1]);
        const double x1 = s.cell.index[0] + ScalarTraits<T>::to_double(s.to[0]), y1 = s.cell.index[1] + ScalarTraits<T>::to_double(s.to[1]);
        out << "<line x1=\"" << X(x0) << "\" y1=\"" << Y(y0) << "\" x2=\"" << X(x1) << "\" y2=\"" << Y(y1) << "\" stroke=\"#c03\" stroke-width=\"1\"/>\n";
    }
    for (const auto& v : m.vertices()) {
        if (!v.singular) continue;
        for (const auto& s : v.sectors)
            out << "<circle cx=\"" << X(s.cell.index[0] + to_double(s.local[0])) << "\" cy=\"" << Y(s.cell.index[1] + to_double(s.local[1]))
                << "\" r=\"3\" fill=\"#000\"/>\n";
    }
    out << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Directions

inline void saddles_csv(std::ostream& out, const std::vector<SaddleConnection>& cs, const json& config = {})
{
    csv_config(out, config);
    out << "slope_num,slope_den,length,v0,v1,dx,dy\n";
    for (const auto& c : cs) {
        auto [n, d] = c.slope();
        out << n << ',' << d << ',' << num(c.length) << ',' << c.v0 << ',' << c.v1 << ',' << to_string(c.dx) << ',' << to_string(c.dy) << '\n';
    }
}

inline void lines_csv(std::ostream& out, const std::vector<ExceptionalLine>& ls, const json& config = {})
{
    csv_config(out, config);
    out << "c1,c2,dm,n2,q2,a,b,c\n";
    for (const auto& l : ls)
        out << to_string(l.c1) << ',' << to_string(l.c2) << ',' << l.dm << ',' << l.n2 << ',' << l.q2 << ',' << to_string(l.a) << ',' << to_string(l.b) << ','
            << to_string(l.c) << '\n';
}

inline json kronecker_json(const KroneckerVerdict& v)
{
    json j;
    j["result"] = v.relation ? "RationalRelation" : "NoRelationUpTo";
    if (v.relation) j["witness"] = json::array({v.witness[0], v.witness[1], v.witness[2]});
    else j["bound"] = v.bound;
    j["proven"] = v.proven;
    j["exact"] = v.exact;
    j["verdict"] = v.str();
    return j;
}

// ---------------------------------------------------------------------------
// Splitting

inline json colour_json(const Manifold& m, const ColourReport& r)
{
    json j;
    j["case"] = to_string(r.result);
    if (r.witness) {
        j["witness"] = {{"t", r.witness->t},
                        {"itinerary_length", r.witness->itinerary_length},
                        {"white_fraction", r.witness->white_fraction},
                        {"cell", cell_json(r.witness->cell)}};
    } else {
        j["witness"] = nullptr;
    }
    json colours = json::array();
    for (std::size_t c = 0; c < r.per_cube_colours.size(); ++c) colours.push_back({{"cell", cell_json(m.cells()[c])}, {"colour", to_string(r.per_cube_colours[c])}});
    j["per_cube_colours"] = colours;
    j["samples"] = r.samples;
    j["samples_lost"] = r.samples_lost;
    j["t_max"] = r.t_max;
    j["checkpoints"] = r.checkpoints;
    return j;
}

inline json evolve_json(const EvolveResult& r)
{
    json frags = json::array();
    for (const auto& f : r.fragments) frags.push_back({{"samples", f.samples.size()}, {"itinerary_length", f.itinerary.size()}, {"white_fraction", f.white_fraction}});
    return {{"fragments", frags}, {"fragment_count", r.fragments.size()}, {"samples_lost", r.lost.size()}, {"checkpoints", r.checkpoints.size()}};
}

/// One row per sample: its fragment (-1 if lost), start and end point.
inline void fragments_csv(std::ostream& out, const EvolveResult& r, const json& config = {})
{
    csv_config(out, config);
    std::vector<int> owner(r.samples.size(), -1);
    for (std::size_t f = 0; f < r.fragments.size(); ++f)
        for (auto i : r.fragments[f].samples) owner[i] = static_cast<int>(f);
    out << "sample,fragment,x0,y0,z0,cell_i,cell_j,cell_k,x1,y1,z1\n";
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        const auto& s = r.samples[i];
        out << i << ',' << owner[i];
        for (int a = 0; a < 3; ++a) out << ',' << num(s.start.local[a]);
        for (int a = 0; a < 3; ++a) out << ',' << s.end.cell.index[a];
        for (int a = 0; a < 3; ++a) out << ',' << num(s.end.local[a]);
        out << '\n';
    }
}

inline json multiplicity_json(const MultiplicityReport& r)
{
    json hist = json::array();
    for (const auto& [t, m0] : r.history) hist.push_back({{"t_max", t}, {"m0", m0}});
    return {{"grid", r.grid_n}, {"m0", r.m0}, {"samples", r.samples}, {"t_max", r.t_max}, {"stable", r.stable}, {"history", hist}, {"m_hat", r.m_hat}};
}

inline void multiplicity_csv(std::ostream& out, const MultiplicityReport& r, int dim, const json& config = {})
{
    csv_config(out, config);
    out << "i,j,k,records,m_hat\n";
    for (std::size_t b = 0; b < r.m_hat.size(); ++b) {
        std::size_t rest = b;
        int idx[3] = {0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            idx[a] = static_cast<int>(rest % r.grid_n);
            rest /= r.grid_n;
        }
        out << idx[0] << ',' << idx[1] << ',' << idx[2] << ',' << r.records[b] << ',' << r.m_hat[b] << '\n';
    }
}

template <class T>
json noreturn_json(const NoReturnResult<T>& r)
{
    json j;
    j["result"] = r.returned ? "ReturnAt" : "NoReturn";
    if (r.returned) {
        j["t"] = num(r.t);
        j["edge_from"] = json::array({num(r.edge->from[0]), num(r.edge->from[1]), num(r.edge->from[2])});
        j["edge_to"] = json::array({num(r.edge->to[0]), num(r.edge->to[1]), num(r.edge->to[2])});
    }
    j["starts"] = r.starts;
    j["skipped"] = r.skipped;
    j["t_max"] = num(r.t_max);
    return j;
}

// ---------------------------------------------------------------------------
// Stats

inline json target_json(const TargetSet& g)
{
    if (g.shape == TargetSet::Shape::Whole) return {{"shape", "whole"}};
    return {{"shape", "ball"}, {"cell", cell_json(g.center.cell)}, {"center", {g.center.local[0], g.center.local[1], g.center.local[2]}}, {"radius", g.radius}};
}

inline json tstar_json(const TStarReport& r)
{
    json hist = json::array();
    for (const auto& [n, t] : r.history) hist.push_back({{"n_starts", n}, {"t_star", t}});
    return {{"t_star", r.t_star},           {"t_star_time", r.t_star_time}, {"forward_max", r.forward_max}, {"backward_max", r.backward_max},
            {"n_starts", r.n_starts},       {"pathological", r.pathological}, {"missed_fraction", r.missed_fraction}, {"horizon", r.horizon},
            {"stable", r.stable},           {"history", hist}};
}

inline json frequency_json(const FrequencyReport& r)
{
    return {{"target", target_json(r.g)},
            {"direction", r.direction},
            {"t_star", r.t_star},
            {"c5", r.c5},
            {"bound", r.bound},
            {"min_ratio", r.samples.empty() ? json(nullptr) : json(r.min_ratio)},
            {"mean_ratio", r.mean_ratio},
            {"samples", r.samples.size()},
            {"rejected", r.rejected},
            {"chain_failures", r.chain_failures}};
}

inline void frequency_csv(std::ostream& out, const FrequencyReport& r, const json& config = {})
{
    csv_config(out, config);
    out << "cell_i,cell_j,cell_k,x,y,z,backward,length,inside,ratio\n";
    for (const auto& s : r.samples) {
        for (int a = 0; a < 3; ++a) out << s.start.cell.index[a] << ',';
        for (int a = 0; a < 3; ++a) out << num(s.start.local[a]) << ',';
        out << (s.backward ? 1 : 0) << ',' << num(s.length) << ',' << num(s.inside) << ',' << num(s.ratio()) << '\n';
    }
}

inline json coverage_json(const CoverageReport& r)
{
    json j{{"eps", r.eps}, {"subdivisions", r.n}, {"subcells", r.first_visit.size()}, {"visited", r.visited}, {"complete", r.complete}, {"horizon", r.horizon}};
    j["t_cover"] = r.complete ? json(r.t_cover) : json("incomplete at horizon");
    return j;
}

inline void coverage_csv(std::ostream& out, const Manifold& m, const CoverageReport& r, const json& config = {})
{
    csv_config(out, config);
    out << "cell_i,cell_j,cell_k,i,j,k,first_visit\n";
    std::size_t per = r.first_visit.size() / m.size();
    for (std::size_t idx = 0; idx < r.first_visit.size(); ++idx) {
        const CellId& c = m.cells()[idx / per];
        std::size_t rest = idx % per;
        int sub[3] = {0, 0, 0};
        for (int a = 0; a < m.dim(); ++a) {
            sub[a] = static_cast<int>(rest % r.n);
            rest /= r.n;
        }
        out << c.index[0] << ',' << c.index[1] << ',' << c.index[2] << ',' << sub[0] << ',' << sub[1] << ',' << sub[2] << ',';
        if (r.first_visit[idx] >= 0) out << num(r.first_visit[idx]);
        out << '\n';
    }
}

/// First-visit heatmap for a surface: darker means later, white means never.
inline void coverage_svg(std::ostream& out, const Manifold& m, const CoverageReport& r, double scale = 200)
{
    if (m.dim() != 2) throw std::invalid_argument("SVG export needs a surface");
    const auto b = detail::plane_box(m);
    const double cell = scale / r.n;
    double tmax = 0;
    for (double t : r.first_visit) tmax = std::max(tmax, t);
    detail::svg_open(out, b, scale);
    const std::size_t per = static_cast<std::size_t>(r.n) * r.n;
    for (std::size_t idx = 0; idx < r.first_visit.size(); ++idx) {
        const CellId& c = m.cells()[idx / per];
        const int i = static_cast<int>(idx % per % r.n), j = static_cast<int>(idx % per / r.n);
        const double t = r.first_visit[idx];
        const int shade = t < 0 ? 255 : static_cast<int>(230 - 200 * (tmax > 0 ? t / tmax : 0));
        const double x = 10 + (c.index[0] - b[0]) * scale + i * cell;
        const double y = 10 + (b[3] - c.index[1] - 1) * scale + (r.n - 1 - j) * cell;
        out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cell) << "\" height=\"" << num(cell) << "\" fill=\"rgb(" << shade << ','
            << shade << ",255)\" stroke=\"#ccc\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace polyflow::report
