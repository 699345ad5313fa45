#pragma once

// ManifoldDescription: the JSON file format for polysquare / polycube
// manifolds. See docs/manifold-format.md for the schema.

#include "polyflow/json_lines.hpp"
#include "polyflow/lattice.hpp"
#include "polyflow/polygon.hpp"

#include "json.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyflow {

enum class GeometryErrorKind {
    InvalidDescription,
    DisconnectedRegion,
    OverlappingCells,
    UnpairedBoundaryFace,
    IncongruentRedPairing,
    PolygonTilingGap,
    OnSplittingEdge,
};

inline const char* to_string(GeometryErrorKind k)
{
    switch (k) {
    case GeometryErrorKind::InvalidDescription: return "InvalidDescription";
    case GeometryErrorKind::DisconnectedRegion: return "DisconnectedRegion";
    case GeometryErrorKind::OverlappingCells: return "OverlappingCells";
    case GeometryErrorKind::UnpairedBoundaryFace: return "UnpairedBoundaryFace";
    case GeometryErrorKind::IncongruentRedPairing: return "IncongruentRedPairing";
    case GeometryErrorKind::PolygonTilingGap: return "PolygonTilingGap";
    case GeometryErrorKind::OnSplittingEdge: return "OnSplittingEdge";
    }
    return "?";
}

class GeometryError : public std::runtime_error {
public:
    GeometryError(GeometryErrorKind kind, const std::string& detail, int line = 0)
        : std::runtime_error(format(kind, detail, line)), kind_(kind), detail_(detail), line_(line)
    {
    }

    GeometryErrorKind kind() const { return kind_; }
    const std::string& detail() const { return detail_; }
    /// 1-based source line, 0 when not tied to a file.
    int line() const { return line_; }

private:
    static std::string format(GeometryErrorKind kind, const std::string& detail, int line)
    {
        std::string s = to_string(kind);
        if (!detail.empty()) s += " " + detail;
        if (line > 0) s = "line " + std::to_string(line) + ": " + s;
        return s;
    }

    GeometryErrorKind kind_;
    std::string detail_;
    int line_;
};

struct PairingSpec {
    FaceRef a, b;
    std::string pointer;
};

struct RedSpec {
    Polygon polygon;
    FaceRef target_face;
    Polygon target_polygon;
    std::string pointer;
};

struct GatedSpec {
    FaceRef face;
    std::vector<Polygon> green;
    std::vector<RedSpec> red;
    std::string pointer;
};

struct ManifoldDescription {
    int dim = 3;
    std::string name;
    std::string notes;
    std::vector<CellId> cells;
    std::vector<PairingSpec> pairings;
    bool wraparound = false;
    std::vector<GatedSpec> gated;
    JsonLineIndex lines;

    int line_of(const std::string& pointer) const { return lines.line_of(pointer); }
};

namespace detail {

class DescriptionReader {
public:
    explicit DescriptionReader(const JsonLineIndex& lines) : lines_(lines) {}

    [[noreturn]] void fail(const std::string& pointer, const std::string& what) const
    {
        throw GeometryError(GeometryErrorKind::InvalidDescription, what + " at " + (pointer.empty() ? "/" : pointer),
                            lines_.line_of(pointer));
    }

    void only_keys(const nlohmann::json& j, const std::string& pointer, std::set<std::string> allowed) const
    {
        if (!j.is_object()) fail(pointer, "expected an object");
        for (const auto& [key, _] : j.items())
            if (!allowed.count(key)) fail(pointer + "/" + key, "unknown field '" + key + "'");
    }

    const nlohmann::json& field(const nlohmann::json& j, const std::string& pointer, const char* key) const
    {
        if (!j.contains(key)) fail(pointer, std::string("missing field '") + key + "'");
        return j.at(key);
    }

    CellId cell(const nlohmann::json& j, const std::string& pointer, int dim) const
    {
        if (!j.is_array() || (j.size() != 3 && j.size() != 2)) fail(pointer, "cell must be [i,j,k]");
        CellId c;
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number_integer()) fail(pointer + "/" + std::to_string(i), "cell index must be an integer");
            c.index[i] = j[i].get<int>();
        }
        if (dim == 2 && c.index[2] != 0) fail(pointer, "2D cells must have k = 0");
        return c;
    }

    Rational coordinate(const nlohmann::json& j, const std::string& pointer) const
    {
        try {
            if (j.is_string()) return parse_rational(j.get<std::string>());
            if (j.is_number_integer()) return Rational(j.get<long long>());
        } catch (const std::invalid_argument& e) {
            fail(pointer, e.what());
        }
        fail(pointer, "coordinate must be an integer or a rational string like \"1/2\"");
    }

    Polygon polygon(const nlohmann::json& j, const std::string& pointer) const
    {
        if (!j.is_array()) fail(pointer, "polygon must be an array of [x,y] vertices");
        std::vector<Point2Q> pts;
        for (std::size_t i = 0; i < j.size(); ++i) {
            std::string p = pointer + "/" + std::to_string(i);
            if (!j[i].is_array() || j[i].size() != 2) fail(p, "vertex must be [x,y]");
            pts.push_back({coordinate(j[i][0], p + "/0"), coordinate(j[i][1], p + "/1")});
        }
        try {
            return Polygon(std::move(pts));
        } catch (const std::invalid_argument& e) {
            fail(pointer, e.what());
        }
    }

    FaceRef face(const nlohmann::json& j, const std::string& pointer, int dim) const
    {
        only_keys(j, pointer, {"cell", "axis", "side"});
        FaceRef f;
        f.cell = cell(field(j, pointer, "cell"), pointer + "/cell", dim);
        const auto& axis = field(j, pointer, "axis");
        std::string a = axis.is_string() ? axis.get<std::string>() : "";
        if (a == "X" || a == "x") f.axis = Axis::X;
        else if (a == "Y" || a == "y") f.axis = Axis::Y;
        else if ((a == "Z" || a == "z") && dim == 3) f.axis = Axis::Z;
        else fail(pointer + "/axis", "axis must be one of X, Y" + std::string(dim == 3 ? ", Z" : ""));
        const auto& side = field(j, pointer, "side");
        std::string s = side.is_string() ? side.get<std::string>() : "";
        if (s == "+") f.side = Side::Plus;
        else if (s == "-") f.side = Side::Minus;
        else fail(pointer + "/side", "side must be \"+\" or \"-\"");
        return f;
    }

private:
    const JsonLineIndex& lines_;
};

}  // namespace detail

inline ManifoldDescription parse_description(const std::string& text)
{
    ManifoldDescription d;
    d.lines = JsonLineIndex(text);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // Byte offset to line.
        int line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw GeometryError(GeometryErrorKind::InvalidDescription, "malformed JSON", line);
    }
    detail::DescriptionReader r(d.lines);
    r.only_keys(j, "", {"dim", "name", "notes", "cells", "pairings", "wraparound", "gated_faces"});
    const auto& dim = r.field(j, "", "dim");
    if (!dim.is_number_integer() || (dim.get<int>() != 2 && dim.get<int>() != 3)) r.fail("/dim", "dim must be 2 or 3");
    d.dim = dim.get<int>();
    if (j.contains("name")) d.name = j["name"].is_string() ? j["name"].get<std::string>() : "";
    if (j.contains("notes")) d.notes = j["notes"].is_string() ? j["notes"].get<std::string>() : "";
    if (j.contains("wraparound")) {
        if (!j["wraparound"].is_boolean()) r.fail("/wraparound", "wraparound must be a boolean");
        d.wraparound = j["wraparound"].get<bool>();
    }
    const auto& cells = r.field(j, "", "cells");
    if (!cells.is_array()) r.fail("/cells", "cells must be an array");
    for (std::size_t i = 0; i < cells.size(); ++i) d.cells.push_back(r.cell(cells[i], "/cells/" + std::to_string(i), d.dim));
    if (j.contains("pairings")) {
        const auto& ps = j["pairings"];
        if (!ps.is_array()) r.fail("/pairings", "pairings must be an array");
        for (std::size_t i = 0; i < ps.size(); ++i) {
            std::string p = "/pairings/" + std::to_string(i);
            r.only_keys(ps[i], p, {"a", "b"});
            d.pairings.push_back({r.face(r.field(ps[i], p, "a"), p + "/a", d.dim), r.face(r.field(ps[i], p, "b"), p + "/b", d.dim), p});
        }
    }
    if (j.contains("gated_faces")) {
        const auto& gs = j["gated_faces"];
        if (!gs.is_array()) r.fail("/gated_faces", "gated_faces must be an array");
        for (std::size_t i = 0; i < gs.size(); ++i) {
            std::string p = "/gated_faces/" + std::to_string(i);
            r.only_keys(gs[i], p, {"face", "green", "red"});
            GatedSpec g;
            g.pointer = p;
            g.face = r.face(r.field(gs[i], p, "face"), p + "/face", d.dim);
            if (gs[i].contains("green")) {
                const auto& green = gs[i]["green"];
                if (!green.is_array()) r.fail(p + "/green", "green must be an array of polygons");
                for (std::size_t k = 0; k < green.size(); ++k) g.green.push_back(r.polygon(green[k], p + "/green/" + std::to_string(k)));
            }
            if (gs[i].contains("red")) {
                const auto& red = gs[i]["red"];
                if (!red.is_array()) r.fail(p + "/red", "red must be an array");
                for (std::size_t k = 0; k < red.size(); ++k) {
                    std::string rp = p + "/red/" + std::to_string(k);
                    r.only_keys(red[k], rp, {"polygon", "target_face", "target_polygon"});
                    RedSpec rs{r.polygon(r.field(red[k], rp, "polygon"), rp + "/polygon"),
                               r.face(r.field(red[k], rp, "target_face"), rp + "/target_face", d.dim),
                               r.polygon(r.field(red[k], rp, "target_polygon"), rp + "/target_polygon"), rp};
                    g.red.push_back(std::move(rs));
                }
            }
            d.gated.push_back(std::move(g));
        }
    }
    return d;
}

inline ManifoldDescription load_description(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw GeometryError(GeometryErrorKind::InvalidDescription, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_description(ss.str());
}

}  // namespace polyflow
