#pragma once

// Lattice bookkeeping: atomic cells, their faces, and small fixed-size vectors.

#include <array>
#include <compare>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>

namespace polyflow {

enum class Axis : std::uint8_t { X = 0, Y = 1, Z = 2 };

/// `Plus` is the face at local coordinate 1 (inward normal along -axis),
/// `Minus` the face at local coordinate 0.
enum class Side : std::uint8_t { Minus = 0, Plus = 1 };

inline int index(Axis a) { return static_cast<int>(a); }
inline Axis axis_from(int i) { return static_cast<Axis>(i); }
inline Side opposite(Side s) { return s == Side::Plus ? Side::Minus : Side::Plus; }
inline char axis_name(Axis a) { return "XYZ"[index(a)]; }
inline char side_sign(Side s) { return s == Side::Plus ? '+' : '-'; }

/// The two tangential axes of a face normal to `a`, in increasing order.
inline std::array<int, 2> tangential_axes(Axis a)
{
    switch (a) {
    case Axis::X: return {1, 2};
    case Axis::Y: return {0, 2};
    default: return {0, 1};
    }
}

template <class T>
using Vec2 = std::array<T, 2>;
template <class T>
using Vec3 = std::array<T, 3>;

struct CellId {
    std::array<int, 3> index{0, 0, 0};

    friend auto operator<=>(const CellId&, const CellId&) = default;

    CellId shifted(Axis a, int delta) const
    {
        CellId c = *this;
        c.index[polyflow::index(a)] += delta;
        return c;
    }
};

inline std::string to_string(const CellId& c)
{
    std::ostringstream os;
    os << '(' << c.index[0] << ',' << c.index[1] << ',' << c.index[2] << ')';
    return os.str();
}

inline std::ostream& operator<<(std::ostream& os, const CellId& c) { return os << to_string(c); }

/// One side of one unit face of one cell. A geometric face shared by two cells
/// has two FaceRefs, one per side.
struct FaceRef {
    CellId cell;
    Axis axis = Axis::X;
    Side side = Side::Plus;

    friend auto operator<=>(const FaceRef&, const FaceRef&) = default;
};

inline std::string to_string(const FaceRef& f)
{
    return "cell=" + to_string(f.cell) + " " + side_sign(f.side) + axis_name(f.axis);
}

inline std::ostream& operator<<(std::ostream& os, const FaceRef& f) { return os << to_string(f); }

/// The FaceRef seen from the other side of the same geometric face.
inline FaceRef across(const FaceRef& f)
{
    return {f.cell.shifted(f.axis, f.side == Side::Plus ? 1 : -1), f.axis, opposite(f.side)};
}

}  // namespace polyflow
