#pragma once

// Integer relations a*x + b*y + c = 0 with max(|a|,|b|,|c|) <= H.
//
// Symbolic inputs in Q(sqrt d1, ...) are decided exactly by linear algebra on
// their coefficient vectors. Floating inputs are searched exhaustively for
// small H and by LLL reduction beyond; the LLL route also yields a provable
// lower bound on the height of any relation, which is what the reported
// certificate states.

#include "polyflow/direction.hpp"

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace polyflow {

struct KroneckerVerdict {
    bool relation = false;
    std::array<long long, 3> witness{0, 0, 0};  /// (a, b, c) when relation
    long long bound = 0;                        /// H certified when !relation
    bool proven = false;                        /// no relation at any height (exact route)
    bool exact = false;                         /// decided symbolically

    long long height() const { return std::max({std::llabs(witness[0]), std::llabs(witness[1]), std::llabs(witness[2])}); }

    std::string str() const
    {
        if (relation)
            return "RationalRelation(" + std::to_string(witness[0]) + ", " + std::to_string(witness[1]) + ", " + std::to_string(witness[2]) + ")";
        return "NoRelationUpTo(" + std::to_string(bound) + ")" + (proven ? " [independent]" : "");
    }
};

/// Exhaustive search stops at this height; the LLL route is used above it.
inline constexpr long long kExhaustiveHeight = 1000;
/// Double inputs carry about 16 digits, which bounds the height up to which
/// "no relation" means anything.
inline constexpr long long kFloatHeightCap = 10000;

namespace detail {

inline long long to_ll(const BigInt& x) { return x.convert_to<long long>(); }

/// Calls f(a, b) for every pair with max(|a|,|b|) == h.
template <class F>
void for_each_on_shell(long long h, F&& f)
{
    for (long long b = -h; b <= h; ++b) {
        f(h, b);
        f(-h, b);
    }
    for (long long a = -h + 1; a < h; ++a) {
        f(a, h);
        f(a, -h);
    }
}

inline std::array<long long, 3> canonical_sign(std::array<long long, 3> w)
{
    long long lead = w[0] != 0 ? w[0] : (w[1] != 0 ? w[1] : w[2]);
    if (lead < 0)
        for (auto& c : w) c = -c;
    return w;
}

/// Smallest-height relation for rational x = p/q, y = r/s with height <= H.
/// a*x + b*y is an integer iff (a*p*s + b*r*q) is divisible by q*s.
inline std::optional<std::array<long long, 3>> rational_pair_relation(const Rational& x, const Rational& y, long long H)
{
    const BigInt qs = denominator(x) * denominator(y);
    const BigInt ps = numerator(x) * denominator(y), rq = numerator(y) * denominator(x);
    const BigInt limit = BigInt(1) << 60;
    const bool small = qs < limit && abs(ps) < limit / (H + 1) && abs(rq) < limit / (H + 1);
    const __int128 qs_s = small ? to_ll(qs) : 0, ps_s = small ? to_ll(ps) : 0, rq_s = small ? to_ll(rq) : 0;
    std::optional<std::array<long long, 3>> best;
    long long best_h = H + 1;
    for (long long h = 1; h <= H && h < best_h; ++h) {
        for_each_on_shell(h, [&](long long a, long long b) {
            long long c = 0;
            if (small) {
                __int128 num = a * ps_s + b * rq_s;
                if (num % qs_s != 0) return;
                c = static_cast<long long>(-(num / qs_s));
            } else {
                BigInt num = BigInt(a) * ps + BigInt(b) * rq;
                if (num % qs != 0) return;
                c = to_ll(BigInt(-(num / qs)));
            }
            long long height = std::max({h, std::llabs(c)});
            if (height > H || height >= best_h) return;
            best = canonical_sign({a, b, c});
            best_h = height;
        });
    }
    return best;
}

/// Reduced row echelon nullspace of a rational matrix with 3 columns.
inline std::vector<std::array<Rational, 3>> nullspace3(std::vector<std::array<Rational, 3>> rows)
{
    std::array<int, 3> pivot_col{-1, -1, -1};
    int rank = 0;
    for (int col = 0; col < 3 && rank < static_cast<int>(rows.size()); ++col) {
        int pr = -1;
        for (int r = rank; r < static_cast<int>(rows.size()); ++r)
            if (rows[r][col] != 0) {
                pr = r;
                break;
            }
        if (pr < 0) continue;
        std::swap(rows[pr], rows[rank]);
        Rational inv = 1 / rows[rank][col];
        for (auto& x : rows[rank]) x *= inv;
        for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
            if (r == rank || rows[r][col] == 0) continue;
            Rational f = rows[r][col];
            for (int k = 0; k < 3; ++k) rows[r][k] -= f * rows[rank][k];
        }
        pivot_col[rank++] = col;
    }
    std::vector<std::array<Rational, 3>> basis;
    for (int free = 0; free < 3; ++free) {
        if (std::find(pivot_col.begin(), pivot_col.begin() + rank, free) != pivot_col.begin() + rank) continue;
        std::array<Rational, 3> v{Rational(0), Rational(0), Rational(0)};
        v[free] = 1;
        for (int r = 0; r < rank; ++r) v[pivot_col[r]] = -rows[r][free];
        basis.push_back(v);
    }
    return basis;
}

inline std::array<BigInt, 3> primitive(const std::array<Rational, 3>& v)
{
    BigInt den = 1;
    for (const auto& x : v) den = lcm(den, denominator(x));
    std::array<BigInt, 3> out;
    BigInt g = 0;
    for (int i = 0; i < 3; ++i) {
        out[i] = numerator(Rational(v[i] * den));
        g = boost::multiprecision::gcd(g, abs(out[i]));
    }
    for (auto& x : out) x /= g;
    BigInt lead = out[0] != 0 ? out[0] : (out[1] != 0 ? out[1] : out[2]);
    if (lead < 0)
        for (auto& x : out) x = -x;
    return out;
}

inline long double relation_tolerance(long double x, long double y, long long a, long long b, long long c)
{
    long double scale = std::fabs(a * x) + std::fabs(b * y) + std::fabs(static_cast<long double>(c));
    return 16 * DBL_EPSILON * std::max<long double>(1, scale);
}

/// Minimal-height (a,b,c) with |a x + b y + c| within tolerance, by shells.
inline std::optional<std::array<long long, 3>> exhaustive_relation(long double x, long double y, long long H)
{
    std::optional<std::array<long long, 3>> best;
    long long best_h = H + 1;
    for (long long h = 1; h <= H && h < best_h; ++h) {
        for_each_on_shell(h, [&](long long a, long long b) {
            long double s = a * x + b * y;
            long long c = std::llround(-s);
            long long height = std::max(h, std::llabs(c));
            if (height > H || height >= best_h) return;
            if (std::fabs(s + c) <= relation_tolerance(x, y, a, b, c)) {
                best = canonical_sign({a, b, c});
                best_h = height;
            }
        });
    }
    return best;
}

/// LLL on the rows of a 3x4 basis, delta = 0.99.
inline void lll(std::array<std::array<long double, 4>, 3>& b)
{
    auto dot = [](const std::array<long double, 4>& u, const std::array<long double, 4>& v) {
        long double s = 0;
        for (int i = 0; i < 4; ++i) s += u[i] * v[i];
        return s;
    };
    const int n = 3;
    auto gso = [&](std::array<std::array<long double, 4>, 3>& bs, std::array<std::array<long double, 3>, 3>& mu, std::array<long double, 3>& B) {
        for (int i = 0; i < n; ++i) {
            bs[i] = b[i];
            for (int j = 0; j < i; ++j) {
                mu[i][j] = dot(b[i], bs[j]) / B[j];
                for (int k = 0; k < 4; ++k) bs[i][k] -= mu[i][j] * bs[j][k];
            }
            B[i] = dot(bs[i], bs[i]);
        }
    };
    std::array<std::array<long double, 4>, 3> bs{};
    std::array<std::array<long double, 3>, 3> mu{};
    std::array<long double, 3> B{};
    gso(bs, mu, B);
    int k = 1;
    for (int iter = 0; k < n && iter < 10000; ++iter) {
        for (int j = k - 1; j >= 0; --j) {
            long double q = std::round(mu[k][j]);
            if (q != 0) {
                for (int i = 0; i < 4; ++i) b[k][i] -= q * b[j][i];
                gso(bs, mu, B);
            }
        }
        if (B[k] >= (0.99L - mu[k][k - 1] * mu[k][k - 1]) * B[k - 1]) {
            ++k;
        } else {
            std::swap(b[k], b[k - 1]);
            gso(bs, mu, B);
            k = std::max(k - 1, 1);
        }
    }
}

/// LLL search. Returns a relation if found and the height below which none exists.
inline std::pair<std::optional<std::array<long long, 3>>, long long> lll_relation(long double x, long double y, long long H)
{
    const long double W = std::pow(static_cast<long double>(4 * H), 3);
    std::array<std::array<long double, 4>, 3> b{{{1, 0, 0, W * x}, {0, 1, 0, W * y}, {0, 0, 1, W}}};
    lll(b);
    std::optional<std::array<long long, 3>> best;
    long long best_h = H + 1;
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j)
            for (int k = -2; k <= 2; ++k) {
                if (i == 0 && j == 0 && k == 0) continue;
                std::array<long double, 3> v{};
                for (int c = 0; c < 3; ++c) v[c] = i * b[0][c] + j * b[1][c] + k * b[2][c];
                std::array<long long, 3> w{std::llround(v[0]), std::llround(v[1]), std::llround(v[2])};
                long long h = std::max({std::llabs(w[0]), std::llabs(w[1]), std::llabs(w[2])});
                if (h == 0 || h > H || h >= best_h || (w[0] == 0 && w[1] == 0)) continue;
                long double r = w[0] * x + w[1] * y + w[2];
                if (std::fabs(r) <= relation_tolerance(x, y, w[0], w[1], w[2])) {
                    best = canonical_sign(w);
                    best_h = h;
                }
            }
    // Any accepted relation of height h maps to a lattice vector of squared
    // norm <= 3h^2 + (W tol)^2, and no lattice vector is shorter than the
    // smallest Gram-Schmidt norm of a reduced basis.
    auto dot = [](const std::array<long double, 4>& u, const std::array<long double, 4>& v) {
        long double s = 0;
        for (int i = 0; i < 4; ++i) s += u[i] * v[i];
        return s;
    };
    std::array<std::array<long double, 4>, 3> bs = b;
    long double min_b = std::numeric_limits<long double>::max();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < i; ++j) {
            long double m = dot(b[i], bs[j]) / dot(bs[j], bs[j]);
            for (int c = 0; c < 4; ++c) bs[i][c] -= m * bs[j][c];
        }
        min_b = std::min(min_b, dot(bs[i], bs[i]));
    }
    long double tol = relation_tolerance(x, y, H, H, H);
    long double slack = min_b - (W * tol) * (W * tol);
    long long certified = slack > 0 ? static_cast<long long>(std::floor(std::sqrt(slack / 3))) : 0;
    return {best, std::min(certified, H)};
}

}  // namespace detail

/// Exact decision for symbolic components.
inline KroneckerVerdict kronecker_test(const QuadSurd& x, const QuadSurd& y, long long H)
{
    KroneckerVerdict out;
    out.exact = true;
    std::set<long long> keys{1};
    for (const auto& [d, q] : x.terms()) keys.insert(d);
    for (const auto& [d, q] : y.terms()) keys.insert(d);
    std::vector<std::array<Rational, 3>> rows;
    for (long long d : keys) rows.push_back({x.coefficient(d), y.coefficient(d), Rational(d == 1 ? 1 : 0)});
    auto basis = detail::nullspace3(rows);
    if (basis.empty()) {
        out.bound = H;
        out.proven = true;
        return out;
    }
    if (basis.size() == 1) {
        auto w = detail::primitive(basis[0]);
        BigInt h = std::max({abs(w[0]), abs(w[1]), abs(w[2])});
        if (h <= H) {
            out.relation = true;
            for (int i = 0; i < 3; ++i) out.witness[i] = detail::to_ll(w[i]);
        } else {
            out.bound = H;
        }
        return out;
    }
    // Both rational.
    if (auto w = detail::rational_pair_relation(x.rational_part(), y.rational_part(), H)) {
        out.relation = true;
        out.witness = *w;
    } else {
        out.bound = H;
    }
    return out;
}

inline KroneckerVerdict kronecker_test(const Rational& x, const Rational& y, long long H) { return kronecker_test(QuadSurd(x), QuadSurd(y), H); }

/// Numeric search for double inputs.
inline KroneckerVerdict kronecker_test(double x, double y, long long H)
{
    KroneckerVerdict out;
    long long h = std::min(H, kFloatHeightCap);
    long double lx = x, ly = y;
    if (h <= kExhaustiveHeight) {
        if (auto w = detail::exhaustive_relation(lx, ly, h)) {
            out.relation = true;
            out.witness = *w;
        } else {
            out.bound = h;
        }
        return out;
    }
    // Small relations are found exhaustively, larger ones by reduction.
    if (auto w = detail::exhaustive_relation(lx, ly, kExhaustiveHeight)) {
        out.relation = true;
        out.witness = *w;
        return out;
    }
    auto [w, certified] = detail::lll_relation(lx, ly, h);
    if (w) {
        out.relation = true;
        out.witness = *w;
    } else {
        out.bound = std::max(certified, kExhaustiveHeight);
    }
    return out;
}

/// Relations a*x + c = 0 (is the slope of a surface direction rational?).
inline KroneckerVerdict slope_test(const QuadSurd& x, long long H)
{
    KroneckerVerdict out;
    out.exact = true;
    if (!x.is_rational()) {
        out.bound = H;
        out.proven = true;
        return out;
    }
    Rational q = x.rational_part();
    BigInt a = denominator(q), c = -numerator(q);
    if (a <= H && abs(c) <= H) {
        out.relation = true;
        out.witness = {detail::to_ll(a), 0, detail::to_ll(c)};
    } else {
        out.bound = H;
    }
    return out;
}

inline KroneckerVerdict slope_test(double x, long long H)
{
    KroneckerVerdict out;
    long long h = std::min(H, kFloatHeightCap);
    for (long long a = 1; a <= h; ++a) {
        long long c = std::llround(-a * static_cast<long double>(x));
        if (std::llabs(c) > h) continue;
        if (std::fabs(a * static_cast<long double>(x) + c) <= detail::relation_tolerance(x, 0, a, 0, c)) {
            out.relation = true;
            out.witness = {a, 0, c};
            return out;
        }
    }
    out.bound = h;
    return out;
}

/// Dispatches on whether the direction carries symbolic components. For 3D
/// directions (a1, a2, 1) this tests a1, a2, 1; for surfaces (1, a) it tests a, 1.
template <class T>
KroneckerVerdict kronecker_test(const Direction<T>& d, long long H)
{
    if (d.has_exact()) {
        const QuadSurd& last = d.exact[d.dim == 3 ? 2 : 0];
        if (!last.is_rational() || last.is_zero()) throw std::invalid_argument("normalizing component must be a nonzero rational");
        if (d.dim == 3) return kronecker_test(d.exact[0] / last.rational_part(), d.exact[1] / last.rational_part(), H);
        return slope_test(d.exact[1] / last.rational_part(), H);
    }
    auto at = [&](int i) { return ScalarTraits<T>::to_double(d.v[i]); };
    if (d.dim == 2) return slope_test(at(1) / at(0), H);
    return kronecker_test(at(0) / at(2), at(1) / at(2), H);
}

}  // namespace polyflow
