#pragma once

// Flow directions. Components are kept both as scalars for tracing and, when
// given symbolically, as exact elements of Q(sqrt d1, sqrt d2, ...) so that
// rational independence can be decided by comparing coefficients.

#include "polyflow/lattice.hpp"
#include "polyflow/rational.hpp"

#include <cmath>
#include <cctype>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace polyflow {

/// Finite sum q0 + sum_i q_i * sqrt(d_i), d_i squarefree > 1. Key 1 holds q0.
class QuadSurd {
public:
    QuadSurd() = default;
    QuadSurd(const Rational& q) { set(1, q); }
    QuadSurd(long long q) : QuadSurd(Rational(q)) {}

    static QuadSurd sqrt_of(long long n)
    {
        if (n < 0) throw std::invalid_argument("sqrt of a negative number");
        if (n == 0) return QuadSurd();
        // n = k^2 * d with d squarefree.
        long long k = 1, d = 1, rest = n;
        for (long long p = 2; p * p <= rest; ++p) {
            while (rest % (p * p) == 0) {
                rest /= p * p;
                k *= p;
            }
            if (rest % p == 0) {
                rest /= p;
                d *= p;
            }
        }
        d *= rest;
        QuadSurd s;
        s.set(d, Rational(k));
        return s;
    }

    const std::map<long long, Rational>& terms() const { return terms_; }
    bool is_rational() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == 1); }
    Rational rational_part() const
    {
        auto it = terms_.find(1);
        return it == terms_.end() ? Rational(0) : it->second;
    }
    Rational coefficient(long long d) const
    {
        auto it = terms_.find(d);
        return it == terms_.end() ? Rational(0) : it->second;
    }
    bool is_zero() const { return terms_.empty(); }

    long double to_long_double() const
    {
        long double s = 0;
        for (const auto& [d, q] : terms_) s += q.convert_to<long double>() * std::sqrt(static_cast<long double>(d));
        return s;
    }
    double to_double() const { return static_cast<double>(to_long_double()); }

    QuadSurd operator-() const
    {
        QuadSurd r = *this;
        for (auto& [d, q] : r.terms_) q = -q;
        return r;
    }
    QuadSurd& operator+=(const QuadSurd& o)
    {
        for (const auto& [d, q] : o.terms_) set(d, coefficient(d) + q);
        return *this;
    }
    QuadSurd& operator-=(const QuadSurd& o) { return *this += -o; }
    friend QuadSurd operator+(QuadSurd a, const QuadSurd& b) { return a += b; }
    friend QuadSurd operator-(QuadSurd a, const QuadSurd& b) { return a -= b; }
    friend QuadSurd operator*(const QuadSurd& a, const QuadSurd& b)
    {
        QuadSurd r;
        for (const auto& [da, qa] : a.terms_)
            for (const auto& [db, qb] : b.terms_) {
                // sqrt(da)*sqrt(db) = g*sqrt(da*db/g^2), g = gcd(da, db).
                long long g = std::gcd(da, db);
                long long d = (da / g) * (db / g);
                r.set(d, r.coefficient(d) + qa * qb * g);
            }
        return r;
    }
    friend QuadSurd operator/(const QuadSurd& a, const Rational& q)
    {
        if (q == 0) throw std::invalid_argument("division by zero");
        QuadSurd r = a;
        for (auto& [d, c] : r.terms_) c /= q;
        return r;
    }
    friend bool operator==(const QuadSurd& a, const QuadSurd& b) { return a.terms_ == b.terms_; }

    std::string str() const
    {
        if (terms_.empty()) return "0";
        std::string s;
        for (const auto& [d, q] : terms_) {
            std::string c = to_string(q);
            if (!s.empty()) s += q < 0 ? "" : "+";
            if (d == 1) s += c;
            else if (q == 1) s += "sqrt:" + std::to_string(d);
            else if (q == -1) s += "-sqrt:" + std::to_string(d);
            else s += c + "*sqrt:" + std::to_string(d);
        }
        return s;
    }

private:
    void set(long long d, const Rational& q)
    {
        if (q == 0) terms_.erase(d);
        else terms_[d] = q;
    }

    std::map<long long, Rational> terms_;
};

namespace detail {

inline QuadSurd parse_surd_term(std::string_view term)
{
    std::string t(term);
    auto star = t.find('*');
    std::string coef = star == std::string::npos ? "" : t.substr(0, star);
    std::string body = star == std::string::npos ? t : t.substr(star + 1);
    if (body.rfind("sqrt:", 0) == 0) {
        long long n = 0;
        try {
            std::size_t used = 0;
            n = std::stoll(body.substr(5), &used);
            if (used != body.size() - 5) throw std::invalid_argument(body);
        } catch (const std::exception&) {
            throw std::invalid_argument("malformed surd '" + t + "'");
        }
        QuadSurd s = QuadSurd::sqrt_of(n);
        return coef.empty() ? s : QuadSurd(parse_rational(coef)) * s;
    }
    if (star != std::string::npos) return QuadSurd(parse_rational(coef) * parse_rational(body));
    return QuadSurd(parse_rational(t));
}

}  // namespace detail

/// Parses "sqrt:2", "1-sqrt:2", "1/2+1/2*sqrt:5", "-2*sqrt:3", "0.25", "phi".
inline QuadSurd parse_surd(std::string_view text)
{
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw std::invalid_argument("empty direction component");
    if (s == "phi" || s == "golden") return QuadSurd(Rational(1, 2)) + QuadSurd(Rational(1, 2)) * QuadSurd::sqrt_of(5);
    QuadSurd total;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= s.size(); ++i) {
        // Split at top-level signs that are not part of an exponent.
        bool end = i == s.size();
        bool sign = !end && (s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E' && s[i - 1] != '*' && s[i - 1] != '/';
        if (!end && !sign) continue;
        std::string term = s.substr(start, i - start);
        bool negative = false;
        if (!term.empty() && (term[0] == '+' || term[0] == '-')) {
            negative = term[0] == '-';
            term.erase(0, 1);
        }
        if (term.empty()) throw std::invalid_argument("malformed direction component '" + s + "'");
        QuadSurd v = detail::parse_surd_term(term);
        total += negative ? -v : v;
        start = i;
    }
    return total;
}

/// Flow direction. `exact` holds the symbolic components when known.
template <class T>
struct Direction {
    int dim = 3;
    Vec3<T> v{};
    std::vector<QuadSurd> exact;

    bool has_exact() const { return !exact.empty(); }
    double speed() const
    {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += ScalarTraits<T>::to_double(v[i]) * ScalarTraits<T>::to_double(v[i]);
        return std::sqrt(s);
    }
    Direction negated() const
    {
        Direction d = *this;
        for (auto& c : d.v) c = -c;
        for (auto& e : d.exact) e = -e;
        return d;
    }
    std::string str() const
    {
        std::string s;
        for (int i = 0; i < dim; ++i) {
            if (i) s += ",";
            if (has_exact()) s += exact[i].str();
            else if constexpr (ScalarTraits<T>::exact) s += to_string(v[i]);
            else s += std::to_string(v[i]);
        }
        return s;
    }
};

template <class T>
T surd_as(const QuadSurd& q)
{
    if constexpr (ScalarTraits<T>::exact) {
        if (!q.is_rational()) throw std::invalid_argument("irrational component " + q.str() + " in exact mode");
        return q.rational_part();
    } else {
        return static_cast<T>(q.to_long_double());
    }
}

template <class T>
Direction<T> make_direction(const std::vector<QuadSurd>& components)
{
    Direction<T> d;
    d.dim = static_cast<int>(components.size());
    if (d.dim != 2 && d.dim != 3) throw std::invalid_argument("direction needs 2 or 3 components");
    d.exact = components;
    for (int i = 0; i < d.dim; ++i) d.v[i] = surd_as<T>(components[i]);
    return d;
}

/// Comma-separated components. For surfaces a single slope "a" means (1, a);
/// for 3-manifolds a pair "a1,a2" means (a1, a2, 1).
template <class T>
Direction<T> parse_direction(std::string_view spec, int dim)
{
    std::vector<QuadSurd> parts;
    std::size_t start = 0;
    std::string s(spec);
    while (true) {
        auto comma = s.find(',', start);
        parts.push_back(parse_surd(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (dim == 2 && parts.size() == 1) parts.insert(parts.begin(), QuadSurd(1));
    if (dim == 3 && parts.size() == 2) parts.push_back(QuadSurd(1));
    if (static_cast<int>(parts.size()) != dim)
        throw std::invalid_argument("direction '" + s + "' has " + std::to_string(parts.size()) + " components, expected " + std::to_string(dim));
    return make_direction<T>(parts);
}

template <class T>
Direction<T> numeric_direction(const Vec3<T>& v, int dim)
{
    Direction<T> d;
    d.dim = dim;
    d.v = v;
    if (dim == 2) d.v[2] = T(0);
    return d;
}

}  // namespace polyflow
