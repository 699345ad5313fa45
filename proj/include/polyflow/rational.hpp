#pragma once

// Exact rationals and the scalar traits that let the geometry and the tracer
// run either on doubles or on exact fractions.

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace polyflow {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "3", "-1/2", "0.125" or "1e-3" into an exact rational.
inline Rational parse_rational(std::string_view text)
{
    std::string s(text);
    auto trim = [](std::string& x) {
        while (!x.empty() && std::isspace(static_cast<unsigned char>(x.front()))) x.erase(x.begin());
        while (!x.empty() && std::isspace(static_cast<unsigned char>(x.back()))) x.pop_back();
    };
    trim(s);
    if (s.empty()) throw std::invalid_argument("empty rational");
    if (auto slash = s.find('/'); slash != std::string::npos) {
        std::string num = s.substr(0, slash), den = s.substr(slash + 1);
        trim(num);
        trim(den);
        if (num.empty() || den.empty()) throw std::invalid_argument("malformed rational '" + s + "'");
        Rational n = parse_rational(num), d = parse_rational(den);
        if (d == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
        return n / d;
    }
    // Decimal with optional exponent, converted exactly.
    std::size_t i = 0;
    bool negative = false;
    if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
    BigInt mantissa = 0;
    int scale = 0;
    bool digits = false, point = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c >= '0' && c <= '9') {
            mantissa = mantissa * 10 + (c - '0');
            if (point) ++scale;
            digits = true;
        } else if (c == '.' && !point) {
            point = true;
        } else {
            break;
        }
    }
    if (!digits) throw std::invalid_argument("malformed rational '" + s + "'");
    int exponent = 0;
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') throw std::invalid_argument("malformed rational '" + s + "'");
        std::size_t used = 0;
        try {
            exponent = std::stoi(s.substr(i + 1), &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("malformed exponent in '" + s + "'");
        }
        if (i + 1 + used != s.size()) throw std::invalid_argument("malformed rational '" + s + "'");
    }
    int shift = exponent - scale;
    BigInt ten = 1;
    for (int k = 0; k < std::abs(shift); ++k) ten *= 10;
    Rational value = shift >= 0 ? Rational(mantissa * ten) : Rational(mantissa, ten);
    return negative ? Rational(-value) : value;
}

inline std::string to_string(const Rational& q)
{
    if (denominator(q) == 1) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Exact floor of a rational as an integer.
inline BigInt floor_int(const Rational& q)
{
    BigInt n = numerator(q), d = denominator(q);
    BigInt f = n / d;
    if (n < 0 && f * d != n) f -= 1;
    return f;
}

/// Scalar traits: tolerance for geometric predicates and conversions.
template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
    static constexpr bool exact = false;
    /// Distance below which a point counts as lying on a splitting edge.
    static double tolerance() { return 1e-9; }
    /// One-sided perturbation used to pick a side at regular vertices.
    static double nudge() { return 1e-7; }
    static double from(const Rational& q) { return polyflow::to_double(q); }
    static double floor(double x) { return std::floor(x); }
    static double to_double(double x) { return x; }
};

template <>
struct ScalarTraits<Rational> {
    static constexpr bool exact = true;
    static Rational tolerance() { return Rational(0); }
    static Rational nudge() { return Rational(1, 1000000000); }
    static Rational from(const Rational& q) { return q; }
    static Rational floor(const Rational& x) { return Rational(floor_int(x)); }
    static double to_double(const Rational& x) { return polyflow::to_double(x); }
};

template <class T>
bool near_zero(const T& x)
{
    using std::abs;
    if constexpr (ScalarTraits<T>::exact) {
        return x == 0;
    } else {
        return abs(x) <= ScalarTraits<T>::tolerance();
    }
}

template <class T>
bool near_equal(const T& a, const T& b)
{
    return near_zero<T>(T(a - b));
}

}  // namespace polyflow
