#pragma once

// Exact arithmetic used throughout the library. Every correctness-bearing
// comparison is done on integers or rationals; doubles only appear as
// advisory "log views" computed at the last moment.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace udw {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline BigInt ipow(BigInt base, unsigned exp) {
    BigInt out = 1;
    while (exp) {
        if (exp & 1u) out *= base;
        base *= base;
        exp >>= 1u;
    }
    return out;
}

inline Rat rpow(const Rat& base, int exp) {
    if (exp < 0) {
        if (base == 0) throw std::domain_error("rpow: 0 to negative power");
        Rat p = rpow(base, -exp);
        return Rat(denominator(p), numerator(p));
    }
    Rat out = 1;
    Rat b = base;
    unsigned e = static_cast<unsigned>(exp);
    while (e) {
        if (e & 1u) out *= b;
        b *= b;
        e >>= 1u;
    }
    return out;
}

// log2 of a positive big integer, accurate to double precision even when the
// value does not fit in a double.
inline double log2_big(const BigInt& v) {
    if (v <= 0) throw std::domain_error("log2_big: nonpositive argument");
    const unsigned bits = msb(v);  // floor(log2 v)
    if (bits <= 62) return std::log2(v.convert_to<double>());
    // keep the top 62 bits, remember how many we shifted away
    const unsigned shift = bits - 62;
    BigInt top = v >> shift;
    return std::log2(top.convert_to<double>()) + static_cast<double>(shift);
}

inline double log2_rat(const Rat& r) {
    if (r < 0) throw std::domain_error("log2_rat: negative argument");
    if (r == 0) return -std::numeric_limits<double>::infinity();
    return log2_big(numerator(r)) - log2_big(denominator(r));
}

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

// Canonical wire format for exact rationals: "num/den" reduced, or just
// "num" when the denominator is 1.
inline std::string rat_to_string(const Rat& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

// Accepts "n", "n/d" and decimal strings like "0.02" (read exactly as 2/100).
inline Rat parse_rat(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("parse_rat: empty string");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        BigInt num(text.substr(0, slash));
        BigInt den(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("parse_rat: zero denominator");
        return Rat(num, den);
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) return Rat(BigInt(text));
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    if (digits.empty() || digits == "-" || digits == "+")
        throw std::invalid_argument("parse_rat: malformed decimal");
    BigInt num(digits);
    BigInt den = ipow(10, static_cast<unsigned>(text.size() - dot - 1));
    return Rat(num, den);
}

}  // namespace udw
