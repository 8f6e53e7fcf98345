#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

namespace qmt {

// Exact rational scalar. GMP keeps values canonical (lowest terms,
// positive denominator) through arithmetic; anything constructed from
// raw num/den must be canonicalized before use.
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline double to_double(const Rational& q) { return q.get_d(); }

// Exact conversion; every finite double is a dyadic rational.
inline Rational rational_from_double(double x) { return Rational(x); }

// "num/den" with den omitted when 1. Matches GMP's get_str.
inline std::string to_string(const Rational& q) { return q.get_str(); }

// Accepts "num", "num/den", optional leading sign. Returns nullopt on junk.
std::optional<Rational> parse_rational(const std::string& text);

// Best rational approximation to x with denominator <= max_den, via
// continued-fraction convergents and semiconvergents.
Rational round_to_denominator(const Rational& x, unsigned long max_den);

}  // namespace qmt
