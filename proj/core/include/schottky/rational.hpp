#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace schottky {

using Integer = mpz_class;
using Rational = mpq_class;

std::string to_string(const Rational& q);
std::string to_string(const Integer& z);

// Accepts "p", "p/q", and plain decimals such as "0.01" or "1e-4".
Rational parse_rational(std::string_view text);

Integer floor(const Rational& q);
Integer ceil(const Rational& q);
Rational pow(const Rational& base, unsigned long e);
Rational pow2(long e);

// Directed square roots with relative precision of about 2^-bits.
// Both are exact when q is the square of a rational.
Rational sqrt_lower(const Rational& q, unsigned bits = 64);
Rational sqrt_upper(const Rational& q, unsigned bits = 64);
bool exact_sqrt(const Rational& q, Rational& root);

// sqrt(a) + sqrt(b) <= sqrt(c), decided without square roots.
bool sqrt_sum_le(const Rational& a, const Rational& b, const Rational& c);
// sqrt(a) + sqrt(b) < sqrt(c).
bool sqrt_sum_lt(const Rational& a, const Rational& b, const Rational& c);

// The rational with smallest denominator in [lo, hi].
Rational simplest_between(const Rational& lo, const Rational& hi);

// Nearest multiple of 2^-bits.
Rational round_dyadic(const Rational& q, unsigned bits);

// floor(log2 |q|) for q != 0.
long ilog2(const Rational& q);

// Smallest 4^-k (k >= 0) that is >= q, for 0 < q <= 1.
Rational power_of_four_above(const Rational& q);
// Largest 4^-k that is <= q, for 0 < q.
Rational power_of_four_below(const Rational& q);

double to_double(const Rational& q);

}  // namespace schottky
