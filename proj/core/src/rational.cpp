#include "schottky/rational.hpp"

#include <cmath>
#include <string>

#include "schottky/errors.hpp"

namespace schottky {

std::string to_string(const Rational& q) { return q.get_str(); }
std::string to_string(const Integer& z) { return z.get_str(); }

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

Integer parse_integer(std::string_view s) {
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw InputError("not an integer: '" + std::string(s) + "'");
  Integer z(std::string(s), 10);
  return neg ? Integer(-z) : z;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) throw InputError("empty rational literal");
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    Integer num = parse_integer(s.substr(0, slash));
    Integer den = parse_integer(s.substr(slash + 1));
    if (den == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
    Rational q(num, den);
    q.canonicalize();
    return q;
  }
  // decimal with optional exponent
  long exponent = 0;
  std::string_view mant = s;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    mant = s.substr(0, e);
    std::string_view ex = s.substr(e + 1);
    bool neg = !ex.empty() && ex[0] == '-';
    if (!ex.empty() && (ex[0] == '-' || ex[0] == '+')) ex.remove_prefix(1);
    if (!all_digits(ex) || ex.size() > 6)
      throw InputError("bad exponent in '" + std::string(text) + "'");
    exponent = std::stol(std::string(ex));
    if (neg) exponent = -exponent;
  }
  bool neg = false;
  if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
    neg = mant[0] == '-';
    mant.remove_prefix(1);
  }
  std::string digits;
  auto dot = mant.find('.');
  if (dot == std::string_view::npos) {
    digits = std::string(mant);
  } else {
    digits = std::string(mant.substr(0, dot)) + std::string(mant.substr(dot + 1));
    exponent -= static_cast<long>(mant.size() - dot - 1);
  }
  if (!all_digits(digits)) throw InputError("not a rational: '" + std::string(text) + "'");
  Rational q(Integer(digits, 10));
  Integer ten = 10, scale;
  mpz_pow_ui(scale.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(std::labs(exponent)));
  if (exponent >= 0)
    q *= scale;
  else
    q /= scale;
  q.canonicalize();
  return neg ? Rational(-q) : q;
}

Integer floor(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

Integer ceil(const Rational& q) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

Rational pow(const Rational& base, unsigned long e) {
  Rational r;
  mpz_pow_ui(r.get_num_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(r.get_den_mpz_t(), base.get_den_mpz_t(), e);
  return r;
}

Rational pow2(long e) {
  Rational r(1);
  if (e >= 0)
    mpz_mul_2exp(r.get_num_mpz_t(), r.get_num_mpz_t(), static_cast<unsigned long>(e));
  else
    mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(), static_cast<unsigned long>(-e));
  return r;
}

namespace {

// For q = a/b > 0: s = isqrt(a*b*4^k), sqrt(q) in [s, s+1] / (b*2^k).
void sqrt_bracket(const Rational& q, unsigned bits, Integer& s, Integer& den, bool& exact) {
  Integer ab = q.get_num() * q.get_den();
  long size = static_cast<long>(mpz_sizeinbase(ab.get_mpz_t(), 2));
  long k = static_cast<long>(bits) + 2 - size / 2;
  if (k < 0) k = 0;
  Integer n = ab;
  mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), static_cast<unsigned long>(2 * k));
  Integer rem;
  mpz_sqrtrem(s.get_mpz_t(), rem.get_mpz_t(), n.get_mpz_t());
  exact = rem == 0;
  den = q.get_den();
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(k));
}

}  // namespace

bool exact_sqrt(const Rational& q, Rational& root) {
  if (q < 0) return false;
  if (mpz_perfect_square_p(q.get_num_mpz_t()) && mpz_perfect_square_p(q.get_den_mpz_t())) {
    mpz_sqrt(root.get_num_mpz_t(), q.get_num_mpz_t());
    mpz_sqrt(root.get_den_mpz_t(), q.get_den_mpz_t());
    root.canonicalize();
    return true;
  }
  return false;
}

Rational sqrt_lower(const Rational& q, unsigned bits) {
  if (q < 0) throw PreconditionError("sqrt of negative rational");
  if (q == 0) return 0;
  Rational root;
  if (exact_sqrt(q, root)) return root;
  Integer s, den;
  bool exact;
  sqrt_bracket(q, bits, s, den, exact);
  Rational r(s, den);
  r.canonicalize();
  return r;
}

Rational sqrt_upper(const Rational& q, unsigned bits) {
  if (q < 0) throw PreconditionError("sqrt of negative rational");
  if (q == 0) return 0;
  Rational root;
  if (exact_sqrt(q, root)) return root;
  Integer s, den;
  bool exact;
  sqrt_bracket(q, bits, s, den, exact);
  if (!exact) s += 1;
  Rational r(s, den);
  r.canonicalize();
  return r;
}

bool sqrt_sum_le(const Rational& a, const Rational& b, const Rational& c) {
  Rational slack = c - a - b;
  if (slack < 0) return false;
  return slack * slack >= 4 * a * b;
}

bool sqrt_sum_lt(const Rational& a, const Rational& b, const Rational& c) {
  Rational slack = c - a - b;
  if (slack <= 0) return false;
  return slack * slack > 4 * a * b;
}

namespace {

// Simplest rational in [lo, hi] with 0 <= lo <= hi, via continued fractions.
Rational simplest_nonneg(Rational lo, Rational hi) {
  Integer fl = floor(lo);
  if (fl == lo) return lo;
  if (fl < floor(hi)) return Rational(fl + 1);
  // both in (fl, fl+1)
  Rational inner = simplest_nonneg(1 / (hi - fl), 1 / (lo - fl));
  return fl + 1 / inner;
}

}  // namespace

Rational simplest_between(const Rational& lo, const Rational& hi) {
  if (lo > hi) return simplest_between(hi, lo);
  if (lo <= 0 && hi >= 0) return 0;
  if (hi < 0) return -simplest_nonneg(-hi, -lo);
  return simplest_nonneg(lo, hi);
}

Rational round_dyadic(const Rational& q, unsigned bits) {
  Rational scaled = q * pow2(static_cast<long>(bits));
  Integer n = floor(scaled + Rational(1, 2));
  return Rational(n) * pow2(-static_cast<long>(bits));
}

long ilog2(const Rational& q) {
  if (q == 0) throw PreconditionError("ilog2 of zero");
  Rational a = abs(q);
  long e = static_cast<long>(mpz_sizeinbase(a.get_num_mpz_t(), 2)) -
           static_cast<long>(mpz_sizeinbase(a.get_den_mpz_t(), 2));
  while (pow2(e) > a) --e;
  while (pow2(e + 1) <= a) ++e;
  return e;
}

Rational power_of_four_above(const Rational& q) {
  Rational r(1);
  if (q > 1) throw PreconditionError("power_of_four_above expects q <= 1");
  while (r / 4 >= q) r /= 4;
  return r;
}

Rational power_of_four_below(const Rational& q) {
  if (q <= 0) throw PreconditionError("power_of_four_below expects q > 0");
  long e = ilog2(q);
  long k = e >= 0 ? e / 2 : -((-e + 1) / 2);
  Rational r = pow2(2 * k);
  while (r > q) r /= 4;
  while (r * 4 <= q) r *= 4;
  return r;
}

double to_double(const Rational& q) { return q.get_d(); }

}  // namespace schottky
