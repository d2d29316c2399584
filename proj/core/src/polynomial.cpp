#include "schottky/polynomial.hpp"

#include <utility>

#include "schottky/errors.hpp"

namespace schottky {

Polynomial::Polynomial(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

void Polynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

Rational Polynomial::operator()(const Rational& x) const {
  Rational acc;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<Rational> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<long>(i);
  return Polynomial(std::move(d));
}

Polynomial Polynomial::shifted(const Rational& c) const {
  // Repeated synthetic division (Taylor shift), O(n^2).
  std::vector<Rational> a = coeffs_;
  std::size_t n = a.size();
  if (c == 0 || n <= 1) return *this;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t k = n - 1; k-- > i;) a[k] += c * a[k + 1];
  return Polynomial(std::move(a));
}

Polynomial Polynomial::monic() const {
  if (is_zero()) return *this;
  std::vector<Rational> c = coeffs_;
  Rational lead = c.back();
  for (auto& x : c) x /= lead;
  return Polynomial(std::move(c));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<Rational> c(a.coeffs_.size() + b.coeffs_.size() - 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(c));
}

void divmod(const Polynomial& a, const Polynomial& b, Polynomial& q, Polynomial& r) {
  if (b.is_zero()) throw PreconditionError("polynomial division by zero");
  std::vector<Rational> rem = a.coeffs();
  long db = b.degree();
  std::vector<Rational> quo;
  if (a.degree() >= db) quo.assign(static_cast<std::size_t>(a.degree() - db + 1), 0);
  for (long k = a.degree() - db; k >= 0; --k) {
    Rational f = rem[static_cast<std::size_t>(k + db)] / b.leading();
    quo[static_cast<std::size_t>(k)] = f;
    if (f == 0) continue;
    for (long i = 0; i <= db; ++i) rem[static_cast<std::size_t>(k + i)] -= f * b.coeffs()[static_cast<std::size_t>(i)];
  }
  q = Polynomial(std::move(quo));
  r = Polynomial(std::move(rem));
}

Polynomial gcd(const Polynomial& a, const Polynomial& b) {
  Polynomial x = a, y = b;
  while (!y.is_zero()) {
    Polynomial q, r;
    divmod(x, y, q, r);
    x = std::move(y);
    y = r.monic();
  }
  return x.monic();
}

Polynomial squarefree_part(const Polynomial& p) {
  if (p.degree() <= 0) return p;
  Polynomial g = gcd(p, p.derivative());
  Polynomial q, r;
  divmod(p, g, q, r);
  return q.monic();
}

Polynomial characteristic_polynomial(const Matrix& m) {
  if (!m.square()) throw DimensionMismatch("characteristic polynomial of non-square matrix");
  std::size_t n = m.rows();
  std::vector<Rational> c(n + 1);
  c[n] = 1;
  Matrix mk(n, n);  // M_0 = 0
  for (std::size_t k = 1; k <= n; ++k) {
    Matrix next = m * mk;
    for (std::size_t i = 0; i < n; ++i) next(i, i) += c[n - k + 1];
    mk = std::move(next);
    Matrix am = m * mk;
    c[n - k] = -trace(am) / static_cast<long>(k);
  }
  return Polynomial(std::move(c));
}

namespace {

std::size_t sign_variations(const std::vector<Rational>& c) {
  std::size_t v = 0;
  int last = 0;
  for (const auto& x : c) {
    int s = sgn(x);
    if (s == 0) continue;
    if (last != 0 && s != last) ++v;
    last = s;
  }
  return v;
}

}  // namespace

std::size_t root_multiplicity(const Polynomial& p, const Rational& c) {
  Polynomial s = p.shifted(c);
  std::size_t k = 0;
  while (k < s.coeffs().size() && s.coeffs()[k] == 0) ++k;
  return k;
}

std::size_t count_roots_above(const Polynomial& p, const Rational& c) {
  // For real-rooted polynomials Descartes' rule is exact.
  Polynomial s = p.shifted(c);
  return sign_variations(s.coeffs());
}

namespace {

Rational cauchy_bound(const Polynomial& p) {
  Rational m;
  for (long i = 0; i < p.degree(); ++i) {
    Rational r = abs(p.coeffs()[static_cast<std::size_t>(i)] / p.leading());
    if (r > m) m = r;
  }
  return m + 1;
}

bool narrow_enough(const RootEnclosure& e, const Rational& rel_width) {
  if (e.exact) return true;
  Rational scale = abs(e.upper);
  if (abs(e.lower) > scale) scale = abs(e.lower);
  return e.upper - e.lower <= rel_width * scale;
}

// Bisect (lower, upper] containing exactly one distinct root of the
// square-free polynomial s, probing for an exact rational root.
RootEnclosure bisect(const Polynomial& s, RootEnclosure e, const Rational& rel_width) {
  std::size_t above_upper = count_roots_above(s, e.upper);
  for (int iter = 0; iter < 100000 && !narrow_enough(e, rel_width); ++iter) {
    if (s(e.upper) == 0) {
      e.lower = e.upper;
      e.exact = true;
      break;
    }
    Rational probe = simplest_between(e.lower, e.upper);
    if (probe != e.lower && s(probe) == 0) {
      e.lower = e.upper = probe;
      e.exact = true;
      break;
    }
    Rational mid = (e.lower + e.upper) / 2;
    if (count_roots_above(s, mid) > above_upper) {
      e.lower = mid;
    } else {
      e.upper = mid;
    }
  }
  return e;
}

}  // namespace

RootEnclosure isolate_root_from_top(const Polynomial& p, std::size_t j, const Rational& rel_width) {
  if (p.degree() < 1) throw PreconditionError("root isolation of constant polynomial");
  Polynomial s = squarefree_part(p);
  Rational bound = cauchy_bound(s);
  RootEnclosure e;
  e.lower = -bound;
  e.upper = bound;
  if (count_roots_above(s, e.lower) < j) throw PreconditionError("fewer real roots than requested");
  // Shrink until (lower, upper] holds exactly the j-th largest distinct root.
  for (int iter = 0; iter < 100000; ++iter) {
    std::size_t lo_count = count_roots_above(s, e.lower);
    std::size_t hi_count = count_roots_above(s, e.upper);
    if (lo_count == j && hi_count == j - 1) break;
    Rational mid = (e.lower + e.upper) / 2;
    std::size_t mid_count = count_roots_above(s, mid);
    if (mid_count >= j)
      e.lower = mid;
    else
      e.upper = mid;
  }
  e = bisect(s, e, rel_width);
  e.multiplicity = e.exact ? root_multiplicity(p, e.upper)
                           : count_roots_above(p, e.lower) - count_roots_above(p, e.upper);
  return e;
}

RootEnclosure refine_root(const Polynomial& p, RootEnclosure e, const Rational& rel_width) {
  if (e.exact) return e;
  Polynomial s = squarefree_part(p);
  std::size_t mult = e.multiplicity;
  e = bisect(s, e, rel_width);
  e.multiplicity = mult;
  return e;
}

}  // namespace schottky
