#pragma once

#include <cstddef>
#include <vector>

#include "schottky/matrix.hpp"

namespace schottky {

// Dense univariate polynomial over Q; coeffs[i] multiplies x^i.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Rational> coeffs);

  long degree() const { return static_cast<long>(coeffs_.size()) - 1; }
  const std::vector<Rational>& coeffs() const { return coeffs_; }
  const Rational& leading() const { return coeffs_.back(); }
  bool is_zero() const { return coeffs_.empty(); }

  Rational operator()(const Rational& x) const;
  Polynomial derivative() const;
  // p(x + c)
  Polynomial shifted(const Rational& c) const;
  Polynomial monic() const;

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

 private:
  void trim();
  std::vector<Rational> coeffs_;
};

void divmod(const Polynomial& a, const Polynomial& b, Polynomial& q, Polynomial& r);
Polynomial gcd(const Polynomial& a, const Polynomial& b);
Polynomial squarefree_part(const Polynomial& p);

// det(x I - m), by Faddeev-LeVerrier.
Polynomial characteristic_polynomial(const Matrix& m);

// The following assume p has only real roots.
// Number of roots strictly greater than c, with multiplicity.
std::size_t count_roots_above(const Polynomial& p, const Rational& c);
// Multiplicity of c as a root.
std::size_t root_multiplicity(const Polynomial& p, const Rational& c);

struct RootEnclosure {
  Rational lower;  // root lies in (lower, upper], or equals both when exact
  Rational upper;
  bool exact = false;
  std::size_t multiplicity = 1;
};

// Encloses the j-th largest distinct root (j >= 1) of a real-rooted p.
// Refines until upper - lower <= rel_width * |upper| or the root is found
// exactly (rational roots with small denominators are detected).
RootEnclosure isolate_root_from_top(const Polynomial& p, std::size_t j, const Rational& rel_width);

// Refine an enclosure produced by isolate_root_from_top.
RootEnclosure refine_root(const Polynomial& p, RootEnclosure e, const Rational& rel_width);

}  // namespace schottky
