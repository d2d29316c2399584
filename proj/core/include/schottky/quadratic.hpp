#pragma once

#include <string>
#include <utility>

#include "schottky/matrix.hpp"

namespace schottky::quadratic {

// a + b sqrt(D). When b != 0, D > 1 is not a perfect square; otherwise D = 1.
class QuadNum {
 public:
  QuadNum() = default;
  QuadNum(const Rational& a);  // NOLINT: rationals embed
  QuadNum(const Rational& a, const Rational& b, const Integer& D);
  static QuadNum sqrt_of(const Rational& q);

  const Rational& a() const { return a_; }
  const Rational& b() const { return b_; }
  const Integer& D() const { return D_; }
  bool is_rational() const { return b_ == 0; }

  int sign() const;
  QuadNum operator-() const { return QuadNum(-a_, -b_, D_); }
  friend QuadNum operator+(const QuadNum& x, const QuadNum& y);
  friend QuadNum operator-(const QuadNum& x, const QuadNum& y);
  friend QuadNum operator*(const QuadNum& x, const QuadNum& y);
  friend QuadNum operator/(const QuadNum& x, const QuadNum& y);

  // Rational bounds lo <= x <= hi with hi - lo <= 2^-bits * |b| * scale.
  std::pair<Rational, Rational> bounds(unsigned bits = 64) const;
  double to_double() const;
  std::string to_string() const;

 private:
  Rational a_, b_;
  Integer D_ = 1;
};

// Exact comparison, also between different quadratic fields.
int compare(const QuadNum& x, const QuadNum& y);
inline bool operator==(const QuadNum& x, const QuadNum& y) { return compare(x, y) == 0; }

// A point of P(R^2) in the slope chart t = x / y, with t = infinity for [1:0].
class CirclePoint {
 public:
  CirclePoint() = default;
  explicit CirclePoint(QuadNum t) : t_(std::move(t)) {}
  static CirclePoint infinity();
  static CirclePoint from_vector(const Rational& x, const Rational& y);

  bool is_infinity() const { return inf_; }
  bool is_rational() const { return inf_ || t_.is_rational(); }
  const QuadNum& t() const { return t_; }
  // Position on the circle as an angle in [0, 2 pi): 2 atan2(1, t).
  double angle() const;
  // Homogeneous coordinates when rational.
  std::pair<Rational, Rational> vector() const;
  std::string to_string() const;

  friend bool operator==(const CirclePoint& x, const CirclePoint& y);

 private:
  bool inf_ = false;
  QuadNum t_;
};

// Möbius action of a 2x2 rational matrix with positive determinant.
CirclePoint apply(const Matrix& g, const CirclePoint& x);

// Linear order of the chart with infinity as the largest element.
bool chart_less(const CirclePoint& x, const CirclePoint& y);
// x <= y in the cyclic order read counterclockwise starting at c.
bool cyclic_le(const CirclePoint& c, const CirclePoint& x, const CirclePoint& y);

// Arc from start to end in the direction of increasing t.
struct Arc {
  CirclePoint start;
  CirclePoint end;
  std::string to_string() const;
  friend bool operator==(const Arc&, const Arc&) = default;
};

bool in_closed(const CirclePoint& x, const Arc& a);
bool in_open(const CirclePoint& x, const Arc& a);
bool closed_disjoint(const Arc& a, const Arc& b);
// Closed arc a inside closed arc b.
bool closed_within(const Arc& a, const Arc& b);
// Closed arc a inside the open arc g.
bool closed_within_open(const Arc& a, const Arc& g);
Arc apply(const Matrix& g, const Arc& a);
// The closure of the complement of the open arc a.
inline Arc complement(const Arc& a) { return {a.end, a.start}; }
// Angular length in [0, 2 pi], for heuristics and drawing only.
double angular_length(const Arc& a);
// Rational points strictly inside the open arc, in a fixed order.
std::vector<CirclePoint> interior_points(const Arc& a, std::size_t count);

}  // namespace schottky::quadratic
