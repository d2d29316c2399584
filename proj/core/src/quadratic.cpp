#include "schottky/quadratic.hpp"

#include <cmath>
#include <numbers>

#include "schottky/errors.hpp"

namespace schottky::quadratic {

namespace {

int sgn(const Rational& q) { return sgn(q.get_num()) ; }

// sign of a + b sqrt(D)
int sign_of(const Rational& a, const Rational& b, const Integer& D) {
  int sa = sgn(a), sb = sgn(b);
  if (sb == 0) return sa;
  if (sa == 0 || sa == sb) return sa == 0 ? sb : sa;
  Rational c = a * a - b * b * D;
  int sc = sgn(c);
  return sc > 0 ? sa : (sc < 0 ? sb : 0);
}

void check_field(const QuadNum& x, const QuadNum& y) {
  if (!x.is_rational() && !y.is_rational() && x.D() != y.D())
    throw PreconditionError("quadratic arithmetic across different fields");
}

Integer field_of(const QuadNum& x, const QuadNum& y) { return x.is_rational() ? y.D() : x.D(); }

}  // namespace

QuadNum::QuadNum(const Rational& a) : a_(a) {}

QuadNum::QuadNum(const Rational& a, const Rational& b, const Integer& D) : a_(a), b_(b), D_(D) {
  if (b_ == 0) D_ = 1;
}

QuadNum QuadNum::sqrt_of(const Rational& q) {
  if (q < 0) throw PreconditionError("sqrt_of: negative argument");
  Integer n = q.get_num() * q.get_den();
  if (mpz_perfect_square_p(n.get_mpz_t())) {
    Integer r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return QuadNum(Rational(r, q.get_den()));
  }
  return QuadNum(0, Rational(1, q.get_den()), n);
}

int QuadNum::sign() const { return sign_of(a_, b_, D_); }

QuadNum operator+(const QuadNum& x, const QuadNum& y) {
  check_field(x, y);
  return QuadNum(x.a_ + y.a_, x.b_ + y.b_, field_of(x, y));
}

QuadNum operator-(const QuadNum& x, const QuadNum& y) { return x + (-y); }

QuadNum operator*(const QuadNum& x, const QuadNum& y) {
  check_field(x, y);
  Integer D = field_of(x, y);
  return QuadNum(x.a_ * y.a_ + x.b_ * y.b_ * D, x.a_ * y.b_ + x.b_ * y.a_, D);
}

QuadNum operator/(const QuadNum& x, const QuadNum& y) {
  check_field(x, y);
  if (y.sign() == 0) throw PreconditionError("quadratic division by zero");
  Integer D = field_of(x, y);
  Rational norm = y.a_ * y.a_ - y.b_ * y.b_ * D;
  QuadNum conj(y.a_ / norm, -y.b_ / norm, D);
  return x * conj;
}

std::pair<Rational, Rational> QuadNum::bounds(unsigned bits) const {
  if (b_ == 0) return {a_, a_};
  Rational s = b_ * b_ * D_;
  Rational lo = sqrt_lower(s, bits), hi = sqrt_upper(s, bits);
  if (b_ > 0) return {Rational(a_ + lo), Rational(a_ + hi)};
  return {Rational(a_ - hi), Rational(a_ - lo)};
}

double QuadNum::to_double() const {
  return a_.get_d() + b_.get_d() * std::sqrt(D_.get_d());
}

std::string QuadNum::to_string() const {
  if (b_ == 0) return schottky::to_string(a_);
  std::string s = a_ == 0 ? "" : schottky::to_string(a_) + (b_ > 0 ? " + " : " - ");
  Rational mag = abs(b_);
  if (a_ == 0 && b_ < 0) s += "-";
  s += (mag == 1 ? "" : schottky::to_string(mag) + "*") + "sqrt(" + schottky::to_string(D_) + ")";
  return s;
}

int compare(const QuadNum& x, const QuadNum& y) {
  if (x.is_rational() || y.is_rational() || x.D() == y.D()) return (x - y).sign();
  // A + B sqrt(D1) + C sqrt(D2) with both roots irrational.
  Rational A = x.a() - y.a();
  const Rational& B = x.b();
  Rational C = -y.b();
  int sx = sign_of(A, B, x.D()), sy = sgn(C);
  if (sx == 0) return sy;
  if (sy == 0 || sx == sy) return sx;
  int s = sign_of(A * A + B * B * x.D() - C * C * y.D(), 2 * A * B, x.D());
  return s > 0 ? sx : (s < 0 ? sy : 0);
}

CirclePoint CirclePoint::infinity() {
  CirclePoint p;
  p.inf_ = true;
  return p;
}

CirclePoint CirclePoint::from_vector(const Rational& x, const Rational& y) {
  if (y == 0) {
    if (x == 0) throw PreconditionError("CirclePoint: zero vector");
    return infinity();
  }
  return CirclePoint(QuadNum(x / y));
}

double CirclePoint::angle() const {
  if (inf_) return 0.0;
  double a = 2.0 * std::atan2(1.0, t_.to_double());
  return a;
}

std::pair<Rational, Rational> CirclePoint::vector() const {
  if (inf_) return {1, 0};
  if (!t_.is_rational()) throw PreconditionError("CirclePoint: irrational point has no rational vector");
  return {t_.a(), 1};
}

std::string CirclePoint::to_string() const { return inf_ ? "inf" : t_.to_string(); }

bool operator==(const CirclePoint& x, const CirclePoint& y) {
  if (x.inf_ || y.inf_) return x.inf_ == y.inf_;
  return compare(x.t_, y.t_) == 0;
}

CirclePoint apply(const Matrix& g, const CirclePoint& x) {
  if (g.rows() != 2 || g.cols() != 2) throw DimensionMismatch("Möbius action needs a 2x2 matrix");
  if (x.is_infinity()) {
    if (g(1, 0) == 0) return CirclePoint::infinity();
    return CirclePoint(QuadNum(g(0, 0) / g(1, 0)));
  }
  QuadNum den = QuadNum(g(1, 0)) * x.t() + QuadNum(g(1, 1));
  if (den.sign() == 0) return CirclePoint::infinity();
  return CirclePoint((QuadNum(g(0, 0)) * x.t() + QuadNum(g(0, 1))) / den);
}

bool chart_less(const CirclePoint& x, const CirclePoint& y) {
  if (x.is_infinity()) return false;
  if (y.is_infinity()) return true;
  return compare(x.t(), y.t()) < 0;
}

bool cyclic_le(const CirclePoint& c, const CirclePoint& x, const CirclePoint& y) {
  bool wx = chart_less(x, c), wy = chart_less(y, c);  // wrapped past infinity
  if (wx != wy) return !wx;
  return !chart_less(y, x);
}

std::string Arc::to_string() const { return "[" + start.to_string() + ", " + end.to_string() + "]"; }

bool in_closed(const CirclePoint& x, const Arc& a) { return cyclic_le(a.start, x, a.end); }

bool in_open(const CirclePoint& x, const Arc& a) {
  return !(x == a.start) && !(x == a.end) && in_closed(x, a);
}

bool closed_disjoint(const Arc& a, const Arc& b) { return !in_closed(b.start, a) && !in_closed(a.start, b); }

bool closed_within(const Arc& a, const Arc& b) {
  return in_closed(a.start, b) && in_closed(a.end, b) && cyclic_le(b.start, a.start, a.end);
}

bool closed_within_open(const Arc& a, const Arc& g) {
  return in_open(a.start, g) && in_open(a.end, g) && cyclic_le(g.start, a.start, a.end);
}

Arc apply(const Matrix& g, const Arc& a) { return {apply(g, a.start), apply(g, a.end)}; }

double angular_length(const Arc& a) {
  // The angle decreases as t increases.
  double d = a.start.angle() - a.end.angle();
  if (a.start == a.end) return 0.0;
  if (d <= 0) d += 2 * std::numbers::pi;
  return d;
}

std::vector<CirclePoint> interior_points(const Arc& a, std::size_t count) {
  if (a.start == a.end) return {};
  // Rotate so that the arc is a bounded interval of the chart.
  static const Matrix rotations[] = {Matrix::identity(2), Matrix{{0, -1}, {1, 0}}, Matrix{{1, -1}, {1, 1}},
                                     Matrix{{1, 1}, {-1, 1}}};
  for (const Matrix& rot : rotations) {
    Arc b = apply(rot, a);
    if (b.start.is_infinity() || b.end.is_infinity() || !chart_less(b.start, b.end)) continue;
    if (!b.start.is_rational() || !b.end.is_rational()) throw PreconditionError("interior_points: irrational arc");
    Matrix back = inverse(rot);
    std::vector<CirclePoint> out;
    // Midpoint first, then successive refinements.
    for (std::size_t den = 2; out.size() < count; den *= 2)
      for (std::size_t k = 1; k < den && out.size() < count; k += 2) {
        Rational s = b.start.t().a(), e = b.end.t().a();
        Rational step = (e - s) / static_cast<long>(den);
        Rational mid = s + step * static_cast<long>(k);
        Rational t = simplest_between(Rational(mid - step / 4), Rational(mid + step / 4));
        out.push_back(apply(back, CirclePoint(QuadNum(t))));
      }
    return out;
  }
  throw PreconditionError("interior_points: could not normalize arc");
}

}  // namespace schottky::quadratic
