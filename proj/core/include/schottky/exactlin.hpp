#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "schottky/matrix.hpp"

namespace schottky::exactlin {

struct Place {
  enum class Kind { archimedean, nonarchimedean };
  Kind kind = Kind::archimedean;
  long prime = 0;

  static Place arch() { return {}; }
  static Place padic(long p);
  bool archimedean() const { return kind == Kind::archimedean; }
  friend bool operator==(const Place&, const Place&) = default;
};

// |q|_p as a rational.
Rational padic_abs(const Rational& q, long p);

// A point of P(Q^n), stored as a primitive integer vector whose first
// nonzero entry is positive.
class ProjPoint {
 public:
  ProjPoint() = default;
  explicit ProjPoint(const Vector& coords);
  static ProjPoint basis(std::size_t n, std::size_t i);

  std::size_t dim() const { return coords_.size(); }
  const std::vector<Integer>& coords() const { return coords_; }
  Vector vector() const;

  friend bool operator==(const ProjPoint&, const ProjPoint&) = default;
  friend bool operator<(const ProjPoint& a, const ProjPoint& b) { return a.coords_ < b.coords_; }

 private:
  std::vector<Integer> coords_;
};

// A hyperplane ker(f), f stored primitive like ProjPoint.
class ProjHyperplane {
 public:
  ProjHyperplane() = default;
  explicit ProjHyperplane(const Vector& functional);
  // {x_i = 0}
  static ProjHyperplane coordinate(std::size_t n, std::size_t i);

  std::size_t dim() const { return functional_.size(); }
  const std::vector<Integer>& functional() const { return functional_; }
  Vector vector() const;
  ProjPoint normal() const { return ProjPoint(vector()); }
  bool contains(const ProjPoint& x) const;
  Rational evaluate(const ProjPoint& x) const;

  friend bool operator==(const ProjHyperplane&, const ProjHyperplane&) = default;

 private:
  std::vector<Integer> functional_;
};

// Projective subspace; basis kept in reduced row echelon form.
class ProjSubspace {
 public:
  ProjSubspace() = default;
  static ProjSubspace span(const std::vector<Vector>& vectors);
  static ProjSubspace of(const ProjPoint& p);
  static ProjSubspace of(const ProjHyperplane& h);

  std::size_t ambient() const { return ambient_; }
  // Projective dimension (linear dimension minus one).
  long proj_dim() const { return static_cast<long>(basis_.size()) - 1; }
  const std::vector<Vector>& basis() const { return basis_; }
  std::vector<Vector> annihilator() const;
  bool contains(const ProjPoint& x) const;
  std::optional<ProjHyperplane> as_hyperplane() const;
  std::optional<ProjPoint> as_point() const;

  friend bool operator==(const ProjSubspace&, const ProjSubspace&) = default;

 private:
  std::size_t ambient_ = 0;
  std::vector<Vector> basis_;
};

struct MFlag {
  ProjHyperplane hyperplane;
  ProjPoint point;

  MFlag() = default;
  MFlag(ProjHyperplane h, ProjPoint p);
};

using Center = std::variant<ProjPoint, ProjHyperplane, ProjSubspace>;

// Closed ball [center]_r as a set of points of P(Q^n); radius_sq = r^2.
// A zero radius encodes an exactly known center.
struct Ball {
  Center center;
  Rational radius_sq;

  Ball() = default;
  Ball(Center c, Rational r_sq);
  std::size_t dim() const;
  bool contains(const Place& place, const ProjPoint& x) const;
};

// Distances. All return exact squares.
Rational proj_distance_sq(const Place& place, const ProjPoint& x, const ProjPoint& y);
Rational point_subspace_distance_sq(const Place& place, const ProjPoint& x, const ProjHyperplane& h);
Rational point_subspace_distance_sq(const Place& place, const ProjPoint& x, const ProjSubspace& l);

// Squared max-min distance between subspaces of equal dimension. Exact for
// points, hyperplanes, the nonarchimedean place, and whenever the extremal
// principal angle has a rational squared sine; otherwise an enclosure.
struct SquaredDistance {
  Rational lower;
  Rational upper;
  bool exact() const { return lower == upper; }
  const Rational& value() const;
};
SquaredDistance subspace_distance_sq(const Place& place, const ProjSubspace& a, const ProjSubspace& b,
                                     const Rational& rel_width = Rational(1, 1000000000));
Rational hyperplane_distance_sq(const Place& place, const ProjHyperplane& a, const ProjHyperplane& b);

// Exact predicate: dist(a, b)^2 <= t for subspaces of equal dimension.
bool subspace_distance_sq_le(const ProjSubspace& a, const ProjSubspace& b, const Rational& t);

bool mflag_touches(const MFlag& a, const MFlag& b);
bool is_general_position(const std::vector<MFlag>& flags);
// Rank conditions for every subfamily of size <= min(size, n); agrees with
// is_general_position once the family has at least n members.
bool is_partial_general_position(const std::vector<MFlag>& flags);

// Ball geometry, exact and square-root free. These are sufficient tests
// based on the triangle inequality.
bool balls_disjoint(const Place& place, const Ball& a, const Ball& b);
bool ball_contained(const Place& place, const Ball& inner, const Ball& outer);

// Projective action.
ProjPoint apply(const Matrix& g, const ProjPoint& x);
ProjHyperplane apply(const Matrix& g, const ProjHyperplane& h);
ProjSubspace apply(const Matrix& g, const ProjSubspace& l);
MFlag apply(const Matrix& g, const MFlag& f);

// Orthogonal projection of x onto h, used to force incidence.
ProjPoint project_onto(const ProjPoint& x, const ProjHyperplane& h);

std::string describe(const Center& c);

}  // namespace schottky::exactlin
