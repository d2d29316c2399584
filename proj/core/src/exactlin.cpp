#include "schottky/exactlin.hpp"

#include <algorithm>
#include <sstream>

#include "schottky/errors.hpp"
#include "schottky/polynomial.hpp"

namespace schottky::exactlin {

Place Place::padic(long p) {
  if (p < 2 || mpz_probab_prime_p(Integer(p).get_mpz_t(), 30) == 0)
    throw PreconditionError("place prime must be prime, got " + std::to_string(p));
  Place pl;
  pl.kind = Kind::nonarchimedean;
  pl.prime = p;
  return pl;
}

namespace {

long valuation(const Integer& z, long p) {
  if (z == 0) return 0;
  Integer t = z;
  long v = 0;
  Integer pp(p);
  while (mpz_divisible_p(t.get_mpz_t(), pp.get_mpz_t())) {
    t /= pp;
    ++v;
  }
  return v;
}

long valuation(const Rational& q, long p) { return valuation(q.get_num(), p) - valuation(q.get_den(), p); }

std::vector<Integer> primitive(const Vector& v, const char* what) {
  Integer lcm = 1;
  bool nonzero = false;
  for (const auto& x : v) {
    if (x != 0) nonzero = true;
    mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), x.get_den_mpz_t());
  }
  if (!nonzero) throw PreconditionError(std::string("zero vector does not define a ") + what);
  std::vector<Integer> out(v.size());
  Integer g = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    Rational s = v[i] * lcm;
    out[i] = s.get_num();
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), out[i].get_mpz_t());
  }
  int sign = 0;
  for (const auto& x : out)
    if (x != 0) {
      sign = sgn(x);
      break;
    }
  for (auto& x : out) {
    x /= g;
    if (sign < 0) x = -x;
  }
  return out;
}

Vector to_vector(const std::vector<Integer>& c) {
  Vector v(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) v[i] = Rational(c[i]);
  return v;
}

void check_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw DimensionMismatch(std::string(what) + ": dimensions " + std::to_string(a) + " and " +
                            std::to_string(b));
}

Rational max_padic_abs(const Vector& v, long p) {
  Rational m;
  for (const auto& x : v) {
    Rational a = padic_abs(x, p);
    if (a > m) m = a;
  }
  return m;
}

// Rows of a basis of W ∩ Z_p^n (saturated) for W = span(rows).
std::vector<Vector> padic_saturate(std::vector<Vector> rows, long p) {
  std::vector<Vector> out;
  std::size_t n = rows.empty() ? 0 : rows[0].size();
  std::vector<bool> used(n, false);
  auto normalize = [p](Vector& r) {
    Rational m = max_padic_abs(r, p);
    if (m == 0) return false;
    for (auto& x : r) x *= m;  // |m x|_p = |x|_p / m
    return true;
  };
  for (auto& r : rows) normalize(r);
  while (!rows.empty()) {
    std::size_t bi = rows.size(), bj = n;
    for (std::size_t i = 0; i < rows.size() && bi == rows.size(); ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (!used[j] && rows[i][j] != 0 && padic_abs(rows[i][j], p) == 1) {
          bi = i;
          bj = j;
          break;
        }
    if (bi == rows.size()) break;  // remaining rows vanish
    Vector piv = scaled(rows[bi], 1 / rows[bi][bj]);
    rows.erase(rows.begin() + static_cast<long>(bi));
    used[bj] = true;
    std::vector<Vector> rest;
    for (auto& r : rows) {
      Vector t = sub(r, scaled(piv, r[bj]));
      if (normalize(t)) rest.push_back(std::move(t));
    }
    rows = std::move(rest);
    out.push_back(std::move(piv));
  }
  return out;
}

Rational arch_point_subspace(const Vector& x, const std::vector<Vector>& basis) {
  std::size_t k = basis.size();
  Matrix gram(k, k);
  Vector b(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) gram(i, j) = dot(basis[i], basis[j]);
    b[i] = dot(basis[i], x);
  }
  Vector c;
  if (!solve(gram, b, c)) throw PreconditionError("degenerate subspace basis");
  return 1 - dot(b, c) / norm_sq(x);
}

Rational padic_point_subspace(const Vector& x, const ProjSubspace& l, long p) {
  std::vector<Vector> ann = padic_saturate(l.annihilator(), p);
  Rational m;
  for (const auto& r : ann) {
    Rational a = padic_abs(dot(r, x), p);
    if (a > m) m = a;
  }
  Rational d = m / max_padic_abs(x, p);
  return d * d;
}

// Normalized center kinds: point, hyperplane (codim 1, n >= 3), or general.
Center normalize_center(const Center& c) {
  if (auto h = std::get_if<ProjHyperplane>(&c)) {
    if (h->dim() == 2) return ProjSubspace::of(*h).as_point().value();
    return c;
  }
  if (auto s = std::get_if<ProjSubspace>(&c)) {
    if (auto p = s->as_point()) return *p;
    if (auto h = s->as_hyperplane()) return normalize_center(Center(*h));
  }
  return c;
}

ProjSubspace as_subspace(const Center& c) {
  if (auto p = std::get_if<ProjPoint>(&c)) return ProjSubspace::of(*p);
  if (auto h = std::get_if<ProjHyperplane>(&c)) return ProjSubspace::of(*h);
  return std::get<ProjSubspace>(c);
}

std::size_t center_dim(const Center& c) {
  return std::visit(
      [](const auto& x) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, ProjSubspace>)
          return x.ambient();
        else
          return x.dim();
      },
      c);
}

Rational point_center_distance_sq(const Place& place, const ProjPoint& x, const Center& c) {
  if (auto p = std::get_if<ProjPoint>(&c)) return proj_distance_sq(place, x, *p);
  if (auto h = std::get_if<ProjHyperplane>(&c)) return point_subspace_distance_sq(place, x, *h);
  return point_subspace_distance_sq(place, x, std::get<ProjSubspace>(c));
}

}  // namespace

Rational padic_abs(const Rational& q, long p) {
  if (q == 0) return 0;
  long v = valuation(q, p);
  Rational pp = pow(Rational(p), static_cast<unsigned long>(std::labs(v)));
  return v >= 0 ? Rational(1 / pp) : pp;
}

ProjPoint::ProjPoint(const Vector& coords) : coords_(primitive(coords, "projective point")) {}

ProjPoint ProjPoint::basis(std::size_t n, std::size_t i) {
  Vector v(n);
  v.at(i) = 1;
  return ProjPoint(v);
}

Vector ProjPoint::vector() const { return to_vector(coords_); }

ProjHyperplane::ProjHyperplane(const Vector& functional)
    : functional_(primitive(functional, "hyperplane")) {}

ProjHyperplane ProjHyperplane::coordinate(std::size_t n, std::size_t i) {
  Vector v(n);
  v.at(i) = 1;
  return ProjHyperplane(v);
}

Vector ProjHyperplane::vector() const { return to_vector(functional_); }

Rational ProjHyperplane::evaluate(const ProjPoint& x) const {
  check_dim(dim(), x.dim(), "hyperplane evaluation");
  Integer s = 0;
  for (std::size_t i = 0; i < functional_.size(); ++i) s += functional_[i] * x.coords()[i];
  return Rational(s);
}

bool ProjHyperplane::contains(const ProjPoint& x) const { return evaluate(x) == 0; }

ProjSubspace ProjSubspace::span(const std::vector<Vector>& vectors) {
  if (vectors.empty()) throw PreconditionError("empty spanning set");
  std::vector<std::size_t> piv;
  Matrix r = rref(Matrix::from_rows(vectors), &piv);
  if (piv.empty()) throw PreconditionError("spanning set is zero");
  ProjSubspace s;
  s.ambient_ = r.cols();
  for (std::size_t i = 0; i < piv.size(); ++i) s.basis_.push_back(r.row(i));
  return s;
}

ProjSubspace ProjSubspace::of(const ProjPoint& p) { return span({p.vector()}); }

ProjSubspace ProjSubspace::of(const ProjHyperplane& h) {
  Matrix f = Matrix::from_rows({h.vector()});
  return span(kernel(f));
}

std::vector<Vector> ProjSubspace::annihilator() const {
  if (basis_.size() == ambient_) return {};
  return kernel(Matrix::from_rows(basis_));
}

bool ProjSubspace::contains(const ProjPoint& x) const {
  check_dim(ambient_, x.dim(), "subspace membership");
  Vector v = x.vector();
  for (const auto& r : annihilator())
    if (dot(r, v) != 0) return false;
  return true;
}

std::optional<ProjHyperplane> ProjSubspace::as_hyperplane() const {
  if (basis_.size() + 1 != ambient_) return std::nullopt;
  return ProjHyperplane(annihilator().front());
}

std::optional<ProjPoint> ProjSubspace::as_point() const {
  if (basis_.size() != 1) return std::nullopt;
  return ProjPoint(basis_.front());
}

MFlag::MFlag(ProjHyperplane h, ProjPoint p) : hyperplane(std::move(h)), point(std::move(p)) {
  if (!hyperplane.contains(point)) throw PreconditionError("M-flag point does not lie on its hyperplane");
}

Ball::Ball(Center c, Rational r_sq) : center(std::move(c)), radius_sq(std::move(r_sq)) {
  if (radius_sq < 0) throw PreconditionError("negative ball radius");
}

std::size_t Ball::dim() const { return center_dim(center); }

bool Ball::contains(const Place& place, const ProjPoint& x) const {
  return point_center_distance_sq(place, x, center) <= radius_sq;
}

Rational proj_distance_sq(const Place& place, const ProjPoint& x, const ProjPoint& y) {
  check_dim(x.dim(), y.dim(), "proj_distance_sq");
  const auto& v = x.coords();
  const auto& w = y.coords();
  if (place.archimedean()) {
    Integer vv = 0, ww = 0, vw = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      vv += v[i] * v[i];
      ww += w[i] * w[i];
      vw += v[i] * w[i];
    }
    Rational r(vv * ww - vw * vw, vv * ww);
    r.canonicalize();
    return r;
  }
  // primitive vectors have p-adic max-norm 1
  Rational m;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      Rational a = padic_abs(Rational(v[i] * w[j] - v[j] * w[i]), place.prime);
      if (a > m) m = a;
    }
  return m * m;
}

Rational point_subspace_distance_sq(const Place& place, const ProjPoint& x, const ProjHyperplane& h) {
  check_dim(x.dim(), h.dim(), "point_subspace_distance_sq");
  if (place.archimedean()) {
    Rational fx = h.evaluate(x);
    return fx * fx / (norm_sq(h.vector()) * norm_sq(x.vector()));
  }
  return padic_point_subspace(x.vector(), ProjSubspace::of(h), place.prime);
}

Rational point_subspace_distance_sq(const Place& place, const ProjPoint& x, const ProjSubspace& l) {
  check_dim(x.dim(), l.ambient(), "point_subspace_distance_sq");
  if (place.archimedean()) {
    if (auto h = l.as_hyperplane()) return point_subspace_distance_sq(place, x, *h);
    return arch_point_subspace(x.vector(), l.basis());
  }
  return padic_point_subspace(x.vector(), l, place.prime);
}

const Rational& SquaredDistance::value() const {
  if (!exact()) throw PrecisionError("squared subspace distance is irrational; only an enclosure is available");
  return upper;
}

Rational hyperplane_distance_sq(const Place& place, const ProjHyperplane& a, const ProjHyperplane& b) {
  check_dim(a.dim(), b.dim(), "hyperplane_distance_sq");
  if (place.archimedean()) return proj_distance_sq(place, a.normal(), b.normal());
  return subspace_distance_sq(place, ProjSubspace::of(a), ProjSubspace::of(b)).value();
}

namespace {

// max over x in a of d(x, b)^2, archimedean.
SquaredDistance arch_directed(const ProjSubspace& a, const ProjSubspace& b, const Rational& rel_width) {
  const auto& b1 = a.basis();
  const auto& b2 = b.basis();
  std::size_t k = b1.size();
  Matrix gram(k, k), m(k, k);
  std::size_t k2 = b2.size();
  Matrix g2(k2, k2);
  for (std::size_t i = 0; i < k2; ++i)
    for (std::size_t j = 0; j < k2; ++j) g2(i, j) = dot(b2[i], b2[j]);
  Matrix g2inv = inverse(g2);
  Matrix cross(k, k2);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k2; ++j) cross(i, j) = dot(b1[i], b2[j]);
  m = cross * g2inv * cross.transpose();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) gram(i, j) = dot(b1[i], b1[j]);
  Polynomial p = characteristic_polynomial(inverse(gram) * m);
  // smallest eigenvalue of the (real-rooted) pencil via p(-x)
  std::vector<Rational> c = p.coeffs();
  for (std::size_t i = 1; i < c.size(); i += 2) c[i] = -c[i];
  RootEnclosure e = isolate_root_from_top(Polynomial(c), 1, rel_width);
  return {1 + e.lower, 1 + e.upper};
}

bool psd(const Matrix& a) {
  std::size_t k = a.rows();
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    Matrix sub(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) sub(i, j) = a(idx[i], idx[j]);
    if (determinant(sub) < 0) return false;
  }
  return true;
}

}  // namespace

SquaredDistance subspace_distance_sq(const Place& place, const ProjSubspace& a, const ProjSubspace& b,
                                     const Rational& rel_width) {
  check_dim(a.ambient(), b.ambient(), "subspace_distance_sq");
  if (a.proj_dim() != b.proj_dim())
    throw DimensionMismatch("subspace_distance_sq requires equal projective dimension");
  if (a == b) return {0, 0};
  if (!place.archimedean()) {
    long p = place.prime;
    Rational best;
    for (int dir = 0; dir < 2; ++dir) {
      const ProjSubspace& x = dir ? b : a;
      const ProjSubspace& y = dir ? a : b;
      auto sat = padic_saturate(x.basis(), p);
      auto ann = padic_saturate(y.annihilator(), p);
      for (const auto& r : ann)
        for (const auto& s : sat) {
          Rational v = padic_abs(dot(r, s), p);
          if (v > best) best = v;
        }
    }
    return {best * best, best * best};
  }
  if (auto pa = a.as_point()) {
    Rational d = proj_distance_sq(place, *pa, b.as_point().value());
    return {d, d};
  }
  if (auto ha = a.as_hyperplane()) {
    Rational d = proj_distance_sq(place, ha->normal(), b.as_hyperplane().value().normal());
    return {d, d};
  }
  SquaredDistance d1 = arch_directed(a, b, rel_width);
  SquaredDistance d2 = arch_directed(b, a, rel_width);
  SquaredDistance r{std::max(d1.lower, d2.lower), std::max(d1.upper, d2.upper)};
  return r;
}

bool subspace_distance_sq_le(const ProjSubspace& a, const ProjSubspace& b, const Rational& t) {
  check_dim(a.ambient(), b.ambient(), "subspace_distance_sq_le");
  if (a.proj_dim() != b.proj_dim())
    throw DimensionMismatch("subspace_distance_sq_le requires equal projective dimension");
  // max_x d(x,b)^2 <= t  iff  M - (1 - t) G is positive semidefinite.
  for (int dir = 0; dir < 2; ++dir) {
    const ProjSubspace& x = dir ? b : a;
    const ProjSubspace& y = dir ? a : b;
    const auto& b1 = x.basis();
    const auto& b2 = y.basis();
    std::size_t k = b1.size();
    Matrix g2(k, k), cross(k, k), gram(k, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        g2(i, j) = dot(b2[i], b2[j]);
        cross(i, j) = dot(b1[i], b2[j]);
        gram(i, j) = dot(b1[i], b1[j]);
      }
    Matrix m = cross * inverse(g2) * cross.transpose();
    if (!psd(m - (1 - t) * gram)) return false;
  }
  return true;
}

bool mflag_touches(const MFlag& a, const MFlag& b) {
  check_dim(a.point.dim(), b.point.dim(), "mflag_touches");
  return b.hyperplane.contains(a.point) || a.hyperplane.contains(b.point);
}

namespace {

bool subsets_full_rank(const std::vector<MFlag>& flags, std::size_t max_size) {
  std::size_t m = flags.size();
  std::vector<std::size_t> idx;
  // enumerate all subsets of size s <= max_size via combinations
  for (std::size_t s = 1; s <= max_size; ++s) {
    std::vector<bool> pick(m, false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(s), true);
    do {
      std::vector<Vector> normals, points;
      for (std::size_t i = 0; i < m; ++i)
        if (pick[i]) {
          normals.push_back(flags[i].hyperplane.vector());
          points.push_back(flags[i].point.vector());
        }
      if (rank(normals) != s || rank(points) != s) return false;
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return true;
}

}  // namespace

bool is_general_position(const std::vector<MFlag>& flags) {
  if (flags.empty()) throw PreconditionError("is_general_position: empty family");
  std::size_t n = flags.front().point.dim();
  for (const auto& f : flags) check_dim(n, f.point.dim(), "is_general_position");
  if (flags.size() < n)
    throw PreconditionError("is_general_position needs at least n = " + std::to_string(n) + " flags");
  // full rank on every n-subset forces full rank on smaller subsets
  std::size_t m = flags.size();
  std::vector<bool> pick(m, false);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(n), true);
  do {
    std::vector<Vector> normals, points;
    for (std::size_t i = 0; i < m; ++i)
      if (pick[i]) {
        normals.push_back(flags[i].hyperplane.vector());
        points.push_back(flags[i].point.vector());
      }
    if (rank(normals) != n || rank(points) != n) return false;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return true;
}

bool is_partial_general_position(const std::vector<MFlag>& flags) {
  if (flags.empty()) return true;
  std::size_t n = flags.front().point.dim();
  for (const auto& f : flags) check_dim(n, f.point.dim(), "is_partial_general_position");
  return subsets_full_rank(flags, std::min(n, flags.size()));
}

bool balls_disjoint(const Place& place, const Ball& a, const Ball& b) {
  check_dim(a.dim(), b.dim(), "balls_disjoint");
  Center ca = normalize_center(a.center);
  Center cb = normalize_center(b.center);
  const ProjPoint* pa = std::get_if<ProjPoint>(&ca);
  const ProjPoint* pb = std::get_if<ProjPoint>(&cb);
  if (!pa && !pb) return false;  // positive-dimensional subspaces of interest always meet
  if (!pa) {
    std::swap(ca, cb);
    pa = std::get_if<ProjPoint>(&ca);
    return sqrt_sum_lt(b.radius_sq, a.radius_sq, point_center_distance_sq(place, *pa, cb));
  }
  return sqrt_sum_lt(a.radius_sq, b.radius_sq, point_center_distance_sq(place, *pa, cb));
}

bool ball_contained(const Place& place, const Ball& inner, const Ball& outer) {
  check_dim(inner.dim(), outer.dim(), "ball_contained");
  Center ci = normalize_center(inner.center);
  Center co = normalize_center(outer.center);
  if (outer.radius_sq >= 1) return true;
  if (auto pi = std::get_if<ProjPoint>(&ci))
    return sqrt_sum_le(point_center_distance_sq(place, *pi, co), inner.radius_sq, outer.radius_sq);
  if (std::holds_alternative<ProjPoint>(co)) return false;
  ProjSubspace si = as_subspace(ci), so = as_subspace(co);
  if (si.proj_dim() != so.proj_dim()) return false;
  SquaredDistance d = subspace_distance_sq(place, si, so);
  return sqrt_sum_le(d.upper, inner.radius_sq, outer.radius_sq);
}

ProjPoint apply(const Matrix& g, const ProjPoint& x) {
  check_dim(g.cols(), x.dim(), "apply to point");
  return ProjPoint(g * x.vector());
}

ProjHyperplane apply(const Matrix& g, const ProjHyperplane& h) {
  check_dim(g.cols(), h.dim(), "apply to hyperplane");
  return ProjHyperplane(left_multiply(h.vector(), inverse(g)));
}

ProjSubspace apply(const Matrix& g, const ProjSubspace& l) {
  std::vector<Vector> img;
  for (const auto& b : l.basis()) img.push_back(g * b);
  return ProjSubspace::span(img);
}

MFlag apply(const Matrix& g, const MFlag& f) { return MFlag(apply(g, f.hyperplane), apply(g, f.point)); }

ProjPoint project_onto(const ProjPoint& x, const ProjHyperplane& h) {
  Vector v = x.vector(), f = h.vector();
  return ProjPoint(sub(v, scaled(f, dot(f, v) / norm_sq(f))));
}

std::string describe(const Center& c) {
  std::ostringstream os;
  auto vec = [&os](const std::vector<Integer>& v) {
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ')';
  };
  if (auto p = std::get_if<ProjPoint>(&c)) {
    os << "point";
    vec(p->coords());
  } else if (auto h = std::get_if<ProjHyperplane>(&c)) {
    os << "hyperplane";
    vec(h->functional());
  } else {
    os << "subspace[dim " << std::get<ProjSubspace>(c).proj_dim() << "]";
  }
  return os.str();
}

}  // namespace schottky::exactlin
