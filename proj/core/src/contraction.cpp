#include "schottky/contraction.hpp"

#include <array>
#include <cmath>
#include <random>
#include <utility>

#include "schottky/errors.hpp"
#include "schottky/polynomial.hpp"

namespace schottky::contraction {

using exactlin::hyperplane_distance_sq;
using exactlin::point_subspace_distance_sq;
using exactlin::proj_distance_sq;

namespace {

const Place kArch = Place::arch();

void require_square_invertible(const Matrix& g) {
  if (!g.square() || g.rows() < 2) throw DimensionMismatch("expected a square matrix of size >= 2");
  if (determinant(g) == 0) throw PreconditionError("singular matrix");
}

Vector normalize_dyadic(const Vector& v, unsigned bits) {
  Rational m;
  for (const auto& x : v)
    if (abs(x) > m) m = abs(x);
  if (m == 0) throw PrecisionError("eigenvector iteration collapsed to zero");
  Vector r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = round_dyadic(v[i] / m, bits);
  return r;
}

struct SymEigen {
  Vector w;
  Rational err_sq;
};

// Top eigenvector of symmetric s with a Davis-Kahan bound on the angle.
SymEigen top_eigenvector(const Matrix& s, const RootEnclosure& e1, const Rational& lambda2_upper, unsigned bits) {
  std::size_t n = s.rows();
  Matrix shifted = s - e1.upper * Matrix::identity(n);
  if (e1.exact) {
    auto ker = kernel(shifted);
    if (ker.size() != 1) throw VerificationError("top singular value is not simple");
    return {ker.front(), 0};
  }
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1 + Rational(static_cast<long>(i), 7 * static_cast<long>(n));
  for (int it = 0; it < 6; ++it) {
    Vector y;
    if (!solve(shifted, x, y)) {
      auto ker = kernel(shifted);
      return {ker.front(), 0};
    }
    Vector next = normalize_dyadic(y, bits);
    if (next == x) break;
    x = std::move(next);
  }
  Vector sx = s * x;
  Rational xx = norm_sq(x);
  Rational rq = dot(x, sx) / xx;
  Rational sep = rq - lambda2_upper;
  if (sep <= 0) return {x, 1};
  Rational err = norm_sq(sub(sx, scaled(x, rq))) / (xx * sep * sep);
  if (err > 1) err = 1;
  return {x, err};
}

struct Spectrum {
  RootEnclosure l1, l2;
  bool repeated_top = false;
};

Spectrum gram_spectrum(const Polynomial& p, const Rational& rel_width) {
  Spectrum sp;
  sp.l1 = isolate_root_from_top(p, 1, rel_width);
  if (sp.l1.multiplicity >= 2) {
    sp.repeated_top = true;
    return sp;
  }
  sp.l2 = isolate_root_from_top(p, 2, rel_width);
  Rational w = rel_width;
  while (!sp.l2.exact && sp.l2.lower <= 0) {
    w /= 1024;
    sp.l2 = refine_root(p, sp.l2, w);
  }
  return sp;
}

SingularGap gap_from(const Spectrum& sp) {
  if (sp.repeated_top) return {1, 1};
  Rational lo = sqrt_lower(sp.l1.lower / sp.l2.upper, 96);
  Rational hi = sqrt_upper(sp.l1.upper / sp.l2.lower, 96);
  if (lo < 1) lo = 1;
  if (hi < lo) hi = lo;
  return {lo, hi};
}

ProjHyperplane hyperplane_of(const exactlin::Center& c) {
  if (auto h = std::get_if<ProjHyperplane>(&c)) return *h;
  if (auto p = std::get_if<ProjPoint>(&c)) {
    if (p->dim() != 2) throw PreconditionError("repelling center must be a hyperplane");
    Vector v = p->vector();
    return ProjHyperplane(Vector{-v[1], v[0]});
  }
  auto h = std::get<exactlin::ProjSubspace>(c).as_hyperplane();
  if (!h) throw PreconditionError("repelling center must be a hyperplane");
  return *h;
}

ProjPoint point_of(const exactlin::Center& c) {
  if (auto p = std::get_if<ProjPoint>(&c)) return *p;
  if (auto h = std::get_if<ProjHyperplane>(&c); h && h->dim() == 2) {
    Vector f = h->vector();
    return ProjPoint(Vector{-f[1], f[0]});
  }
  auto p = std::get<exactlin::ProjSubspace>(c).as_point();
  if (!p) throw PreconditionError("attracting center must be a point");
  return *p;
}

unsigned sqrt_bits(const Rational& radius_sq) {
  long e = radius_sq > 0 ? std::labs(ilog2(radius_sq)) : 0;
  return static_cast<unsigned>(64 + 2 * e);
}

// Distance offset (upper bound) from a hyperplane center to the Cartan H.
Rational hyperplane_offset(const CartanFrame& frame, const ProjHyperplane& h, unsigned bits) {
  return sqrt_upper(hyperplane_distance_sq(kArch, h, frame.repelling), bits) +
         sqrt_upper(frame.repelling_err_sq, bits);
}

struct FixedPoint {
  ProjPoint center;
  Rational radius_sq;
};

// Attracting fixed point of g enclosed by a Banach contraction argument on
// a ball around an approximate eigenvector.
std::optional<FixedPoint> fixed_point(const Matrix& g, const CartanFrame& frame, unsigned bits) {
  std::size_t n = g.rows();
  Vector x = normalize_dyadic(frame.attracting.vector(), bits);
  Rational tol = pow2(-2 * static_cast<long>(bits) + 4);
  for (int it = 0; it < 40; ++it) {
    Vector y = normalize_dyadic(g * x, bits);
    bool done = proj_distance_sq(kArch, ProjPoint(x), ProjPoint(y)) < tol;
    x = std::move(y);
    if (done) break;
  }
  {
    Vector gx = g * x;
    Rational lambda = dot(x, gx) / norm_sq(x);
    Matrix shifted = g - round_dyadic(lambda, bits + 8) * Matrix::identity(n);
    for (int it = 0; it < 4; ++it) {
      Vector y;
      if (!solve(shifted, x, y)) {
        auto ker = kernel(shifted);
        if (ker.size() == 1) x = ker.front();
        break;
      }
      x = normalize_dyadic(y, bits);
    }
  }
  ProjPoint c(x);
  ProjPoint gc = exactlin::apply(g, c);
  unsigned sb = bits + 32;
  Rational delta = sqrt_upper(proj_distance_sq(kArch, c, gc), sb);
  Rational s_c = sqrt_lower(point_subspace_distance_sq(kArch, c, frame.repelling), sb) -
                 sqrt_upper(frame.repelling_err_sq, sb);
  if (s_c <= 0) return std::nullopt;
  Rational rho = 2 * delta;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Rational s = s_c - rho;
    if (s <= 0) return std::nullopt;
    Rational lip = 1 / (frame.gap.lower * s * s);
    if (lip >= 1) return std::nullopt;
    if (delta <= (1 - lip) * rho) {
      Rational eta = delta / (1 - lip);
      return FixedPoint{c, eta * eta};
    }
    rho = delta / (1 - lip) * Rational(9, 8);
  }
  return std::nullopt;
}

CartanFrame transpose_frame(const CartanFrame& f) {
  CartanFrame t;
  t.gap = f.gap;
  t.attracting = f.repelling.normal();
  t.attracting_err_sq = f.repelling_err_sq;
  t.repelling = ProjHyperplane(f.attracting.vector());
  t.repelling_err_sq = f.attracting_err_sq;
  return t;
}

void check_proximal_spectrum(const Matrix& g) {
  if (g.rows() == 2) {
    Rational tr = trace(g), det = determinant(g);
    if (tr * tr - 4 * det <= 0) throw VerificationError("not proximal: eigenvalues of equal modulus");
    return;
  }
  Polynomial p = characteristic_polynomial(g);
  Rational c = -p.coeffs()[p.coeffs().size() - 2] / static_cast<long>(g.rows());
  if (root_multiplicity(p, c) == g.rows()) throw VerificationError("not proximal: single eigenvalue");
}

ProximalityCertificate proximality(const Matrix& g, const Rational& r_sq, const Rational& eps_sq, const Config& cfg) {
  ContractionCertificate base = certify_contraction(g, eps_sq, cfg);
  Rational d_sq = point_subspace_distance_sq(kArch, point_of(base.attracting.center), hyperplane_of(base.repelling.center));
  if (d_sq < r_sq)
    throw VerificationError("not (r, eps)-proximal: d(v, H)^2 = " + to_string(d_sq) + " < r^2 = " + to_string(r_sq));
  Matrix gt = g.transpose();
  for (unsigned bits = cfg.start_bits; bits <= cfg.max_bits; bits *= 2) {
    CartanFrame frame = bits == cfg.start_bits ? base.frame : cartan_frame(g, bits, cfg.gap_rel_width);
    frame.gap = base.gap;
    auto fp = fixed_point(g, frame, bits);
    if (!fp) continue;
    auto fh = fixed_point(gt, transpose_frame(frame), bits);
    if (!fh) continue;
    ProjHyperplane hg(fh->center.vector());
    for (const Rational& radius : std::array<Rational, 3>{eps_sq, 4 * eps_sq, 16 * eps_sq}) {
      if (radius >= 1) break;
      Ball att(fp->center, radius), rep(hg, radius);
      if (!validate_mapping(frame, att, rep)) continue;
      ProximalityCertificate pc;
      pc.base = base;
      pc.r_sq = r_sq;
      pc.canonical_point_box = Ball(fp->center, fp->radius_sq);
      pc.canonical_hyperplane_box = Ball(hg, fh->radius_sq);
      pc.attracting = att;
      pc.repelling = rep;
      return pc;
    }
  }
  throw PrecisionError("canonical fixed flag could not be enclosed within the precision budget");
}

}  // namespace

SingularGap singular_gap_bounds(const Matrix& g, const Rational& rel_width) {
  require_square_invertible(g);
  Polynomial p = characteristic_polynomial(g.transpose() * g);
  return gap_from(gram_spectrum(p, rel_width));
}

CartanFrame cartan_frame(const Matrix& g, unsigned bits, const Rational& rel_width) {
  require_square_invertible(g);
  Matrix s = g.transpose() * g;
  Matrix t = g * g.transpose();
  Polynomial p = characteristic_polynomial(s);
  Spectrum sp = gram_spectrum(p, rel_width);
  if (sp.repeated_top) throw VerificationError("a1 = a2: no contraction direction");
  CartanFrame f;
  f.gap = gap_from(sp);
  SymEigen right = top_eigenvector(s, sp.l1, sp.l2.upper, bits);
  SymEigen left = top_eigenvector(t, sp.l1, sp.l2.upper, bits);
  f.attracting = ProjPoint(left.w);
  f.attracting_err_sq = left.err_sq;
  f.repelling = ProjHyperplane(right.w);
  f.repelling_err_sq = right.err_sq;
  return f;
}

bool validate_mapping(const CartanFrame& frame, const Ball& attracting, const Ball& repelling) {
  ProjPoint a = point_of(attracting.center);
  ProjHyperplane h = hyperplane_of(repelling.center);
  unsigned bits = std::max(sqrt_bits(attracting.radius_sq), sqrt_bits(repelling.radius_sq));
  Rational s0 = sqrt_lower(repelling.radius_sq, bits) - hyperplane_offset(frame, h, bits);
  if (s0 <= 0) return false;
  if (s0 > 1) s0 = 1;
  Rational main = sqrt_upper(1 - s0 * s0, bits) / (frame.gap.lower * s0);
  Rational off_a = sqrt_upper(proj_distance_sq(kArch, a, frame.attracting), bits) +
                   sqrt_upper(frame.attracting_err_sq, bits);
  return main + off_a < sqrt_lower(attracting.radius_sq, bits);
}

ContractionCertificate certify_contraction(const Matrix& g, const Rational& epsilon_sq, const Config& cfg) {
  require_square_invertible(g);
  if (epsilon_sq <= 0 || epsilon_sq >= 1) throw PreconditionError("epsilon^2 must lie in (0, 1)");
  Rational target = 1 / epsilon_sq;
  Polynomial p = characteristic_polynomial(g.transpose() * g);
  Rational width = cfg.gap_rel_width;
  SingularGap gap;
  for (int round = 0;; ++round) {
    gap = gap_from(gram_spectrum(p, width));
    if (gap.lower >= target) break;
    if (gap.upper < target)
      throw VerificationError("contraction criterion not met: a1/a2 <= " + to_string(gap.upper) +
                              " < 1/eps^2 = " + to_string(target));
    if (round > 12) throw PrecisionError("singular gap too close to 1/eps^2 to decide");
    width /= Rational(1 << 20);
  }
  for (unsigned bits = cfg.start_bits; bits <= cfg.max_bits; bits *= 2) {
    CartanFrame frame = cartan_frame(g, bits, width);
    frame.gap = gap;
    ContractionCertificate cert;
    cert.g = g;
    cert.epsilon_sq = epsilon_sq;
    cert.attracting = Ball(frame.attracting, epsilon_sq);
    cert.repelling = Ball(frame.repelling, epsilon_sq);
    cert.place = kArch;
    cert.gap = gap;
    cert.frame = frame;
    if (validate_mapping(frame, cert.attracting, cert.repelling)) return cert;
  }
  throw PrecisionError("Cartan frame enclosure too coarse to validate the mapping claim");
}

bool separation_holds(const VeryProximalCertificate& cert) {
  const Ball& ap = cert.attracting(1);
  const Ball& am = cert.attracting(-1);
  return exactlin::balls_disjoint(kArch, ap, cert.repelling(1)) && exactlin::balls_disjoint(kArch, ap, am) &&
         exactlin::balls_disjoint(kArch, am, cert.repelling(-1));
}

VeryProximalCertificate certify_very_proximal(const Matrix& g, const Rational& r_sq, const Rational& epsilon_sq,
                                              const Config& cfg) {
  require_square_invertible(g);
  if (epsilon_sq <= 0 || epsilon_sq >= Rational(1, 16)) throw PreconditionError("epsilon^2 must lie in (0, 1/16)");
  if (r_sq <= 4 * epsilon_sq) throw PreconditionError("r^2 must exceed 4 epsilon^2");
  check_proximal_spectrum(g);
  VeryProximalCertificate cert;
  cert.forward = proximality(g, r_sq, epsilon_sq, cfg);
  cert.backward = proximality(inverse(g), r_sq, epsilon_sq, cfg);
  if (!separation_holds(cert)) throw VerificationError("neighborhood separation fails");
  return cert;
}

VeryProximalCertificate certify_very_proximal_auto(const Matrix& g, const Config& cfg) {
  require_square_invertible(g);
  check_proximal_spectrum(g);
  Matrix ginv = inverse(g);
  SingularGap a = singular_gap_bounds(g, cfg.gap_rel_width);
  SingularGap b = singular_gap_bounds(ginv, cfg.gap_rel_width);
  Rational gap = a.lower < b.lower ? a.lower : b.lower;
  if (gap <= 64) throw VerificationError("singular gap " + to_string(gap) + " too small to certify very proximality");
  Rational eps_sq = power_of_four_above(4 / gap);
  CartanFrame fa = cartan_frame(g, cfg.start_bits, cfg.gap_rel_width);
  CartanFrame fb = cartan_frame(ginv, cfg.start_bits, cfg.gap_rel_width);
  Rational da = point_subspace_distance_sq(kArch, fa.attracting, fa.repelling);
  Rational db = point_subspace_distance_sq(kArch, fb.attracting, fb.repelling);
  Rational d = da < db ? da : db;
  if (d <= 0) throw VerificationError("attracting point lies on repelling hyperplane");
  Rational r_sq = power_of_four_below(d * Rational(15, 16));
  std::string last = "no admissible epsilon";
  for (; eps_sq < Rational(1, 16) && r_sq > 4 * eps_sq; eps_sq *= 4) {
    try {
      return certify_very_proximal(g, r_sq, eps_sq, cfg);
    } catch (const VerificationError& e) {
      last = e.what();
    }
  }
  throw VerificationError("automatic very-proximal certification failed: " + last);
}

Rational projective_lipschitz_sq(const Matrix& g) {
  Rational k = frobenius_sq(g) * frobenius_sq(inverse(g));
  return k * k;
}

Rational lipschitz_bound_outside(const ContractionCertificate& cert, const Rational& d_sq, const Config& cfg) {
  if (d_sq <= 0) throw PreconditionError("lipschitz_bound_outside needs d^2 > 0");
  unsigned bits = sqrt_bits(d_sq);
  ProjHyperplane h = hyperplane_of(cert.repelling.center);
  Rational s = sqrt_lower(d_sq, bits) - hyperplane_offset(cert.frame, h, bits);
  Rational paper_form = cfg.c * cert.epsilon_sq / d_sq;
  if (s <= 0) return sqrt_upper(projective_lipschitz_sq(cert.g), 64);
  Rational rigorous = 1 / (cert.gap.lower * s * s);
  return rigorous > paper_form ? rigorous : paper_form;
}

bool is_dominated(const VeryProximalCertificate& g, const VeryProximalCertificate& h) {
  for (int sign : {1, -1}) {
    if (!exactlin::ball_contained(kArch, g.repelling(sign), h.repelling(sign))) return false;
    if (!exactlin::ball_contained(kArch, g.attracting(sign), h.attracting(sign))) return false;
  }
  return true;
}

AuditReport audit_contraction(const ContractionCertificate& cert, std::size_t samples, std::uint64_t seed) {
  AuditReport rep;
  std::size_t n = cert.g.rows();
  std::mt19937_64 rng(seed);
  ProjHyperplane h = hyperplane_of(cert.repelling.center);
  ProjPoint a = point_of(cert.attracting.center);
  Vector f = h.vector();
  double fnorm = std::sqrt(to_double(norm_sq(f)));
  double eps = std::sqrt(to_double(cert.repelling.radius_sq));
  auto check = [&](const Vector& x) {
    ++rep.samples;
    ProjPoint p(x);
    if (point_subspace_distance_sq(kArch, p, h) < cert.repelling.radius_sq) return;
    ++rep.outside_repelling;
    Rational d = proj_distance_sq(kArch, exactlin::apply(cert.g, p), a);
    double ratio = to_double(d / cert.attracting.radius_sq);
    if (ratio > rep.worst_ratio) rep.worst_ratio = ratio;
    if (d > cert.attracting.radius_sq) ++rep.violations;
  };
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::size_t uniform = samples / 2;
  if (n == 2) {
    double base = std::atan2(-to_double(f[0]), to_double(f[1]));  // direction of ker f
    for (std::size_t i = 0; i < uniform; ++i) {
      double th = M_PI * (static_cast<double>(i) + 0.5) / static_cast<double>(uniform);
      check(Vector{Rational(std::cos(th)), Rational(std::sin(th))});
    }
    for (std::size_t i = uniform; i < samples; ++i) {
      // just outside the repelling arc, where contraction is weakest
      double off = std::asin(std::min(1.0, eps)) * (1.0 + std::ldexp(1.0, -static_cast<int>(i % 40) - 4));
      double th = base + ((i & 1) ? off : -off);
      check(Vector{Rational(std::cos(th)), Rational(std::sin(th))});
    }
    return rep;
  }
  for (std::size_t i = 0; i < samples; ++i) {
    Vector u(n);
    for (auto& x : u) x = Rational(unif(rng));
    if (i < uniform) {
      check(u);
      continue;
    }
    Vector t = sub(u, scaled(f, dot(f, u) / norm_sq(f)));
    double tn = std::sqrt(to_double(norm_sq(t)));
    if (tn == 0) continue;
    double sn = std::min(1.0, eps * (1.0 + std::ldexp(1.0, -static_cast<int>(i % 40) - 4)));
    double cs = std::sqrt(1 - sn * sn);
    Vector x(n);
    for (std::size_t k = 0; k < n; ++k)
      x[k] = Rational(to_double(t[k]) / tn * cs + to_double(f[k]) / fnorm * sn);
    check(x);
  }
  return rep;
}

}  // namespace schottky::contraction
