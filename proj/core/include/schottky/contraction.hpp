#pragma once

#include <cstdint>
#include <optional>

#include "schottky/exactlin.hpp"

namespace schottky::contraction {

using exactlin::Ball;
using exactlin::Place;
using exactlin::ProjHyperplane;
using exactlin::ProjPoint;

struct Config {
  Rational gap_rel_width = Rational(1, 1000000);
  // Constants of the contraction lemmas. Only reported; every mapping
  // claim is re-validated directly.
  Rational c = 4;
  Rational c1 = 4;
  Rational c2 = 4;
  unsigned start_bits = 64;
  unsigned max_bits = 16384;
};

struct SingularGap {
  Rational lower;
  Rational upper;
};

SingularGap singular_gap_bounds(const Matrix& g, const Rational& rel_width = Rational(1, 1000000));

// Enclosures of the Cartan attracting point a (top left singular vector)
// and repelling hyperplane H (orthogonal to the top right singular vector).
struct CartanFrame {
  SingularGap gap;
  ProjPoint attracting;
  Rational attracting_err_sq;  // d(center, a)^2 <= err
  ProjHyperplane repelling;
  Rational repelling_err_sq;   // d(H~, H)^2 <= err
};

CartanFrame cartan_frame(const Matrix& g, unsigned bits, const Rational& rel_width);

struct ContractionCertificate {
  Matrix g;
  Rational epsilon_sq;
  Ball attracting;
  Ball repelling;
  Place place;
  SingularGap gap;
  CartanFrame frame;
};

ContractionCertificate certify_contraction(const Matrix& g, const Rational& epsilon_sq, const Config& cfg = {});

// True when g maps the complement of the open repelling ball into the
// attracting ball, proved from the Cartan frame.
bool validate_mapping(const CartanFrame& frame, const Ball& attracting, const Ball& repelling);

struct ProximalityCertificate {
  ContractionCertificate base;
  Rational r_sq;
  Ball canonical_point_box;       // contains the attracting fixed point
  Ball canonical_hyperplane_box;  // contains the repelling fixed hyperplane (hyperplane metric)
  // Neighborhoods for ping-pong: balls around the canonical centers,
  // validated like base.
  Ball attracting;
  Ball repelling;
};

struct VeryProximalCertificate {
  ProximalityCertificate forward;
  ProximalityCertificate backward;

  const Matrix& g() const { return forward.base.g; }
  const Ball& attracting(int sign) const { return sign > 0 ? forward.attracting : backward.attracting; }
  const Ball& repelling(int sign) const { return sign > 0 ? forward.repelling : backward.repelling; }
  const ProximalityCertificate& side(int sign) const { return sign > 0 ? forward : backward; }
};

VeryProximalCertificate certify_very_proximal(const Matrix& g, const Rational& r_sq, const Rational& epsilon_sq,
                                              const Config& cfg = {});
// Chooses epsilon^2 as a power of 4 near 4 / gap and the largest admissible r^2.
VeryProximalCertificate certify_very_proximal_auto(const Matrix& g, const Config& cfg = {});

// Separation of the four neighborhoods required of very proximal elements.
bool separation_holds(const VeryProximalCertificate& cert);

Rational lipschitz_bound_outside(const ContractionCertificate& cert, const Rational& d_sq, const Config& cfg = {});
// Global bound on (d(gx, gy) / d(x, y))^2.
Rational projective_lipschitz_sq(const Matrix& g);

bool is_dominated(const VeryProximalCertificate& g, const VeryProximalCertificate& h);

struct AuditReport {
  std::size_t samples = 0;
  std::size_t outside_repelling = 0;
  std::size_t violations = 0;
  double worst_ratio = 0;  // max d(gx, center)^2 / radius^2 over checked points
};

// Grid oracle: samples points outside the repelling ball and checks that
// their images land in the attracting ball.
AuditReport audit_contraction(const ContractionCertificate& cert, std::size_t samples, std::uint64_t seed = 1);

}  // namespace schottky::contraction
