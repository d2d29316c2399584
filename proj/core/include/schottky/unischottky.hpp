#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "schottky/exactlin.hpp"

namespace schottky::unischottky {

using exactlin::Ball;
using exactlin::ProjHyperplane;
using exactlin::ProjPoint;
using exactlin::ProjSubspace;

struct RankOneUnipotent {
  Matrix u;
  Matrix nilpart;  // u - I
  ProjPoint p;
  ProjSubspace L;

  // Rejects matrices that are not rank-1 unipotent in SL_n(Z).
  static RankOneUnipotent from_matrix(const Matrix& u);
  ProjHyperplane hyperplane() const { return *L.as_hyperplane(); }
  RankOneUnipotent power(long m) const;
};

RankOneUnipotent from_flag(const ProjPoint& p, const ProjSubspace& L);
std::pair<ProjPoint, ProjSubspace> attraction_data(const Matrix& u);

// Least m such that v = u^m sends every x with d(x, L_u) >= delta into the
// open epsilon-ball around p_u, for all k != 0. The supremum of
// d(v^k x, p_u)^2 over that region is 1 / (k^2 m^2 delta^2 |N|_F^2).
long min_power(const RankOneUnipotent& u, const Rational& epsilon_sq, const Rational& delta_sq);
// Condition (1) for an element already raised to its working power.
bool dynamics_certified(const RankOneUnipotent& u, const Rational& epsilon_sq, const Rational& delta_sq);

struct SystemElement {
  RankOneUnipotent u;
  Rational epsilon_sq;
  Rational delta_sq;
};

struct SchottkySystem {
  std::vector<SystemElement> elements;
  std::vector<Ball> attracting;  // A as a union of closed balls
  std::vector<Ball> repelling;   // R as a union of closed balls
  std::size_t dim() const;
  std::vector<Matrix> matrices() const;
};

struct SystemReport {
  bool ok = true;
  bool dynamics = true;       // (1)
  bool cross_disjoint = true; // (2)
  bool points_in_a = true;    // (3)
  bool tubes_in_r = true;     // (4)
  bool a_in_r = true;
  std::vector<std::string> diagnostics;
};

SystemReport verify_system(const SchottkySystem& s);

SchottkySystem add_flag(const SchottkySystem& s, const ProjPoint& p, const ProjSubspace& L, const Rational& epsilon_sq,
                        const Rational& delta_sq);

struct ZSquaredCertificate {
  Matrix u;
  Matrix v;
  bool commute = false;           // uv = vu exactly
  bool products_vanish = false;   // (u - I)(v - I) = (v - I)(u - I) = 0
  bool nilparts_independent = false;
  bool valid() const { return commute && products_vanish && nilparts_independent; }
};

// Certificate for <u1, g^-1 u2 g> = Z^2 when p_{u2} = g p_{u1} and L_{u2} != g L_{u1}.
ZSquaredCertificate z_squared_pair(const Matrix& g, const RankOneUnipotent& u1, const RankOneUnipotent& u2);
// Re-checks a certificate from the two matrices alone.
ZSquaredCertificate check_z_squared(const Matrix& u, const Matrix& v);

struct ConzeOptions {
  long step = 1;        // letters e_ij^{+-step}; a multiple of d keeps g in K_d
  std::size_t budget = 100000;
  std::size_t exhaustive_length = 3;  // plain word search up to this length before steering
  std::function<bool(const Matrix&)> accept;  // extra condition on g
};

struct ConzeResult {
  Matrix g;
  std::size_t explored = 0;
  std::size_t length = 0;
};

// g in SL_n(Z) with d(g p1, p2)^2 < eps^2 and d(g L1, L2)^2 < delta^2.
// Short words in e_ij^{+-step} are tried exhaustively; after that each word
// prefix c is steered by powers of I + step v2 f2^T, whose dynamics pull
// c p1 towards p2 and c L1 towards L2 when c p1 is off L2 and p2 off c L1.
ConzeResult conze_search(const ProjPoint& p1, const ProjSubspace& L1, const ProjPoint& p2, const ProjSubspace& L2,
                         const Rational& epsilon_sq, const Rational& delta_sq, const ConzeOptions& opts = {});

struct ThrowResult {
  SchottkySystem system;
  ZSquaredCertificate certificate;  // for <v1, g v2 g^-1>
  long power = 0;
};

ThrowResult throwing(const SchottkySystem& s, const Matrix& g, const ProjPoint& p1, const ProjPoint& p2,
                     const ProjSubspace& L1, const ProjSubspace& L2, const Rational& epsilon_sq,
                     const Rational& delta_sq);

struct FreeProductReport {
  bool injective = true;
  std::size_t words_checked = 0;
  std::vector<std::pair<std::size_t, long>> relation;  // syllables (element, exponent)
};

// Alternating words u_{i1}^{e1} ... u_{ik}^{ek}, consecutive indices distinct,
// exponents from the given list and their negatives, k <= max_syllables.
FreeProductReport free_product_oracle(const std::vector<Matrix>& elements, std::size_t max_syllables,
                                      const std::vector<long>& exponents = {1, 2}, std::size_t cap = 1000000);

}  // namespace schottky::unischottky
