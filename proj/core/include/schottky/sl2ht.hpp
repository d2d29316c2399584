#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "schottky/pingpong.hpp"
#include "schottky/quadratic.hpp"

namespace schottky::sl2ht {

using pingpong::Word;
using quadratic::Arc;
using quadratic::CirclePoint;

struct FixedPoints {
  CirclePoint attracting;
  CirclePoint repelling;
};

// Attracting and repelling points of a hyperbolic element of SL_2(Q).
FixedPoints fixed_points(const Matrix& g);

struct PreciseArcs {
  Arc plus;   // attracting
  Arc minus;  // repelling
  friend bool operator==(const PreciseArcs&, const PreciseArcs&) = default;
};

// Replaces initial attracting/repelling arcs by precise ones:
// minus is kept, plus becomes g applied to the closure of the complement of minus.
PreciseArcs make_precise(const Matrix& g, const Arc& plus1, const Arc& minus1, std::size_t power_bound = 50);
// Preciseness of arcs for g, including the fundamental-domain check on <g> up to power_bound.
bool verify_precise(const Matrix& g, const PreciseArcs& arcs, std::size_t power_bound = 50,
                    std::string* why = nullptr);

struct PreciseTable {
  std::vector<Matrix> generators;
  std::vector<PreciseArcs> arcs;
  std::vector<std::optional<contraction::VeryProximalCertificate>> certificates;
  std::vector<Arc> gaps;  // open arcs making up O
  CirclePoint basepoint;  // rational point inside O

  std::size_t size() const { return generators.size(); }
};

// Verifies precise, pairwise disjoint arcs with nonempty O and fills gaps and basepoint.
PreciseTable certify_table(const std::vector<Matrix>& gens, const std::vector<PreciseArcs>& arcs);
// Chooses rational repelling arcs around each repelling point and certifies.
PreciseTable build_precise_table(const std::vector<Matrix>& gens);

bool in_fundamental_closure(const CirclePoint& x, const PreciseTable& table);
bool in_fundamental_domain(const CirclePoint& x, const PreciseTable& table);

std::vector<CirclePoint> limit_set_sample(const PreciseTable& table, std::size_t depth);

struct Reduction {
  bool limit = false;  // max_steps letters without reaching the closure of O
  Word word;           // eval(word) * x is the reduced point
  CirclePoint point;
};

Reduction boundary_reduce(const CirclePoint& x, const PreciseTable& table, std::size_t max_steps = 64);

bool membership(const Matrix& g, const PreciseTable& table, std::size_t max_steps = 64);

struct PPP {
  std::vector<Matrix> alpha;
  std::vector<Matrix> beta;

  std::size_t m() const { return alpha.size(); }
  bool special() const;
};

bool is_legitimate(const PPP& phi, const PreciseTable& table);

struct Realization {
  Matrix gamma;  // the very proximal element before powering
  long power = 0;
  Matrix gamma_k;
  PreciseTable table;  // old generators followed by the m new ones
  std::vector<Matrix> theta;
  std::vector<Matrix> eta;
  CirclePoint r;
  CirclePoint a;
  std::size_t candidates_tried = 0;
  bool outside_old = false;  // gamma_k not in the old group
  std::vector<bool> coset_equations;  // b_j^-1 gamma_k a_j in the new group
  bool free_to_length = false;
  std::size_t freeness_length = 0;

  bool verified() const;
};

Realization realize_ppp(const PPP& phi, const PreciseTable& table, std::size_t budget = 10000,
                        std::size_t freeness_length = 6);

}  // namespace schottky::sl2ht
