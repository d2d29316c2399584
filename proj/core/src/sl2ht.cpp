#include "schottky/sl2ht.hpp"

#include <algorithm>
#include <set>

#include "schottky/errors.hpp"

namespace schottky::sl2ht {

using pingpong::Letter;
using quadratic::QuadNum;

namespace {

void check_sl2(const Matrix& g, const char* who) {
  if (g.rows() != 2 || g.cols() != 2) throw DimensionMismatch(std::string(who) + ": expects a 2x2 matrix");
  if (determinant(g) != 1) throw InputError(std::string(who) + ": determinant must be 1");
}

bool nondegenerate(const Arc& a) { return !(a.start == a.end); }

bool open_disjoint(const Arc& a, const Arc& b) {
  return !(a.start == b.start) && !quadratic::in_open(b.start, a) && !quadratic::in_open(a.start, b);
}

// Rational arc of half-width w (in the chart, or around infinity) centred near v.
Arc arc_around(const CirclePoint& v, const Rational& w) {
  if (v.is_infinity()) return {CirclePoint(QuadNum(Rational(1) / w)), CirclePoint(QuadNum(Rational(-1) / w))};
  // Centre rounded at the scale of w, so |c - v| < w / 4.
  unsigned bits = static_cast<unsigned>(std::max(0L, -ilog2(w)) + 3);
  Rational c = round_dyadic(v.t().bounds(bits + 8).first, bits);
  return {CirclePoint(QuadNum(Rational(c - w))), CirclePoint(QuadNum(Rational(c + w)))};
}

Matrix parabolic_toward(const CirclePoint& x, long n) {
  // u = I + n v (Jv)^T with v = (P, Q) primitive; u fixes [v].
  auto [p, q] = x.vector();
  Integer P = 1, Q = 0;
  if (q != 0) {
    Rational t = p / q;
    P = t.get_num();
    Q = t.get_den();
  }
  Matrix u = Matrix::identity(2);
  Rational N = n;
  u(0, 0) -= N * Rational(P * Q);
  u(0, 1) += N * Rational(P * P);
  u(1, 0) -= N * Rational(Q * Q);
  u(1, 1) += N * Rational(P * Q);
  return u;
}

bool inside_gaps(const Arc& a, const std::vector<Arc>& gaps) {
  for (const Arc& g : gaps)
    if (quadratic::closed_within_open(a, g)) return true;
  return false;
}

bool pairwise_distinct(const std::vector<CirclePoint>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (pts[i] == pts[j]) return false;
  return true;
}

}  // namespace

FixedPoints fixed_points(const Matrix& g) {
  check_sl2(g, "fixed_points");
  const Rational &a = g(0, 0), &b = g(0, 1), &c = g(1, 0), &d = g(1, 1);
  Rational tr = a + d;
  if (tr * tr <= 4) throw PreconditionError("fixed_points: element is not hyperbolic");
  if (c == 0) {
    CirclePoint inf = CirclePoint::infinity();
    CirclePoint other(QuadNum(Rational(b / (d - a))));
    return abs(a) > abs(d) ? FixedPoints{inf, other} : FixedPoints{other, inf};
  }
  QuadNum s = QuadNum::sqrt_of(tr * tr - 4);
  QuadNum half(Rational(1, 2));
  QuadNum big = (QuadNum(tr) + (tr > 0 ? s : -s)) * half;
  QuadNum small = (QuadNum(tr) - (tr > 0 ? s : -s)) * half;
  return {CirclePoint((big - QuadNum(d)) / QuadNum(c)), CirclePoint((small - QuadNum(d)) / QuadNum(c))};
}

bool verify_precise(const Matrix& g, const PreciseArcs& arcs, std::size_t power_bound, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  FixedPoints fp = fixed_points(g);
  if (!nondegenerate(arcs.plus) || !nondegenerate(arcs.minus)) return fail("degenerate arc");
  if (!quadratic::in_open(fp.attracting, arcs.plus)) return fail("attracting point not inside the plus arc");
  if (!quadratic::in_open(fp.repelling, arcs.minus)) return fail("repelling point not inside the minus arc");
  if (!quadratic::closed_disjoint(arcs.plus, arcs.minus)) return fail("plus and minus arcs meet");
  if (!(quadratic::apply(g, quadratic::complement(arcs.minus)) == arcs.plus))
    return fail("plus arc is not the image of the complement of the minus arc");
  // O for <g>: the two open arcs between the neighbourhoods.
  std::vector<Arc> o{{arcs.minus.end, arcs.plus.start}, {arcs.plus.end, arcs.minus.start}};
  std::vector<Arc> moved = o;
  for (std::size_t k = 1; k <= power_bound; ++k) {
    for (Arc& m : moved) m = quadratic::apply(g, m);
    for (const Arc& m : moved)
      for (const Arc& base : o)
        if (!open_disjoint(m, base)) return fail("g^" + std::to_string(k) + " O meets O");
  }
  return true;
}

PreciseArcs make_precise(const Matrix& g, const Arc& plus1, const Arc& minus1, std::size_t power_bound) {
  FixedPoints fp = fixed_points(g);
  if (!nondegenerate(plus1) || !nondegenerate(minus1)) throw PreconditionError("make_precise: degenerate arc");
  if (!quadratic::closed_disjoint(plus1, minus1))
    throw PreconditionError("make_precise: initial arcs meet (or cover the circle)");
  if (!quadratic::in_open(fp.attracting, plus1) || !quadratic::in_open(fp.repelling, minus1))
    throw PreconditionError("make_precise: fixed points are not interior to the initial arcs");
  Arc image = quadratic::apply(g, quadratic::complement(minus1));
  if (!quadratic::closed_within(image, plus1))
    throw PreconditionError("make_precise: g does not map the complement of minus into plus");
  PreciseArcs out{image, minus1};
  std::string why;
  if (!verify_precise(g, out, power_bound, &why)) throw VerificationError("make_precise: " + why);
  return out;
}

PreciseTable certify_table(const std::vector<Matrix>& gens, const std::vector<PreciseArcs>& arcs) {
  if (gens.empty()) throw PreconditionError("certify_table: no generators");
  if (gens.size() != arcs.size()) throw PreconditionError("certify_table: one arc pair per generator");
  PreciseTable t;
  t.generators = gens;
  t.arcs = arcs;
  std::vector<Arc> all;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    std::string why;
    if (!verify_precise(gens[i], arcs[i], 50, &why))
      throw VerificationError("certify_table: generator " + std::to_string(i) + ": " + why);
    all.push_back(arcs[i].plus);
    all.push_back(arcs[i].minus);
  }
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      if (!quadratic::closed_disjoint(all[i], all[j]))
        throw VerificationError("certify_table: arcs " + all[i].to_string() + " and " + all[j].to_string() + " meet");
  std::sort(all.begin(), all.end(),
            [](const Arc& x, const Arc& y) { return quadratic::chart_less(x.start, y.start); });
  for (std::size_t i = 0; i < all.size(); ++i) {
    const Arc& cur = all[i];
    const Arc& nxt = all[(i + 1) % all.size()];
    if (!(cur.end == nxt.start)) t.gaps.push_back({cur.end, nxt.start});
  }
  if (t.gaps.empty()) throw VerificationError("certify_table: the fundamental domain is empty");
  t.basepoint = quadratic::interior_points(t.gaps.front(), 1).front();
  for (const Matrix& g : gens) {
    try {
      t.certificates.emplace_back(contraction::certify_very_proximal_auto(g));
    } catch (const Error&) {
      t.certificates.emplace_back(std::nullopt);
    }
  }
  return t;
}

PreciseTable build_precise_table(const std::vector<Matrix>& gens) {
  std::vector<PreciseArcs> arcs;
  for (const Matrix& g : gens) {
    FixedPoints fp = fixed_points(g);
    std::optional<PreciseArcs> best;
    double best_len = 0;
    for (int s = 1; s <= 40; ++s) {
      Arc minus = arc_around(fp.repelling, pow2(-s));
      if (!quadratic::in_open(fp.repelling, minus) || quadratic::in_closed(fp.attracting, minus)) continue;
      PreciseArcs cand{quadratic::apply(g, quadratic::complement(minus)), minus};
      if (!quadratic::closed_disjoint(cand.plus, cand.minus) || !quadratic::in_open(fp.attracting, cand.plus))
        continue;
      double len = std::max(quadratic::angular_length(cand.plus), quadratic::angular_length(cand.minus));
      if (!best || len < best_len) {
        best = cand;
        best_len = len;
      }
    }
    if (!best) throw VerificationError("build_precise_table: no admissible arcs for a generator");
    arcs.push_back(*best);
  }
  return certify_table(gens, arcs);
}

bool in_fundamental_closure(const CirclePoint& x, const PreciseTable& table) {
  for (const PreciseArcs& a : table.arcs)
    if (quadratic::in_open(x, a.plus) || quadratic::in_open(x, a.minus)) return false;
  return true;
}

bool in_fundamental_domain(const CirclePoint& x, const PreciseTable& table) {
  for (const Arc& g : table.gaps)
    if (quadratic::in_open(x, g)) return true;
  return false;
}

std::vector<CirclePoint> limit_set_sample(const PreciseTable& table, std::size_t depth) {
  std::vector<CirclePoint> base;
  for (const Matrix& g : table.generators) {
    FixedPoints fp = fixed_points(g);
    base.push_back(fp.attracting);
    base.push_back(fp.repelling);
  }
  auto less = [](const CirclePoint& x, const CirclePoint& y) { return quadratic::chart_less(x, y); };
  std::set<CirclePoint, decltype(less)> seen(less);
  std::vector<CirclePoint> out;
  pingpong::WordEnumerator en(table.size());
  for (; en.current().letters.size() <= depth; en.next()) {
    Matrix m = pingpong::eval_word(en.current(), table.generators);
    for (const CirclePoint& b : base) {
      CirclePoint x = quadratic::apply(m, b);
      if (seen.insert(x).second) out.push_back(x);
    }
  }
  return out;
}

Reduction boundary_reduce(const CirclePoint& x, const PreciseTable& table, std::size_t max_steps) {
  std::vector<Matrix> inv;
  for (const Matrix& g : table.generators) inv.push_back(inverse(g));
  Reduction r;
  r.point = x;
  for (std::size_t step = 0;; ++step) {
    std::optional<Letter> letter;
    for (std::size_t i = 0; i < table.size() && !letter; ++i) {
      if (quadratic::in_open(r.point, table.arcs[i].plus))
        letter = Letter{i, -1};
      else if (quadratic::in_open(r.point, table.arcs[i].minus))
        letter = Letter{i, 1};
    }
    if (!letter) return r;
    if (step == max_steps) {
      r.limit = true;
      return r;
    }
    r.point = quadratic::apply(letter->sign > 0 ? table.generators[letter->gen] : inv[letter->gen], r.point);
    r.word.letters.insert(r.word.letters.begin(), *letter);
  }
}

bool membership(const Matrix& g, const PreciseTable& table, std::size_t max_steps) {
  check_sl2(g, "membership");
  if (g.is_identity()) return true;
  Reduction r = boundary_reduce(quadratic::apply(g, table.basepoint), table, max_steps);
  if (r.limit) throw BudgetExceeded("membership: reduction of g x0 did not reach the fundamental domain");
  return (pingpong::eval_word(r.word, table.generators) * g).is_identity();
}

bool PPP::special() const {
  return !alpha.empty() && alpha.size() == beta.size() && alpha.front().is_identity() && beta.front().is_identity();
}

bool is_legitimate(const PPP& phi, const PreciseTable& table) {
  if (phi.alpha.empty() || phi.alpha.size() != phi.beta.size())
    throw PreconditionError("is_legitimate: alpha and beta need the same positive length");
  for (const auto* side : {&phi.alpha, &phi.beta})
    for (std::size_t i = 0; i < side->size(); ++i)
      for (std::size_t j = i + 1; j < side->size(); ++j)
        if (membership(inverse((*side)[j]) * (*side)[i], table)) return false;
  return true;
}

bool Realization::verified() const {
  return outside_old && free_to_length &&
         std::all_of(coset_equations.begin(), coset_equations.end(), [](bool b) { return b; });
}

namespace {

// Maps x by c_j^-1 and reduces into O; T_j is the combined map.
struct SideData {
  CirclePoint x;
  std::vector<Matrix> T;
  std::vector<CirclePoint> images;
};

std::optional<SideData> side_data(const CirclePoint& x, const std::vector<Matrix>& reps, const PreciseTable& table) {
  SideData d{x, {}, {}};
  for (const Matrix& c : reps) {
    Matrix ci = inverse(c);
    Reduction red = boundary_reduce(quadratic::apply(ci, x), table);
    if (red.limit || !in_fundamental_domain(red.point, table)) return std::nullopt;
    d.T.push_back(pingpong::eval_word(red.word, table.generators) * ci);
    d.images.push_back(red.point);
  }
  if (!pairwise_distinct(d.images)) return std::nullopt;
  return d;
}

struct ArcChoice {
  long power;
  Matrix gamma_k;
  std::vector<PreciseArcs> arcs;
};

std::optional<ArcChoice> choose_arcs(const Matrix& gamma, const FixedPoints& fp, const SideData& R, const SideData& A,
                                     const PreciseTable& table) {
  const std::size_t m = R.T.size();
  for (int s = 3; s <= 60; ++s) {
    Arc minus = arc_around(fp.repelling, pow2(-s));
    if (!quadratic::in_open(fp.repelling, minus) || quadratic::in_closed(fp.attracting, minus)) continue;
    std::vector<Arc> minus_j;
    bool ok = true;
    for (std::size_t j = 0; j < m && ok; ++j) {
      minus_j.push_back(quadratic::apply(R.T[j], minus));
      ok = inside_gaps(minus_j.back(), table.gaps);
    }
    for (std::size_t i = 0; i < m && ok; ++i)
      for (std::size_t j = i + 1; j < m && ok; ++j) ok = quadratic::closed_disjoint(minus_j[i], minus_j[j]);
    if (!ok) continue;
    Matrix gk = gamma;
    for (long k = 1; k <= (1L << 10); k *= 2, gk = gk * gk) {
      Arc plus = quadratic::apply(gk, quadratic::complement(minus));
      if (!quadratic::closed_disjoint(plus, minus) || !quadratic::in_open(fp.attracting, plus)) continue;
      std::vector<Arc> plus_j;
      bool good = true;
      for (std::size_t j = 0; j < m && good; ++j) {
        plus_j.push_back(quadratic::apply(A.T[j], plus));
        good = inside_gaps(plus_j.back(), table.gaps);
        for (const Arc& a : minus_j) good = good && quadratic::closed_disjoint(plus_j.back(), a);
        for (std::size_t i = 0; i + 1 < plus_j.size() && good; ++i)
          good = quadratic::closed_disjoint(plus_j[i], plus_j.back());
      }
      if (!good) continue;
      ArcChoice c{k, gk, {}};
      for (std::size_t j = 0; j < m; ++j) c.arcs.push_back({plus_j[j], minus_j[j]});
      return c;
    }
  }
  return std::nullopt;
}

}  // namespace

Realization realize_ppp(const PPP& phi, const PreciseTable& table, std::size_t budget, std::size_t freeness_length) {
  if (!phi.special()) throw PreconditionError("realize_ppp: phi must be special (a_1 = b_1 = e)");
  for (const auto* side : {&phi.alpha, &phi.beta})
    for (const Matrix& g : *side) check_sl2(g, "realize_ppp");
  if (!is_legitimate(phi, table)) throw PreconditionError("realize_ppp: phi is not legitimate modulo the table group");
  const std::size_t m = phi.m();

  std::vector<CirclePoint> cands;
  for (const Arc& g : table.gaps) {
    auto pts = quadratic::interior_points(g, 7);
    cands.insert(cands.end(), pts.begin(), pts.end());
  }
  std::vector<SideData> rs, as;
  for (const CirclePoint& x : cands) {
    if (auto d = side_data(x, phi.alpha, table)) rs.push_back(*d);
    if (auto d = side_data(x, phi.beta, table)) as.push_back(*d);
  }

  std::size_t tried = 0;
  for (const SideData& R : rs)
    for (const SideData& A : as) {
      if (R.x == A.x) continue;
      std::vector<CirclePoint> pts = R.images;
      pts.insert(pts.end(), A.images.begin(), A.images.end());
      if (!pairwise_distinct(pts)) continue;
      for (long N = 1; N <= (1L << 20); N *= 2) {
        if (++tried > budget) throw BudgetExceeded("realize_ppp: candidate budget exhausted");
        Matrix gamma = parabolic_toward(A.x, N) * parabolic_toward(R.x, -N);
        FixedPoints fp;
        try {
          fp = fixed_points(gamma);
        } catch (const PreconditionError&) {
          continue;
        }
        // Conditions on the fixed points: the same reductions still land in O,
        // and the 2m reduced points are distinct.
        std::vector<CirclePoint> moved;
        bool ok = true;
        for (std::size_t j = 0; j < m && ok; ++j) {
          moved.push_back(quadratic::apply(R.T[j], fp.repelling));
          ok = in_fundamental_domain(moved.back(), table);
        }
        for (std::size_t j = 0; j < m && ok; ++j) {
          moved.push_back(quadratic::apply(A.T[j], fp.attracting));
          ok = in_fundamental_domain(moved.back(), table);
        }
        if (!ok || !pairwise_distinct(moved)) continue;
        auto choice = choose_arcs(gamma, fp, R, A, table);
        if (!choice) continue;

        std::vector<Matrix> gens = table.generators;
        std::vector<PreciseArcs> arcs = table.arcs;
        for (std::size_t j = 0; j < m; ++j) {
          gens.push_back(A.T[j] * choice->gamma_k * inverse(R.T[j]));
          arcs.push_back(choice->arcs[j]);
        }
        PreciseTable extended;
        try {
          extended = certify_table(gens, arcs);
        } catch (const VerificationError&) {
          continue;
        }
        Realization out;
        out.gamma = gamma;
        out.power = choice->power;
        out.gamma_k = choice->gamma_k;
        out.table = std::move(extended);
        out.r = R.x;
        out.a = A.x;
        out.candidates_tried = tried;
        for (std::size_t j = 0; j < m; ++j) {
          out.theta.push_back(inverse(R.T[j] * phi.alpha[j]));
          out.eta.push_back(inverse(A.T[j] * phi.beta[j]));
        }
        out.outside_old = !membership(out.gamma_k, table);
        for (std::size_t j = 0; j < m; ++j)
          out.coset_equations.push_back(
              membership(inverse(phi.beta[j]) * out.gamma_k * phi.alpha[j], out.table));
        out.freeness_length = freeness_length;
        out.free_to_length = pingpong::freeness_search(out.table.generators, freeness_length).free;
        return out;
      }
    }
  throw BudgetExceeded("realize_ppp: no admissible gamma among the candidate points");
}

}  // namespace schottky::sl2ht
