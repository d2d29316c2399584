#include "schottky/unischottky.hpp"

#include <optional>
#include <tuple>

#include "schottky/errors.hpp"

namespace schottky::unischottky {

namespace {

const exactlin::Place kArch = exactlin::Place::arch();

void check_radii(const Rational& epsilon_sq, const Rational& delta_sq, const char* who) {
  if (epsilon_sq <= 0 || delta_sq >= 1 || epsilon_sq > delta_sq)
    throw PreconditionError(std::string(who) + ": need 0 < epsilon^2 <= delta^2 < 1");
}

ProjHyperplane hyperplane_of(const ProjSubspace& L, const char* who) {
  auto h = L.as_hyperplane();
  if (!h) throw PreconditionError(std::string(who) + ": L must have projective dimension n - 2");
  return *h;
}

// Open balls (x)_a and (y)_b are disjoint iff a + b <= d(x, y).
bool open_disjoint(const Rational& a_sq, const Rational& b_sq, const Rational& d_sq) {
  return sqrt_sum_le(a_sq, b_sq, d_sq);
}

Integer isqrt(const Integer& z) {
  Integer r;
  mpz_sqrt(r.get_mpz_t(), z.get_mpz_t());
  return r;
}

}  // namespace

RankOneUnipotent RankOneUnipotent::from_matrix(const Matrix& u) {
  if (u.rows() != u.cols() || u.rows() < 2) throw InputError("rank-one unipotent: matrix must be square, n >= 2");
  if (!u.is_integral()) throw InputError("rank-one unipotent: matrix must be integral");
  Matrix n = u - Matrix::identity(u.rows());
  if (rank(n) != 1) throw InputError("rank-one unipotent: rank(u - I) must be 1");
  if (!(n * n).is_zero()) throw InputError("rank-one unipotent: (u - I)^2 must vanish");
  RankOneUnipotent out;
  out.u = u;
  out.nilpart = n;
  for (std::size_t j = 0; j < n.cols(); ++j) {
    Vector c = n.col(j);
    if (norm_sq(c) != 0) {
      out.p = ProjPoint(c);
      break;
    }
  }
  out.L = ProjSubspace::span(kernel(n));
  return out;
}

RankOneUnipotent RankOneUnipotent::power(long m) const {
  if (m == 0) throw PreconditionError("rank-one unipotent: zero power is the identity");
  Matrix v = Matrix::identity(u.rows()) + Rational(m) * nilpart;
  return from_matrix(v);
}

RankOneUnipotent from_flag(const ProjPoint& p, const ProjSubspace& L) {
  const std::size_t n = p.dim();
  if (L.ambient() != n) throw DimensionMismatch("from_flag: point and subspace live in different spaces");
  ProjHyperplane h = hyperplane_of(L, "from_flag");
  if (!L.contains(p)) throw PreconditionError("from_flag: point does not lie on L");
  Matrix u = Matrix::identity(n);
  const auto& v = p.coords();
  const auto& f = h.functional();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) u(i, j) += Rational(v[i] * f[j]);
  return RankOneUnipotent::from_matrix(u);
}

std::pair<ProjPoint, ProjSubspace> attraction_data(const Matrix& u) {
  RankOneUnipotent r = RankOneUnipotent::from_matrix(u);
  return {r.p, r.L};
}

long min_power(const RankOneUnipotent& u, const Rational& epsilon_sq, const Rational& delta_sq) {
  check_radii(epsilon_sq, delta_sq, "min_power");
  Rational q = 1 / (epsilon_sq * delta_sq * frobenius_sq(u.nilpart));
  Integer m = isqrt(floor(q)) + 1;
  if (!m.fits_slong_p()) throw BudgetExceeded("min_power: power does not fit a machine integer");
  return m.get_si();
}

bool dynamics_certified(const RankOneUnipotent& u, const Rational& epsilon_sq, const Rational& delta_sq) {
  return epsilon_sq * delta_sq * frobenius_sq(u.nilpart) > 1;
}

std::size_t SchottkySystem::dim() const {
  if (!elements.empty()) return elements.front().u.u.rows();
  if (!attracting.empty()) return attracting.front().dim();
  if (!repelling.empty()) return repelling.front().dim();
  return 0;
}

std::vector<Matrix> SchottkySystem::matrices() const {
  std::vector<Matrix> out;
  for (const auto& e : elements) out.push_back(e.u.u);
  return out;
}

SystemReport verify_system(const SchottkySystem& s) {
  SystemReport r;
  auto fail = [&r](bool& flag, const std::string& msg) {
    flag = false;
    r.ok = false;
    r.diagnostics.push_back(msg);
  };
  const std::size_t k = s.elements.size();
  for (std::size_t i = 0; i < k; ++i) {
    const auto& e = s.elements[i];
    if (e.epsilon_sq <= 0 || e.epsilon_sq > e.delta_sq)
      fail(r.dynamics, "(1) element " + std::to_string(i) + ": need 0 < epsilon <= delta");
    else if (!dynamics_certified(e.u, e.epsilon_sq, e.delta_sq))
      fail(r.dynamics, "(1) element " + std::to_string(i) + ": power too small for its radii");
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const auto& a = s.elements[i];
      const auto& b = s.elements[j];
      Rational d = exactlin::point_subspace_distance_sq(kArch, a.u.p, b.u.hyperplane());
      if (!open_disjoint(a.epsilon_sq, b.delta_sq, d))
        fail(r.cross_disjoint, "(2) ball of element " + std::to_string(i) + " meets tube of element " +
                                   std::to_string(j) + " (squared distance " + to_string(d) + ")");
    }
  for (std::size_t i = 0; i < k; ++i) {
    const auto& e = s.elements[i];
    Ball pb(e.u.p, e.epsilon_sq);
    Ball lb(e.u.hyperplane(), e.delta_sq);
    bool in_a = false, in_r = false;
    for (const auto& a : s.attracting) in_a = in_a || exactlin::ball_contained(kArch, pb, a);
    for (const auto& rr : s.repelling) in_r = in_r || exactlin::ball_contained(kArch, lb, rr);
    if (!in_a) fail(r.points_in_a, "(3) ball of element " + std::to_string(i) + " not inside A");
    if (!in_r) fail(r.tubes_in_r, "(4) tube of element " + std::to_string(i) + " not inside R");
  }
  for (std::size_t i = 0; i < s.attracting.size(); ++i) {
    bool in = false;
    for (const auto& rr : s.repelling) in = in || exactlin::ball_contained(kArch, s.attracting[i], rr);
    if (!in) fail(r.a_in_r, "A ball " + std::to_string(i) + " is not inside R");
  }
  return r;
}

SchottkySystem add_flag(const SchottkySystem& s, const ProjPoint& p, const ProjSubspace& L, const Rational& epsilon_sq,
                        const Rational& delta_sq) {
  check_radii(epsilon_sq, delta_sq, "add_flag");
  if (s.dim() != 0 && s.dim() != p.dim()) throw DimensionMismatch("add_flag: flag and system dimensions differ");
  ProjHyperplane h = hyperplane_of(L, "add_flag");
  if (!L.contains(p)) throw PreconditionError("add_flag: point does not lie on L");
  Ball pb(p, epsilon_sq), lb(h, delta_sq);
  for (std::size_t k = 0; k < s.attracting.size(); ++k) {
    if (!exactlin::balls_disjoint(kArch, pb, s.attracting[k]))
      throw PreconditionError("add_flag: [p]_eps meets A (ball " + std::to_string(k) + ")");
    if (!exactlin::balls_disjoint(kArch, lb, s.attracting[k]))
      throw PreconditionError("add_flag: [L]_delta meets A (ball " + std::to_string(k) + ")");
  }
  for (std::size_t k = 0; k < s.repelling.size(); ++k)
    if (!exactlin::balls_disjoint(kArch, pb, s.repelling[k]))
      throw PreconditionError("add_flag: [p]_eps meets R (ball " + std::to_string(k) + ")");
  RankOneUnipotent u = from_flag(p, L);
  RankOneUnipotent v = u.power(min_power(u, epsilon_sq, delta_sq));
  SchottkySystem out = s;
  out.elements.push_back({v, epsilon_sq, delta_sq});
  out.attracting.push_back(pb);
  out.repelling.push_back(lb);
  SystemReport rep = verify_system(out);
  if (!rep.ok) throw VerificationError("add_flag: enlarged system fails: " + rep.diagnostics.front());
  return out;
}

ZSquaredCertificate check_z_squared(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows()) throw DimensionMismatch("check_z_squared: sizes differ");
  ZSquaredCertificate c;
  c.u = u;
  c.v = v;
  const Matrix id = Matrix::identity(u.rows());
  Matrix nu = u - id, nv = v - id;
  c.commute = u * v == v * u;
  c.products_vanish = (nu * nv).is_zero() && (nv * nu).is_zero();
  Vector a, b;
  for (std::size_t i = 0; i < nu.rows(); ++i)
    for (std::size_t j = 0; j < nu.cols(); ++j) {
      a.push_back(nu(i, j));
      b.push_back(nv(i, j));
    }
  c.nilparts_independent = rank(std::vector<Vector>{a, b}) == 2;
  return c;
}

ZSquaredCertificate z_squared_pair(const Matrix& g, const RankOneUnipotent& u1, const RankOneUnipotent& u2) {
  const std::size_t n = u1.u.rows();
  if (g.rows() != n || u2.u.rows() != n) throw DimensionMismatch("z_squared_pair: sizes differ");
  if (determinant(g) != 1 || !g.is_integral()) throw InputError("z_squared_pair: g must lie in SL_n(Z)");
  if (!(u2.p == exactlin::apply(g, u1.p)))
    throw PreconditionError("z_squared_pair: p_{u2} != g p_{u1}: " + exactlin::describe(u2.p) + " vs " +
                            exactlin::describe(exactlin::apply(g, u1.p)));
  if (u2.L == exactlin::apply(g, u1.L))
    throw PreconditionError("z_squared_pair: L_{u2} = g L_{u1}; the pair only generates Z");
  Matrix w = inverse(g) * u2.u * g;
  ZSquaredCertificate c = check_z_squared(u1.u, w);
  if (!c.valid()) throw VerificationError("z_squared_pair: exact checks failed");
  return c;
}

namespace {

struct FlagImage {
  Vector y;    // g p1
  Vector phi;  // f1 g^-1
};

// Left multiplication by I + s E_ij.
void apply_letter(Matrix& g, FlagImage& im, std::size_t i, std::size_t j, const Rational& s) {
  const std::size_t n = g.rows();
  for (std::size_t c = 0; c < n; ++c) g(i, c) += s * g(j, c);
  im.y[i] += s * im.y[j];
  im.phi[j] -= s * im.phi[i];
}

}  // namespace

ConzeResult conze_search(const ProjPoint& p1, const ProjSubspace& L1, const ProjPoint& p2, const ProjSubspace& L2,
                         const Rational& epsilon_sq, const Rational& delta_sq, const ConzeOptions& opts) {
  const std::size_t n = p1.dim();
  if (n < 3) throw PreconditionError("conze_search: needs n >= 3");
  if (p2.dim() != n || L1.ambient() != n || L2.ambient() != n)
    throw DimensionMismatch("conze_search: flags in different spaces");
  if (epsilon_sq <= 0 || delta_sq <= 0) throw PreconditionError("conze_search: radii must be positive");
  if (opts.step == 0) throw PreconditionError("conze_search: step must be nonzero");
  ProjHyperplane h1 = hyperplane_of(L1, "conze_search"), h2 = hyperplane_of(L2, "conze_search");
  if (!L1.contains(p1) || !L2.contains(p2)) throw PreconditionError("conze_search: points must lie on their subspaces");

  std::size_t explored = 0;
  auto spend = [&] {
    if (explored++ >= opts.budget)
      throw BudgetExceeded("conze_search: budget of " + std::to_string(opts.budget) + " words exhausted");
  };
  auto hits = [&](const Matrix& g, const FlagImage& im) {
    return exactlin::proj_distance_sq(kArch, ProjPoint(im.y), p2) < epsilon_sq &&
           exactlin::hyperplane_distance_sq(kArch, ProjHyperplane(im.phi), h2) < delta_sq &&
           (!opts.accept || opts.accept(g));
  };

  // Letters e_ij^{+-step} in a fixed order.
  std::vector<std::tuple<std::size_t, std::size_t, Rational>> letters;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j)
        for (int sg : {1, -1}) letters.emplace_back(i, j, Rational(sg * opts.step));

  // Words in length-lex order without immediate cancellation.
  struct Prefix {
    Matrix g;
    FlagImage im;
    std::size_t length;
    std::size_t last;
  };
  const FlagImage start{p1.vector(), h1.vector()};
  std::vector<Prefix> layer{{Matrix::identity(n), start, 0, letters.size()}};

  // Steering element: the unipotent of the target flag, inside K_step.
  const Vector v2 = p2.vector(), f2 = h2.vector();
  const Matrix nil = Rational(opts.step) * Matrix::outer(v2, f2);
  auto steer = [&](const Prefix& pre) -> std::optional<ConzeResult> {
    if (dot(f2, pre.im.y) == 0 || dot(pre.im.phi, v2) == 0) return std::nullopt;
    const Matrix id = Matrix::identity(n);
    auto at = [&](long k) {
      Matrix w = id + Rational(k) * nil;
      FlagImage im{w * pre.im.y, left_multiply(pre.im.phi, id - Rational(k) * nil)};
      return std::make_pair(w * pre.g, im);
    };
    long hi = 1;
    while (true) {
      spend();
      auto [g, im] = at(hi);
      if (hits(g, im)) break;
      if (hi > (1L << 40)) return std::nullopt;
      hi *= 2;
    }
    long lo = hi / 2;  // lo fails (or is zero)
    while (hi - lo > 1) {
      spend();
      long mid = lo + (hi - lo) / 2;
      auto [g, im] = at(mid);
      if (hits(g, im))
        hi = mid;
      else
        lo = mid;
    }
    auto [g, im] = at(hi);
    return ConzeResult{g, explored, pre.length + 1};
  };

  for (std::size_t len = 0;; ++len) {
    // Exhaustive check of this layer first, then steering from each prefix.
    for (const auto& pre : layer) {
      spend();
      if (hits(pre.g, pre.im)) return {pre.g, explored, pre.length};
    }
    if (len >= opts.exhaustive_length)
      for (const auto& pre : layer)
        if (auto r = steer(pre)) return *r;
    std::vector<Prefix> next;
    for (const auto& pre : layer)
      for (std::size_t a = 0; a < letters.size(); ++a) {
        if (pre.last < letters.size()) {
          const auto& [pi, pj, ps] = letters[pre.last];
          const auto& [ai, aj, as] = letters[a];
          if (pi == ai && pj == aj && ps == -as) continue;
        }
        Prefix p = pre;
        const auto& [i, j, s] = letters[a];
        apply_letter(p.g, p.im, i, j, s);
        p.length = pre.length + 1;
        p.last = a;
        next.push_back(std::move(p));
        if (next.size() + explored > opts.budget) break;
      }
    if (next.empty()) throw BudgetExceeded("conze_search: budget exhausted");
    layer = std::move(next);
  }
}

ThrowResult throwing(const SchottkySystem& s, const Matrix& g, const ProjPoint& p1, const ProjPoint& p2,
                     const ProjSubspace& L1, const ProjSubspace& L2, const Rational& epsilon_sq,
                     const Rational& delta_sq) {
  check_radii(epsilon_sq, delta_sq, "throwing");
  const std::size_t n = p1.dim();
  if (g.rows() != n || p2.dim() != n || (s.dim() != 0 && s.dim() != n))
    throw DimensionMismatch("throwing: dimensions differ");
  if (!g.is_integral() || determinant(g) != 1) throw InputError("throwing: g must lie in SL_n(Z)");
  ProjHyperplane h1 = hyperplane_of(L1, "throwing"), h2 = hyperplane_of(L2, "throwing");
  if (!L1.contains(p1) || !L2.contains(p2)) throw PreconditionError("throwing: points must lie on their subspaces");
  Ball b1(p1, epsilon_sq), b2(p2, epsilon_sq), t1(h1, delta_sq), t2(h2, delta_sq);
  for (const auto& r : s.repelling)
    if (!exactlin::balls_disjoint(kArch, b1, r) || !exactlin::balls_disjoint(kArch, b2, r))
      throw PreconditionError("throwing: condition (1) fails, a point ball meets R");
  for (const auto& a : s.attracting)
    if (!exactlin::balls_disjoint(kArch, t1, a) || !exactlin::balls_disjoint(kArch, t2, a))
      throw PreconditionError("throwing: condition (1) fails, a tube meets A");
  if (!exactlin::balls_disjoint(kArch, b1, t2) || !exactlin::balls_disjoint(kArch, b2, t1))
    throw PreconditionError("throwing: condition (2) fails, a point ball meets the other tube");
  if (!(exactlin::apply(g, p2) == p1)) throw PreconditionError("throwing: condition (3) fails, p1 != g p2");
  if (exactlin::apply(g, L2) == L1) throw PreconditionError("throwing: condition (3) fails, L1 = g L2");

  RankOneUnipotent u1 = from_flag(p1, L1), u2 = from_flag(p2, L2);
  long m = std::max(min_power(u1, epsilon_sq, delta_sq), min_power(u2, epsilon_sq, delta_sq));
  RankOneUnipotent v1 = u1.power(m), v2 = u2.power(m);
  ThrowResult out;
  out.power = m;
  out.system = s;
  out.system.elements.push_back({v1, epsilon_sq, delta_sq});
  out.system.elements.push_back({v2, epsilon_sq, delta_sq});
  out.system.attracting.push_back(b1);
  out.system.attracting.push_back(b2);
  out.system.repelling.push_back(t1);
  out.system.repelling.push_back(t2);
  SystemReport rep = verify_system(out.system);
  if (!rep.ok) throw VerificationError("throwing: enlarged system fails: " + rep.diagnostics.front());
  // p_{v2} = g^-1 p_{v1}, so the pair is <v1, g v2 g^-1>.
  out.certificate = z_squared_pair(inverse(g), v1, v2);
  return out;
}

namespace {

struct SyllableDfs {
  const std::vector<std::vector<Matrix>>& powers;  // powers[i][k]
  const std::vector<long>& exps;
  std::size_t depth = 0;
  FreeProductReport report;
  std::vector<std::pair<std::size_t, std::size_t>> stack;

  bool run(const Matrix& prefix) {
    for (std::size_t i = 0; i < powers.size(); ++i) {
      if (!stack.empty() && stack.back().first == i) continue;
      for (std::size_t k = 0; k < exps.size(); ++k) {
        Matrix m = prefix * powers[i][k];
        stack.push_back({i, k});
        if (stack.size() == depth) {
          ++report.words_checked;
          if (m.is_identity()) {
            report.injective = false;
            for (auto [a, b] : stack) report.relation.push_back({a, exps[b]});
            return false;
          }
        } else if (!run(m)) {
          return false;
        }
        stack.pop_back();
      }
    }
    return true;
  }
};

}  // namespace

FreeProductReport free_product_oracle(const std::vector<Matrix>& elements, std::size_t max_syllables,
                                      const std::vector<long>& exponents, std::size_t cap) {
  if (elements.empty() || max_syllables == 0) return {};
  std::vector<long> exps;
  for (long e : exponents) {
    if (e == 0) throw PreconditionError("free_product_oracle: zero exponent");
    exps.push_back(e);
    exps.push_back(-e);
  }
  const std::size_t k = elements.size(), x = exps.size();
  std::size_t total = 0, layer = k * x;
  for (std::size_t len = 1; len <= max_syllables; ++len) {
    total += layer;
    if (total > cap)
      throw BudgetExceeded("free_product_oracle: more than " + std::to_string(cap) + " alternating words");
    layer *= (k - 1) * x;
  }
  std::vector<std::vector<Matrix>> powers;
  for (const auto& u : elements) {
    std::vector<Matrix> row;
    for (long e : exps) row.push_back(power(u, e));
    powers.push_back(std::move(row));
  }
  SyllableDfs dfs{powers, exps, 0, {}, {}};
  const Matrix id = Matrix::identity(elements.front().rows());
  for (dfs.depth = 1; dfs.depth <= max_syllables; ++dfs.depth)
    if (!dfs.run(id)) break;
  return dfs.report;
}

}  // namespace schottky::unischottky
