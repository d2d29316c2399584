#include "schottky/congruence.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "schottky/errors.hpp"

namespace schottky::congruence {

using exactlin::Ball;
using exactlin::ProjHyperplane;
using exactlin::ProjPoint;
using exactlin::ProjSubspace;
using unischottky::RankOneUnipotent;
using unischottky::SystemElement;

namespace {

const exactlin::Place kArch = exactlin::Place::arch();

long mod_entry(const Rational& x, long d) {
  if (x.get_den() != 1) throw InputError("reduce_mod: entry is not an integer");
  return static_cast<long>(mpz_fdiv_ui(x.get_num_mpz_t(), static_cast<unsigned long>(d)));
}

void check_modulus(long d, const char* who) {
  if (d < 2) throw PreconditionError(std::string(who) + ": modulus must be >= 2");
}

std::vector<std::pair<long, int>> factor(long d) {
  std::vector<std::pair<long, int>> out;
  for (long p = 2; p * p <= d; ++p) {
    int k = 0;
    while (d % p == 0) {
      d /= p;
      ++k;
    }
    if (k) out.emplace_back(p, k);
  }
  if (d > 1) out.emplace_back(d, 1);
  return out;
}

// Matrices mod d encoded as integers: row i occupies digit i in base D = d^n,
// entry j of a row is digit j in base d.
struct Codec {
  std::size_t n;
  std::uint64_t d;
  std::uint64_t D;
  std::uint64_t total;  // d^(n^2)

  Codec(std::size_t n_, long d_) : n(n_), d(static_cast<std::uint64_t>(d_)) {
    long double bound = 1;
    for (std::size_t k = 0; k < n * n; ++k) bound *= static_cast<long double>(d);
    if (bound >= 9.2e18L) throw PreconditionError("image_closure: d^(n^2) does not fit in 64 bits");
    D = 1;
    for (std::size_t k = 0; k < n; ++k) D *= d;
    total = 1;
    for (std::size_t k = 0; k < n; ++k) total *= D;
  }

  std::uint64_t encode(const std::vector<long>& e) const {
    std::uint64_t c = 0;
    for (std::size_t i = n; i-- > 0;)
      for (std::size_t j = n; j-- > 0;) c = c * d + static_cast<std::uint64_t>(e[i * n + j]);
    return c;
  }

  std::vector<long> decode(std::uint64_t c) const {
    std::vector<long> e(n * n);
    for (std::size_t k = 0; k < n * n; ++k) {
      e[k] = static_cast<long>(c % d);
      c /= d;
    }
    return e;
  }

  // T[r] = code of the row r * s.
  std::vector<std::uint32_t> row_table(const ModMatrix& s) const {
    std::vector<std::uint32_t> t(D);
    std::vector<long> row(n);
    for (std::uint64_t r = 0; r < D; ++r) {
      std::uint64_t x = r;
      for (std::size_t j = 0; j < n; ++j) {
        row[j] = static_cast<long>(x % d);
        x /= d;
      }
      std::uint64_t out = 0;
      for (std::size_t j = n; j-- > 0;) {
        long acc = 0;
        for (std::size_t k = 0; k < n; ++k) acc = (acc + row[k] * s.entries[k * n + j]) % static_cast<long>(d);
        out = out * d + static_cast<std::uint64_t>(acc);
      }
      t[r] = static_cast<std::uint32_t>(out);
    }
    return t;
  }
};

class Visited {
 public:
  explicit Visited(std::uint64_t total) {
    if (total <= (std::uint64_t{1} << 31)) bits_.assign((total + 63) / 64, 0);
  }
  // True when c was not yet present.
  bool insert(std::uint64_t c) {
    if (!bits_.empty()) {
      std::uint64_t& w = bits_[c >> 6];
      std::uint64_t m = std::uint64_t{1} << (c & 63);
      if (w & m) return false;
      w |= m;
      return true;
    }
    return set_.insert(c).second;
  }

 private:
  std::vector<std::uint64_t> bits_;
  std::unordered_set<std::uint64_t> set_;
};

long element_order(const std::vector<long>& g, std::size_t n, long d) {
  std::vector<long> x = g, tmp(n * n);
  for (long k = 1;; ++k) {
    bool id = true;
    for (std::size_t i = 0; i < n && id; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (x[i * n + j] != (i == j ? 1 : 0)) {
          id = false;
          break;
        }
    if (id) return k;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        long acc = 0;
        for (std::size_t l = 0; l < n; ++l) acc = (acc + x[i * n + l] * g[l * n + j]) % d;
        tmp[i * n + j] = acc;
      }
    x.swap(tmp);
  }
}

}  // namespace

bool ModMatrix::is_identity() const {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if ((*this)(i, j) != (i == j ? 1 % modulus : 0)) return false;
  return true;
}

ModMatrix ModMatrix::operator*(const ModMatrix& o) const {
  if (n != o.n || modulus != o.modulus) throw DimensionMismatch("ModMatrix product: incompatible operands");
  ModMatrix r{n, modulus, std::vector<long>(n * n, 0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      long acc = 0;
      for (std::size_t k = 0; k < n; ++k) acc = (acc + (*this)(i, k) * o(k, j)) % modulus;
      r.entries[i * n + j] = acc;
    }
  return r;
}

ModMatrix reduce_mod(const Matrix& g, long d) {
  check_modulus(d, "reduce_mod");
  if (!g.square()) throw DimensionMismatch("reduce_mod: matrix is not square");
  if (!g.is_integral() || determinant(g) != 1) throw InputError("reduce_mod: matrix is not in SL_n(Z)");
  const std::size_t n = g.rows();
  ModMatrix m{n, d, std::vector<long>(n * n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.entries[i * n + j] = mod_entry(g(i, j), d);
  Matrix back(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) back(i, j) = m(i, j);
  if (mod_entry(determinant(back), d) != 1 % d) throw VerificationError("reduce_mod: determinant is not 1 mod d");
  return m;
}

bool in_kernel(const Matrix& g, long d) { return reduce_mod(g, d).is_identity(); }

Integer sl_order(std::size_t n, long d) {
  if (n < 2) throw PreconditionError("sl_order: n must be >= 2");
  check_modulus(d, "sl_order");
  Integer total = 1;
  for (auto [p, k] : factor(d)) {
    Integer P = p, part = 1, pn = 1;
    // |SL(n, F_p)| = p^(n(n-1)/2) prod_{i=2}^n (p^i - 1)
    for (std::size_t i = 0; i < n * (n - 1) / 2; ++i) part *= P;
    for (std::size_t i = 1; i <= n; ++i) {
      pn *= P;
      if (i >= 2) part *= pn - 1;
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(k - 1) * (n * n - 1); ++i) part *= P;
    total *= part;
  }
  return total;
}

CongruenceImage image_closure(const std::vector<Matrix>& gens, long d, std::uint64_t cap, bool keep_elements) {
  check_modulus(d, "image_closure");
  if (gens.empty()) throw PreconditionError("image_closure: no generators");
  const std::size_t n = gens.front().rows();
  CongruenceImage img;
  img.modulus = d;
  img.n = n;
  for (const Matrix& g : gens) {
    if (g.rows() != n) throw DimensionMismatch("image_closure: generators of different sizes");
    img.generators.push_back(reduce_mod(g, d));
  }
  Codec codec(n, d);
  std::vector<std::vector<std::uint32_t>> tables;
  for (const ModMatrix& s : img.generators) tables.push_back(codec.row_table(s));

  std::vector<long> id(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) id[i * n + i] = 1 % d;
  Visited seen(codec.total);
  std::vector<std::uint64_t> queue{codec.encode(id)};
  seen.insert(queue.front());
  bool capped = false;
  for (std::size_t head = 0; head < queue.size() && !capped; ++head) {
    std::uint64_t c = queue[head];
    std::uint64_t rows[8];
    for (std::size_t i = 0; i < n; ++i) {
      rows[i] = c % codec.D;
      c /= codec.D;
    }
    for (const auto& t : tables) {
      std::uint64_t out = 0;
      for (std::size_t i = n; i-- > 0;) out = out * codec.D + t[rows[i]];
      if (seen.insert(out)) {
        if (queue.size() >= cap) {
          capped = true;
          break;
        }
        queue.push_back(out);
      }
    }
  }
  img.order = queue.size();
  img.complete = !capped;
  if (img.complete) img.surjective = Integer(static_cast<unsigned long>(img.order)) == sl_order(n, d);
  if (keep_elements) img.elements = std::move(queue);
  return img;
}

std::vector<Matrix> elementary_generators(std::size_t n) {
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out.push_back(Matrix::elementary(n, i, j));
  return out;
}

long exponent_mod(std::size_t n, long d, std::uint64_t cap) {
  if (n < 2) throw PreconditionError("exponent_mod: n must be >= 2");
  check_modulus(d, "exponent_mod");
  if (sl_order(n, d) > Integer(static_cast<unsigned long>(cap)))
    throw BudgetExceeded("exponent_mod: |SL(n, Z/d)| exceeds the enumeration cap");
  CongruenceImage img = image_closure(elementary_generators(n), d, cap, true);
  if (!img.complete || !img.surjective.value_or(false))
    throw VerificationError("exponent_mod: elementary closure is not the full group");
  Codec codec(n, d);
  long e = 1;
  for (std::uint64_t c : img.elements) e = std::lcm(e, element_order(codec.decode(c), n, d));
  return e;
}

DensityEvidence density_evidence(const std::vector<Matrix>& gens, const std::vector<long>& moduli,
                                 std::uint64_t cap) {
  DensityEvidence ev;
  ev.caveat =
      "finite evidence only: surjectivity was checked at the listed moduli, which does not prove profinite density";
  ev.all_surjective = !moduli.empty();
  for (long d : moduli) {
    CongruenceImage img = image_closure(gens, d, cap);
    ModulusEvidence m{d, img.order, sl_order(img.n, d), img.surjective};
    if (!m.surjective.value_or(false)) ev.all_surjective = false;
    ev.moduli.push_back(m);
  }
  return ev;
}

namespace {

Vector integral(const Vector& v) {
  ProjPoint p(v);
  return p.vector();
}

ProjHyperplane hyperplane_through(const std::vector<Vector>& span, const char* who) {
  auto h = ProjSubspace::span(span).as_hyperplane();
  if (!h) throw VerificationError(std::string(who) + ": spanning set does not give a hyperplane");
  return *h;
}

// 2n^2 - n flags near (p, L): points along a line of L through p, hyperplanes
// through them tilted away from L. The common radius is chosen from the
// exact separations so that the stated containments and disjointness hold.
std::vector<TargetFlag> choose_targets(const ProjPoint& p, const ProjHyperplane& L, const Rational& epsilon_sq,
                                       const Rational& delta_sq, std::size_t count) {
  const std::size_t n = p.dim();
  Vector v = p.vector(), z = L.vector();
  std::vector<Vector> rest;  // basis of L completing v
  ProjSubspace Ls = ProjSubspace::of(L);
  std::vector<Vector> acc{v};
  for (const Vector& b : Ls.basis()) {
    std::vector<Vector> trial = acc;
    trial.push_back(b);
    if (rank(trial) == trial.size()) {
      acc = trial;
      rest.push_back(integral(b));
    }
  }
  if (rest.size() != n - 2) throw VerificationError("prodense: could not complete a basis of L");
  const Vector& w = rest.front();

  auto offsets = [&](std::size_t i) { return Rational(static_cast<long>(i / 2 + 1) * (i % 2 ? -1 : 1)); };
  Rational h(1, 8), theta(1, 8);
  std::vector<ProjPoint> pts;
  for (;;) {
    pts.clear();
    bool ok = true;
    for (std::size_t i = 0; i < count && ok; ++i) {
      ProjPoint q(add(v, scaled(w, Rational(h * offsets(i)))));
      if (exactlin::proj_distance_sq(kArch, q, p) * 4 > epsilon_sq) ok = false;
      pts.push_back(q);
    }
    if (ok) break;
    h /= 2;
  }
  std::vector<ProjHyperplane> hyps;
  for (;;) {
    hyps.clear();
    bool ok = true;
    for (std::size_t i = 0; i < count && ok; ++i) {
      Rational th = i % 2 ? Rational(-theta) : theta;
      std::vector<Vector> span{pts[i].vector(), add(w, scaled(z, th))};
      for (std::size_t k = 1; k < rest.size(); ++k) span.push_back(rest[k]);
      ProjHyperplane hi = hyperplane_through(span, "prodense");
      if (exactlin::hyperplane_distance_sq(kArch, hi, L) * 4 > delta_sq) ok = false;
      hyps.push_back(hi);
    }
    if (ok) break;
    theta /= 2;
  }
  Rational bound = std::min(epsilon_sq, delta_sq) / 4;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < count; ++j)
      if (i != j) {
        Rational dsq = exactlin::point_subspace_distance_sq(kArch, pts[i], hyps[j]);
        if (dsq == 0) throw VerificationError("prodense: target point lies on another target hyperplane");
        bound = std::min(bound, Rational(dsq / 9));
      }
  Rational r_sq = power_of_four_below(bound);
  std::vector<TargetFlag> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back({pts[i], ProjSubspace::of(hyps[i]), r_sq});
  return out;
}

struct BlockElement {
  Matrix g;
  long power;
  SystemElement element;
};

BlockElement build_element(const Matrix& e, const TargetFlag& target, long step, long period, std::size_t budget,
                           std::size_t index) {
  RankOneUnipotent base = RankOneUnipotent::from_matrix(e);
  Rational tol = target.epsilon_sq / 4;
  unischottky::ConzeOptions co;
  co.step = step;
  co.budget = budget;
  unischottky::ConzeResult cr;
  try {
    cr = unischottky::conze_search(base.p, base.L, target.p, target.L, tol, tol, co);
  } catch (const BudgetExceeded& ex) {
    throw BudgetExceeded("prodense: conjugator search for generator " + std::to_string(index) + ": " + ex.what());
  }
  Matrix gi = inverse(cr.g);
  // Least k >= 1 such that g e^(period k + 1) g^-1 passes the dynamics condition.
  long k = 1;
  for (;; k *= 2) {
    RankOneUnipotent u = RankOneUnipotent::from_matrix(cr.g * power(e, period * k + 1) * gi);
    if (unischottky::dynamics_certified(u, tol, tol)) break;
    if (k > (1L << 40)) throw BudgetExceeded("prodense: no admissible exponent");
  }
  long lo = k / 2, hi = k;  // lo fails (or is 0), hi passes
  while (hi - lo > 1 && lo >= 1) {
    long mid = lo + (hi - lo) / 2;
    RankOneUnipotent u = RankOneUnipotent::from_matrix(cr.g * power(e, period * mid + 1) * gi);
    if (unischottky::dynamics_certified(u, tol, tol))
      hi = mid;
    else
      lo = mid;
  }
  long pw = period * hi + 1;
  RankOneUnipotent u = RankOneUnipotent::from_matrix(cr.g * power(e, pw) * gi);
  return {cr.g, pw, {u, tol, tol}};
}

long block_period(std::size_t n, long d, std::uint64_t cap) {
  if (d < 2) return 1;
  if (sl_order(n, d) <= Integer(static_cast<unsigned long>(cap))) return exponent_mod(n, d, cap);
  // e_ij has order d mod d, which is all the construction needs.
  return d;
}

}  // namespace

ProdenseResult prodense_construct(std::size_t n, const ProjPoint& p, const ProjSubspace& L, const Rational& epsilon_sq,
                                  const Rational& delta_sq, const std::vector<long>& moduli,
                                  const ProdenseOptions& opts) {
  if (n < 3) throw PreconditionError("prodense_construct: needs n >= 3");
  if (p.dim() != n || L.ambient() != n) throw DimensionMismatch("prodense_construct: flag not in P(Q^n)");
  auto hopt = L.as_hyperplane();
  if (!hopt) throw PreconditionError("prodense_construct: L must be a hyperplane");
  if (!L.contains(p)) throw PreconditionError("prodense_construct: p must lie on L");
  if (epsilon_sq <= 0 || delta_sq <= 0) throw PreconditionError("prodense_construct: radii must be positive");
  if (epsilon_sq > delta_sq) throw PreconditionError("prodense_construct: needs delta >= epsilon");
  if (std::find(moduli.begin(), moduli.end(), 4L) == moduli.end())
    throw PreconditionError("prodense_construct: moduli must include 4");
  bool odd_prime = false;
  for (long d : moduli) {
    check_modulus(d, "prodense_construct");
    if (d % 2 == 1 && factor(d).size() == 1 && factor(d).front().second == 1) odd_prime = true;
  }
  if (!odd_prime) throw PreconditionError("prodense_construct: moduli must include an odd prime");
  if (opts.q_policy.empty()) throw PreconditionError("prodense_construct: empty q policy");

  const std::size_t m = n * n - n;
  ProdenseResult res;
  res.targets = choose_targets(p, *hopt, epsilon_sq, delta_sq, 2 * n * n - n);
  std::vector<Matrix> elem = elementary_generators(n);

  res.t = exponent_mod(n, 3, opts.closure_cap);
  std::vector<BlockElement> block1;
  for (std::size_t i = 0; i < m; ++i) {
    block1.push_back(build_element(elem[i], res.targets[i], 3, res.t, opts.conze_budget, i));
    if (!(reduce_mod(block1.back().element.u.u, 3) == reduce_mod(elem[i], 3)))
      throw VerificationError("prodense: first block element " + std::to_string(i) + " does not reduce to e_i mod 3");
  }
  std::vector<Matrix> b1;
  for (const auto& b : block1) b1.push_back(b.element.u.u);
  res.block1_mod3 = image_closure(b1, 3, opts.closure_cap);
  if (!res.block1_mod3.surjective.value_or(false))
    throw VerificationError("prodense: first block is not surjective mod 3");

  std::string last_failure;
  for (long q : opts.q_policy) {
    if (q < 1) throw PreconditionError("prodense_construct: q must be positive");
    const long d2 = q * q;
    const long r = block_period(n, d2, opts.closure_cap);
    std::vector<BlockElement> block2;
    for (std::size_t i = 0; i < m; ++i) {
      block2.push_back(build_element(elem[i], res.targets[m + i], d2, r, opts.conze_budget, m + i));
      if (d2 >= 2 && !(reduce_mod(block2.back().element.u.u, d2) == reduce_mod(elem[i], d2)))
        throw VerificationError("prodense: second block element does not reduce to e_i mod q^2");
    }
    SchottkySystem sys;
    sys.attracting.push_back(Ball(p, epsilon_sq));
    sys.repelling.push_back(Ball(*hopt, delta_sq));
    std::vector<Matrix> conj;
    std::vector<long> pw;
    for (const auto* blk : {&block1, &block2})
      for (const auto& b : *blk) {
        sys.elements.push_back(b.element);
        conj.push_back(b.g);
        pw.push_back(b.power);
      }
    unischottky::SystemReport rep = unischottky::verify_system(sys);
    if (!rep.ok) throw VerificationError("prodense: verify_system failed: " + rep.diagnostics.front());
    DensityEvidence ev = density_evidence(sys.matrices(), moduli, opts.closure_cap);
    if (ev.all_surjective) {
      res.system = std::move(sys);
      res.evidence = std::move(ev);
      res.q = q;
      res.r = r;
      res.conjugators = std::move(conj);
      res.powers = std::move(pw);
      for (const auto& me : res.evidence.moduli)
        if (me.modulus % 2 == 1 && factor(me.modulus).size() == 1 && factor(me.modulus).front().second == 1 &&
            me.surjective.value_or(false)) {
          res.zariski_witness = me.modulus;
          break;
        }
      return res;
    }
    last_failure = "q = " + std::to_string(q);
    for (const auto& me : ev.moduli)
      if (!me.surjective.value_or(false))
        last_failure += ", mod " + std::to_string(me.modulus) + (me.surjective ? " not surjective" : " unknown (cap)");
  }
  throw VerificationError("prodense: density evidence failed for every q in the policy (" + last_failure + ")");
}

namespace {

struct FamilyFlag {
  ProjPoint p;
  ProjHyperplane L;
};

bool point_tube_apart(const ProjPoint& p, const Rational& eps, const ProjHyperplane& h, const Rational& del) {
  return exactlin::balls_disjoint(kArch, Ball(p, eps), Ball(h, del));
}

// Deterministic small-integer flags away from the base flag and from each other.
std::vector<FamilyFlag> family_flags(std::size_t F, const ProjPoint& p0, const ProjHyperplane& L0,
                                     const Rational& eps0, const Rational& del0, const Rational& rho) {
  const std::size_t n = p0.dim();
  std::vector<Vector> cands;
  std::vector<long> digits(n, -2);
  for (;;) {
    Vector v(n);
    bool nz = false;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = digits[i];
      nz = nz || digits[i] != 0;
    }
    if (nz) cands.push_back(v);
    std::size_t k = 0;
    while (k < n && digits[k] == 2) digits[k++] = -2;
    if (k == n) break;
    ++digits[k];
  }
  std::vector<FamilyFlag> out;
  for (const Vector& pv : cands) {
    ProjPoint p(pv);
    if (!(ProjPoint(pv).vector() == pv)) continue;  // primitive representatives only
    if (!point_tube_apart(p, rho, L0, del0)) continue;
    bool ok = true;
    for (const auto& f : out) ok = ok && !(f.p == p) && point_tube_apart(p, rho, f.L, rho);
    if (!ok) continue;
    for (const Vector& fv : cands) {
      if (dot(fv, pv) != 0 || !(ProjPoint(fv).vector() == fv)) continue;
      ProjHyperplane L(fv);
      if (!point_tube_apart(p0, eps0, L, rho)) continue;
      bool ok2 = true;
      for (const auto& f : out) ok2 = ok2 && point_tube_apart(f.p, rho, L, rho);
      if (!ok2) continue;
      out.push_back({p, L});
      break;
    }
    if (out.size() == F) return out;
  }
  throw BudgetExceeded("counting_family: not enough separated flags among small integer candidates");
}

// A second hyperplane through p within distance sqrt(bound) of L.
ProjHyperplane tilted(const ProjPoint& p, const ProjHyperplane& L, const Rational& bound) {
  const std::size_t n = p.dim();
  Vector f = L.vector(), pv = p.vector();
  Vector g;
  for (std::size_t i = 0; i < n && g.empty(); ++i)
    for (std::size_t j = i + 1; j < n && g.empty(); ++j) {
      Vector c(n, Rational(0));
      c[i] = pv[j];
      c[j] = -pv[i];
      if (rank(std::vector<Vector>{f, c}) == 2) g = c;
    }
  if (g.empty()) throw VerificationError("counting_family: no second functional");
  for (Rational tau(1, 4);; tau /= 2) {
    ProjHyperplane h(add(f, scaled(g, tau)));
    if (exactlin::hyperplane_distance_sq(kArch, h, L) <= bound) return h;
  }
}

SystemElement family_element(const ProjPoint& p, const ProjHyperplane& h, const Rational& r_sq) {
  RankOneUnipotent u = unischottky::from_flag(p, ProjSubspace::of(h));
  return {u.power(unischottky::min_power(u, r_sq, r_sq)), r_sq, r_sq};
}

}  // namespace

SchottkySystem family_system(const FamilyReport& rep, unsigned f) {
  SchottkySystem s = rep.base.system;
  for (std::size_t i = 0; i < rep.F; ++i) s.elements.push_back(rep.pairs[i][(f >> i) & 1u]);
  s.attracting.insert(s.attracting.end(), rep.extra_attracting.begin(), rep.extra_attracting.end());
  s.repelling.insert(s.repelling.end(), rep.extra_repelling.begin(), rep.extra_repelling.end());
  return s;
}

FamilyReport counting_family(std::size_t F, const ProjPoint& p, const ProjSubspace& L, const Rational& epsilon_sq,
                             const Rational& delta_sq, const std::vector<long>& base_moduli,
                             const std::vector<long>& pair_moduli, const ProdenseOptions& opts) {
  if (F < 1 || F > 16) throw PreconditionError("counting_family: F must lie in [1, 16]");
  FamilyReport rep;
  rep.F = F;
  rep.base = prodense_construct(p.dim(), p, L, epsilon_sq, delta_sq, base_moduli, opts);
  const ProjHyperplane L0 = *L.as_hyperplane();
  const Rational rho = std::min(epsilon_sq, delta_sq) / 4;
  const Rational half = rho / 4;
  for (const FamilyFlag& fl : family_flags(F, p, L0, epsilon_sq, delta_sq, rho)) {
    ProjHyperplane L2 = tilted(fl.p, fl.L, half);
    rep.pairs.push_back({family_element(fl.p, fl.L, half), family_element(fl.p, L2, half)});
    rep.extra_attracting.push_back(Ball(fl.p, rho));
    rep.extra_repelling.push_back(Ball(fl.L, rho));
  }
  const unsigned count = 1u << F;
  rep.all_verified = true;
  for (unsigned f = 0; f < count; ++f) {
    rep.systems.push_back(family_system(rep, f));
    bool ok = unischottky::verify_system(rep.systems.back()).ok;
    rep.systems_verified.push_back(ok);
    rep.all_verified = rep.all_verified && ok;
  }
  const Matrix id = Matrix::identity(p.dim());
  for (unsigned f = 0; f < count; ++f)
    for (unsigned g = f + 1; g < count; ++g) {
      FamilyPair fp;
      fp.f = f;
      fp.g = g;
      unsigned diff = f ^ g;
      std::size_t i = 0;
      while (!((diff >> i) & 1u)) ++i;
      fp.index = i + 1;
      fp.certificate = unischottky::z_squared_pair(id, rep.pairs[i][0].u, rep.pairs[i][1].u);
      std::vector<Matrix> gens = rep.systems[f].matrices();
      for (std::size_t k = 0; k < F; ++k)
        if ((diff >> k) & 1u) gens.push_back(rep.pairs[k][(g >> k) & 1u].u.u);
      fp.evidence = density_evidence(gens, pair_moduli, opts.closure_cap);
      rep.all_verified = rep.all_verified && fp.certificate.valid() && fp.evidence.all_surjective;
      rep.pair_reports.push_back(std::move(fp));
    }
  return rep;
}

}  // namespace schottky::congruence
