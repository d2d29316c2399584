#include "schottky/pingpong.hpp"

#include <sstream>

#include "schottky/errors.hpp"

namespace schottky::pingpong {

using contraction::ProximalityCertificate;
using exactlin::ProjHyperplane;
using exactlin::ProjPoint;
using exactlin::ProjSubspace;

bool Word::reduced() const {
  for (std::size_t i = 1; i < letters.size(); ++i)
    if (letters[i].gen == letters[i - 1].gen && letters[i].sign == -letters[i - 1].sign) return false;
  return true;
}

Word Word::inverse() const {
  Word w;
  for (auto it = letters.rbegin(); it != letters.rend(); ++it) w.letters.push_back({it->gen, -it->sign});
  return w;
}

std::string Word::to_string() const {
  if (letters.empty()) return "e";
  std::ostringstream os;
  for (std::size_t i = 0; i < letters.size(); ++i)
    os << (i ? " " : "") << (letters[i].sign > 0 ? 'g' : 'G') << letters[i].gen;
  return os.str();
}

std::vector<Matrix> PingPongTable::generators() const {
  std::vector<Matrix> out;
  for (const auto& e : entries) out.push_back(e.g());
  return out;
}

std::string Overlap::to_string() const {
  std::ostringstream os;
  os << "attracting set of g" << i << (s > 0 ? "" : "^-1") << " meets " << kind << " set of g" << j
     << (t > 0 ? "" : "^-1") << " (squared center distance " << schottky::to_string(center_distance_sq) << ")";
  return os.str();
}

namespace {

Rational center_distance_sq(const Place& place, const Ball& point_ball, const Ball& other) {
  const auto& p = std::get<ProjPoint>(point_ball.center);
  if (auto q = std::get_if<ProjPoint>(&other.center)) return exactlin::proj_distance_sq(place, p, *q);
  if (auto h = std::get_if<ProjHyperplane>(&other.center)) return exactlin::point_subspace_distance_sq(place, p, *h);
  return exactlin::point_subspace_distance_sq(place, p, std::get<ProjSubspace>(other.center));
}

}  // namespace

std::optional<Overlap> find_overlap(const PingPongTable& table) {
  const std::size_t k = table.size();
  for (std::size_t i = 0; i < k; ++i)
    for (int s : {1, -1}) {
      const Ball& a = table.entries[i].attracting(s);
      for (std::size_t j = 0; j < k; ++j) {
        if (j == i) continue;
        for (int t : {1, -1}) {
          const auto& other = table.entries[j];
          if (!exactlin::balls_disjoint(table.place, a, other.attracting(t)))
            return Overlap{i, s, j, t, "attracting", center_distance_sq(table.place, a, other.attracting(t))};
          if (!exactlin::balls_disjoint(table.place, a, other.repelling(t)))
            return Overlap{i, s, j, t, "repelling", center_distance_sq(table.place, a, other.repelling(t))};
        }
      }
    }
  return std::nullopt;
}

SchottkyCertificate verify_schottky(const PingPongTable& table) {
  std::size_t dim = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const Matrix& g = table.generator(i);
    if (i == 0) dim = g.rows();
    if (g.rows() != dim) throw DimensionMismatch("verify_schottky: generators of different sizes");
    if (!contraction::separation_holds(table.entries[i]))
      throw VerificationError("verify_schottky: neighborhoods of g" + std::to_string(i) + " are not separated");
  }
  if (auto o = find_overlap(table)) throw VerificationError("verify_schottky: " + o->to_string());
  return SchottkyCertificate{table, std::nullopt};
}

SchottkyCertificate verify_schottky(const PingPongTable& table, const VeryProximalCertificate& witness) {
  verify_schottky(table);
  PingPongTable ext = table;
  ext.entries.push_back(witness);
  try {
    verify_schottky(ext);
  } catch (const VerificationError& e) {
    throw VerificationError(std::string("spacious witness rejected: ") + e.what());
  }
  return SchottkyCertificate{table, witness};
}

Matrix eval_word(const Word& w, const std::vector<Matrix>& gens) {
  if (gens.empty()) throw PreconditionError("eval_word: no generators");
  std::vector<std::optional<Matrix>> inv(gens.size());
  Matrix out = Matrix::identity(gens.front().rows());
  for (const auto& l : w.letters) {
    if (l.gen >= gens.size()) throw PreconditionError("eval_word: generator index out of range");
    if (l.sign > 0) {
      out = out * gens[l.gen];
    } else {
      if (!inv[l.gen]) inv[l.gen] = inverse(gens[l.gen]);
      out = out * *inv[l.gen];
    }
  }
  return out;
}

Matrix eval_word(const Word& w, const PingPongTable& table) { return eval_word(w, table.generators()); }

std::size_t reduced_word_count(std::size_t k, std::size_t max_len) {
  if (k == 0) return 0;
  std::size_t total = 0, layer = 2 * k;
  for (std::size_t len = 1; len <= max_len; ++len) {
    total += layer;
    layer *= 2 * k - 1;
  }
  return total;
}

namespace {

// Depth-limited search; only words of exactly the target length are tested,
// so iterative deepening reports a shortest relation.
struct Dfs {
  const std::vector<Matrix>& letters;  // index 2g = g, 2g + 1 = g^-1
  std::size_t depth = 0;
  FreenessReport report;
  std::vector<std::size_t> stack;

  bool run(const Matrix& prefix, std::size_t last) {
    for (std::size_t s = 0; s < letters.size(); ++s) {
      if (!stack.empty() && s == (last ^ 1U)) continue;
      Matrix m = prefix * letters[s];
      stack.push_back(s);
      if (stack.size() == depth) {
        ++report.words_checked;
        if (m.is_identity()) {
          Word w;
          for (auto x : stack) w.letters.push_back({x / 2, (x & 1U) ? -1 : 1});
          report.free = false;
          report.relation = w;
          return false;
        }
      } else if (!run(m, s)) {
        return false;
      }
      stack.pop_back();
    }
    return true;
  }
};

}  // namespace

FreenessReport freeness_search(const std::vector<Matrix>& gens, std::size_t max_len, std::size_t cap) {
  if (max_len < 1) throw PreconditionError("freeness_oracle: max_len must be at least 1");
  if (gens.empty()) return {};
  std::size_t count = reduced_word_count(gens.size(), max_len);
  if (count > cap)
    throw BudgetExceeded("freeness_oracle: " + std::to_string(count) + " reduced words exceed the cap of " +
                         std::to_string(cap));
  std::vector<Matrix> letters;
  for (const auto& g : gens) {
    letters.push_back(g);
    letters.push_back(inverse(g));
  }
  Dfs dfs{letters, 0, {}, {}};
  const Matrix id = Matrix::identity(gens.front().rows());
  for (dfs.depth = 1; dfs.depth <= max_len; ++dfs.depth)
    if (!dfs.run(id, 0)) break;
  return dfs.report;
}

bool freeness_oracle(const std::vector<Matrix>& gens, std::size_t max_len, std::size_t cap) {
  return freeness_search(gens, max_len, cap).free;
}

bool freeness_oracle(const PingPongTable& table, std::size_t max_len, std::size_t cap) {
  return freeness_oracle(table.generators(), max_len, cap);
}

WordEnumerator::WordEnumerator(std::size_t generators) : k_(generators) {
  if (k_ == 0) throw PreconditionError("WordEnumerator: no generators");
}

void WordEnumerator::sync() {
  word_.letters.clear();
  for (auto s : sym_) word_.letters.push_back({s / 2, (s & 1U) ? -1 : 1});
}

void WordEnumerator::next() {
  const std::size_t alphabet = 2 * k_;
  auto fill = [&](std::size_t from) {
    for (std::size_t p = from; p < sym_.size(); ++p) sym_[p] = (p > 0 && sym_[p - 1] == 1) ? 1 : 0;
  };
  for (std::size_t pos = sym_.size(); pos-- > 0;) {
    for (std::size_t s = sym_[pos] + 1; s < alphabet; ++s) {
      if (pos > 0 && s == (sym_[pos - 1] ^ 1U)) continue;
      sym_[pos] = s;
      fill(pos + 1);
      sync();
      return;
    }
  }
  sym_.assign(sym_.size() + 1, 0);
  fill(0);
  sync();
}

namespace {

Matrix matrix_power(const Matrix& g, long e) { return power(g, e); }

}  // namespace

PingPongTable conjugated_tuple(const SchottkyCertificate& cert, const std::vector<Word>& words, std::size_t count) {
  PingPongTable out;
  out.place = cert.table.place;
  if (count == 0) return out;
  if (!cert.spacious_witness) throw PreconditionError("conjugated_tuple: certificate has no spacious witness");
  if (words.empty()) throw PreconditionError("conjugated_tuple: no words given");
  std::vector<Matrix> gens = cert.table.generators();
  const Matrix& zeta = cert.spacious_witness->g();
  Matrix zeta_inv = inverse(zeta);
  Matrix zi = zeta, zi_inv = zeta_inv;
  for (std::size_t i = 1; i <= count; ++i) {
    const Word& w = words[(i - 1) % words.size()];
    if (w.letters.empty()) throw PreconditionError("conjugated_tuple: trivial word");
    Matrix g = zi * eval_word(w, gens) * zi_inv;
    try {
      out.entries.push_back(contraction::certify_very_proximal_auto(g));
    } catch (const Error& e) {
      throw VerificationError("conjugated_tuple: element " + std::to_string(i) + " not certified: " + e.what());
    }
    zi = zi * zeta;
    zi_inv = zeta_inv * zi_inv;
  }
  try {
    verify_schottky(out);
  } catch (const VerificationError& e) {
    throw VerificationError(std::string("conjugated_tuple: ") + e.what());
  }
  return out;
}

MFlag associated_flag(const VeryProximalCertificate& cert) {
  ProjHyperplane h = std::get<ProjHyperplane>(cert.forward.canonical_hyperplane_box.center);
  ProjPoint v = std::get<ProjPoint>(cert.backward.canonical_point_box.center);
  return MFlag(h, exactlin::project_onto(v, h));
}

bool flags_in_position(const std::vector<MFlag>& flags) {
  if (flags.empty()) return true;
  if (flags.size() >= flags.front().point.dim()) return exactlin::is_general_position(flags);
  return exactlin::is_partial_general_position(flags);
}

namespace {

// Certifies g or a small power of it.
std::optional<VeryProximalCertificate> certify_some_power(const Matrix& g) {
  Matrix h = g;
  for (int attempt = 0; attempt < 4; ++attempt) {
    try {
      return contraction::certify_very_proximal_auto(h);
    } catch (const VerificationError&) {
    } catch (const PrecisionError&) {
    }
    h = h * h;
  }
  return std::nullopt;
}

// Boxes of the fixed points and fixed hyperplanes of a^{+-1} and b^{+-1}
// are pairwise separated, so large powers of a and b play ping-pong.
bool fixed_data_apart(const VeryProximalCertificate& a, const VeryProximalCertificate& b) {
  const Place place = Place::arch();
  for (int s : {1, -1})
    for (int t : {1, -1}) {
      const auto& pa = a.side(s);
      const auto& pb = b.side(t);
      if (!exactlin::balls_disjoint(place, pa.canonical_point_box, pb.canonical_point_box)) return false;
      if (!exactlin::balls_disjoint(place, pa.canonical_point_box, pb.canonical_hyperplane_box)) return false;
      if (!exactlin::balls_disjoint(place, pb.canonical_point_box, pa.canonical_hyperplane_box)) return false;
    }
  return true;
}

constexpr long kMaxPower = 1L << 12;

}  // namespace

PingPongTable general_position_tuple(const VeryProximalCertificate& seed, const std::vector<Matrix>& ambient_gens,
                                     std::size_t m, std::size_t budget) {
  if (m < 1) throw PreconditionError("general_position_tuple: m must be at least 1");
  PingPongTable out;
  if (m == 1) {
    out.entries.push_back(seed);
    return out;
  }
  if (ambient_gens.empty()) throw PreconditionError("general_position_tuple: no ambient generators");
  const Matrix& g = seed.g();
  std::vector<Matrix> betas;
  std::vector<MFlag> flags;
  std::vector<VeryProximalCertificate> certs;
  std::size_t spent = 0;
  WordEnumerator words(ambient_gens.size());
  while (betas.size() < m) {
    if (spent++ >= budget) throw BudgetExceeded("general_position_tuple: conjugator search exhausted the budget");
    Matrix c = eval_word(words.current(), ambient_gens);
    words.next();
    Matrix beta = c * g * inverse(c);
    bool seen = false;
    for (const auto& b : betas) seen = seen || b == beta;
    if (seen) continue;
    auto cert = betas.empty() ? std::optional<VeryProximalCertificate>(seed) : certify_some_power(beta);
    if (!cert) continue;
    std::vector<MFlag> trial = flags;
    trial.push_back(associated_flag(*cert));
    if (!exactlin::is_partial_general_position(trial)) continue;
    bool touches = false;
    for (const auto& f : flags) touches = touches || exactlin::mflag_touches(f, trial.back());
    if (touches) continue;
    bool apart = true;
    for (const auto& other : certs) apart = apart && fixed_data_apart(*cert, other);
    if (!apart) continue;
    certs.push_back(*cert);
    betas.push_back(beta);
    flags = std::move(trial);
  }
  for (long n = 1;; n *= 2) {
    if (spent++ >= budget || n > kMaxPower)
      throw BudgetExceeded("general_position_tuple: power search exhausted the budget");
    PingPongTable t;
    std::vector<MFlag> fl;
    bool ok = true;
    for (const auto& b : betas) {
      try {
        t.entries.push_back(contraction::certify_very_proximal_auto(matrix_power(b, n)));
      } catch (const VerificationError&) {
        ok = false;
        break;
      } catch (const PrecisionError&) {
        ok = false;
        break;
      }
      fl.push_back(associated_flag(t.entries.back()));
    }
    if (!ok || find_overlap(t) || !flags_in_position(fl)) continue;
    bool sep = true;
    for (const auto& e : t.entries) sep = sep && contraction::separation_holds(e);
    if (sep) return t;
  }
}

Matrix CosetLedger::product(const Matrix& n0) const {
  Matrix out = Matrix::identity(n0.rows());
  Matrix n0_inv = inverse(n0);
  for (std::size_t k = 0; k < conjugators.size(); ++k)
    out = out * conjugators[k] * (exponents[k] > 0 ? n0 : n0_inv) * inverse(conjugators[k]);
  return out * gamma;
}

namespace {

Ball transform_point_box(const Matrix& m, const Ball& box) {
  ProjPoint c = exactlin::apply(m, std::get<ProjPoint>(box.center));
  Rational r = box.radius_sq == 0 ? Rational(0) : box.radius_sq * contraction::projective_lipschitz_sq(m);
  return Ball(c, r);
}

// No point of m(point_box) lies on a hyperplane of hyperplane_box.
bool escapes(const Place& place, const Matrix& m, const Ball& point_box, const Ball& hyperplane_box) {
  Ball img = transform_point_box(m, point_box);
  if (img.radius_sq >= 1) return false;
  Ball tube(hyperplane_box.center, hyperplane_box.radius_sq);
  return exactlin::balls_disjoint(place, img, tube);
}

struct Conjugate {
  Matrix c;
  int e;
  Matrix n;
};

}  // namespace

CosetHit hit_normal_coset(const SchottkyCertificate& cert, const NormalCosetTarget& target, std::size_t budget,
                          const CosetHitOptions& opts) {
  if (!cert.spacious_witness) throw PreconditionError("hit_normal_coset: certificate has no spacious witness");
  if (opts.sigma_index >= cert.table.size()) throw PreconditionError("hit_normal_coset: sigma index out of range");
  const std::size_t dim = target.n0.rows();
  if (target.n0.is_identity()) throw PreconditionError("hit_normal_coset: n0 is the identity");
  if (target.gamma.rows() != dim || cert.table.generator(0).rows() != dim)
    throw DimensionMismatch("hit_normal_coset: target and table sizes differ");
  if (opts.ell < 1) throw PreconditionError("hit_normal_coset: ell must be positive");

  const Place& place = cert.table.place;
  const VeryProximalCertificate& sigma = cert.table.entries[opts.sigma_index];
  const Ball& a_plus = sigma.forward.canonical_point_box;
  const Ball& h_plus = sigma.forward.canonical_hyperplane_box;
  const Ball& a_minus = sigma.backward.canonical_point_box;
  const Ball& h_minus = sigma.backward.canonical_hyperplane_box;

  const Matrix zeta_l = power(cert.spacious_witness->g(), opts.ell);
  const Matrix zeta_l_inv = inverse(zeta_l);
  const Matrix& n0 = target.n0;
  const Matrix n0_inv = inverse(n0);

  std::vector<Matrix> conj_gens = cert.table.generators();
  conj_gens.push_back(cert.spacious_witness->g());

  std::size_t spent = 0;
  auto search = [&](auto&& accept, const char* what) -> Conjugate {
    WordEnumerator words(conj_gens.size());
    while (true) {
      Matrix c = eval_word(words.current(), conj_gens);
      words.next();
      Matrix c_inv = inverse(c);
      for (int e : {1, -1}) {
        if (spent++ >= budget)
          throw BudgetExceeded(std::string("hit_normal_coset: escape search for ") + what + " exhausted the budget");
        Matrix n = c * (e > 0 ? n0 : n0_inv) * c_inv;
        if (accept(n)) return Conjugate{c, e, n};
      }
    }
  };

  Conjugate n1 = search(
      [&](const Matrix& n) {
        return escapes(place, n, a_plus, h_minus) && escapes(place, inverse(n), a_plus, h_minus);
      },
      "n1");
  Conjugate n3 = search(
      [&](const Matrix& n) {
        return escapes(place, n, a_minus, h_plus) && escapes(place, inverse(n), a_minus, h_plus);
      },
      "n3");
  Conjugate n2 = search(
      [&](const Matrix& n) {
        Matrix mid = zeta_l_inv * n * target.gamma * zeta_l;
        return escapes(place, mid, a_minus, h_minus) && escapes(place, inverse(mid), a_plus, h_plus);
      },
      "n2");

  PingPongTable base = cert.table;
  for (long n = opts.start_power; n <= opts.max_power; n *= 2) {
    if (spent++ >= budget) throw BudgetExceeded("hit_normal_coset: power search exhausted the budget");
    Matrix s_n = power(sigma.g(), n);
    Matrix s_n_inv = inverse(s_n);
    Matrix x = zeta_l * s_n;
    Matrix y = zeta_l * s_n_inv;
    Matrix eta = x * n3.n * inverse(x) * n2.n * target.gamma * y * n1.n * inverse(y);
    std::optional<VeryProximalCertificate> c;
    try {
      c = contraction::certify_very_proximal_auto(eta);
    } catch (const VerificationError&) {
      continue;
    } catch (const PrecisionError&) {
      continue;
    }
    PingPongTable ext = base;
    ext.entries.push_back(*c);
    if (find_overlap(ext) || !contraction::separation_holds(*c)) continue;
    CosetHit hit;
    hit.eta = eta;
    hit.table = std::move(ext);
    hit.ledger.conjugators = {x * n3.c, n2.c, target.gamma * y * n1.c};
    hit.ledger.exponents = {n3.e, n2.e, n1.e};
    hit.ledger.gamma = target.gamma;
    hit.power = n;
    hit.ell = opts.ell;
    hit.escape_candidates = spent;
    if (!check_coset_membership(hit, n0)) throw VerificationError("hit_normal_coset: coset ledger mismatch");
    return hit;
  }
  throw BudgetExceeded("hit_normal_coset: no power up to " + std::to_string(opts.max_power) + " certified");
}

bool check_coset_membership(const CosetHit& hit, const Matrix& n0) { return hit.ledger.product(n0) == hit.eta; }

}  // namespace schottky::pingpong
