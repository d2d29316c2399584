// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "schottky/congruence.hpp"
#include "schottky/contraction.hpp"
#include "schottky/json_io.hpp"
#include "schottky/pingpong.hpp"
#include "schottky/sl2ht.hpp"
#include "schottky/unischottky.hpp"

using namespace schottky;
using exactlin::MFlag;
using exactlin::Place;
using exactlin::ProjHyperplane;
using exactlin::ProjPoint;
using exactlin::ProjSubspace;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Verdict()> run;
};

const Place kArch = Place::arch();
const Rational kHundredth(1, 100);
const ProjPoint kE1 = ProjPoint::basis(3, 0);
const ProjSubspace kSimplexL = ProjSubspace::of(ProjHyperplane(Vector{0, 1, -1}));

Vector random_rational_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<long> num(-60, 60), den(1, 12);
  Vector v(n);
  bool zero = true;
  while (zero) {
    for (auto& x : v) {
      x = Rational(num(rng), den(rng));
      x.canonicalize();
      zero = zero && x == 0;
    }
  }
  return v;
}

// 1. Metric suite on random rational triples in P(Q^3).
Verdict metric_suite() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> coin(0, 3);
  const Rational slack(1, 1000000000000);  // 1e-12
  std::size_t bad_sym = 0, bad_zero = 0, bad_tri = 0, equal_pairs = 0;
  for (int i = 0; i < 10000; ++i) {
    Vector vx = random_rational_vector(rng, 3);
    Vector vy = random_rational_vector(rng, 3);
    Vector vz = random_rational_vector(rng, 3);
    // a quarter of the pairs are rescalings of the same point
    if (coin(rng) == 0) {
      vy = scaled(vx, Rational(coin(rng) + 2, 7) * (coin(rng) % 2 ? -1 : 1));
      ++equal_pairs;
    }
    ProjPoint x(vx), y(vy), z(vz);
    Rational dxy = exactlin::proj_distance_sq(kArch, x, y);
    Rational dyx = exactlin::proj_distance_sq(kArch, y, x);
    Rational dyz = exactlin::proj_distance_sq(kArch, y, z);
    Rational dxz = exactlin::proj_distance_sq(kArch, x, z);
    if (dxy != dyx) ++bad_sym;
    bool parallel = rank(std::vector<Vector>{vx, vy}) == 1;
    if (exactlin::proj_distance_sq(kArch, x, x) != 0 || (dxy == 0) != (x == y) || (x == y) != parallel)
      ++bad_zero;
    if (dxy < 0 || dxy > 1) ++bad_sym;
    Rational lhs = sqrt_lower(dxz, 64);
    Rational rhs = Rational(sqrt_upper(dxy, 64) + sqrt_upper(dyz, 64) + slack);
    if (lhs > rhs) ++bad_tri;
  }
  Verdict v;
  v.pass = bad_sym == 0 && bad_zero == 0 && bad_tri == 0 && equal_pairs > 0;
  v.detail = "10000 triples, " + std::to_string(equal_pairs) + " equal pairs; symmetry failures " +
             std::to_string(bad_sym) + ", zero-diagnostic failures " + std::to_string(bad_zero) +
             ", triangle failures " + std::to_string(bad_tri);
  return v;
}

// 2. Contraction certificates for random hyperbolic elements with gap >= 1e4.
Verdict contraction_soundness() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> step(-3, 3), len(3, 8);
  const Rational eps_sq(1, 10000);
  std::set<std::vector<std::string>> seen;
  std::size_t certified = 0, violations = 0, samples = 0, tried = 0;
  while (certified < 100 && tried < 100000) {
    ++tried;
    Matrix g = Matrix::identity(2);
    int L = len(rng);
    for (int i = 0; i < L; ++i) {
      int k = step(rng);
      if (k == 0) continue;
      g = g * (i % 2 ? Matrix{{1, Rational(k)}, {0, 1}} : Matrix{{1, 0}, {Rational(k), 1}});
    }
    Rational tr = trace(g);
    if (tr * tr <= 4) continue;
    if (contraction::singular_gap_bounds(g).lower < 10000) continue;
    std::vector<std::string> key;
    for (std::size_t i = 0; i < 4; ++i) key.push_back(to_string(g(i / 2, i % 2)));
    if (!seen.insert(key).second) continue;
    contraction::ContractionCertificate cert = contraction::certify_contraction(g, eps_sq);
    if (cert.epsilon_sq != eps_sq) return {false, "certificate radius differs from epsilon^2"};
    auto rep = contraction::audit_contraction(cert, 10000, certified + 1);
    violations += rep.violations;
    samples += rep.outside_repelling;
    ++certified;
  }
  Verdict v;
  v.pass = certified == 100 && violations == 0;
  v.detail = std::to_string(certified) + " elements certified at epsilon = 1e-2; " + std::to_string(samples) +
             " grid points outside the repelling tubes, " + std::to_string(violations) + " violations";
  return v;
}

const Matrix kA{{2, 1}, {1, 1}};
const Matrix kB{{1, 1}, {1, 2}};

// 3. Exhaustive relation search on a certified Schottky pair.
Verdict freeness() {
  pingpong::PingPongTable t;
  t.entries.push_back(contraction::certify_very_proximal_auto(power(kA, 3)));
  t.entries.push_back(contraction::certify_very_proximal_auto(power(kB, 3)));
  pingpong::verify_schottky(t);
  auto rep = pingpong::freeness_search(t.generators(), 8);
  std::size_t exact8 = pingpong::reduced_word_count(2, 8) - pingpong::reduced_word_count(2, 7);
  Verdict v;
  v.pass = rep.free && exact8 == 8748 && rep.words_checked == pingpong::reduced_word_count(2, 8);
  v.detail = "table {A^3, B^3} certified; " + std::to_string(rep.words_checked) + " reduced words of length <= 8 (" +
             std::to_string(exact8) + " of length 8), none trivial";
  return v;
}

// 4. Unipotent dynamics of e12 at eps^2 = delta^2 = 1e-2.
Verdict unipotent_dynamics() {
  auto u = unischottky::RankOneUnipotent::from_matrix(Matrix::elementary(3, 0, 1));
  long m = unischottky::min_power(u, kHundredth, kHundredth);
  // sup over d(x, L) >= delta of d(v^k x, p)^2 is 1 / (k^2 m^2 delta^2 |N|^2); worst k = 1
  auto bound = [&](long mm) -> Rational {
    return Rational(1) / (Rational(mm * mm) * kHundredth * frobenius_sq(u.nilpart));
  };
  bool analytic = bound(m) < kHundredth && !(bound(m - 1) < kHundredth);
  bool certified = unischottky::dynamics_certified(u.power(m), kHundredth, kHundredth);

  Matrix v = power(u.u, m);
  std::vector<Matrix> vk;
  for (long k = 1; k <= 50; ++k) {
    vk.push_back(power(v, k));
    vk.push_back(power(v, -k));
  }
  // grid on the sphere; half the points hug the boundary d(x, L) = delta
  std::vector<ProjPoint> pts;
  const ProjHyperplane L = *u.L.as_hyperplane();
  for (int i = 0; pts.size() < 10000; ++i) {
    double th = 2 * M_PI * (i * 0.6180339887498949 - std::floor(i * 0.6180339887498949));
    double z;
    if (i % 2) {
      z = (i % 4 == 1 ? 1 : -1) * (1 - 2 * ((i * 0.7548776662466927) - std::floor(i * 0.7548776662466927)));
    } else {
      double s = 0.1 * (1 + 1e-3 * ((i / 2) % 97));  // sine of the angle to L, just above delta
      z = (i % 4 == 0 ? s : -s);
    }
    double r = std::sqrt(std::max(0.0, 1 - z * z));
    // x2 is the coordinate transverse to L = {x2 = 0}
    ProjPoint x(Vector{Rational(r * std::cos(th)), Rational(z), Rational(r * std::sin(th))});
    if (exactlin::point_subspace_distance_sq(kArch, x, L) >= kHundredth) pts.push_back(x);
  }
  std::size_t escapes = 0;
  for (const auto& x : pts)
    for (const auto& g : vk)
      if (exactlin::proj_distance_sq(kArch, exactlin::apply(g, x), u.p) >= kHundredth) ++escapes;
  Verdict r;
  r.pass = analytic && certified && escapes == 0;
  r.detail = "min_power = " + std::to_string(m) + ", analytic bound " + (analytic ? "tight" : "FAILED") +
             ", certified " + (certified ? "yes" : "no") + "; 10000 points x 100 powers, " + std::to_string(escapes) +
             " escapes";
  return r;
}

std::string prodense_json;
std::string family_json;
std::string ppp_json;

congruence::ProdenseResult run_prodense() {
  return congruence::prodense_construct(3, kE1, kSimplexL, kHundredth, kHundredth, {4, 3, 5, 7});
}

// 5. Profinitely dense system at n = 3.
Verdict prodense() {
  auto res = run_prodense();
  prodense_json = json_io::dump(json_io::encode(res));
  bool twelve = res.system.elements.size() == 12;
  bool system_ok = unischottky::verify_system(res.system).ok;
  auto mats = res.system.matrices();
  std::string detail = std::to_string(res.system.elements.size()) + " generators, system " +
                       (system_ok ? "verified" : "REJECTED");
  bool orders = true;
  for (long d : {3L, 4L, 5L, 7L}) {
    auto img = congruence::image_closure(mats, d, 10000000);
    Integer expect = congruence::sl_order(3, d);
    bool ok = img.complete && Integer(img.order) == expect;
    orders = orders && ok;
    detail += "; mod " + std::to_string(d) + ": " + std::to_string(img.order) + "/" + to_string(expect);
  }
  bool block1 = res.block1_mod3.order == 5616;
  Verdict v;
  v.pass = twelve && system_ok && orders && block1 && res.evidence.all_surjective;
  v.detail = detail;
  return v;
}

congruence::FamilyReport run_family() {
  return congruence::counting_family(3, kE1, kSimplexL, kHundredth, kHundredth, {4, 3, 5, 7}, {3, 4, 5});
}

// 6. Counting family truncated at F = 3.
Verdict family() {
  auto rep = run_family();
  family_json = json_io::dump(json_io::encode(rep));
  std::size_t verified = 0, certs = 0, evidence = 0;
  for (const auto& s : rep.systems) verified += unischottky::verify_system(s).ok;
  for (const auto& p : rep.pair_reports) {
    certs += unischottky::check_z_squared(p.certificate.u, p.certificate.v).valid();
    bool all = p.evidence.all_surjective && p.evidence.moduli.size() == 3;
    for (const auto& m : p.evidence.moduli) all = all && m.surjective.value_or(false) && Integer(m.order) == m.expected;
    evidence += all;
  }
  Verdict v;
  v.pass = rep.systems.size() == 8 && verified == 8 && rep.pair_reports.size() == 28 && certs == 28 && evidence == 28;
  v.detail = std::to_string(verified) + "/" + std::to_string(rep.systems.size()) + " systems verified; " +
             std::to_string(certs) + "/" + std::to_string(rep.pair_reports.size()) + " Z^2 certificates; " +
             std::to_string(evidence) + " pairs surjective mod {3, 4, 5}";
  return v;
}

// 7. No random flag touches all 2n - 1 flags of a general-position family.
Verdict no_touch() {
  std::vector<Matrix> gens{Matrix::elementary(3, 0, 1, 1), Matrix::elementary(3, 1, 2, 1),
                           Matrix::elementary(3, 2, 0, 1)};
  Matrix s{{2, 1, 0}, {1, 1, 0}, {0, 0, 1}};
  Matrix t{{1, 0, 0}, {0, 2, 1}, {0, 1, 1}};
  auto seed = contraction::certify_very_proximal_auto(power(s * t, 8));
  auto five = pingpong::general_position_tuple(seed, gens, 5, 400);
  std::vector<MFlag> flags;
  for (const auto& e : five.entries) flags.push_back(pingpong::associated_flag(e));
  if (!exactlin::is_general_position(flags)) return {false, "constructed family not in general position"};

  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> small(-3, 3), pick(0, 4), mode(0, 2);
  std::size_t simultaneous = 0, max_touch = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    Vector p, h;
    switch (mode(rng)) {
      case 0: {  // small random flag
        do {
          p = {small(rng), small(rng), small(rng)};
        } while (p == Vector{0, 0, 0});
        Vector q;
        do {
          q = {small(rng), small(rng), small(rng)};
        } while (rank(std::vector<Vector>{p, q}) < 2);
        h = kernel(Matrix::from_rows({p, q})).front();  // plane containing [p]
        break;
      }
      case 1: {  // point on two family hyperplanes, hyperplane through a family point
        int i = pick(rng), j = (i + 1 + pick(rng) % 4) % 5;
        p = kernel(Matrix::from_rows({flags[i].hyperplane.vector(), flags[j].hyperplane.vector()})).front();
        Vector q = flags[pick(rng)].point.vector();
        if (rank(std::vector<Vector>{p, q}) < 2) q = {small(rng), small(rng), 1};
        if (rank(std::vector<Vector>{p, q}) < 2) continue;
        h = kernel(Matrix::from_rows({p, q})).front();
        break;
      }
      default: {  // hyperplane through two family points, point on a family hyperplane
        int i = pick(rng), j = (i + 1 + pick(rng) % 4) % 5;
        h = kernel(Matrix::from_rows({flags[i].point.vector(), flags[j].point.vector()})).front();
        Matrix both = Matrix::from_rows({h, flags[pick(rng)].hyperplane.vector()});
        auto ker = kernel(both);
        if (ker.empty()) continue;
        p = ker.front();
        break;
      }
    }
    MFlag alpha{ProjHyperplane(h), ProjPoint(p)};
    std::size_t touched = 0;
    for (const auto& f : flags) touched += exactlin::mflag_touches(alpha, f);
    max_touch = std::max(max_touch, touched);
    if (touched == flags.size()) ++simultaneous;
  }
  Verdict v;
  v.pass = simultaneous == 0;
  v.detail = "5 general-position M-flags; 100000 sampled flags, most touched " + std::to_string(max_touch) +
             ", simultaneous touchers " + std::to_string(simultaneous);
  return v;
}

sl2ht::Realization run_ppp(const sl2ht::PreciseTable& table, const sl2ht::PPP& phi) {
  return sl2ht::realize_ppp(phi, table);
}

sl2ht::PPP the_phi() {
  Matrix e = Matrix::identity(2);
  return {{e, Matrix{{1, 1}, {0, 1}}}, {e, Matrix{{1, 0}, {1, 1}}}};
}

// 8. One even step of the PPP realization.
Verdict ppp() {
  auto table = sl2ht::build_precise_table({power(kA, 3), power(kB, 3)});
  auto phi = the_phi();
  if (!phi.special() || !sl2ht::is_legitimate(phi, table)) return {false, "phi is not legitimate and special"};
  auto r = run_ppp(table, phi);
  ppp_json = json_io::dump(json_io::encode(r));
  // independent re-checks
  auto recert = sl2ht::certify_table(r.table.generators, r.table.arcs);
  bool table_ok = recert.size() == 4;
  auto fr = pingpong::freeness_search(r.table.generators, 6);
  bool cosets = true;
  for (std::size_t j = 0; j < phi.m(); ++j)
    cosets = cosets && sl2ht::membership(inverse(phi.beta[j]) * r.gamma_k * phi.alpha[j], r.table);
  bool outside = !sl2ht::membership(r.gamma_k, table);
  bool first = r.table.generators[2] == r.gamma_k;
  Verdict v;
  v.pass = table_ok && fr.free && cosets && outside && first && r.verified();
  v.detail = "gamma^k with k = " + std::to_string(r.power) + "; extended table of " +
             std::to_string(recert.size()) + " re-certified; " + std::to_string(fr.words_checked) +
             " words to length 6 free; coset equations " + (cosets ? "hold" : "FAIL") + "; gamma^k outside old group " +
             (outside ? "yes" : "no");
  return v;
}

// 9. Byte-identical JSON on re-running 5, 6 and 8.
Verdict determinism() {
  if (prodense_json.empty() || family_json.empty() || ppp_json.empty()) return {false, "criteria 5, 6, 8 did not run"};
  bool a = json_io::dump(json_io::encode(run_prodense())) == prodense_json;
  bool b = json_io::dump(json_io::encode(run_family())) == family_json;
  auto table = sl2ht::build_precise_table({power(kA, 3), power(kB, 3)});
  bool c = json_io::dump(json_io::encode(run_ppp(table, the_phi()))) == ppp_json;
  Verdict v;
  v.pass = a && b && c;
  v.detail = std::string("prodense ") + (a ? "identical" : "DIFFERS") + ", family " + (b ? "identical" : "DIFFERS") +
             ", ppp " + (c ? "identical" : "DIFFERS") + " (" +
             std::to_string(prodense_json.size() + family_json.size() + ppp_json.size()) +
             " bytes)";
  return v;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria{
      {1, "metric suite", 30, metric_suite},
      {2, "contraction soundness", 120, contraction_soundness},
      {3, "freeness to length 8", 60, freeness},
      {4, "unipotent dynamics", 120, unipotent_dynamics},
      {5, "prodense pipeline", 600, prodense},
      {6, "counting family F = 3", 900, family},
      {7, "no-touch", 60, no_touch},
      {8, "PPP realization", 600, ppp},
      {9, "determinism", 0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = c.limit_seconds <= 0 || secs < c.limit_seconds;
    bool pass = v.pass && in_time;
    failures += !pass;
    std::printf("%s %d %s: %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs,
                in_time ? "" : ", over the time limit");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
