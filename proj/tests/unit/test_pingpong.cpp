#include <random>
#include <set>

#include "doctest.h"
#include "schottky/errors.hpp"
#include "schottky/pingpong.hpp"

using namespace schottky;
using namespace schottky::pingpong;
using contraction::certify_very_proximal_auto;

namespace {

const Matrix A{{2, 1}, {1, 1}};
const Matrix B{{1, 1}, {1, 2}};
const Matrix C{{5, 1}, {-1, 0}};

PingPongTable table_of(const std::vector<Matrix>& gens) {
  PingPongTable t;
  for (const auto& g : gens) t.entries.push_back(certify_very_proximal_auto(g));
  return t;
}

Word word(std::initializer_list<std::pair<std::size_t, int>> ls) {
  Word w;
  for (auto [g, s] : ls) w.letters.push_back({g, s});
  return w;
}

}  // namespace

TEST_CASE("words") {
  std::vector<Matrix> gens{A, B};
  CHECK(eval_word(Word{}, gens).is_identity());
  CHECK(eval_word(word({{1, 1}}), gens) == B);
  Word w = word({{0, 1}, {1, -1}, {0, 1}});
  CHECK(w.reduced());
  CHECK_FALSE(word({{0, 1}, {0, -1}}).reduced());
  Word ww = w;
  for (auto l : w.inverse().letters) ww.letters.push_back(l);
  CHECK(eval_word(ww, gens).is_identity());
  CHECK(w.to_string() == "g0 G1 g0");
  CHECK_THROWS_AS(eval_word(word({{2, 1}}), gens), PreconditionError);
}

TEST_CASE("word enumerator is length-lex over reduced words") {
  WordEnumerator e(2);
  CHECK(e.current().letters.empty());
  std::set<std::string> seen;
  std::size_t per_length[5] = {0, 0, 0, 0, 0};
  while (e.current().letters.size() <= 4) {
    CHECK(e.current().reduced());
    CHECK(seen.insert(e.current().to_string()).second);
    ++per_length[e.current().letters.size()];
    std::size_t before = e.current().letters.size();
    e.next();
    CHECK(e.current().letters.size() >= before);
  }
  CHECK(per_length[1] == 4);
  CHECK(per_length[2] == 12);
  CHECK(per_length[4] == 108);
  CHECK(reduced_word_count(2, 8) == 13120);
  CHECK(reduced_word_count(2, 8) - reduced_word_count(2, 7) == 8748);
}

TEST_CASE("Schottky pair over SL2(Z)") {
  PingPongTable t = table_of({power(A, 4), power(B, 4)});
  SchottkyCertificate c = verify_schottky(t);
  CHECK(c.table.size() == 2);
  FreenessReport r = freeness_search(t.generators(), 8);
  CHECK(r.free);
  CHECK(r.words_checked == 13120);

  SUBCASE("single generator") { CHECK_NOTHROW(verify_schottky(table_of({power(A, 3)}))); }
  SUBCASE("overlap is reported") {
    PingPongTable bad = table_of({power(A, 4), power(A, 8)});
    auto o = find_overlap(bad);
    REQUIRE(o);
    CHECK(o->center_distance_sq == 0);
    CHECK_THROWS_AS(verify_schottky(bad), VerificationError);
  }
}

TEST_CASE("Sanov pair: unipotent generators do not certify, their products do") {
  Matrix a{{1, 2}, {0, 1}}, b{{1, 0}, {2, 1}};
  CHECK_THROWS_AS(certify_very_proximal_auto(a), VerificationError);
  Matrix ab = a * b;
  VeryProximalCertificate c = certify_very_proximal_auto(power(ab, 3));
  CHECK(contraction::separation_holds(c));
  CHECK(freeness_oracle(std::vector<Matrix>{a, b}, 8));
}

TEST_CASE("freeness oracle finds relations") {
  FreenessReport r = freeness_search({A, inverse(A)}, 4);
  CHECK_FALSE(r.free);
  REQUIRE(r.relation);
  CHECK(r.relation->letters.size() == 2);

  Matrix d1{{2, 0}, {0, Rational(1, 2)}}, d2{{3, 0}, {0, Rational(1, 3)}};
  CHECK(freeness_oracle({d1, d2}, 3));
  FreenessReport c = freeness_search({d1, d2}, 4);
  CHECK_FALSE(c.free);
  CHECK(c.relation->letters.size() == 4);
  CHECK_THROWS_AS(freeness_search({A, B}, 20), BudgetExceeded);
}

TEST_CASE("certified tables are free to length 8") {
  std::mt19937_64 rng(11);
  std::vector<Matrix> moves{Matrix{{1, 1}, {0, 1}}, Matrix{{1, 0}, {1, 1}}, Matrix{{1, -1}, {0, 1}},
                            Matrix{{1, 0}, {-1, 1}}};
  int certified = 0;
  for (int trial = 0; trial < 30 && certified < 6; ++trial) {
    Matrix h = Matrix::identity(2);
    for (int i = 0; i < 3; ++i) h = h * moves[rng() % 4];
    std::vector<Matrix> gens{power(A, 5), h * power(A, 5) * inverse(h)};
    PingPongTable t;
    try {
      t = table_of(gens);
    } catch (const Error&) {
      continue;
    }
    if (find_overlap(t)) continue;
    ++certified;
    CHECK(freeness_oracle(t, 8));
  }
  CHECK(certified >= 3);
}

TEST_CASE("conjugated tuples") {
  PingPongTable t = table_of({power(A, 12), power(B, 12)});
  VeryProximalCertificate zeta = certify_very_proximal_auto(power(C, 2));
  SchottkyCertificate cert = verify_schottky(t, zeta);
  CHECK(cert.spacious_witness);

  CHECK(conjugated_tuple(cert, {word({{0, 1}})}, 0).size() == 0);
  PingPongTable one = conjugated_tuple(cert, {word({{0, 1}})}, 1);
  REQUIRE(one.size() == 1);
  CHECK(one.generator(0) == zeta.g() * t.generator(0) * inverse(zeta.g()));

  PingPongTable three = conjugated_tuple(cert, {word({{0, 1}, {1, 1}})}, 3);
  REQUIRE(three.size() == 3);
  CHECK(three.generator(0) != three.generator(1));
  CHECK(three.generator(1) != three.generator(2));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j)
      CHECK(freeness_oracle({three.generator(i), three.generator(j)}, 6));
  CHECK(freeness_oracle(three, 5));

  SchottkyCertificate plain = verify_schottky(t);
  CHECK_THROWS_AS(conjugated_tuple(plain, {word({{0, 1}})}, 1), PreconditionError);
}

TEST_CASE("spacious witness must fit") {
  PingPongTable t = table_of({power(A, 6), power(B, 6)});
  CHECK_THROWS_AS(verify_schottky(t, certify_very_proximal_auto(power(A, 9))), VerificationError);
}

TEST_CASE("general position tuples") {
  std::vector<Matrix> sl2{Matrix{{1, 1}, {0, 1}}, Matrix{{1, 0}, {1, 1}}};
  VeryProximalCertificate seed = certify_very_proximal_auto(power(A, 4));
  PingPongTable one = general_position_tuple(seed, sl2, 1, 10);
  CHECK(one.generator(0) == seed.g());

  PingPongTable two = general_position_tuple(seed, sl2, 2, 200);
  REQUIRE(two.size() == 2);
  CHECK_NOTHROW(verify_schottky(two));
  std::vector<MFlag> flags{associated_flag(two.entries[0]), associated_flag(two.entries[1])};
  CHECK(exactlin::is_general_position(flags));
  CHECK(freeness_oracle(two, 6));

  CHECK_THROWS_AS(general_position_tuple(seed, sl2, 4, 3), BudgetExceeded);
}

TEST_CASE("general position tuple of five in SL3(Z)") {
  std::vector<Matrix> gens{Matrix::elementary(3, 0, 1, 1), Matrix::elementary(3, 1, 2, 1),
                           Matrix::elementary(3, 2, 0, 1)};
  Matrix s{{2, 1, 0}, {1, 1, 0}, {0, 0, 1}};
  Matrix t{{1, 0, 0}, {0, 2, 1}, {0, 1, 1}};
  VeryProximalCertificate seed = certify_very_proximal_auto(power(s * t, 8));
  PingPongTable five = general_position_tuple(seed, gens, 5, 400);
  REQUIRE(five.size() == 5);
  CHECK_NOTHROW(verify_schottky(five));
  std::vector<MFlag> flags;
  for (const auto& e : five.entries) flags.push_back(associated_flag(e));
  CHECK(exactlin::is_general_position(flags));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j) CHECK_FALSE(exactlin::mflag_touches(flags[i], flags[j]));
}

TEST_CASE("hitting a normal coset") {
  PingPongTable t = table_of({power(A, 6), power(B, 6)});
  VeryProximalCertificate zeta = certify_very_proximal_auto(power(C, 3));
  SchottkyCertificate cert = verify_schottky(t, zeta);

  SUBCASE("gamma = identity, n0 a generator power") {
    NormalCosetTarget target{Matrix::identity(2), power(B, 6)};
    CosetHit hit = hit_normal_coset(cert, target, 500);
    CHECK(check_coset_membership(hit, target.n0));
    CHECK(hit.table.size() == 3);
    CHECK_NOTHROW(verify_schottky(hit.table));
    CHECK(freeness_oracle(hit.table, 6));
  }
  SUBCASE("nontrivial gamma") {
    Matrix gamma{{1, 1}, {0, 1}};
    NormalCosetTarget target{gamma, power(A, 2)};
    CosetHit hit = hit_normal_coset(cert, target, 500);
    CHECK(hit.ledger.product(target.n0) == hit.eta);
    // eta gamma^-1 is a product of conjugates of n0^{+-1}
    Matrix rest = Matrix::identity(2);
    for (std::size_t k = 0; k < 3; ++k)
      rest = rest * hit.ledger.conjugators[k] * power(target.n0, hit.ledger.exponents[k]) *
             inverse(hit.ledger.conjugators[k]);
    CHECK(rest == hit.eta * inverse(gamma));
    CHECK_NOTHROW(verify_schottky(hit.table));
  }
  SUBCASE("central n0 cannot escape") {
    NormalCosetTarget target{Matrix::identity(2), Matrix{{-1, 0}, {0, -1}}};
    CHECK_THROWS_AS(hit_normal_coset(cert, target, 60), BudgetExceeded);
  }
  SUBCASE("needs a witness") {
    SchottkyCertificate plain = verify_schottky(t);
    CHECK_THROWS_AS(hit_normal_coset(plain, {Matrix::identity(2), power(B, 6)}, 10), PreconditionError);
  }
}
