#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "schottky/contraction.hpp"

namespace schottky::pingpong {

using contraction::VeryProximalCertificate;
using exactlin::Ball;
using exactlin::MFlag;
using exactlin::Place;

struct Letter {
  std::size_t gen = 0;
  int sign = 1;  // +1 or -1
  friend bool operator==(const Letter&, const Letter&) = default;
};

struct Word {
  std::vector<Letter> letters;

  bool reduced() const;
  Word inverse() const;
  std::string to_string() const;  // e.g. "a0 A1" with capitals for inverses
  friend bool operator==(const Word&, const Word&) = default;
};

struct PingPongTable {
  Place place = Place::arch();
  std::vector<VeryProximalCertificate> entries;

  std::size_t size() const { return entries.size(); }
  const Matrix& generator(std::size_t i) const { return entries.at(i).g(); }
  std::vector<Matrix> generators() const;
};

struct SchottkyCertificate {
  PingPongTable table;
  std::optional<VeryProximalCertificate> spacious_witness;
};

// A failed cross condition: attracting set of g_i^s against the attracting
// (kind = "attracting") or repelling set of g_j^t.
struct Overlap {
  std::size_t i = 0;
  int s = 1;
  std::size_t j = 0;
  int t = 1;
  std::string kind;
  Rational center_distance_sq;
  std::string to_string() const;
};

std::optional<Overlap> find_overlap(const PingPongTable& table);
SchottkyCertificate verify_schottky(const PingPongTable& table);
// Spacious variant: the table extended by the witness must verify as well.
SchottkyCertificate verify_schottky(const PingPongTable& table, const VeryProximalCertificate& witness);

Matrix eval_word(const Word& w, const std::vector<Matrix>& gens);
Matrix eval_word(const Word& w, const PingPongTable& table);

struct FreenessReport {
  bool free = true;
  std::size_t words_checked = 0;
  std::optional<Word> relation;
};

// Number of nonempty reduced words of length <= max_len on k generators.
std::size_t reduced_word_count(std::size_t k, std::size_t max_len);

FreenessReport freeness_search(const std::vector<Matrix>& gens, std::size_t max_len, std::size_t cap = 1000000);
bool freeness_oracle(const std::vector<Matrix>& gens, std::size_t max_len, std::size_t cap = 1000000);
bool freeness_oracle(const PingPongTable& table, std::size_t max_len, std::size_t cap = 1000000);

// Reduced words over k generators, length-lex, starting with the empty word.
class WordEnumerator {
 public:
  explicit WordEnumerator(std::size_t generators);
  const Word& current() const { return word_; }
  void next();

 private:
  void sync();
  std::size_t k_;
  std::vector<std::size_t> sym_;  // 2 * gen + (sign < 0)
  Word word_;
};

// zeta^i w_i zeta^-i for i = 1..count, words cycled when count exceeds them.
PingPongTable conjugated_tuple(const SchottkyCertificate& cert, const std::vector<Word>& words, std::size_t count);

// M-flag attached to a very proximal element: its repelling hyperplane and
// the attracting point of its inverse projected onto that hyperplane, both
// taken from the rational box centers.
MFlag associated_flag(const VeryProximalCertificate& cert);
bool flags_in_position(const std::vector<MFlag>& flags);

PingPongTable general_position_tuple(const VeryProximalCertificate& seed, const std::vector<Matrix>& ambient_gens,
                                     std::size_t m, std::size_t budget);

struct NormalCosetTarget {
  Matrix gamma;
  Matrix n0;
};

// eta = (prod_k c_k n0^{e_k} c_k^-1) * gamma
struct CosetLedger {
  std::vector<Matrix> conjugators;
  std::vector<int> exponents;
  Matrix gamma;
  Matrix product(const Matrix& n0) const;
};

struct CosetHit {
  Matrix eta;
  PingPongTable table;  // input table with eta appended, re-verified
  CosetLedger ledger;
  long power = 0;       // N
  long ell = 1;
  std::size_t escape_candidates = 0;
};

struct CosetHitOptions {
  std::size_t sigma_index = 0;
  long ell = 1;
  long start_power = 1;
  long max_power = 1L << 12;
};

CosetHit hit_normal_coset(const SchottkyCertificate& cert, const NormalCosetTarget& target, std::size_t budget,
                          const CosetHitOptions& opts = {});

// Re-expands the ledger and compares with eta exactly.
bool check_coset_membership(const CosetHit& hit, const Matrix& n0);

}  // namespace schottky::pingpong
