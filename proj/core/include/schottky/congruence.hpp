#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "schottky/unischottky.hpp"

namespace schottky::congruence {

using unischottky::SchottkySystem;
using unischottky::ZSquaredCertificate;

struct ModMatrix {
  std::size_t n = 0;
  long modulus = 0;
  std::vector<long> entries;  // row-major, in [0, modulus)

  long operator()(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
  bool is_identity() const;
  ModMatrix operator*(const ModMatrix& o) const;
  friend bool operator==(const ModMatrix&, const ModMatrix&) = default;
};

ModMatrix reduce_mod(const Matrix& g, long d);
bool in_kernel(const Matrix& g, long d);  // g = I mod d

Integer sl_order(std::size_t n, long d);

struct CongruenceImage {
  long modulus = 0;
  std::size_t n = 0;
  std::vector<ModMatrix> generators;
  std::uint64_t order = 0;       // elements found (a lower bound when incomplete)
  bool complete = false;         // closure finished within the cap
  std::optional<bool> surjective;  // unknown when the cap was hit
  std::vector<std::uint64_t> elements;  // codes, only when requested
};

CongruenceImage image_closure(const std::vector<Matrix>& gens, long d, std::uint64_t cap = 1000000,
                              bool keep_elements = false);

// Elementary generators e_ij (i != j) of SL_n(Z).
std::vector<Matrix> elementary_generators(std::size_t n);

long exponent_mod(std::size_t n, long d, std::uint64_t cap = 1000000);

struct ModulusEvidence {
  long modulus = 0;
  std::uint64_t order = 0;
  Integer expected;
  std::optional<bool> surjective;
};

struct DensityEvidence {
  std::vector<ModulusEvidence> moduli;
  bool all_surjective = false;
  std::string caveat;
};

DensityEvidence density_evidence(const std::vector<Matrix>& gens, const std::vector<long>& moduli,
                                 std::uint64_t cap = 10000000);

struct ProdenseOptions {
  std::vector<long> q_policy{1, 2, 3, 5};
  std::uint64_t closure_cap = 10000000;
  std::size_t conze_budget = 200000;
};

struct TargetFlag {
  exactlin::ProjPoint p;
  exactlin::ProjSubspace L;
  Rational epsilon_sq;  // radius of the target ball and tube
};

struct ProdenseResult {
  SchottkySystem system;
  DensityEvidence evidence;
  long t = 0;  // exponent of SL(n, Z/3)
  long q = 0;
  long r = 0;  // exponent used for the second block
  std::vector<Matrix> conjugators;
  std::vector<long> powers;  // u_i = g_i e_i^{powers[i]} g_i^-1
  std::vector<TargetFlag> targets;  // 2n^2 - n flags; the last n are spare
  CongruenceImage block1_mod3;
  long zariski_witness = 0;  // odd prime p with the image mod p surjective
};

ProdenseResult prodense_construct(std::size_t n, const exactlin::ProjPoint& p, const exactlin::ProjSubspace& L,
                                  const Rational& epsilon_sq, const Rational& delta_sq,
                                  const std::vector<long>& moduli, const ProdenseOptions& opts = {});

struct FamilyPair {
  unsigned f = 0;  // bit i-1 holds f(i)
  unsigned g = 0;
  std::size_t index = 0;  // first i with f(i) != g(i)
  ZSquaredCertificate certificate;
  DensityEvidence evidence;
};

struct FamilyReport {
  std::size_t F = 0;
  ProdenseResult base;
  std::vector<std::array<unischottky::SystemElement, 2>> pairs;  // u_{i,1}, u_{i,2}
  std::vector<exactlin::Ball> extra_attracting;
  std::vector<exactlin::Ball> extra_repelling;
  std::vector<SchottkySystem> systems;  // indexed by f
  std::vector<bool> systems_verified;
  std::vector<FamilyPair> pair_reports;
  bool all_verified = false;
};

SchottkySystem family_system(const FamilyReport& rep, unsigned f);

FamilyReport counting_family(std::size_t F, const exactlin::ProjPoint& p, const exactlin::ProjSubspace& L,
                             const Rational& epsilon_sq, const Rational& delta_sq, const std::vector<long>& base_moduli,
                             const std::vector<long>& pair_moduli, const ProdenseOptions& opts = {});

}  // namespace schottky::congruence
