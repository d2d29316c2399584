#include <benchmark/benchmark.h>

#include <random>

#include "schottky/congruence.hpp"
#include "schottky/contraction.hpp"
#include "schottky/pingpong.hpp"
#include "schottky/quadratic.hpp"

using namespace schottky;

namespace {

const Matrix kA{{2, 1}, {1, 1}};
const Matrix kB{{1, 1}, {1, 2}};

std::vector<exactlin::ProjPoint> random_points(std::size_t count, std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> coord(-1000, 1000);
  std::vector<exactlin::ProjPoint> out;
  while (out.size() < count) {
    Vector v(n);
    bool zero = true;
    for (auto& x : v) {
      x = coord(rng);
      zero = zero && x == 0;
    }
    if (!zero) out.emplace_back(v);
  }
  return out;
}

}  // namespace

static void BM_ProjDistance(benchmark::State& state) {
  auto pts = random_points(256, static_cast<std::size_t>(state.range(0)), 7);
  auto place = exactlin::Place::arch();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exactlin::proj_distance_sq(place, pts[i % 256], pts[(i * 7 + 3) % 256]));
    ++i;
  }
}
BENCHMARK(BM_ProjDistance)->Arg(3)->Arg(6);

static void BM_PadicDistance(benchmark::State& state) {
  auto pts = random_points(256, 3, 11);
  auto place = exactlin::Place::padic(7);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exactlin::proj_distance_sq(place, pts[i % 256], pts[(i * 5 + 1) % 256]));
    ++i;
  }
}
BENCHMARK(BM_PadicDistance);

static void BM_CertifyContraction(benchmark::State& state) {
  Matrix g = power(kA, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(contraction::certify_contraction(g, Rational(1, 100)));
}
BENCHMARK(BM_CertifyContraction)->Arg(6)->Arg(12)->Unit(benchmark::kMicrosecond);

static void BM_VeryProximalAuto(benchmark::State& state) {
  Matrix g = power(kA, 6);
  for (auto _ : state) benchmark::DoNotOptimize(contraction::certify_very_proximal_auto(g));
}
BENCHMARK(BM_VeryProximalAuto)->Unit(benchmark::kMillisecond);

static void BM_Freeness(benchmark::State& state) {
  std::vector<Matrix> gens{power(kA, 3), power(kB, 3)};
  auto len = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pingpong::freeness_search(gens, len));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * pingpong::reduced_word_count(2, len)));
}
BENCHMARK(BM_Freeness)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_CongruenceClosure(benchmark::State& state) {
  auto gens = congruence::elementary_generators(3);
  long d = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(congruence::image_closure(gens, d, 10000000));
  state.SetItemsProcessed(
      static_cast<std::int64_t>(state.iterations() * congruence::sl_order(3, d).get_ui()));
}
BENCHMARK(BM_CongruenceClosure)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_QuadraticCompare(benchmark::State& state) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> c(-50, 50);
  std::vector<quadratic::QuadNum> xs;
  const long fields[] = {2, 3, 5, 21, 77};
  for (int i = 0; i < 512; ++i)
    xs.emplace_back(Rational(c(rng), 7), Rational(c(rng) | 1, 5), Integer(fields[i % 5]));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(quadratic::compare(xs[i % 512], xs[(i * 13 + 5) % 512]));
    ++i;
  }
}
BENCHMARK(BM_QuadraticCompare);
BENCHMARK_MAIN();
