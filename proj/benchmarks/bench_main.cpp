#include "psichain/applications.hpp"
#include "psichain/complexity.hpp"
#include "psichain/concentration.hpp"
#include "psichain/diameters.hpp"
#include "psichain/ensembles.hpp"
#include "psichain/nets.hpp"
#include "psichain/orlicz.hpp"
#include "psichain/rng.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

using namespace psichain;

namespace {

std::vector<double> gaussian_values(std::size_t N, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(N);
  for (auto& x : v) x = rng.normal();
  return v;
}

void BM_EmpiricalPsiNorm(benchmark::State& state) {
  const EmpiricalVector x(gaussian_values(static_cast<std::size_t>(state.range(0)), 1));
  const OrliczIndex a(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(empirical_psi_norm(x, a));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EmpiricalPsiNorm)->RangeMultiplier(4)->Range(64, 1 << 16)->Complexity();

void BM_BlockNetApproximation(benchmark::State& state) {
  const std::size_t N = static_cast<std::size_t>(state.range(0));
  BlockNetParams p;
  p.N = N;
  p.m = static_cast<std::size_t>(state.range(1));
  // m-sparse unit vector on spread-out coordinates.
  const auto g = gaussian_values(p.m, 2);
  std::vector<double> v(N, 0.0);
  double s = 0.0;
  for (double x : g) s += x * x;
  for (std::size_t k = 0; k < p.m; ++k) v[k * (N / p.m)] = g[k] / std::sqrt(s);
  for (auto _ : state) benchmark::DoNotOptimize(approximate_in_block_net(v, p).error);
}
BENCHMARK(BM_BlockNetApproximation)->Args({64, 8})->Args({256, 16})->Args({1024, 32})->Args({4096, 64});

void BM_EmpiricalDm(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto X = sample(EnsembleSpec::gaussian(n), 256, 3);
  const auto K = IndexClass::sphere(n);
  for (auto _ : state) benchmark::DoNotOptimize(empirical_Dm(X, K, 16).value);
}
BENCHMARK(BM_EmpiricalDm)->Arg(8)->Arg(32)->Arg(128);

void BM_SupDeviationSphere(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto X = sample(EnsembleSpec::gaussian(n), 8 * n, 4);
  const auto K = IndexClass::sphere(n);
  for (auto _ : state) benchmark::DoNotOptimize(sup_deviation(X, K).value);
}
BENCHMARK(BM_SupDeviationSphere)->Arg(8)->Arg(32)->Arg(128);

void BM_OperatorNormL1Ball(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto X = sample(EnsembleSpec::gaussian(n), n, 5);
  const auto K = BodySpec::l1_ball(n);
  for (auto _ : state) benchmark::DoNotOptimize(operator_norm(X.rows, K, 2.0).value);
}
BENCHMARK(BM_OperatorNormL1Ball)->Arg(16)->Arg(64)->Arg(256);

void BM_SampleGaussian(benchmark::State& state) {
  const std::size_t N = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample(EnsembleSpec::gaussian(32), N, 6).rows.data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(N));
}
BENCHMARK(BM_SampleGaussian)->Arg(256)->Arg(4096);

}  // namespace
BENCHMARK_MAIN();
