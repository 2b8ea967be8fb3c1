#include <benchmark/benchmark.h>

#include <random>

#include "renyikey/finitesize.hpp"
#include "renyikey/optimizer.hpp"

using namespace renyikey;

namespace {

CMatrix random_density(int d, std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  CMatrix g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = Complex(n(gen), n(gen));
  CMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

struct Bb84Fixture {
  ProtocolInstance inst = bb84_pm_instance(0.01, 0.0);
  FeasibleSet set = FeasibleSet::from_instance(
      inst, pe_radius(1e-10, static_cast<int>(inst.pe_observables.size()), 10000));
  PerturbedObjective obj{inst.gmap, inst.zmap, RenyiParams::from_alpha(1.1)};
};

const Bb84Fixture& bb84() {
  static const Bb84Fixture f;
  return f;
}

void BM_EigHermitian(benchmark::State& state) {
  std::mt19937_64 gen(1);
  const CMatrix m = random_density(static_cast<int>(state.range(0)), gen);
  for (auto _ : state) benchmark::DoNotOptimize(eig_hermitian(m));
}
BENCHMARK(BM_EigHermitian)->Arg(8)->Arg(16)->Arg(48);

void BM_FrechetIntegral(benchmark::State& state) {
  std::mt19937_64 gen(2);
  const int d = static_cast<int>(state.range(0));
  const CMatrix a = random_density(d, gen);
  const EigenSystem b = eig_hermitian(random_density(d, gen) + 0.01 * CMatrix::Identity(d, d));
  for (auto _ : state) benchmark::DoNotOptimize(frechet_integral(a, b, 0.25));
}
BENCHMARK(BM_FrechetIntegral)->Arg(8)->Arg(16)->Arg(48);

void BM_ObjectiveValue(benchmark::State& state) {
  const auto& f = bb84();
  const CMatrix rho = f.inst.rho_ideal.matrix();
  for (auto _ : state) benchmark::DoNotOptimize(f.obj.value(rho));
}
BENCHMARK(BM_ObjectiveValue);

void BM_ObjectiveGradient(benchmark::State& state) {
  const auto& f = bb84();
  const CMatrix rho = f.inst.rho_ideal.matrix();
  for (auto _ : state) benchmark::DoNotOptimize(f.obj.evaluate(rho, true));
}
BENCHMARK(BM_ObjectiveGradient);

void BM_LinearMinimum(benchmark::State& state) {
  const auto& f = bb84();
  const HermitianMatrix g = f.obj.gradient(f.inst.rho_ideal.matrix());
  for (auto _ : state) benchmark::DoNotOptimize(f.set.minimize_linear(g));
}
BENCHMARK(BM_LinearMinimum)->Unit(benchmark::kMillisecond);

void BM_FrankWolfeBb84(benchmark::State& state) {
  const auto& f = bb84();
  for (auto _ : state) benchmark::DoNotOptimize(frank_wolfe(f.obj, f.set));
}
BENCHMARK(BM_FrankWolfeBb84)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
