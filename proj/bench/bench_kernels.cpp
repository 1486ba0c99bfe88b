#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "modamp/dynamics.hpp"
#include "modamp/experiments.hpp"

using namespace modamp;

namespace {

struct Fixture {
  SparseOperator h;
  Eigen::VectorXcd x;

  explicit Fixture(int n_half)
      : h(build_total_hamiltonian(make_chain(n_half, 0.5, 0.75, 1.0), build_sector_basis(2 * n_half, n_half))) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    x.resize(static_cast<Eigen::Index>(h.dim()));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = {g(rng), g(rng)};
    x.normalize();
  }
};

const Fixture& fixture(int n_half) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(n_half);
  if (it == cache.end()) it = cache.emplace(n_half, Fixture(n_half)).first;
  return it->second;
}

void BM_ApplySerial(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  Eigen::VectorXcd y(f.x.size());
  for (auto _ : state) {
    f.h.apply_serial(f.x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.h.nnz()));
}

void BM_ApplyParallel(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  Eigen::VectorXcd y(f.x.size());
  for (auto _ : state) {
    f.h.apply(f.x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.h.nnz()));
}

void BM_KrylovStep(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  const StateVector v = make_state(f.h.basis(), f.x);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_krylov(f.h, v, 0.5).amplitudes.data());
}

void BM_TraceWindow(benchmark::State& state) {
  const ChainSpec c = make_chain(static_cast<int>(state.range(0)), 0.45, 0.6, 0.0);
  const auto grid = Window{}.grid();
  for (auto _ : state) benchmark::DoNotOptimize(entanglement_trace(c, grid).e.data());
}

}  // namespace

BENCHMARK(BM_ApplySerial)->Arg(6)->Arg(8)->Arg(9);
BENCHMARK(BM_ApplyParallel)->Arg(6)->Arg(8)->Arg(9);
BENCHMARK(BM_KrylovStep)->Arg(6)->Arg(8);
BENCHMARK(BM_TraceWindow)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
