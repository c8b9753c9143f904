// Serial reference vs OpenMP for the two hot kernels.
//   ./kernel_bench --benchmark_filter=Eif

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>
#include <vector>

#include "fusioncurve/kernels.hpp"
#include "fusioncurve/rng.hpp"
#include "fusioncurve/simlab.hpp"

using namespace fusioncurve;

namespace {

struct EifFixture {
  FusedDataset ds;
  std::vector<int> folds;
  std::vector<std::shared_ptr<const Nuisance>> bundles;
  std::vector<double> grid{1, 2, 3, 4, 5};

  explicit EifFixture(std::size_t n_h) : ds(sim::generate(sim::standard_config(n_h, 0.0, 1))) {
    folds = make_folds(ds, 5, 1);
    for (int k = 1; k <= 5; ++k) bundles.push_back(fit_bundle(ds, folds, k, sim::correct_spec()));
  }
};

const EifFixture& fixture(std::size_t n_h) {
  static std::map<std::size_t, std::unique_ptr<EifFixture>> cache;
  auto& slot = cache[n_h];
  if (!slot) slot = std::make_unique<EifFixture>(n_h);
  return *slot;
}

void BM_EifSerial(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    EifMatrix m({Arm::Investigational}, {1}, f.grid, f.ds.size());
    TruncationCounts c;
    fill_eif_serial(m, f.ds, f.folds, f.bundles, EifForm::Censored, c);
    benchmark::DoNotOptimize(m.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.ds.size()));
}

void BM_EifParallel(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    EifMatrix m({Arm::Investigational}, {1}, f.grid, f.ds.size());
    TruncationCounts c;
    fill_eif_parallel(m, f.ds, f.folds, f.bundles, EifForm::Censored, c, 0);
    benchmark::DoNotOptimize(m.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.ds.size()));
}

std::vector<double> studentized(std::size_t rows, std::size_t cols) {
  std::vector<double> z(rows * cols);
  Engine eng(derive_seed(5, {0}));
  std::normal_distribution<double> n01;
  for (auto& v : z) v = n01(eng);
  return z;
}

void BM_SupSerial(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto z = studentized(rows, 10);
  for (auto _ : state) benchmark::DoNotOptimize(sup_stats_serial(z, rows, 10, 1000, 3));
}

void BM_SupParallel(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto z = studentized(rows, 10);
  for (auto _ : state) benchmark::DoNotOptimize(sup_stats_parallel(z, rows, 10, 1000, 3, 0));
}

}  // namespace

BENCHMARK(BM_EifSerial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EifParallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SupSerial)->Arg(1250)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SupParallel)->Arg(1250)->Arg(5000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
