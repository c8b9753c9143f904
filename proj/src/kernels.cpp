#include "fusioncurve/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fusioncurve/rng.hpp"

namespace fusioncurve {

int resolve_threads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

namespace {

void fill_row(EifMatrix& m, const FusedDataset& ds, std::span<const int> folds,
              std::span<const std::shared_ptr<const Nuisance>> bundles, EifForm form, std::size_t r,
              TruncationCounts& counts, std::vector<double>& buf) {
  const auto& rec = ds[r];
  const Nuisance& nu = *bundles[static_cast<std::size_t>(folds[r] - 1)];
  check_fold(nu, folds[r]);
  const std::size_t block = m.causes.size() * m.grid.size();
  buf.resize(block);
  for (std::size_t a = 0; a < m.arms.size(); ++a) {
    eif_row(nu, rec, m.arms[a], m.grid, m.causes, form, buf, &counts);
    std::copy(buf.begin(), buf.end(), m.values.begin() + static_cast<std::ptrdiff_t>(r * m.columns() + a * block));
  }
  m.bridging[r] = rec.bridging() ? 1 : 0;
}

double sup_stat(std::span<const double> z, std::size_t rows, std::size_t cols, std::uint64_t seed, std::size_t b,
                std::vector<double>& acc) {
  Engine eng(derive_seed(seed, {b}));
  std::normal_distribution<double> normal;
  acc.assign(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const double xi = normal(eng);
    const double* row = z.data() + i * cols;
    for (std::size_t t = 0; t < cols; ++t) acc[t] += xi * row[t];
  }
  double best = 0.0;
  for (double v : acc) best = std::max(best, std::abs(v));
  return best / std::sqrt(static_cast<double>(rows));
}

}  // namespace

void fill_eif_serial(EifMatrix& m, const FusedDataset& ds, std::span<const int> folds,
                     std::span<const std::shared_ptr<const Nuisance>> bundles, EifForm form, TruncationCounts& counts) {
  std::vector<double> buf;
  for (std::size_t r = 0; r < ds.size(); ++r) fill_row(m, ds, folds, bundles, form, r, counts, buf);
  m.compute_estimates();
}

void fill_eif_parallel(EifMatrix& m, const FusedDataset& ds, std::span<const int> folds,
                       std::span<const std::shared_ptr<const Nuisance>> bundles, EifForm form, TruncationCounts& counts,
                       int threads) {
  const auto n = static_cast<std::ptrdiff_t>(ds.size());
  std::vector<TruncationCounts> row_counts(ds.size());
  std::vector<std::exception_ptr> errors(ds.size());
#pragma omp parallel num_threads(resolve_threads(threads))
  {
    std::vector<double> buf;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      try {
        fill_row(m, ds, folds, bundles, form, static_cast<std::size_t>(r), row_counts[static_cast<std::size_t>(r)], buf);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& c : row_counts) counts += c;
  m.compute_estimates();
}

std::vector<double> sup_stats_serial(std::span<const double> z, std::size_t rows, std::size_t cols, std::size_t draws,
                                     std::uint64_t seed) {
  std::vector<double> out(draws);
  std::vector<double> acc;
  for (std::size_t b = 0; b < draws; ++b) out[b] = sup_stat(z, rows, cols, seed, b, acc);
  return out;
}

std::vector<double> sup_stats_parallel(std::span<const double> z, std::size_t rows, std::size_t cols,
                                       std::size_t draws, std::uint64_t seed, int threads) {
  std::vector<double> out(draws);
  const auto B = static_cast<std::ptrdiff_t>(draws);
#pragma omp parallel num_threads(resolve_threads(threads))
  {
    std::vector<double> acc;
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < B; ++b)
      out[static_cast<std::size_t>(b)] = sup_stat(z, rows, cols, seed, static_cast<std::size_t>(b), acc);
  }
  return out;
}

namespace detail {

void run_indexed(std::size_t count, const std::function<void(std::size_t)>& body, int threads) {
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(threads))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

}  // namespace fusioncurve
