#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fusioncurve/dataset.hpp"
#include "fusioncurve/eif.hpp"
#include "fusioncurve/nuisance.hpp"

namespace fusioncurve {

// Hot loops come in two flavours: an OpenMP version and a plain serial
// reference. Both must produce bitwise-identical results; the tests and the
// benchmark compare them. `threads` <= 0 means the OpenMP default.

/// Worker count actually used for `threads`.
int resolve_threads(int threads);

/// Fills every row of `m` using the bundle trained without that row's fold.
void fill_eif_serial(EifMatrix& m, const FusedDataset& ds, std::span<const int> folds,
                     std::span<const std::shared_ptr<const Nuisance>> bundles, EifForm form, TruncationCounts& counts);
void fill_eif_parallel(EifMatrix& m, const FusedDataset& ds, std::span<const int> folds,
                       std::span<const std::shared_ptr<const Nuisance>> bundles, EifForm form, TruncationCounts& counts,
                       int threads);

/// Multiplier-bootstrap sup statistics for one studentized block z (rows x
/// cols, row-major): stat_b = max_t |n^{-1/2} sum_i xi_bi z_it| with xi_b
/// standard normal drawn from an engine seeded by derive_seed(seed, {b}).
std::vector<double> sup_stats_serial(std::span<const double> z, std::size_t rows, std::size_t cols, std::size_t draws,
                                     std::uint64_t seed);
std::vector<double> sup_stats_parallel(std::span<const double> z, std::size_t rows, std::size_t cols,
                                       std::size_t draws, std::uint64_t seed, int threads);

/// Runs task(i) for i in [0, count). Results keep index order; the exception
/// of the lowest failing index is rethrown after all tasks finish.
template <class T>
std::vector<T> parallel_map(std::size_t count, const std::function<T(std::size_t)>& task, int threads);

template <class T>
std::vector<T> serial_map(std::size_t count, const std::function<T(std::size_t)>& task) {
  std::vector<T> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(task(i));
  return out;
}

namespace detail {
void run_indexed(std::size_t count, const std::function<void(std::size_t)>& body, int threads);
}

template <class T>
std::vector<T> parallel_map(std::size_t count, const std::function<T(std::size_t)>& task, int threads) {
  std::vector<std::unique_ptr<T>> slots(count);
  detail::run_indexed(count, [&](std::size_t i) { slots[i] = std::make_unique<T>(task(i)); }, threads);
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace fusioncurve
