#pragma once

#include "dataset.hpp"
#include "error.hpp"
#include "estimators_1d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace entest {

//! How the data-centered ball searches enumerate neighbors. Both strategies
//! return identical results; Grid buckets points into cells of side >= the
//! search radius so each candidate only scans its 3^d neighboring cells.
enum class SearchStrategy
{
  Auto,
  Exhaustive,
  Grid,
};

namespace detail {

inline constexpr std::size_t kMaxGridDim = 6;
inline constexpr std::size_t kGridMinPoints = 1024;
// cells are inflated so that rounding in x / h never pushes a neighbor two
// cells away
inline constexpr double kCellInflation = 1.0 + 1e-6;
inline constexpr double kMaxCellCoordinate = 1e8;

using CellKey = std::array<std::int64_t, kMaxGridDim>;

//! Points bucketed into axis-aligned cells of side h, with cells sorted by key.
class CellGrid
{
public:
  static bool feasible(const DatasetND& data, double h)
  {
    if (data.dim() > kMaxGridDim || !(h > 0.0) || !std::isfinite(h))
      return false;
    for (double v : data.values())
      if (std::abs(v / h) > kMaxCellCoordinate)
        return false;
    return true;
  }

  CellGrid(const DatasetND& data, double h)
    : data_(data)
    , h_(h)
  {
    const std::size_t n = data.size();
    keys_.resize(n);
    order_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      keys_[i] = key_of(data.row(i));
      order_[i] = static_cast<std::uint32_t>(i);
    }
    std::sort(order_.begin(), order_.end(), [this](std::uint32_t a, std::uint32_t b) {
      return keys_[a] < keys_[b] || (keys_[a] == keys_[b] && a < b);
    });
    for (std::size_t p = 0; p < n;) {
      std::size_t q = p;
      while (q < n && keys_[order_[q]] == keys_[order_[p]])
        ++q;
      cells_.push_back({ keys_[order_[p]], p, q });
      p = q;
    }
  }

  //! Calls fn(j) for every point j in the 3^d cells around point i.
  template<typename Fn>
  void for_each_neighbor(std::size_t i, Fn&& fn) const
  {
    const std::size_t d = data_.dim();
    std::size_t combos = 1;
    for (std::size_t j = 0; j < d; ++j)
      combos *= 3;
    const CellKey& base = keys_[i];
    for (std::size_t c = 0; c < combos; ++c) {
      CellKey probe = base;
      std::size_t rest = c;
      for (std::size_t j = 0; j < d; ++j) {
        probe[j] += static_cast<std::int64_t>(rest % 3) - 1;
        rest /= 3;
      }
      const auto it = std::lower_bound(cells_.begin(), cells_.end(), probe,
                                       [](const Cell& cell, const CellKey& k) { return cell.key < k; });
      if (it == cells_.end() || it->key != probe)
        continue;
      for (std::size_t p = it->begin; p < it->end; ++p)
        fn(static_cast<std::size_t>(order_[p]));
    }
  }

private:
  struct Cell
  {
    CellKey key;
    std::size_t begin;
    std::size_t end;
  };

  CellKey key_of(std::span<const double> x) const
  {
    CellKey k{};
    for (std::size_t j = 0; j < x.size(); ++j)
      k[j] = static_cast<std::int64_t>(std::floor(x[j] / h_));
    return k;
  }

  const DatasetND& data_;
  double h_;
  std::vector<CellKey> keys_;
  std::vector<std::uint32_t> order_;
  std::vector<Cell> cells_;
};

inline bool use_grid(const DatasetND& data, SearchStrategy s)
{
  switch (s) {
    case SearchStrategy::Exhaustive:
      return false;
    case SearchStrategy::Grid:
      return true;
    default:
      return data.size() >= kGridMinPoints && data.dim() <= kMaxGridDim;
  }
}

//! Smallest double whose square is >= r2, so that recounting with the
//! returned radius includes every point at squared distance r2.
inline double radius_covering(double r2)
{
  double r = std::sqrt(r2);
  while (r * r < r2)
    r = std::nextafter(r, std::numeric_limits<double>::infinity());
  return r;
}

//! Squared distance from row i to its k-th nearest row (row i itself is the
//! first, at distance 0), by a full scan.
inline double kth_neighbor_sq_exhaustive(const DatasetND& data,
                                         std::size_t i,
                                         std::size_t k,
                                         std::vector<double>& scratch)
{
  scratch.resize(data.size());
  for (std::size_t j = 0; j < data.size(); ++j)
    scratch[j] = DatasetND::squared_distance(data.row(i), data.row(j));
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1), scratch.end());
  return scratch[k - 1];
}

} // namespace detail

inline std::vector<double> sample_mean_nd(const DatasetND& data)
{
  std::vector<double> mean(data.dim(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = 0; j < data.dim(); ++j)
      mean[j] += data.row(i)[j];
  for (auto& m : mean)
    m /= static_cast<double>(data.size());
  return mean;
}

inline std::vector<double> coordinatewise_median(const DatasetND& data)
{
  std::vector<double> med(data.dim());
  for (std::size_t j = 0; j < data.dim(); ++j) {
    auto col = data.column(j);
    std::sort(col.begin(), col.end());
    med[j] = sorted_median(col);
  }
  return med;
}

//! Data point whose closed ball of radius r holds the most data points.
//! Ties go to the smallest row index (TIE_BROKEN).
inline LocationEstimateND modal_ball_efficient(const DatasetND& data,
                                               double r,
                                               SearchStrategy strategy = SearchStrategy::Auto)
{
  if (!(r > 0.0) || !std::isfinite(r))
    throw InvalidParamError("modal ball radius must be positive");
  const std::size_t n = data.size();
  const double r2 = r * r;

  std::size_t best = 0, best_count = 0;
  bool tie = false;
  auto consider = [&](std::size_t i, std::size_t count) {
    if (count > best_count) {
      best = i;
      best_count = count;
      tie = false;
    } else if (count == best_count) {
      tie = true;
    }
  };

  const double h = r * detail::kCellInflation;
  if (detail::use_grid(data, strategy) && detail::CellGrid::feasible(data, h)) {
    const detail::CellGrid grid(data, h);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t count = 0;
      grid.for_each_neighbor(i, [&](std::size_t j) {
        count += DatasetND::squared_distance(data.row(i), data.row(j)) <= r2;
      });
      consider(i, count);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t count = 0;
      for (std::size_t j = 0; j < n; ++j)
        count += DatasetND::squared_distance(data.row(i), data.row(j)) <= r2;
      consider(i, count);
    }
  }

  LocationEstimateND est;
  const auto c = data.row(best);
  est.center.assign(c.begin(), c.end());
  est.radius = r;
  est.count = best_count;
  est.center_index = best;
  if (tie)
    est.flags.set(Flag::TieBroken);
  return est;
}

//! Data point with the smallest distance to its k-th nearest data point
//! (itself counted first). Ties go to the smallest row index.
inline LocationEstimateND shorth_efficient(const DatasetND& data,
                                           std::size_t k,
                                           SearchStrategy strategy = SearchStrategy::Auto)
{
  const std::size_t n = data.size();
  if (k < 2 || k > n)
    throw InvalidParamError("shorth needs 2 <= k <= n");

  double best_r2 = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  std::size_t attaining = 0; // rows evaluated at exactly best_r2
  auto consider = [&](std::size_t i, double r2) {
    if (r2 < best_r2) {
      best_r2 = r2;
      best = i;
      attaining = 1;
    } else if (r2 == best_r2) {
      best = std::min(best, i);
      ++attaining;
    }
  };

  std::vector<double> scratch;
  bool done = false;
  if (detail::use_grid(data, strategy) && data.dim() <= detail::kMaxGridDim) {
    // Seed an upper bound from the rows nearest the coordinatewise median, then
    // prune every row with fewer than k neighbors inside the bound.
    const auto med = coordinatewise_median(data);
    std::vector<std::pair<double, std::size_t>> near(n);
    for (std::size_t i = 0; i < n; ++i)
      near[i] = { DatasetND::squared_distance(data.row(i), med), i };
    const std::size_t seeds = std::min<std::size_t>(16, n);
    std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(seeds), near.end());
    double bound = std::numeric_limits<double>::infinity();
    std::size_t bound_index = 0;
    for (std::size_t s = 0; s < seeds; ++s) {
      const std::size_t i = near[s].second;
      const double r2 = detail::kth_neighbor_sq_exhaustive(data, i, k, scratch);
      if (r2 < bound || (r2 == bound && i < bound_index)) {
        bound = r2;
        bound_index = i;
      }
    }
    const double h = std::sqrt(bound) * detail::kCellInflation;
    if (detail::CellGrid::feasible(data, h)) {
      const detail::CellGrid grid(data, h);
      best_r2 = bound;
      best = bound_index;
      for (std::size_t i = 0; i < n; ++i) {
        scratch.clear();
        std::size_t inside = 0;
        grid.for_each_neighbor(i, [&](std::size_t j) {
          const double d2 = DatasetND::squared_distance(data.row(i), data.row(j));
          scratch.push_back(d2);
          inside += d2 <= best_r2;
        });
        if (inside < k)
          continue; // k-th neighbor lies beyond the current best
        std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1), scratch.end());
        consider(i, scratch[k - 1]);
      }
      done = true;
    }
  }
  if (!done) {
    for (std::size_t i = 0; i < n; ++i)
      consider(i, detail::kth_neighbor_sq_exhaustive(data, i, k, scratch));
  }

  LocationEstimateND est;
  const auto c = data.row(best);
  est.center.assign(c.begin(), c.end());
  est.radius = detail::radius_covering(best_r2);
  est.count = data.count_within(est.center, est.radius);
  est.center_index = best;
  if (attaining > 1)
    est.flags.set(Flag::TieBroken);
  return est;
}

//! Product of the per-coordinate k-median intervals.
inline Cuboid median_cuboid(const DatasetND& data, std::size_t k)
{
  if (k < 1 || k > data.size())
    throw InvalidParamError("k-median needs 1 <= k <= n");
  Cuboid box;
  box.lo.resize(data.dim());
  box.hi.resize(data.dim());
  for (std::size_t j = 0; j < data.dim(); ++j) {
    auto col = data.column(j);
    std::sort(col.begin(), col.end());
    const auto iv = k_median_interval_sorted(col, k);
    box.lo[j] = iv.lo;
    box.hi[j] = iv.hi;
  }
  return box;
}

//! Shorth(k2) center projected onto the k1-median cuboid. The l2 projection
//! onto a box is the componentwise clamp.
inline LocationEstimateND hybrid_nd(const DatasetND& data,
                                    std::size_t k1,
                                    std::size_t k2,
                                    SearchStrategy strategy = SearchStrategy::Auto)
{
  const Cuboid box = median_cuboid(data, k1);
  LocationEstimateND est = shorth_efficient(data, k2, strategy);
  bool moved = false;
  for (std::size_t j = 0; j < data.dim(); ++j) {
    const double v = std::clamp(est.center[j], box.lo[j], box.hi[j]);
    moved |= v != est.center[j];
    est.center[j] = v;
  }
  if (moved) {
    est.flags.set(Flag::Clamped);
    est.center_index.reset();
    est.count = data.count_within(est.center, est.radius);
  }
  return est;
}

inline LocationEstimateND hybrid_nd(const DatasetND& data)
{
  return hybrid_nd(data, default_median_k(data.size()), default_shorth_k(data.size(), data.dim()));
}

} // namespace entest
