#pragma once

#include "dataset.hpp"
#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace entest {

//! k for the shorth with k = 5 d ln n, clamped to [2, n].
inline std::size_t default_shorth_k(std::size_t n, std::size_t d = 1)
{
  const double k = std::ceil(5.0 * static_cast<double>(d) * std::log(static_cast<double>(n)));
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 0.0)), 2, std::max<std::size_t>(n, 2));
}

//! k for the median screening interval, k = sqrt(n) ln n, clamped to [1, n].
inline std::size_t default_median_k(std::size_t n)
{
  const double nn = static_cast<double>(n);
  const double k = std::ceil(std::sqrt(nn) * std::log(nn));
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 0.0)), 1, n);
}

inline double sample_mean(std::span<const double> values)
{
  if (values.empty())
    throw EmptyDataError();
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

//! Median of already sorted values; even n averages the two middle values.
inline double sorted_median(std::span<const double> sorted)
{
  if (sorted.empty())
    throw EmptyDataError();
  const std::size_t n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

inline double sample_median(const Dataset1D& data)
{
  return sorted_median(data.sorted());
}

//! Center of the most populated closed window [x - r, x + r].
//!
//! Every maximal window can be slid until its left edge sits on a data point,
//! so a two-pointer sweep over left edges finds the exact maximum count. The
//! center is the midpoint of the extreme points inside the winning window.
//! Ties on count go to the window with the smallest point span, then to the
//! leftmost one (TIE_BROKEN).
inline LocationEstimate modal_interval_1d(const Dataset1D& data, double r)
{
  if (!(r > 0.0) || !std::isfinite(r))
    throw InvalidParamError("modal interval radius must be positive");
  const auto x = data.sorted();
  const std::size_t n = x.size();
  const double width = 2.0 * r;

  std::size_t best_i = 0, best_j = 0, best_count = 0;
  double best_span = 0.0;
  bool tie = false;
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    j = std::max(j, i);
    while (j + 1 < n && x[j + 1] - x[i] <= width)
      ++j;
    const std::size_t count = j - i + 1;
    const double span = x[j] - x[i];
    if (count > best_count || (count == best_count && span < best_span)) {
      best_i = i;
      best_j = j;
      best_count = count;
      best_span = span;
      tie = false;
    } else if (count == best_count && span == best_span) {
      tie = true;
    }
  }

  LocationEstimate est;
  est.center = 0.5 * (x[best_i] + x[best_j]);
  est.radius = r;
  // counted on the exact window; center +- r can round past its end points
  est.count = data.count_within(std::min(x[best_i], est.center - r), std::max(x[best_j], est.center + r));
  if (tie)
    est.flags.set(Flag::TieBroken);
  return est;
}

//! Center and half-width of the shortest window holding k consecutive order
//! statistics; ties go to the leftmost window.
inline LocationEstimate shorth_1d(const Dataset1D& data, std::size_t k)
{
  const std::size_t n = data.size();
  if (k < 2 || k > n)
    throw InvalidParamError("shorth needs 2 <= k <= n");
  const auto x = data.sorted();

  std::size_t best = 0;
  double best_span = x[k - 1] - x[0];
  bool tie = false;
  for (std::size_t i = 1; i + k <= n; ++i) {
    const double span = x[i + k - 1] - x[i];
    if (span < best_span) {
      best = i;
      best_span = span;
      tie = false;
    } else if (span == best_span) {
      tie = true;
    }
  }

  LocationEstimate est;
  est.center = 0.5 * (x[best] + x[best + k - 1]);
  est.radius = 0.5 * best_span;
  est.count = data.count_within(x[best], x[best + k - 1]);
  if (tie)
    est.flags.set(Flag::TieBroken);
  return est;
}

//! Interval between the order statistics of ranks n + 1 - h and h, where
//! h = ceil((n + k) / 2). These are inf{t : psi_n(t) >= k/n} and
//! sup{t : psi_n(t) <= -k/n} for the sign process psi_n.
inline MedianInterval k_median_interval_sorted(std::span<const double> sorted, std::size_t k)
{
  const std::size_t n = sorted.size();
  if (n == 0)
    throw EmptyDataError();
  if (k < 1 || k > n)
    throw InvalidParamError("k-median needs 1 <= k <= n");
  const std::size_t hi_index = (n + k + 1) / 2;
  const std::size_t lo_index = n + 1 - hi_index;
  return { sorted[lo_index - 1], sorted[hi_index - 1], lo_index, hi_index };
}

inline MedianInterval k_median_interval(const Dataset1D& data, std::size_t k)
{
  return k_median_interval_sorted(data.sorted(), k);
}

//! Shorth(k2) center clamped into the k1-median interval.
inline LocationEstimate hybrid_1d(const Dataset1D& data, std::size_t k1, std::size_t k2)
{
  const MedianInterval screen = k_median_interval(data, k1);
  const LocationEstimate shorth = shorth_1d(data, k2);

  LocationEstimate est = shorth;
  est.center = std::clamp(shorth.center, screen.lo, screen.hi);
  if (est.center != shorth.center) {
    est.flags.set(Flag::Clamped);
    // the shorth count no longer applies once the center moves
    est.count = data.count_within(est.center - est.radius, est.center + est.radius);
  }
  return est;
}

inline LocationEstimate hybrid_1d(const Dataset1D& data)
{
  return hybrid_1d(data, default_median_k(data.size()), default_shorth_k(data.size()));
}

struct LepskiOptions
{
  double C = 5.0;               // the grid targets k = C ln n points
  double tie_tol = 0.0;         // slack added to every pairwise comparison
  double threshold_factor = 4.0;
  double dilation = 2.0;
};

//! Modal interval estimate with its radius picked by Lepski's method.
//!
//! The radius grid r_j = r_min * dilation^j covers [r_min, 2 r_max), where
//! r_min and r_max are shorth half-widths for k = C ln n / 2 and 2 C ln n.
//! The smallest j whose estimate stays within
//! threshold_factor * n * r_i / (C ln n) of every coarser estimate i > j wins.
inline LocationEstimate lepski_modal_1d(const Dataset1D& data, const LepskiOptions& opt = {})
{
  const std::size_t n = data.size();
  if (n < 8)
    throw InvalidParamError("Lepski calibration needs n >= 8");
  if (!(opt.C > 0.0) || !(opt.tie_tol >= 0.0) || !(opt.threshold_factor > 0.0) ||
      !(opt.dilation > 1.0))
    throw InvalidParamError("invalid Lepski options");

  const double log_n = std::log(static_cast<double>(n));
  const auto k_of = [n](double v) {
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(v)), 2, n);
  };
  const std::size_t k_min = k_of(opt.C * log_n / 2.0);
  const std::size_t k_max = k_of(2.0 * opt.C * log_n);

  const LocationEstimate low = shorth_1d(data, k_min);
  const double r_min = low.radius;
  const double r_max = shorth_1d(data, k_max).radius;
  if (r_min == 0.0)
    return low;

  std::vector<double> radii;
  for (double r = r_min; r < 2.0 * r_max; r *= opt.dilation)
    radii.push_back(r);

  std::vector<LocationEstimate> fits;
  fits.reserve(radii.size());
  for (double r : radii)
    fits.push_back(modal_interval_1d(data, r));

  const double scale = opt.threshold_factor * static_cast<double>(n) / (opt.C * log_n);
  for (std::size_t j = 0; j < fits.size(); ++j) {
    bool consistent = true;
    for (std::size_t i = j + 1; i < fits.size() && consistent; ++i)
      consistent = std::abs(fits[i].center - fits[j].center) <= scale * radii[i] + opt.tie_tol;
    if (consistent)
      return fits[j];
  }

  LocationEstimate fallback = fits.back();
  fallback.flags.set(Flag::LepskiFallback);
  return fallback;
}

} // namespace entest
