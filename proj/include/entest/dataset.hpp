#pragma once

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace entest {

enum class Flag : std::uint8_t
{
  LepskiFallback = 1u << 0,
  TieBroken = 1u << 1,
  Clamped = 1u << 2,
  DegenerateFallback = 1u << 3,
};

//! Small set of diagnostic flags attached to estimates.
class Flags
{
public:
  constexpr Flags() = default;

  constexpr void set(Flag f) noexcept { bits_ |= static_cast<std::uint8_t>(f); }
  constexpr bool has(Flag f) const noexcept { return (bits_ & static_cast<std::uint8_t>(f)) != 0; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr bool operator==(const Flags&) const = default;

  std::vector<std::string> names() const
  {
    std::vector<std::string> out;
    if (has(Flag::LepskiFallback))
      out.emplace_back("LEPSKI_FALLBACK");
    if (has(Flag::TieBroken))
      out.emplace_back("TIE_BROKEN");
    if (has(Flag::Clamped))
      out.emplace_back("CLAMPED");
    if (has(Flag::DegenerateFallback))
      out.emplace_back("DEGENERATE_FALLBACK");
    return out;
  }

private:
  std::uint8_t bits_ = 0;
};

//! Univariate sample, stored sorted ascending. Immutable after construction.
class Dataset1D
{
public:
  explicit Dataset1D(std::vector<double> values)
    : values_(std::move(values))
  {
    if (values_.empty())
      throw EmptyDataError();
    for (double v : values_)
      if (!std::isfinite(v))
        throw InvalidParamError("dataset values must be finite");
    std::sort(values_.begin(), values_.end());
  }

  std::size_t size() const noexcept { return values_.size(); }
  //! i-th order statistic, 0-based.
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> sorted() const noexcept { return values_; }
  double min() const noexcept { return values_.front(); }
  double max() const noexcept { return values_.back(); }

  //! Number of observations in the closed interval [lo, hi].
  std::size_t count_within(double lo, double hi) const
  {
    if (hi < lo)
      return 0;
    const auto first = std::lower_bound(values_.begin(), values_.end(), lo);
    const auto last = std::upper_bound(first, values_.end(), hi);
    return static_cast<std::size_t>(last - first);
  }

private:
  std::vector<double> values_;
};

//! n x d sample in row-major storage. Row order is preserved: data-centered
//! estimators report row indices.
class DatasetND
{
public:
  DatasetND(std::vector<double> values, std::size_t dim)
    : values_(std::move(values))
    , dim_(dim)
  {
    if (dim_ == 0)
      throw InvalidParamError("dimension must be at least 1");
    if (values_.empty())
      throw EmptyDataError();
    if (values_.size() % dim_ != 0)
      throw InvalidParamError("data size is not a multiple of the dimension");
    for (double v : values_)
      if (!std::isfinite(v))
        throw InvalidParamError("dataset values must be finite");
  }

  static DatasetND from_rows(const std::vector<std::vector<double>>& rows)
  {
    if (rows.empty())
      throw EmptyDataError();
    const std::size_t d = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * d);
    for (const auto& r : rows) {
      if (r.size() != d)
        throw InvalidParamError("rows have differing lengths");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return DatasetND(std::move(flat), d);
  }

  std::size_t size() const noexcept { return values_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> row(std::size_t i) const noexcept
  {
    return { values_.data() + i * dim_, dim_ };
  }
  std::span<const double> values() const noexcept { return values_; }

  //! Values of coordinate j across all rows.
  std::vector<double> column(std::size_t j) const
  {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = values_[i * dim_ + j];
    return out;
  }

  //! Number of rows in the closed ball of radius r around `center`.
  std::size_t count_within(std::span<const double> center, double r) const
  {
    const double r2 = r * r;
    std::size_t count = 0;
    for (std::size_t i = 0; i < size(); ++i)
      count += squared_distance(row(i), center) <= r2;
    return count;
  }

  static double squared_distance(std::span<const double> a, std::span<const double> b) noexcept
  {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double diff = a[j] - b[j];
      s += diff * diff;
    }
    return s;
  }

private:
  std::vector<double> values_;
  std::size_t dim_;
};

struct LocationEstimate
{
  double center = 0.0;
  double radius = 0.0;
  std::size_t count = 0; // observations in [center - radius, center + radius]
  Flags flags;
};

//! Interval spanned by the centermost order statistics; ranks are 1-based.
struct MedianInterval
{
  double lo = 0.0;
  double hi = 0.0;
  std::size_t lo_index = 0;
  std::size_t hi_index = 0;

  double midpoint() const noexcept { return 0.5 * (lo + hi); }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

struct LocationEstimateND
{
  std::vector<double> center;
  double radius = 0.0;
  std::size_t count = 0; // rows within l2 distance `radius` of center
  std::optional<std::size_t> center_index;
  Flags flags;
};

//! Axis-aligned box [lo_1, hi_1] x ... x [lo_d, hi_d].
struct Cuboid
{
  std::vector<double> lo;
  std::vector<double> hi;

  bool contains(std::span<const double> x) const noexcept
  {
    for (std::size_t j = 0; j < lo.size(); ++j)
      if (x[j] < lo[j] || x[j] > hi[j])
        return false;
    return true;
  }

  //! l2 diameter.
  double diameter() const noexcept
  {
    double s = 0.0;
    for (std::size_t j = 0; j < lo.size(); ++j)
      s += (hi[j] - lo[j]) * (hi[j] - lo[j]);
    return std::sqrt(s);
  }
};

} // namespace entest
