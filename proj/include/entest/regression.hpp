#pragma once

#include "dataset.hpp"
#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace entest {

//! Observations (x_i, y_i) with x_i in R^d, stored row-major.
class RegressionDataset
{
public:
  RegressionDataset(std::vector<double> xs, std::vector<double> ys, std::size_t dim)
    : xs_(std::move(xs))
    , ys_(std::move(ys))
    , dim_(dim)
  {
    if (ys_.empty())
      throw EmptyDataError();
    if (dim_ == 0)
      throw InvalidParamError("regression dimension must be at least 1");
    if (xs_.size() != ys_.size() * dim_)
      throw InvalidParamError("design matrix shape does not match responses");
    for (double v : xs_)
      if (!std::isfinite(v))
        throw InvalidParamError("design values must be finite");
    for (double v : ys_)
      if (!std::isfinite(v))
        throw InvalidParamError("responses must be finite");
  }

  std::size_t size() const noexcept { return ys_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> x(std::size_t i) const noexcept { return { xs_.data() + i * dim_, dim_ }; }
  double y(std::size_t i) const noexcept { return ys_[i]; }
  std::span<const double> ys() const noexcept { return ys_; }

  double residual(std::size_t i, std::span<const double> beta) const noexcept
  {
    double fit = 0.0;
    const auto xi = x(i);
    for (std::size_t j = 0; j < dim_; ++j)
      fit += xi[j] * beta[j];
    return ys_[i] - fit;
  }

private:
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::size_t dim_;
};

struct RegressionEstimate
{
  std::vector<double> beta;
  std::size_t count = 0;
  std::vector<std::size_t> candidate_id; // hyperplane indices of the vertex
  Flags flags;
};

//! Round-off allowance on the band test: vertices are solved in floating point
//! and sit on band edges only up to solver error.
inline double band_slack(double y) noexcept
{
  return 1e-9 * (1.0 + std::abs(y));
}

//! #{i : |y_i - x_i^T beta| <= r}, closed, with band_slack(y_i) added to r.
inline std::size_t regression_objective(const RegressionDataset& data,
                                        std::span<const double> beta,
                                        double r)
{
  if (beta.size() != data.dim())
    throw DimensionError("beta dimension differs from the design");
  std::size_t count = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    count += std::abs(data.residual(i, beta)) <= r + band_slack(data.y(i));
  return count;
}

namespace detail {

//! Solves the d x d system a * x = b (row-major a) by Gaussian elimination with
//! partial pivoting. Returns nullopt when a pivot falls below
//! rel_tol * (largest row norm of a).
inline std::optional<std::vector<double>> solve_linear(std::vector<double> a,
                                                       std::vector<double> b,
                                                       double rel_tol = 1e-10)
{
  const std::size_t d = b.size();
  double scale = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j)
      s += a[i * d + j] * a[i * d + j];
    scale = std::max(scale, std::sqrt(s));
  }
  if (!(scale > 0.0))
    return std::nullopt;
  const double threshold = rel_tol * scale;

  for (std::size_t col = 0; col < d; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < d; ++i)
      if (std::abs(a[i * d + col]) > std::abs(a[piv * d + col]))
        piv = i;
    if (!(std::abs(a[piv * d + col]) >= threshold))
      return std::nullopt;
    if (piv != col) {
      for (std::size_t j = 0; j < d; ++j)
        std::swap(a[piv * d + j], a[col * d + j]);
      std::swap(b[piv], b[col]);
    }
    for (std::size_t i = col + 1; i < d; ++i) {
      const double f = a[i * d + col] / a[col * d + col];
      if (f == 0.0)
        continue;
      for (std::size_t j = col; j < d; ++j)
        a[i * d + j] -= f * a[col * d + j];
      b[i] -= f * b[col];
    }
  }
  std::vector<double> x(d);
  for (std::size_t i = d; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < d; ++j)
      s -= a[i * d + j] * x[j];
    x[i] = s / a[i * d + i];
  }
  return x;
}

inline double binomial(std::size_t n, std::size_t k)
{
  if (k > n)
    return 0.0;
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

} // namespace detail

inline constexpr double kMaxRegressionCandidates = 1e7;

//! Modal interval regression: a beta maximizing the number of responses
//! within r of the fitted hyperplane.
//!
//! The objective is piecewise constant on the arrangement of the 2n
//! hyperplanes x_i^T beta = y_i -/+ r and upper semicontinuous, so some
//! vertex of the arrangement attains the maximum. Hyperplane 2i is
//! x_i^T beta = y_i - r and 2i + 1 is x_i^T beta = y_i + r. All d-subsets are
//! enumerated in lexicographic order; the first maximal vertex wins.
inline RegressionEstimate modal_regression(const RegressionDataset& data, double r)
{
  if (!(r > 0.0) || !std::isfinite(r))
    throw InvalidParamError("regression radius must be positive");
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  const std::size_t planes = 2 * n;
  if (detail::binomial(planes, d) > kMaxRegressionCandidates)
    throw ProblemTooLargeError("C(2n, d) exceeds 1e7 candidate vertices");

  RegressionEstimate best;
  bool found = false;
  bool tie = false;
  if (d <= planes) {
    std::vector<std::size_t> subset(d);
    for (std::size_t j = 0; j < d; ++j)
      subset[j] = j;
    std::vector<double> a(d * d), b(d);
    while (true) {
      for (std::size_t row = 0; row < d; ++row) {
        const std::size_t h = subset[row];
        const std::size_t i = h / 2;
        const auto xi = data.x(i);
        std::copy(xi.begin(), xi.end(), a.begin() + static_cast<std::ptrdiff_t>(row * d));
        b[row] = h % 2 == 0 ? data.y(i) - r : data.y(i) + r;
      }
      if (auto beta = detail::solve_linear(a, b)) {
        const std::size_t count = regression_objective(data, *beta, r);
        if (!found || count > best.count) {
          best.beta = std::move(*beta);
          best.count = count;
          best.candidate_id = subset;
          found = true;
          tie = false;
        } else if (count == best.count) {
          tie = true;
        }
      }
      // next combination in lexicographic order
      std::size_t pos = d;
      while (pos > 0 && subset[pos - 1] == planes - d + pos - 1)
        --pos;
      if (pos == 0)
        break;
      ++subset[pos - 1];
      for (std::size_t j = pos; j < d; ++j)
        subset[j] = subset[j - 1] + 1;
    }
  }

  if (!found) {
    best.beta.assign(d, 0.0);
    best.count = regression_objective(data, best.beta, r);
    best.flags.set(Flag::DegenerateFallback);
  } else if (tie) {
    best.flags.set(Flag::TieBroken);
  }
  return best;
}

//! Ordinary least squares through the normal equations; nullopt when the
//! design is rank deficient.
inline std::optional<std::vector<double>> least_squares(const RegressionDataset& data)
{
  const std::size_t d = data.dim();
  std::vector<double> xtx(d * d, 0.0), xty(d, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto xi = data.x(i);
    for (std::size_t p = 0; p < d; ++p) {
      xty[p] += xi[p] * data.y(i);
      for (std::size_t q = 0; q < d; ++q)
        xtx[p * d + q] += xi[p] * xi[q];
    }
  }
  return detail::solve_linear(std::move(xtx), std::move(xty), 1e-12);
}

//! Band half-width heuristic for when no r is supplied: 1.345 times the
//! normalized MAD (1.4826 * median absolute deviation) of least-squares
//! residuals. Not a calibrated choice; see README.
inline double heuristic_band_radius(const RegressionDataset& data)
{
  const auto beta = least_squares(data).value_or(std::vector<double>(data.dim(), 0.0));
  std::vector<double> res(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    res[i] = data.residual(i, beta);
  auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
  };
  const double med = median_of(res);
  for (auto& v : res)
    v = std::abs(v - med);
  const double mad = 1.4826 * median_of(res);
  if (mad > 0.0)
    return 1.345 * mad;
  double ymax = 0.0;
  for (double y : data.ys())
    ymax = std::max(ymax, std::abs(y));
  return 1e-6 * (1.0 + ymax);
}

} // namespace entest
