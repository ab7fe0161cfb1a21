#pragma once

#include "dataset.hpp"
#include "error.hpp"
#include "estimators_1d.hpp"
#include "estimators_nd.hpp"
#include "rng.hpp"
#include "simgen.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace entest {

//! One estimator column of a sweep. Unset parameters take the size-dependent
//! defaults: modal r = 1 (sqrt(d) for d > 1), shorth k = 5 d ln n,
//! hybrid k1 = sqrt(n) ln n and k2 = 5 d ln n, kmedian k = sqrt(n) ln n.
struct EstimatorConfig
{
  std::string name; // mean, median, modal, shorth, kmedian, hybrid, lepski
  std::optional<double> r{};
  std::optional<std::size_t> k{};
  std::optional<std::size_t> k1{};
  std::optional<std::size_t> k2{};
  std::optional<double> C{};
  std::string label{}; // column name in results; defaults to `name`

  const std::string& key() const { return label.empty() ? name : label; }
};

inline bool is_known_estimator(const std::string& name)
{
  static const std::set<std::string> names{ "mean", "median", "modal", "shorth", "kmedian", "hybrid", "lepski" };
  return names.count(name) > 0;
}

//! Runs `cfg` on one dataset and returns the point estimate. `sorted` must
//! hold the same data as `data` when d == 1.
inline std::vector<double> estimate_point(const EstimatorConfig& cfg,
                                          const DatasetND& data,
                                          const Dataset1D* sorted)
{
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  const bool uni = d == 1 && sorted != nullptr;
  const std::string& e = cfg.name;
  if (e == "mean")
    return uni ? std::vector<double>{ sample_mean(sorted->sorted()) } : sample_mean_nd(data);
  if (e == "median")
    return uni ? std::vector<double>{ sample_median(*sorted) } : coordinatewise_median(data);
  if (e == "modal") {
    const double r = cfg.r.value_or(d == 1 ? 1.0 : std::sqrt(static_cast<double>(d)));
    if (uni)
      return { modal_interval_1d(*sorted, r).center };
    return modal_ball_efficient(data, r).center;
  }
  if (e == "shorth") {
    const std::size_t k = cfg.k.value_or(default_shorth_k(n, d));
    if (uni)
      return { shorth_1d(*sorted, k).center };
    return shorth_efficient(data, k).center;
  }
  if (e == "kmedian") {
    const std::size_t k = cfg.k.value_or(default_median_k(n));
    if (uni)
      return { k_median_interval(*sorted, k).midpoint() };
    const Cuboid box = median_cuboid(data, k);
    std::vector<double> mid(d);
    for (std::size_t j = 0; j < d; ++j)
      mid[j] = 0.5 * (box.lo[j] + box.hi[j]);
    return mid;
  }
  if (e == "hybrid") {
    const std::size_t k1 = cfg.k1.value_or(default_median_k(n));
    const std::size_t k2 = cfg.k2.value_or(default_shorth_k(n, d));
    if (uni)
      return { hybrid_1d(*sorted, k1, k2).center };
    return hybrid_nd(data, k1, k2).center;
  }
  if (e == "lepski") {
    if (!uni)
      throw DimensionError("lepski estimator is univariate");
    LepskiOptions opt;
    if (cfg.C)
      opt.C = *cfg.C;
    return { lepski_modal_1d(*sorted, opt).center };
  }
  throw InvalidParamError("unknown estimator '" + e + "'");
}

struct SweepSpec
{
  GeneratorSpec generator; // n and seed are overwritten per cell
  std::vector<std::size_t> n_grid;
  std::size_t trials = 200;
  std::vector<EstimatorConfig> estimators;
  std::uint64_t master_seed = 0;
};

inline void validate(const SweepSpec& s)
{
  if (s.n_grid.empty())
    throw InvalidParamError("n grid is empty");
  if (s.estimators.empty())
    throw InvalidParamError("estimator list is empty");
  if (s.trials < 1)
    throw InvalidParamError("trials must be at least 1");
  for (std::size_t i = 0; i < s.n_grid.size(); ++i) {
    if (s.n_grid[i] < 1)
      throw InvalidParamError("n grid values must be positive");
    if (i > 0 && s.n_grid[i] <= s.n_grid[i - 1])
      throw InvalidParamError("n grid must be strictly ascending");
  }
  std::set<std::string> keys;
  for (const auto& e : s.estimators) {
    if (!is_known_estimator(e.name))
      throw InvalidParamError("unknown estimator '" + e.name + "'");
    if (!keys.insert(e.key()).second)
      throw InvalidParamError("duplicate estimator '" + e.key() + "'");
  }
}

struct SweepRow
{
  std::string example;
  std::size_t d = 1;
  std::size_t n = 0;
  std::string estimator;
  std::size_t T = 0;
  double avg_error = 0.0;
  double std_error = 0.0; // standard error of avg_error
  double p95_error = 0.0;
  double elapsed_ms = 0.0;
};

struct SkippedCell
{
  std::size_t n = 0;
  std::string estimator;
  std::string reason;
};

struct SweepResult
{
  std::vector<SweepRow> rows; // ordered by n, then estimator list order
  std::vector<SkippedCell> skipped;

  const SweepRow* find(std::size_t n, const std::string& estimator) const
  {
    for (const auto& row : rows)
      if (row.n == n && row.estimator == estimator)
        return &row;
    return nullptr;
  }
};

//! Empirical quantile with linear interpolation between order statistics.
inline double quantile_sorted(std::span<const double> sorted, double q)
{
  if (sorted.empty())
    throw EmptyDataError();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

//! Trial seed for (master, n, t).
inline std::uint64_t trial_seed(std::uint64_t master, std::size_t n, std::size_t t)
{
  return derive_key(master, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(t));
}

//! Monte Carlo sweep. Each (n, trial) pair is an independent work item whose
//! errors land in a preassigned slot, so the result does not depend on
//! `threads` (0 picks the hardware concurrency). Estimators that reject
//! their parameters at some n are reported in `skipped`.
inline SweepResult run_sweep(const SweepSpec& spec, unsigned threads = 1)
{
  validate(spec);
  for (std::size_t n : spec.n_grid) {
    GeneratorSpec g = spec.generator;
    g.n = n;
    validate(g);
  }
  const std::size_t n_cells = spec.n_grid.size();
  const std::size_t n_est = spec.estimators.size();
  const std::size_t T = spec.trials;

  std::vector<double> errors(n_cells * n_est * T, 0.0);
  std::vector<double> times(n_cells * n_est * T, 0.0);
  std::vector<std::string> skip_reason(n_cells * n_est);
  std::vector<std::uint8_t> skipped(n_cells * n_est * T, 0);
  std::mutex skip_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&](std::size_t item) {
    const std::size_t c = item / T;
    const std::size_t t = item % T;
    GeneratorSpec g = spec.generator;
    g.n = spec.n_grid[c];
    g.seed = trial_seed(spec.master_seed, g.n, t);
    const DatasetND data = generate(g);
    std::optional<Dataset1D> sorted;
    if (data.dim() == 1)
      sorted.emplace(std::vector<double>(data.values().begin(), data.values().end()));
    const std::vector<double> truth = g.center.empty() ? std::vector<double>(g.d, 0.0) : g.center;

    for (std::size_t e = 0; e < n_est; ++e) {
      const std::size_t slot = (c * n_est + e) * T + t;
      const auto start = std::chrono::steady_clock::now();
      try {
        const auto est = estimate_point(spec.estimators[e], data, sorted ? &*sorted : nullptr);
        errors[slot] = std::sqrt(DatasetND::squared_distance(est, truth));
      } catch (const InvalidParamError& ex) {
        skipped[slot] = 1;
        std::lock_guard lock(skip_mutex);
        if (skip_reason[c * n_est + e].empty())
          skip_reason[c * n_est + e] = ex.what();
      }
      times[slot] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
  };

  const std::size_t items = n_cells * T;
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, items));
  if (threads <= 1) {
    for (std::size_t i = 0; i < items; ++i)
      work(i);
  } else {
    std::atomic<std::size_t> next{ 0 };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < items; i = next++) {
          try {
            work(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure)
              failure = std::current_exception();
          }
        }
      });
    for (auto& th : pool)
      th.join();
    if (failure)
      std::rethrow_exception(failure);
  }

  SweepResult result;
  const std::string example = to_string(spec.generator.example);
  for (std::size_t c = 0; c < n_cells; ++c) {
    for (std::size_t e = 0; e < n_est; ++e) {
      const std::size_t base = (c * n_est + e) * T;
      const std::string& key = spec.estimators[e].key();
      if (std::any_of(skipped.begin() + static_cast<std::ptrdiff_t>(base),
                      skipped.begin() + static_cast<std::ptrdiff_t>(base + T), [](auto s) { return s != 0; })) {
        result.skipped.push_back({ spec.n_grid[c], key, skip_reason[c * n_est + e] });
        continue;
      }
      std::vector<double> errs(errors.begin() + static_cast<std::ptrdiff_t>(base),
                               errors.begin() + static_cast<std::ptrdiff_t>(base + T));
      SweepRow row;
      row.example = example;
      row.d = spec.generator.d;
      row.n = spec.n_grid[c];
      row.estimator = key;
      row.T = T;
      double sum = 0.0;
      for (double v : errs)
        sum += v;
      row.avg_error = sum / static_cast<double>(T);
      if (T > 1) {
        double ss = 0.0;
        for (double v : errs)
          ss += (v - row.avg_error) * (v - row.avg_error);
        row.std_error = std::sqrt(ss / static_cast<double>(T - 1) / static_cast<double>(T));
      }
      std::sort(errs.begin(), errs.end());
      row.p95_error = quantile_sorted(errs, 0.95);
      for (std::size_t t = 0; t < T; ++t)
        row.elapsed_ms += times[base + t];
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

struct LogLogFit
{
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

//! Least squares fit of ln(avg_error) on ln(n) over the rows of `estimator`
//! with positive error.
inline LogLogFit fit_loglog_slope(const SweepResult& result, const std::string& estimator)
{
  std::vector<double> xs, ys;
  for (const auto& row : result.rows)
    if (row.estimator == estimator && row.avg_error > 0.0) {
      xs.push_back(std::log(static_cast<double>(row.n)));
      ys.push_back(std::log(row.avg_error));
    }
  if (xs.size() < 3)
    throw InsufficientDataError("log-log fit needs at least 3 grid points");
  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0))
    throw InsufficientDataError("log-log fit needs distinct n values");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = xs.size();
  return fit;
}

inline constexpr const char* kSweepCsvHeader = "example,d,n,estimator,T,avg_error,std_error,p95_error,elapsed_ms";

//! Writes the result table. Wall times vary run to run, so elapsed_ms is
//! written as 0 unless `timing` is set; the file is then byte-stable.
inline void write_csv(const SweepResult& result, std::ostream& out, bool timing = false)
{
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  out << kSweepCsvHeader << '\n';
  for (const auto& row : result.rows)
    out << row.example << ',' << row.d << ',' << row.n << ',' << row.estimator << ',' << row.T << ','
        << num(row.avg_error) << ',' << num(row.std_error) << ',' << num(row.p95_error) << ','
        << (timing ? num(row.elapsed_ms) : std::string("0")) << '\n';
}

// -- JSON ---------------------------------------------------------------------

inline EstimatorConfig estimator_from_json(const nlohmann::json& j)
{
  EstimatorConfig e;
  if (j.is_string()) {
    e.name = j.get<std::string>();
    return e;
  }
  e.name = j.at("name").get<std::string>();
  if (j.contains("r"))
    e.r = j["r"].get<double>();
  if (j.contains("k"))
    e.k = j["k"].get<std::size_t>();
  if (j.contains("k1"))
    e.k1 = j["k1"].get<std::size_t>();
  if (j.contains("k2"))
    e.k2 = j["k2"].get<std::size_t>();
  if (j.contains("C"))
    e.C = j["C"].get<double>();
  e.label = j.value("label", std::string());
  return e;
}

//! {"generator": {...}, "n_grid": [...], "trials": T,
//!  "estimators": ["mean", {"name": "modal", "r": 0.5}], "master_seed": s}
inline SweepSpec sweep_from_json(const nlohmann::json& j)
{
  SweepSpec s;
  s.generator = generator_from_json(j.at("generator"));
  s.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
  s.trials = j.value("trials", s.trials);
  for (const auto& e : j.at("estimators"))
    s.estimators.push_back(estimator_from_json(e));
  s.master_seed = j.value("master_seed", s.master_seed);
  return s;
}

} // namespace entest
