#pragma once

#include "dataset.hpp"
#include "error.hpp"
#include "population.hpp"
#include "rng.hpp"

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

// Seeded generators for the heteroscedastic location models used in the
// simulations. Observation i (1-based) comes from its own component P_i; all
// components share the center mu* (the origin unless given).

namespace entest {

enum class Example
{
  IidGaussian,          // N(mu, sigma^2 I)
  QuadraticVariance,    // P_i = N(mu, c^2 i^2 I)
  AlphaMixture,         // ceil(c_log ln n) points N(mu, sigma_good^2 I), rest N(mu, n^{2 alpha} I)
  ModifiedAlphaMixture, // iid from (c_log ln n / n) U[-1,1] + (1 - .) U[-n^alpha, n^alpha]
  HighExp,              // ceil(c_log ln n) points U[-3i, 3i], rest a two-level step density
  TwoScale,             // ceil(n p) points N(mu, sigma2^2 I), rest N(mu, sigma1^2 I)
  Elliptical,           // N(mu, diag(axes^2))
};

inline std::string to_string(Example e)
{
  switch (e) {
    case Example::IidGaussian: return "iid";
    case Example::QuadraticVariance: return "quadratic";
    case Example::AlphaMixture: return "alpha-mixture";
    case Example::ModifiedAlphaMixture: return "modified-alpha";
    case Example::HighExp: return "high-exp";
    case Example::TwoScale: return "two-scale";
    case Example::Elliptical: return "elliptical";
  }
  return "unknown";
}

inline Example example_from_string(const std::string& s)
{
  for (auto e : { Example::IidGaussian, Example::QuadraticVariance, Example::AlphaMixture,
                  Example::ModifiedAlphaMixture, Example::HighExp, Example::TwoScale,
                  Example::Elliptical })
    if (to_string(e) == s)
      return e;
  throw InvalidParamError("unknown example '" + s + "'");
}

struct GeneratorSpec
{
  Example example = Example::IidGaussian;
  std::size_t n = 1;
  std::size_t d = 1;
  std::uint64_t seed = 0;

  double sigma = 1.0;       // IidGaussian
  double c = 1.0;           // QuadraticVariance
  double alpha = 1.0;       // AlphaMixture, ModifiedAlphaMixture, HighExp
  double c_log = 10.0;      // count of low-noise points is ceil(c_log ln n)
  double sigma_good = 0.02; // AlphaMixture low-noise std dev
  double q_n_factor = 10.0; // HighExp outer support q_n = q_n_factor * n
  double sigma1 = 1.0;      // TwoScale
  double sigma2 = 1.0;
  double p = 0.5;
  std::vector<double> axes; // Elliptical, one per dimension
  std::vector<double> center; // empty means the origin
};

//! ceil(c_log ln n), clamped to [0, n].
inline std::size_t low_noise_count(double c_log, std::size_t n)
{
  const double m = std::ceil(c_log * std::log(static_cast<double>(n)));
  return std::min<std::size_t>(static_cast<std::size_t>(std::max(m, 0.0)), n);
}

//! Outer density h_n of the HighExp step density, from
//! 2 n^{-alpha} + 2 (q_n - 1) h_n = 1.
inline double high_exp_outer_density(std::size_t n, double alpha, double q_n)
{
  return (1.0 - 2.0 * std::pow(static_cast<double>(n), -alpha)) / (2.0 * (q_n - 1.0));
}

inline void validate(const GeneratorSpec& s)
{
  if (s.n < 1 || s.d < 1)
    throw InvalidParamError("generator needs n >= 1 and d >= 1");
  if (!s.center.empty() && s.center.size() != s.d)
    throw DimensionError("center dimension differs from d");
  const double n = static_cast<double>(s.n);
  switch (s.example) {
    case Example::IidGaussian:
      if (!(s.sigma > 0.0))
        throw InvalidParamError("sigma must be positive");
      break;
    case Example::QuadraticVariance:
      if (!(s.c > 0.0))
        throw InvalidParamError("c must be positive");
      break;
    case Example::AlphaMixture:
      if (!(s.alpha > 0.0) || !(s.sigma_good > 0.0) || !(s.c_log >= 0.0))
        throw InvalidParamError("alpha-mixture needs alpha > 0, sigma_good > 0, c_log >= 0");
      break;
    case Example::ModifiedAlphaMixture:
      if (s.d != 1)
        throw InvalidParamError("modified alpha-mixture is univariate");
      if (!(s.alpha > 0.0) || !(s.c_log >= 0.0))
        throw InvalidParamError("modified alpha-mixture needs alpha > 0, c_log >= 0");
      if (s.n > 1 && s.c_log * std::log(n) / n > 1.0)
        throw InvalidParamError("low-noise weight c_log ln n / n exceeds 1");
      break;
    case Example::HighExp: {
      if (s.d != 1)
        throw InvalidParamError("high-exp example is univariate");
      if (!(s.alpha > 0.0) || !(s.c_log >= 0.0))
        throw InvalidParamError("high-exp needs alpha > 0, c_log >= 0");
      const double q_n = s.q_n_factor * n;
      const double inner = std::pow(n, -s.alpha);
      if (!(q_n > 1.0))
        throw InvalidParamError("high-exp needs q_n > 1");
      const double h_n = high_exp_outer_density(s.n, s.alpha, q_n);
      if (h_n < 0.0 || h_n > inner / 2.0)
        throw InvalidParamError("high-exp outer density must satisfy 0 <= h_n <= n^-alpha / 2");
      break;
    }
    case Example::TwoScale:
      if (!(s.sigma1 > 0.0) || !(s.sigma2 > 0.0) || !(s.p > 0.0) || !(s.p <= 1.0))
        throw InvalidParamError("two-scale needs sigma1, sigma2 > 0 and p in (0, 1]");
      break;
    case Example::Elliptical:
      if (s.axes.size() != s.d)
        throw DimensionError("elliptical axes must have one entry per dimension");
      for (double a : s.axes)
        if (!(a > 0.0))
          throw InvalidParamError("elliptical axes must be positive");
      break;
  }
}

namespace detail {

inline ComponentDist gaussian_component(double sigma, std::size_t d)
{
  if (d == 1)
    return dist::Gaussian{ sigma };
  return dist::IsotropicGaussianND{ sigma, static_cast<int>(d) };
}

inline dist::PiecewiseUniform modified_alpha_density(std::size_t n, double alpha, double c_log)
{
  const double nn = static_cast<double>(n);
  const double w = n > 1 ? c_log * std::log(nn) / nn : 1.0;
  const double wide = std::pow(nn, alpha);
  if (wide <= 1.0)
    return { { 0.0, 1.0 }, { 0.5 } };
  return { { 0.0, 1.0, wide }, { w / 2.0 + (1.0 - w) / (2.0 * wide), (1.0 - w) / (2.0 * wide) } };
}

inline dist::PiecewiseUniform high_exp_density(std::size_t n, double alpha, double q_n)
{
  const double inner = std::pow(static_cast<double>(n), -alpha);
  return { { 0.0, 1.0, q_n }, { inner, high_exp_outer_density(n, alpha, q_n) } };
}

} // namespace detail

//! Population model sum_i P_i / n matching `generate(spec)`; the sample size
//! and seed of `spec` fix n, the seed is ignored.
inline MixtureModel example_model(const GeneratorSpec& s)
{
  validate(s);
  std::vector<double> center = s.center.empty() ? std::vector<double>(s.d, 0.0) : s.center;
  std::vector<WeightedComponent> comps;
  const auto n = static_cast<std::int64_t>(s.n);
  const double nn = static_cast<double>(s.n);
  switch (s.example) {
    case Example::IidGaussian:
      comps.push_back({ detail::gaussian_component(s.sigma, s.d), n });
      break;
    case Example::QuadraticVariance:
      for (std::size_t i = 1; i <= s.n; ++i)
        comps.push_back({ detail::gaussian_component(s.c * static_cast<double>(i), s.d), 1 });
      break;
    case Example::AlphaMixture: {
      const auto m = static_cast<std::int64_t>(low_noise_count(s.c_log, s.n));
      if (m > 0)
        comps.push_back({ detail::gaussian_component(s.sigma_good, s.d), m });
      if (n > m)
        comps.push_back({ detail::gaussian_component(std::pow(nn, s.alpha), s.d), n - m });
      break;
    }
    case Example::ModifiedAlphaMixture:
      comps.push_back({ detail::modified_alpha_density(s.n, s.alpha, s.c_log), n });
      break;
    case Example::HighExp: {
      const std::size_t m = low_noise_count(s.c_log, s.n);
      for (std::size_t i = 1; i <= m; ++i)
        comps.push_back({ dist::Uniform{ 3.0 * static_cast<double>(i) }, 1 });
      if (s.n > m)
        comps.push_back({ detail::high_exp_density(s.n, s.alpha, s.q_n_factor * nn),
                          static_cast<std::int64_t>(s.n - m) });
      break;
    }
    case Example::TwoScale: {
      const auto m = static_cast<std::int64_t>(std::min(s.n, static_cast<std::size_t>(std::ceil(nn * s.p))));
      comps.push_back({ detail::gaussian_component(s.sigma2, s.d), m });
      if (n > m)
        comps.push_back({ detail::gaussian_component(s.sigma1, s.d), n - m });
      break;
    }
    case Example::Elliptical:
      if (s.d == 1)
        comps.push_back({ dist::Gaussian{ s.axes[0] }, n });
      else
        comps.push_back({ dist::EllipticalGaussianND{ 1.0, s.axes }, n });
      break;
  }
  return MixtureModel(std::move(center), std::move(comps));
}

//! Draws the n x d sample. Row i - 1 holds observation i and uses its own
//! stream keyed by (seed, i), so the draw of a row never depends on others.
inline DatasetND generate(const GeneratorSpec& s)
{
  validate(s);
  const std::size_t n = s.n;
  const std::size_t d = s.d;
  const double nn = static_cast<double>(n);
  std::vector<double> out(n * d);

  const std::size_t m_low = low_noise_count(s.c_log, n);
  const double wide_sd = std::pow(nn, s.alpha);
  const std::size_t m_two = std::min(n, static_cast<std::size_t>(std::ceil(nn * s.p)));
  const double mod_weight = n > 1 ? s.c_log * std::log(nn) / nn : 1.0;
  const double q_n = s.q_n_factor * nn;
  const double inner_mass = 2.0 * std::pow(nn, -s.alpha);

  for (std::size_t row = 0; row < n; ++row) {
    const std::size_t i = row + 1;
    SplitMix64 rng(derive_key(s.seed, static_cast<std::uint64_t>(i)));
    double* x = out.data() + row * d;
    auto gaussian = [&](double sd) {
      for (std::size_t j = 0; j < d; ++j)
        x[j] = sd * rng.normal();
    };
    switch (s.example) {
      case Example::IidGaussian:
        gaussian(s.sigma);
        break;
      case Example::QuadraticVariance:
        gaussian(s.c * static_cast<double>(i));
        break;
      case Example::AlphaMixture:
        gaussian(i <= m_low ? s.sigma_good : wide_sd);
        break;
      case Example::ModifiedAlphaMixture: {
        const double half = rng.uniform() < mod_weight ? 1.0 : wide_sd;
        x[0] = rng.uniform(-half, half);
        break;
      }
      case Example::HighExp:
        if (i <= m_low) {
          const double half = 3.0 * static_cast<double>(i);
          x[0] = rng.uniform(-half, half);
        } else if (rng.uniform() < inner_mass) {
          x[0] = rng.uniform(-1.0, 1.0);
        } else {
          const double mag = rng.uniform(1.0, q_n);
          x[0] = rng.uniform() < 0.5 ? -mag : mag;
        }
        break;
      case Example::TwoScale:
        gaussian(i <= m_two ? s.sigma2 : s.sigma1);
        break;
      case Example::Elliptical:
        for (std::size_t j = 0; j < d; ++j)
          x[j] = s.axes[j] * rng.normal();
        break;
    }
    if (!s.center.empty())
      for (std::size_t j = 0; j < d; ++j)
        x[j] += s.center[j];
  }
  return DatasetND(std::move(out), d);
}

inline Dataset1D generate_1d(const GeneratorSpec& s)
{
  if (s.d != 1)
    throw DimensionError("generate_1d requires d == 1");
  auto data = generate(s);
  return Dataset1D(std::vector<double>(data.values().begin(), data.values().end()));
}

// -- JSON ---------------------------------------------------------------------

inline nlohmann::json to_json(const GeneratorSpec& s)
{
  nlohmann::json j{ { "example", to_string(s.example) }, { "n", s.n }, { "d", s.d }, { "seed", s.seed },
                    { "sigma", s.sigma }, { "c", s.c }, { "alpha", s.alpha }, { "c_log", s.c_log },
                    { "sigma_good", s.sigma_good }, { "q_n_factor", s.q_n_factor },
                    { "sigma1", s.sigma1 }, { "sigma2", s.sigma2 }, { "p", s.p } };
  if (!s.axes.empty())
    j["axes"] = s.axes;
  if (!s.center.empty())
    j["center"] = s.center;
  return j;
}

//! Missing fields keep their defaults.
inline GeneratorSpec generator_from_json(const nlohmann::json& j)
{
  GeneratorSpec s;
  s.example = example_from_string(j.at("example").get<std::string>());
  s.n = j.value("n", s.n);
  s.d = j.value("d", s.d);
  s.seed = j.value("seed", s.seed);
  s.sigma = j.value("sigma", s.sigma);
  s.c = j.value("c", s.c);
  s.alpha = j.value("alpha", s.alpha);
  s.c_log = j.value("c_log", s.c_log);
  s.sigma_good = j.value("sigma_good", s.sigma_good);
  s.q_n_factor = j.value("q_n_factor", s.q_n_factor);
  s.sigma1 = j.value("sigma1", s.sigma1);
  s.sigma2 = j.value("sigma2", s.sigma2);
  s.p = j.value("p", s.p);
  s.axes = j.value("axes", s.axes);
  s.center = j.value("center", s.center);
  return s;
}

} // namespace entest
