#pragma once

#include "error.hpp"
#include "rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

// Population-level quantities of a symmetric unimodal mixture: interval and
// ball masses under the average distribution, quantile radii, and numeric
// checks of the structural properties those masses must satisfy.

namespace entest {

//! Standard normal CDF, Phi(x) = erfc(-x / sqrt 2) / 2.
//! libm's erfc is accurate to a few ulp over the whole real line, including
//! the far tails where 1 - erf would cancel.
inline double normal_cdf(double x) noexcept
{
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

//! P(a <= Z <= b) for Z ~ N(0, sigma^2), evaluated on the tail that avoids
//! cancellation.
inline double normal_interval_probability(double a, double b, double sigma) noexcept
{
  if (!(b > a))
    return 0.0;
  const double s = sigma * std::numbers::sqrt2;
  if (a >= 0.0)
    return 0.5 * (std::erfc(a / s) - std::erfc(b / s));
  if (b <= 0.0)
    return 0.5 * (std::erfc(-b / s) - std::erfc(-a / s));
  return 1.0 - 0.5 * std::erfc(b / s) - 0.5 * std::erfc(-a / s);
}

namespace dist {

struct Gaussian
{
  double sigma;
};

struct Uniform
{
  double halfwidth;
};

//! Symmetric step density. `breakpoints` b_0 = 0 < b_1 < ... < b_m describe
//! the half-line; density `densities[j]` holds on b_j < |x| <= b_{j+1}.
struct PiecewiseUniform
{
  std::vector<double> breakpoints;
  std::vector<double> densities;
};

struct IsotropicGaussianND
{
  double sigma;
  int dim;
};

//! N(0, diag((scale * axes)^2)).
struct EllipticalGaussianND
{
  double scale;
  std::vector<double> axes;
};

} // namespace dist

using ComponentDist = std::variant<dist::Gaussian,
                                   dist::Uniform,
                                   dist::PiecewiseUniform,
                                   dist::IsotropicGaussianND,
                                   dist::EllipticalGaussianND>;

inline int dimension(const ComponentDist& c)
{
  return std::visit(
    [](const auto& d) -> int {
      using T = std::decay_t<decltype(d)>;
      if constexpr (std::is_same_v<T, dist::IsotropicGaussianND>)
        return d.dim;
      else if constexpr (std::is_same_v<T, dist::EllipticalGaussianND>)
        return static_cast<int>(d.axes.size());
      else
        return 1;
    },
    c);
}

//! Throws InvalidParamError unless the component is a proper symmetric
//! unimodal density.
inline void validate(const ComponentDist& c)
{
  std::visit(
    [](const auto& d) {
      using T = std::decay_t<decltype(d)>;
      if constexpr (std::is_same_v<T, dist::Gaussian>) {
        if (!(d.sigma > 0.0) || !std::isfinite(d.sigma))
          throw InvalidParamError("gaussian sigma must be positive");
      } else if constexpr (std::is_same_v<T, dist::Uniform>) {
        if (!(d.halfwidth > 0.0) || !std::isfinite(d.halfwidth))
          throw InvalidParamError("uniform halfwidth must be positive");
      } else if constexpr (std::is_same_v<T, dist::PiecewiseUniform>) {
        const auto& b = d.breakpoints;
        const auto& p = d.densities;
        if (b.size() < 2 || p.size() + 1 != b.size())
          throw InvalidParamError("piecewise density needs m+1 breakpoints for m pieces");
        if (b.front() != 0.0)
          throw InvalidParamError("piecewise breakpoints must start at 0");
        double area = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
          if (!(b[j + 1] > b[j]) || !std::isfinite(b[j + 1]))
            throw InvalidParamError("piecewise breakpoints must be strictly ascending");
          if (!(p[j] >= 0.0) || !std::isfinite(p[j]))
            throw InvalidParamError("piecewise densities must be nonnegative");
          if (j > 0 && p[j] > p[j - 1])
            throw InvalidParamError("piecewise density must be nonincreasing in |x|");
          area += 2.0 * p[j] * (b[j + 1] - b[j]);
        }
        if (std::abs(area - 1.0) > 1e-9)
          throw InvalidParamError("piecewise density does not integrate to 1");
      } else if constexpr (std::is_same_v<T, dist::IsotropicGaussianND>) {
        if (!(d.sigma > 0.0) || d.dim < 1)
          throw InvalidParamError("isotropic gaussian needs sigma > 0 and dim >= 1");
      } else {
        if (!(d.scale > 0.0) || d.axes.empty())
          throw InvalidParamError("elliptical gaussian needs scale > 0 and axes");
        for (double a : d.axes)
          if (!(a > 0.0))
            throw InvalidParamError("elliptical gaussian axes must be positive");
      }
    },
    c);
}

//! P(a <= X <= b) for a univariate component centered at 0.
inline double component_interval_mass(const ComponentDist& c, double a, double b)
{
  if (!(b > a))
    return 0.0;
  return std::visit(
    [a, b](const auto& d) -> double {
      using T = std::decay_t<decltype(d)>;
      if constexpr (std::is_same_v<T, dist::Gaussian>) {
        return normal_interval_probability(a, b, d.sigma);
      } else if constexpr (std::is_same_v<T, dist::Uniform>) {
        const double lo = std::max(a, -d.halfwidth);
        const double hi = std::min(b, d.halfwidth);
        return hi > lo ? (hi - lo) / (2.0 * d.halfwidth) : 0.0;
      } else if constexpr (std::is_same_v<T, dist::PiecewiseUniform>) {
        auto overlap = [](double lo, double hi, double u, double v) {
          const double l = std::max(lo, u);
          const double h = std::min(hi, v);
          return h > l ? h - l : 0.0;
        };
        double mass = 0.0;
        for (std::size_t j = 0; j < d.densities.size(); ++j) {
          const double u = d.breakpoints[j];
          const double v = d.breakpoints[j + 1];
          mass += d.densities[j] * (overlap(a, b, u, v) + overlap(a, b, -v, -u));
        }
        return std::min(mass, 1.0);
      } else {
        throw DimensionError("interval mass requires a univariate component");
      }
    },
    c);
}

//! Largest scale parameter or support bound of a univariate component; seeds
//! the bisection bracket of radius_for_mass.
inline double component_scale(const ComponentDist& c)
{
  return std::visit(
    [](const auto& d) -> double {
      using T = std::decay_t<decltype(d)>;
      if constexpr (std::is_same_v<T, dist::Gaussian>)
        return d.sigma;
      else if constexpr (std::is_same_v<T, dist::Uniform>)
        return d.halfwidth;
      else if constexpr (std::is_same_v<T, dist::PiecewiseUniform>)
        return d.breakpoints.back();
      else if constexpr (std::is_same_v<T, dist::IsotropicGaussianND>)
        return d.sigma;
      else
        return d.scale * *std::max_element(d.axes.begin(), d.axes.end());
    },
    c);
}

inline bool has_bounded_support(const ComponentDist& c)
{
  return std::holds_alternative<dist::Uniform>(c) ||
         std::holds_alternative<dist::PiecewiseUniform>(c);
}

//! Draws one centered observation from `c` into `out` (size == dimension(c)).
inline void sample_component(const ComponentDist& c, SplitMix64& rng, std::span<double> out)
{
  std::visit(
    [&](const auto& d) {
      using T = std::decay_t<decltype(d)>;
      if constexpr (std::is_same_v<T, dist::Gaussian>) {
        out[0] = d.sigma * rng.normal();
      } else if constexpr (std::is_same_v<T, dist::Uniform>) {
        out[0] = rng.uniform(-d.halfwidth, d.halfwidth);
      } else if constexpr (std::is_same_v<T, dist::PiecewiseUniform>) {
        // pick a piece by its mass, then a uniform point with a random sign
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t j = 0;
        for (; j + 1 < d.densities.size(); ++j) {
          acc += 2.0 * d.densities[j] * (d.breakpoints[j + 1] - d.breakpoints[j]);
          if (u < acc)
            break;
        }
        const double mag = rng.uniform(d.breakpoints[j], d.breakpoints[j + 1]);
        out[0] = rng.uniform() < 0.5 ? -mag : mag;
      } else if constexpr (std::is_same_v<T, dist::IsotropicGaussianND>) {
        for (auto& v : out)
          v = d.sigma * rng.normal();
      } else {
        for (std::size_t j = 0; j < out.size(); ++j)
          out[j] = d.scale * d.axes[j] * rng.normal();
      }
    },
    c);
}

struct WeightedComponent
{
  ComponentDist dist;
  std::int64_t mult = 1;
};

//! The average distribution (1/n) sum_i P_i of n components sharing a center.
class MixtureModel
{
public:
  MixtureModel(std::vector<double> center, std::vector<WeightedComponent> components)
    : center_(std::move(center))
    , components_(std::move(components))
  {
    if (components_.empty())
      throw InvalidParamError("mixture needs at least one component");
    if (center_.empty())
      throw InvalidParamError("mixture center must have dimension >= 1");
    for (const auto& wc : components_) {
      validate(wc.dist);
      if (wc.mult < 1)
        throw InvalidParamError("component multiplicity must be positive");
      if (dimension(wc.dist) != dim())
        throw DimensionError("component dimension differs from center dimension");
      n_ += wc.mult;
    }
  }

  //! Univariate model centered at 0.
  explicit MixtureModel(std::vector<WeightedComponent> components)
    : MixtureModel(std::vector<double>{ 0.0 }, std::move(components))
  {}

  int dim() const noexcept { return static_cast<int>(center_.size()); }
  std::int64_t n() const noexcept { return n_; }
  const std::vector<double>& center() const noexcept { return center_; }
  const std::vector<WeightedComponent>& components() const noexcept { return components_; }

private:
  std::vector<double> center_;
  std::vector<WeightedComponent> components_;
  std::int64_t n_ = 0;
};

inline void require_univariate(const MixtureModel& model)
{
  if (model.dim() != 1)
    throw DimensionError("operation requires a univariate mixture");
}

//! R(f_{x,r}): mixture mass of the closed interval [x - r, x + r].
inline double interval_mass(const MixtureModel& model, double x, double r)
{
  require_univariate(model);
  if (!(r >= 0.0))
    throw InvalidParamError("radius must be nonnegative");
  const double offset = x - model.center()[0];
  double total = 0.0;
  for (const auto& wc : model.components())
    total += static_cast<double>(wc.mult) *
             component_interval_mass(wc.dist, offset - r, offset + r);
  return std::clamp(total / static_cast<double>(model.n()), 0.0, 1.0);
}

//! Smallest r with R(f_{center,r}) = target_mass, within `tol` in mass.
//! r_k is radius_for_mass(model, k / n, tol).
inline double radius_for_mass(const MixtureModel& model, double target_mass, double tol = 1e-12)
{
  require_univariate(model);
  if (!(target_mass > 0.0) || !(tol > 0.0))
    throw InvalidParamError("target mass and tolerance must be positive");
  const double c = model.center()[0];

  bool bounded = true;
  double scale = 0.0;
  double support = 0.0;
  for (const auto& wc : model.components()) {
    scale = std::max(scale, component_scale(wc.dist));
    if (has_bounded_support(wc.dist))
      support = std::max(support, component_scale(wc.dist));
    else
      bounded = false;
  }
  if (target_mass > 1.0 || (target_mass >= 1.0 && !bounded))
    throw UnreachableMassError("target mass exceeds the reachable mass of the mixture");

  double hi = std::max(10.0 * scale, support);
  while (interval_mass(model, c, hi) < target_mass) {
    hi *= 2.0;
    if (!std::isfinite(hi) || hi > 1e300)
      throw UnreachableMassError("target mass not reached before overflow");
  }
  double lo = 0.0;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    const double m = interval_mass(model, c, mid);
    if (std::abs(m - target_mass) <= tol)
      return mid;
    (m < target_mass ? lo : hi) = mid;
  }
  return hi;
}

struct MassEstimate
{
  double mass;
  double std_error;
};

//! Monte Carlo estimate of the mixture mass of the closed l2-ball B(center, r).
inline MassEstimate ball_mass_nd(const MixtureModel& model,
                                 std::span<const double> center,
                                 double r,
                                 std::int64_t mc_samples,
                                 std::uint64_t seed)
{
  const auto d = static_cast<std::size_t>(model.dim());
  if (center.size() != d)
    throw DimensionError("ball center dimension differs from the mixture");
  if (mc_samples < 10000)
    throw InvalidParamError("ball_mass_nd needs at least 1e4 samples");
  if (!(r >= 0.0))
    throw InvalidParamError("radius must be nonnegative");

  // cumulative multiplicities for component selection
  std::vector<std::int64_t> cum;
  cum.reserve(model.components().size());
  std::int64_t acc = 0;
  for (const auto& wc : model.components())
    cum.push_back(acc += wc.mult);

  std::vector<double> z(d);
  const double r2 = r * r;
  std::int64_t hits = 0;
  for (std::int64_t s = 0; s < mc_samples; ++s) {
    SplitMix64 rng(derive_key(seed, static_cast<std::uint64_t>(s)));
    const auto pick = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(acc));
    const auto it = std::upper_bound(cum.begin(), cum.end(), pick);
    const auto& comp = model.components()[static_cast<std::size_t>(it - cum.begin())];
    sample_component(comp.dist, rng, z);
    double dist2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = z[j] + model.center()[j] - center[j];
      dist2 += diff * diff;
    }
    hits += dist2 <= r2;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(mc_samples);
  return { p, std::sqrt(p * (1.0 - p) / static_cast<double>(mc_samples)) };
}

struct PropertyCheck
{
  std::string name;
  bool passed = true;
  std::string witness; // first violating configuration, empty when passed
};

struct PropertyReport
{
  std::vector<PropertyCheck> checks;

  bool all_passed() const
  {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
};

//! Numerically verifies the monotonicity properties of interval masses on a
//! radius grid:
//!   offset_monotone:   R(f_{x,r}) nonincreasing in |x - center|
//!   radius_monotone:   R(f_{x,r}) nondecreasing in r
//!   mass_per_radius:   R*_r / r decreasing in r
//!   offset_bound:      R(f_{r',r}) < (r / r') R*_{r'} for r < r'
//! Inequalities are tested up to `tol` in mass: a density that is flat near
//! the center (uniform components) attains equality in the last two.
inline PropertyReport check_lemma1_properties(const MixtureModel& model,
                                              std::span<const double> radius_grid,
                                              double tol = 1e-12)
{
  require_univariate(model);
  if (radius_grid.size() < 2)
    throw GridTooSmallError("property checks need at least two radii");
  for (std::size_t i = 0; i < radius_grid.size(); ++i) {
    if (!(radius_grid[i] > 0.0))
      throw InvalidParamError("radius grid must be positive");
    if (i > 0 && !(radius_grid[i] > radius_grid[i - 1]))
      throw InvalidParamError("radius grid must be strictly ascending");
  }
  const double c = model.center()[0];
  auto fmt = [](auto&&... parts) {
    std::ostringstream os;
    os.precision(17);
    (os << ... << parts);
    return os.str();
  };

  PropertyCheck offset{ "offset_monotone", true, {} };
  PropertyCheck radius{ "radius_monotone", true, {} };
  PropertyCheck per_radius{ "mass_per_radius", true, {} };
  PropertyCheck bound{ "offset_bound", true, {} };

  std::vector<double> offsets{ 0.0 };
  offsets.insert(offsets.end(), radius_grid.begin(), radius_grid.end());
  offsets.push_back(2.0 * radius_grid.back());

  for (double r : radius_grid) {
    double prev = interval_mass(model, c, r);
    for (std::size_t j = 1; j < offsets.size() && offset.passed; ++j) {
      // both sides of the center
      for (double sign : { 1.0, -1.0 }) {
        const double m = interval_mass(model, c + sign * offsets[j], r);
        if (m > prev + tol && offset.passed) {
          offset.passed = false;
          offset.witness = fmt("r=", r, " |x|=", offsets[j], " mass=", m, " > ", prev);
        }
      }
      prev = interval_mass(model, c + offsets[j], r);
    }
  }

  for (double x : offsets) {
    double prev = 0.0;
    for (double r : radius_grid) {
      const double m = interval_mass(model, c + x, r);
      if (m + tol < prev && radius.passed) {
        radius.passed = false;
        radius.witness = fmt("x=", x, " r=", r, " mass=", m, " < ", prev);
      }
      prev = m;
    }
  }

  for (std::size_t i = 0; i < radius_grid.size(); ++i) {
    for (std::size_t j = i + 1; j < radius_grid.size(); ++j) {
      const double r = radius_grid[i];
      const double rp = radius_grid[j];
      const double star_r = interval_mass(model, c, r);
      const double star_rp = interval_mass(model, c, rp);
      if (star_r / r + tol / r <= star_rp / rp && per_radius.passed) {
        per_radius.passed = false;
        per_radius.witness = fmt("r=", r, " r'=", rp, " R*_r/r=", star_r / r,
                                 " R*_r'/r'=", star_rp / rp);
      }
      const double lhs = interval_mass(model, c + rp, r);
      const double rhs = (r / rp) * star_rp;
      if (lhs > rhs + tol && bound.passed) {
        bound.passed = false;
        bound.witness = fmt("r=", r, " r'=", rp, " R(f_{r',r})=", lhs, " bound=", rhs);
      }
    }
  }

  return { { offset, radius, per_radius, bound } };
}

// -- JSON ---------------------------------------------------------------------

inline nlohmann::json component_to_json(const WeightedComponent& wc)
{
  nlohmann::json j = std::visit(
    [](const auto& d) -> nlohmann::json {
      using T = std::decay_t<decltype(d)>;
      if constexpr (std::is_same_v<T, dist::Gaussian>)
        return { { "kind", "gaussian" }, { "sigma", d.sigma } };
      else if constexpr (std::is_same_v<T, dist::Uniform>)
        return { { "kind", "uniform" }, { "halfwidth", d.halfwidth } };
      else if constexpr (std::is_same_v<T, dist::PiecewiseUniform>)
        return { { "kind", "piecewise_uniform" },
                 { "breakpoints", d.breakpoints },
                 { "densities", d.densities } };
      else if constexpr (std::is_same_v<T, dist::IsotropicGaussianND>)
        return { { "kind", "isotropic_gaussian_nd" }, { "sigma", d.sigma }, { "dim", d.dim } };
      else
        return { { "kind", "elliptical_gaussian_nd" }, { "scale", d.scale }, { "axes", d.axes } };
    },
    wc.dist);
  j["mult"] = wc.mult;
  return j;
}

inline WeightedComponent component_from_json(const nlohmann::json& j)
{
  const auto kind = j.at("kind").get<std::string>();
  WeightedComponent wc{ dist::Gaussian{ 1.0 }, j.value("mult", std::int64_t{ 1 }) };
  if (kind == "gaussian")
    wc.dist = dist::Gaussian{ j.at("sigma").get<double>() };
  else if (kind == "uniform")
    wc.dist = dist::Uniform{ j.at("halfwidth").get<double>() };
  else if (kind == "piecewise_uniform")
    wc.dist = dist::PiecewiseUniform{ j.at("breakpoints").get<std::vector<double>>(),
                                      j.at("densities").get<std::vector<double>>() };
  else if (kind == "isotropic_gaussian_nd")
    wc.dist = dist::IsotropicGaussianND{ j.at("sigma").get<double>(), j.at("dim").get<int>() };
  else if (kind == "elliptical_gaussian_nd")
    wc.dist = dist::EllipticalGaussianND{ j.value("scale", 1.0),
                                          j.at("axes").get<std::vector<double>>() };
  else
    throw InvalidParamError("unknown component kind '" + kind + "'");
  return wc;
}

inline nlohmann::json to_json(const MixtureModel& model)
{
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& wc : model.components())
    comps.push_back(component_to_json(wc));
  return { { "center", model.center() }, { "components", comps } };
}

//! Parses {"center":[...], "components":[{"kind":"gaussian","sigma":1,"mult":3}, ...]}.
//! A missing center defaults to the origin of the component dimension.
inline MixtureModel mixture_from_json(const nlohmann::json& j)
{
  std::vector<WeightedComponent> comps;
  for (const auto& c : j.at("components"))
    comps.push_back(component_from_json(c));
  if (comps.empty())
    throw InvalidParamError("mixture needs at least one component");
  std::vector<double> center = j.contains("center")
                                 ? j.at("center").get<std::vector<double>>()
                                 : std::vector<double>(static_cast<std::size_t>(dimension(comps[0].dist)), 0.0);
  return MixtureModel(std::move(center), std::move(comps));
}

} // namespace entest
