#include <entest/population.hpp>
#include <entest/simgen.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace entest;

namespace {

MixtureModel single(ComponentDist c)
{
  return MixtureModel({ { std::move(c), 1 } });
}

// Standard normal CDF by the series erf(x) = 2/sqrt(pi) sum (-1)^n x^(2n+1) / (n! (2n+1)),
// accurate for |x| <= 4 in long double.
double series_phi(double x)
{
  const long double z = x / std::sqrt(2.0L);
  long double term = z, sum = z;
  for (int n = 1; n < 200; ++n) {
    term *= -z * z / n;
    sum += term / (2 * n + 1);
  }
  return static_cast<double>(0.5L + sum / std::sqrt(3.14159265358979323846264338327950288L));
}

} // namespace

TEST(IntervalMass, ZeroWidthIsZero)
{
  EXPECT_EQ(interval_mass(single(dist::Gaussian{ 1.0 }), 0.0, 0.0), 0.0);
}

TEST(IntervalMass, UniformOverlap)
{
  EXPECT_NEAR(interval_mass(single(dist::Uniform{ 1.0 }), 0.5, 1.0), 0.75, 1e-15);
}

TEST(IntervalMass, GaussianOneSigma)
{
  EXPECT_NEAR(interval_mass(single(dist::Gaussian{ 1.0 }), 0.0, 1.0), 0.6826894921370859, 1e-12);
  EXPECT_NEAR(interval_mass(single(dist::Gaussian{ 1.0 }), 0.0, 1.0), 2.0 * series_phi(1.0) - 1.0, 1e-12);
}

TEST(IntervalMass, MatchesSeriesOracleOffCenter)
{
  const auto m = single(dist::Gaussian{ 1.5 });
  for (double x : { -2.0, -0.3, 0.0, 0.7, 1.9 })
    for (double r : { 0.1, 0.5, 2.0 }) {
      const double expect = series_phi((x + r) / 1.5) - series_phi((x - r) / 1.5);
      EXPECT_NEAR(interval_mass(m, x, r), expect, 1e-12) << x << " " << r;
    }
}

TEST(IntervalMass, FarTailKeepsRelativeAccuracy)
{
  // mass of [9, 11] under N(0,1); computed on the upper tail to avoid cancellation
  const double m = interval_mass(single(dist::Gaussian{ 1.0 }), 10.0, 1.0);
  EXPECT_NEAR(m / 1.1285884040431811e-19, 1.0, 1e-9);
}

TEST(IntervalMass, RejectsMultivariate)
{
  const MixtureModel m({ 0.0, 0.0 }, { { dist::IsotropicGaussianND{ 1.0, 2 }, 1 } });
  EXPECT_THROW(interval_mass(m, 0.0, 1.0), DimensionError);
}

TEST(IntervalMass, SymmetricAboutCenter)
{
  const MixtureModel m({ 3.0 }, { { dist::Gaussian{ 1.0 }, 2 }, { dist::Uniform{ 2.0 }, 1 },
                                  { dist::PiecewiseUniform{ { 0.0, 1.0, 3.0 }, { 0.3, 0.1 } }, 1 } });
  for (double x : { -1.0, 0.5, 2.0, 2.9, 4.4 })
    for (double r : { 0.2, 1.0, 3.5 })
      EXPECT_NEAR(interval_mass(m, x, r), interval_mass(m, 6.0 - x, r), 1e-12);
}

TEST(IntervalMass, MonotoneInRadiusAndOffset)
{
  const MixtureModel m({ { dist::Gaussian{ 0.5 }, 1 }, { dist::Uniform{ 3.0 }, 2 } });
  for (double x : { 0.0, 0.4, 1.3 }) {
    double prev = 0.0;
    for (double r = 0.05; r < 6.0; r *= 1.3) {
      const double v = interval_mass(m, x, r);
      EXPECT_GE(v, prev - 1e-15);
      prev = v;
    }
  }
  for (double r : { 0.3, 1.0 }) {
    double prev = 1.0;
    for (double x = 0.0; x < 6.0; x += 0.25) {
      const double v = interval_mass(m, x, r);
      EXPECT_LE(v, prev + 1e-15);
      prev = v;
    }
  }
}

TEST(IntervalMass, AgreesWithMonteCarlo)
{
  const MixtureModel m({ { dist::Gaussian{ 1.0 }, 3 }, { dist::Gaussian{ 4.0 }, 1 } });
  const std::int64_t samples = 1000000;
  SplitMix64 rng(99);
  std::int64_t hits = 0;
  for (std::int64_t s = 0; s < samples; ++s) {
    const double sd = rng.uniform() < 0.75 ? 1.0 : 4.0;
    const double v = sd * rng.normal();
    hits += v >= 0.2 && v <= 1.8;
  }
  const double p = interval_mass(m, 1.0, 0.8);
  const double se = std::sqrt(p * (1 - p) / samples);
  EXPECT_NEAR(static_cast<double>(hits) / samples, p, 4 * se);
}

TEST(RadiusForMass, GaussianQuartile)
{
  EXPECT_NEAR(radius_for_mass(single(dist::Gaussian{ 2.0 }), 0.5, 1e-10), 1.3489795003921634, 1e-7);
}

TEST(RadiusForMass, UniformIsLinear)
{
  EXPECT_NEAR(radius_for_mass(single(dist::Uniform{ 1.0 }), 0.25), 0.25, 1e-12);
}

TEST(RadiusForMass, RoundTripAndMonotone)
{
  const MixtureModel m({ { dist::Gaussian{ 0.3 }, 5 }, { dist::Uniform{ 10.0 }, 20 } });
  double prev = 0.0;
  for (double t = 0.05; t < 1.0; t += 0.05) {
    const double r = radius_for_mass(m, t, 1e-12);
    EXPECT_NEAR(interval_mass(m, 0.0, r), t, 1e-12);
    EXPECT_GE(r, prev);
    prev = r;
  }
}

TEST(RadiusForMass, UnreachableTarget)
{
  EXPECT_THROW(radius_for_mass(single(dist::Gaussian{ 1.0 }), 1.0), UnreachableMassError);
  EXPECT_THROW(radius_for_mass(single(dist::Uniform{ 1.0 }), 1.5), UnreachableMassError);
}

TEST(RadiusForMass, AlphaMixtureRadiusStaysBounded)
{
  GeneratorSpec g;
  g.example = Example::AlphaMixture;
  g.alpha = 1.3;
  g.c_log = 10.0;
  for (std::size_t n : { std::size_t{ 1 } << 12, std::size_t{ 1 } << 14, std::size_t{ 1 } << 16 }) {
    g.n = n;
    const double k = std::ceil(std::log(static_cast<double>(n)));
    EXPECT_LE(radius_for_mass(example_model(g), k / static_cast<double>(n)), 3.0) << n;
  }
}

TEST(BallMass, TotalMass)
{
  const MixtureModel m({ 0.0, 0.0, 0.0 }, { { dist::IsotropicGaussianND{ 1.0, 3 }, 1 } });
  const std::vector<double> c{ 0.0, 0.0, 0.0 };
  const auto est = ball_mass_nd(m, c, 100.0, 10000, 1);
  EXPECT_EQ(est.mass, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(BallMass, ChiSquareTwoDims)
{
  const MixtureModel m({ 0.0, 0.0 }, { { dist::IsotropicGaussianND{ 1.0, 2 }, 1 } });
  const std::vector<double> c{ 0.0, 0.0 };
  const auto est = ball_mass_nd(m, c, 1.0, 200000, 5);
  const double exact = 1.0 - std::exp(-0.5);
  EXPECT_NEAR(est.mass, exact, 4.0 * std::sqrt(exact * (1 - exact) / 200000));
  EXPECT_LE(est.std_error, std::sqrt(0.5 * 0.5 / 200000));
}

TEST(BallMass, DeterministicAndMonotoneInOffset)
{
  const MixtureModel m({ 1.0, -1.0 }, { { dist::IsotropicGaussianND{ 1.0, 2 }, 2 },
                                        { dist::EllipticalGaussianND{ 2.0, { 1.0, 0.5 } }, 1 } });
  const std::vector<double> at{ 1.0, -1.0 }, off{ 2.5, -1.0 };
  const auto a = ball_mass_nd(m, at, 1.0, 50000, 3);
  EXPECT_EQ(a.mass, ball_mass_nd(m, at, 1.0, 50000, 3).mass);
  EXPECT_LE(ball_mass_nd(m, off, 1.0, 50000, 3).mass, a.mass);
}

TEST(BallMass, Errors)
{
  const MixtureModel m({ 0.0, 0.0 }, { { dist::IsotropicGaussianND{ 1.0, 2 }, 1 } });
  const std::vector<double> c{ 0.0, 0.0 }, bad{ 0.0 };
  EXPECT_THROW(ball_mass_nd(m, c, 1.0, 9999, 1), InvalidParamError);
  EXPECT_THROW(ball_mass_nd(m, bad, 1.0, 10000, 1), DimensionError);
}

TEST(Lemma1, GaussianPasses)
{
  const std::vector<double> grid{ 0.5, 1.0, 2.0, 4.0 };
  const auto report = check_lemma1_properties(single(dist::Gaussian{ 1.0 }), grid);
  EXPECT_TRUE(report.all_passed());
  EXPECT_EQ(report.checks.size(), 4u);
}

TEST(Lemma1, QuadraticVarianceModelPasses)
{
  GeneratorSpec g;
  g.example = Example::QuadraticVariance;
  g.n = 1024;
  const std::vector<double> grid{ 0.5, 1.0, 2.0, 4.0 };
  const auto report = check_lemma1_properties(example_model(g), grid);
  for (const auto& c : report.checks)
    EXPECT_TRUE(c.passed) << c.name << ": " << c.witness;
}

TEST(Lemma1, UniformAttainsEqualityButPasses)
{
  const std::vector<double> grid{ 0.1, 0.2, 0.4 };
  EXPECT_TRUE(check_lemma1_properties(single(dist::Uniform{ 1.0 }), grid).all_passed());
}

TEST(Lemma1, GridErrors)
{
  const auto m = single(dist::Gaussian{ 1.0 });
  EXPECT_THROW(check_lemma1_properties(m, std::vector<double>{ 1.0 }), GridTooSmallError);
  EXPECT_THROW(check_lemma1_properties(m, std::vector<double>{ 2.0, 1.0 }), InvalidParamError);
}

TEST(Components, Validation)
{
  EXPECT_THROW(single(dist::Gaussian{ 0.0 }), InvalidParamError);
  EXPECT_THROW(single(dist::Uniform{ -1.0 }), InvalidParamError);
  // mass 2 * 0.25 = 0.5
  EXPECT_THROW(single(dist::PiecewiseUniform{ { 0.0, 1.0 }, { 0.25 } }), InvalidParamError);
  // increasing in |x|
  EXPECT_THROW(single(dist::PiecewiseUniform{ { 0.0, 1.0, 2.0 }, { 0.1, 0.4 } }), InvalidParamError);
  EXPECT_THROW(MixtureModel({ { dist::Gaussian{ 1.0 }, 1 }, { dist::IsotropicGaussianND{ 1.0, 2 }, 1 } }),
               DimensionError);
}

TEST(Components, JsonRoundTrip)
{
  const MixtureModel m({ 0.5 }, { { dist::Gaussian{ 1.0 }, 100 }, { dist::Uniform{ 2.0 }, 3 },
                                  { dist::PiecewiseUniform{ { 0.0, 1.0, 3.0 }, { 0.3, 0.1 } }, 1 } });
  const auto j = to_json(m);
  const auto back = mixture_from_json(j);
  EXPECT_EQ(back.n(), 104);
  EXPECT_EQ(to_json(back), j);
  for (double x : { 0.0, 0.5, 2.0 })
    EXPECT_EQ(interval_mass(back, x, 0.7), interval_mass(m, x, 0.7));
}

TEST(Components, JsonDefaults)
{
  const auto m = mixture_from_json(nlohmann::json::parse(R"({"components":[{"kind":"gaussian","sigma":2}]})"));
  EXPECT_EQ(m.n(), 1);
  EXPECT_EQ(m.center(), std::vector<double>{ 0.0 });
}
