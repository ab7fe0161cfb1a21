#include <entest/estimators_1d.hpp>
#include <entest/population.hpp>
#include <entest/simgen.hpp>
#include <entest/sweep.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace entest;

TEST(Generator, IidGaussianSpread)
{
  GeneratorSpec g;
  g.n = 100000;
  g.seed = 42;
  const auto data = generate(g);
  double mean = 0.0;
  for (double v : data.values())
    mean += v;
  mean /= static_cast<double>(g.n);
  double ss = 0.0;
  for (double v : data.values())
    ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(g.n - 1));
  EXPECT_GE(sd, 0.99);
  EXPECT_LE(sd, 1.01);
}

TEST(Generator, AlphaMixtureLowNoiseCount)
{
  GeneratorSpec g;
  g.example = Example::AlphaMixture;
  g.alpha = 1.3;
  g.n = 4096;
  EXPECT_EQ(low_noise_count(10.0, 4096), 84u);
  const auto model = example_model(g);
  ASSERT_EQ(model.components().size(), 2u);
  EXPECT_EQ(model.components()[0].mult, 84);
  EXPECT_EQ(model.components()[1].mult, 4096 - 84);

  g.seed = 3;
  const auto data = generate(g);
  std::size_t tight = 0;
  for (double v : data.values())
    tight += std::abs(v) < 0.2;
  // 84 low-noise points plus a negligible chance of a wide draw landing near 0
  EXPECT_GE(tight, 84u);
  EXPECT_LE(tight, 86u);
  for (std::size_t i = 0; i < 84; ++i)
    EXPECT_LT(std::abs(data.row(i)[0]), 0.2);
}

TEST(Generator, TwoScaleCounts)
{
  GeneratorSpec g;
  g.example = Example::TwoScale;
  g.n = 1001;
  g.p = 0.3;
  g.sigma1 = 100.0;
  g.sigma2 = 1e-3;
  const auto model = example_model(g);
  EXPECT_EQ(model.components()[0].mult, 301);
  EXPECT_EQ(model.components()[1].mult, 700);
  const auto data = generate(g);
  std::size_t tight = 0;
  for (double v : data.values())
    tight += std::abs(v) < 0.01;
  EXPECT_EQ(tight, 301u);
}

TEST(Generator, BitIdenticalAndRowIndependent)
{
  GeneratorSpec g;
  g.example = Example::QuadraticVariance;
  g.n = 500;
  g.d = 3;
  g.seed = 99;
  const auto a = generate(g), b = generate(g);
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));

  // a longer sample shares its first rows with the shorter one
  g.n = 800;
  const auto c = generate(g);
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));

  g.seed = 100;
  const auto e = generate(g);
  EXPECT_NE(e.row(0)[0], c.row(0)[0]);
}

TEST(Generator, CenterShiftsEveryRow)
{
  GeneratorSpec g;
  g.example = Example::Elliptical;
  g.d = 2;
  g.n = 50;
  g.axes = { 1.0, 4.0 };
  const auto base = generate(g);
  g.center = { 10.0, -5.0 };
  const auto shifted = generate(g);
  for (std::size_t i = 0; i < g.n; ++i) {
    EXPECT_EQ(shifted.row(i)[0], base.row(i)[0] + 10.0);
    EXPECT_EQ(shifted.row(i)[1], base.row(i)[1] - 5.0);
  }
}

TEST(Generator, HighExpDensityNormalization)
{
  for (std::size_t n : { 64u, 4096u, 100000u }) {
    const double alpha = 0.5, q = 10.0 * static_cast<double>(n);
    const double inner = std::pow(static_cast<double>(n), -alpha);
    const double outer = high_exp_outer_density(n, alpha, q);
    EXPECT_LE(outer, inner / 2.0);
    // midpoint rule on each half-line piece, then mirror
    double area = 0.0;
    const int cells = 4096;
    for (int c = 0; c < cells; ++c)
      area += inner * (1.0 / cells);
    const double w = (q - 1.0) / cells;
    for (int c = 0; c < cells; ++c)
      area += outer * w;
    EXPECT_NEAR(2.0 * area, 1.0, 1e-9);
  }

  GeneratorSpec g;
  g.example = Example::HighExp;
  g.alpha = 0.5;
  g.n = 4096;
  const auto model = example_model(g);
  EXPECT_NEAR(interval_mass(model, 0.0, 1e6), 1.0, 1e-9);
}

TEST(Generator, ModifiedAlphaDensityNormalization)
{
  GeneratorSpec g;
  g.example = Example::ModifiedAlphaMixture;
  g.alpha = 0.9;
  g.n = 4096;
  EXPECT_NEAR(interval_mass(example_model(g), 0.0, 1e6), 1.0, 1e-9);
}

TEST(Generator, Validation)
{
  GeneratorSpec g;
  g.n = 0;
  EXPECT_THROW(validate(g), InvalidParamError);

  g = {};
  g.example = Example::HighExp;
  g.n = 4096;
  g.alpha = 0.5;
  g.q_n_factor = 1e-6; // q_n < 1
  EXPECT_THROW(validate(g), InvalidParamError);

  g = {};
  g.example = Example::HighExp;
  g.d = 2;
  EXPECT_THROW(validate(g), InvalidParamError);

  g = {};
  g.example = Example::Elliptical;
  g.d = 2;
  g.axes = { 1.0 };
  EXPECT_THROW(validate(g), DimensionError);

  EXPECT_THROW(example_from_string("nope"), InvalidParamError);
  EXPECT_EQ(example_from_string("two-scale"), Example::TwoScale);
}

TEST(Generator, JsonRoundTrip)
{
  GeneratorSpec g;
  g.example = Example::Elliptical;
  g.d = 2;
  g.n = 7;
  g.seed = 123456789012345ULL;
  g.axes = { 1.0, 0.25 };
  const auto back = generator_from_json(to_json(g));
  EXPECT_EQ(back.example, g.example);
  EXPECT_EQ(back.d, 2u);
  EXPECT_EQ(back.seed, g.seed);
  EXPECT_EQ(back.axes, g.axes);
}

// -- sweep --------------------------------------------------------------------

namespace {

SweepSpec small_sweep()
{
  SweepSpec s;
  s.generator.example = Example::IidGaussian;
  s.n_grid = { 64, 128, 256 };
  s.trials = 20;
  for (const char* e : { "mean", "median", "modal", "shorth", "hybrid" })
    s.estimators.push_back({ .name = e });
  s.master_seed = 7;
  return s;
}

std::string csv_of(const SweepResult& r)
{
  std::ostringstream out;
  write_csv(r, out);
  return out.str();
}

} // namespace

TEST(Sweep, RowLayoutAndCsv)
{
  const auto r = run_sweep(small_sweep());
  ASSERT_EQ(r.rows.size(), 15u);
  EXPECT_TRUE(r.skipped.empty());
  EXPECT_EQ(r.rows[0].n, 64u);
  EXPECT_EQ(r.rows[0].estimator, "mean");
  EXPECT_EQ(r.rows[14].n, 256u);
  EXPECT_EQ(r.rows[14].estimator, "hybrid");
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.T, 20u);
    EXPECT_GT(row.avg_error, 0.0);
    EXPECT_GT(row.std_error, 0.0);
    EXPECT_GE(row.p95_error, 0.0);
  }
  const auto csv = csv_of(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kSweepCsvHeader);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 16);
  EXPECT_EQ(csv, csv_of(run_sweep(small_sweep())));
}

TEST(Sweep, ThreadCountDoesNotChangeResults)
{
  const auto spec = small_sweep();
  EXPECT_EQ(csv_of(run_sweep(spec, 1)), csv_of(run_sweep(spec, 3)));
}

TEST(Sweep, SingleTrialHasZeroStdError)
{
  auto spec = small_sweep();
  spec.trials = 1;
  for (const auto& row : run_sweep(spec).rows)
    EXPECT_EQ(row.std_error, 0.0);
}

TEST(Sweep, MeanErrorMatchesDirectComputation)
{
  auto spec = small_sweep();
  spec.n_grid = { 100 };
  spec.trials = 5;
  spec.estimators = { { .name = "mean" } };
  const auto r = run_sweep(spec);
  double sum = 0.0;
  for (std::size_t t = 0; t < 5; ++t) {
    GeneratorSpec g;
    g.n = 100;
    g.seed = trial_seed(7, 100, t);
    sum += std::abs(sample_mean_nd(generate(g))[0]);
  }
  EXPECT_DOUBLE_EQ(r.rows[0].avg_error, sum / 5.0);
}

TEST(Sweep, InvalidParametersSkipCells)
{
  auto spec = small_sweep();
  spec.n_grid = { 10, 100 };
  spec.estimators = { { .name = "mean" }, { .name = "shorth", .k = 50 } };
  const auto r = run_sweep(spec);
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.skipped[0].n, 10u);
  EXPECT_NE(r.find(100, "shorth"), nullptr);
  EXPECT_EQ(r.rows.size(), 3u);
}

TEST(Sweep, SpecValidation)
{
  auto spec = small_sweep();
  spec.n_grid = { 128, 64 };
  EXPECT_THROW(run_sweep(spec), InvalidParamError);
  spec.n_grid = { 64, 64 };
  EXPECT_THROW(run_sweep(spec), InvalidParamError);
  spec.n_grid = {};
  EXPECT_THROW(run_sweep(spec), InvalidParamError);
  spec = small_sweep();
  spec.estimators.push_back({ .name = "mean" });
  EXPECT_THROW(run_sweep(spec), InvalidParamError);
  spec = small_sweep();
  spec.estimators = { { .name = "bogus" } };
  EXPECT_THROW(run_sweep(spec), InvalidParamError);
}

TEST(Sweep, SlopeFitExamples)
{
  SweepResult power, flat;
  for (std::size_t n : { 1000u, 2000u, 4000u, 8000u }) {
    power.rows.push_back({ "iid", 1, n, "mean", 1, 1.0 / std::sqrt(static_cast<double>(n)), 0, 0, 0 });
    flat.rows.push_back({ "iid", 1, n, "mean", 1, 7.0, 0, 0, 0 });
  }
  EXPECT_NEAR(fit_loglog_slope(power, "mean").slope, -0.5, 1e-12);
  EXPECT_NEAR(fit_loglog_slope(flat, "mean").slope, 0.0, 1e-12);
  EXPECT_NEAR(fit_loglog_slope(flat, "mean").intercept, std::log(7.0), 1e-12);

  power.rows.resize(2);
  EXPECT_THROW(fit_loglog_slope(power, "mean"), InsufficientDataError);
  EXPECT_THROW(fit_loglog_slope(power, "median"), InsufficientDataError);
}

TEST(Sweep, QuantileInterpolates)
{
  const std::vector<double> v{ 0, 1, 2, 3, 4 };
  EXPECT_EQ(quantile_sorted(v, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.95), 3.8);
  EXPECT_EQ(quantile_sorted(v, 1.0), 4.0);
}

TEST(Sweep, JsonSpec)
{
  const auto j = nlohmann::json::parse(R"({
    "generator": {"example": "alpha-mixture", "alpha": 1.3},
    "n_grid": [256, 512],
    "trials": 3,
    "estimators": ["mean", {"name": "modal", "r": 0.5}],
    "master_seed": 11
  })");
  const auto spec = sweep_from_json(j);
  EXPECT_EQ(spec.generator.example, Example::AlphaMixture);
  EXPECT_EQ(spec.generator.alpha, 1.3);
  EXPECT_EQ(spec.trials, 3u);
  ASSERT_EQ(spec.estimators.size(), 2u);
  EXPECT_EQ(*spec.estimators[1].r, 0.5);
  EXPECT_EQ(run_sweep(spec).rows.size(), 4u);
}
