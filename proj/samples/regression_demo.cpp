// Exact modal interval regression on a line with gross outliers.

#include <entest/entest.hpp>

#include <cstdio>

int main()
{
  entest::SplitMix64 rng(7);
  std::vector<double> xs, ys;
  for (int i = 0; i < 40; ++i) {
    const double x = rng.uniform(0.0, 10.0);
    xs.push_back(x);
    const bool outlier = i % 4 == 0;
    ys.push_back(outlier ? rng.uniform(-50.0, 50.0) : 3.0 * x + rng.uniform(-0.2, 0.2));
  }
  const entest::RegressionDataset data(xs, ys, 1);

  const auto ols = entest::least_squares(data);
  const auto fit = entest::modal_regression(data, 0.2);
  std::printf("least squares slope %.4f\n", (*ols)[0]);
  std::printf("modal slope         %.4f  (%zu of %zu within 0.2)\n", fit.beta[0], fit.count, data.size());
}
