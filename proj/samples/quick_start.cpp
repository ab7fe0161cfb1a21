// Estimate a common center from a sample where every point has its own
// noise level: the first observations are precise, the rest are not.

#include <entest/entest.hpp>

#include <cstdio>

int main()
{
  entest::GeneratorSpec spec;
  spec.example = entest::Example::QuadraticVariance; // X_i ~ N(0, (c i)^2)
  spec.n = 10000;
  spec.c = 0.1;
  spec.seed = 42;
  const entest::Dataset1D data = entest::generate_1d(spec);

  const double mean = entest::sample_mean(data.sorted());
  const double median = entest::sample_median(data);
  const auto modal = entest::modal_interval_1d(data, 1.0);
  const auto shorth = entest::shorth_1d(data, entest::default_shorth_k(data.size()));
  const auto hybrid = entest::hybrid_1d(data);

  std::printf("n = %zu, true center 0\n", data.size());
  std::printf("  mean    %+.4f\n", mean);
  std::printf("  median  %+.4f\n", median);
  std::printf("  modal   %+.4f  (%zu points within 1)\n", modal.center, modal.count);
  std::printf("  shorth  %+.4f  (half-width %.4f)\n", shorth.center, shorth.radius);
  std::printf("  hybrid  %+.4f%s\n", hybrid.center, hybrid.flags.has(entest::Flag::Clamped) ? "  clamped" : "");
}
