// Small Monte Carlo sweep written as CSV to stdout, with fitted rates.

#include <entest/entest.hpp>

#include <cstdio>
#include <iostream>

int main()
{
  entest::SweepSpec spec;
  spec.generator.example = entest::Example::IidGaussian;
  spec.n_grid = { 1024, 2048, 4096, 8192 };
  spec.trials = 50;
  spec.master_seed = 1;
  for (const char* name : { "mean", "median", "modal", "hybrid" })
    spec.estimators.push_back({ .name = name });

  const auto result = entest::run_sweep(spec);
  entest::write_csv(result, std::cout);
  for (const auto& e : spec.estimators)
    std::fprintf(stderr, "%-7s slope %+.3f\n", e.name.c_str(), entest::fit_loglog_slope(result, e.name).slope);
}
