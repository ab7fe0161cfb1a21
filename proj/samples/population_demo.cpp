// Population quantities of a mixture: the radius r_k holding mass k/n around
// the center, and the structural checks on interval masses.

#include <entest/entest.hpp>

#include <cmath>
#include <cstdio>

int main()
{
  entest::GeneratorSpec spec;
  spec.example = entest::Example::AlphaMixture;
  spec.alpha = 1.3;
  for (std::size_t n : { 4096u, 16384u, 65536u }) {
    spec.n = n;
    const auto model = entest::example_model(spec);
    const double k = std::ceil(std::log(static_cast<double>(n)));
    std::printf("n = %6zu  r_k(k = %2.0f) = %.5f\n", n, k,
                entest::radius_for_mass(model, k / static_cast<double>(n)));
  }

  const entest::MixtureModel mix({ { entest::dist::Gaussian{ 1.0 }, 3 }, { entest::dist::Uniform{ 5.0 }, 1 } });
  const std::vector<double> grid{ 0.5, 1.0, 2.0, 4.0 };
  for (const auto& check : entest::check_lemma1_properties(mix, grid).checks)
    std::printf("%-16s %s\n", check.name.c_str(), check.passed ? "ok" : check.witness.c_str());
}
