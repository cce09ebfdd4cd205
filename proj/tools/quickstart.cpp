// Selects k sample points of a snapshot family by volume sampling and
// compares the error with the optimal subspace.

#include <cstdio>

#include "volsamp/volsamp.hpp"

int main() {
  using namespace volsamp;

  InstanceSpec spec;
  spec.kind = InstanceKind::KernelSnapshot;
  spec.kernel = KernelKind::Gaussian;
  spec.length = 0.3;
  spec.x_grid = linspace(0.0, 1.0, 40);
  spec.y_grid = linspace(0.0, 1.0, 25);
  const DiscretizedFunction f = generate(spec);
  const SchmidtDecomposition d = schmidt_decompose(f);

  SamplerConfig config;
  config.seed = 2024;
  for (std::size_t k = 1; k <= 6; ++k) {
    const BoundCertificate c = certify_bound(f, k, Strategy::VolumeBestOf, config, 16);
    std::printf("k=%zu  d_k^2=%.3e  sampled=%.3e  ratio=%.3f  expected=%.3e  %s\n", k,
                c.optimal_tail_squared, c.achieved_squared_error, c.prefactor_squared.value_or(0.0),
                expected_projection_error(d, k), c.satisfied ? "ok" : "above bound");
  }
}
