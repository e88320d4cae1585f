#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace naturerisk {

// One finished Metropolis run. draws and log_densities are index-aligned;
// acceptance_rate counts post-burn-in transitions only.
struct SampleBatch {
  std::vector<std::vector<double>> draws;
  std::vector<double> log_densities;
  std::uint64_t seed = 0;
  double acceptance_rate = 0.0;
  std::optional<std::string> warning;
};

using LogDensity = std::function<double(const std::vector<double>&)>;

// Random-walk Metropolis with an isotropic Gaussian proposal. Fixed scale, no
// adaptation. Per step the generator is consumed in a fixed order (one normal
// per coordinate, then one acceptance uniform), so equal arguments give
// bit-identical batches. proposal_scale may be zero; the chain then degenerates
// to the initial point. A -inf log density acts as a hard barrier.
SampleBatch mh_sample(const LogDensity& log_density, const std::vector<double>& init,
                      double proposal_scale, std::size_t n_draws, std::size_t burn_in,
                      std::uint64_t seed);

}  // namespace naturerisk
