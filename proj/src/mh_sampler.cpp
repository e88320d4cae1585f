#include <cmath>
#include <random>
#include <utility>

#include "naturerisk/errors.hpp"
#include "naturerisk/mh_sampler.hpp"
#include "naturerisk/rng.hpp"

namespace naturerisk {

SampleBatch mh_sample(const LogDensity& log_density, const std::vector<double>& init,
                      double proposal_scale, std::size_t n_draws, std::size_t burn_in,
                      std::uint64_t seed) {
  if (!log_density) {
    throw ConfigError("mh_sample: log_density is empty");
  }
  if (init.empty()) {
    throw ConfigError("mh_sample: init vector is empty");
  }
  if (n_draws < 1) {
    throw ConfigError("mh_sample: n_draws must be at least 1");
  }
  if (!std::isfinite(proposal_scale) || proposal_scale < 0.0) {
    throw ConfigError("mh_sample: proposal_scale must be finite and non-negative");
  }
  for (double v : init) {
    if (!std::isfinite(v)) {
      throw ConfigError("mh_sample: init has a non-finite component");
    }
  }
  double current_ld = log_density(init);
  if (!std::isfinite(current_ld)) {
    throw ConfigError("mh_sample: log_density is not finite at init");
  }

  const std::size_t d = init.size();
  std::mt19937_64 engine(seed);

  SampleBatch batch;
  batch.seed = seed;
  batch.draws.reserve(n_draws);
  batch.log_densities.reserve(n_draws);

  std::vector<double> current = init;
  std::vector<double> proposal(d);
  std::size_t accepted = 0;

  const std::size_t total = burn_in + n_draws;
  for (std::size_t step = 0; step < total; ++step) {
    for (std::size_t i = 0; i < d; ++i) {
      proposal[i] = current[i] + proposal_scale * rng::standard_normal(engine);
    }
    const double u = rng::uniform_open0(engine);
    const double proposed_ld = log_density(proposal);
    // NaN log-densities compare false and are rejected along with -inf barriers.
    if (std::log(u) < proposed_ld - current_ld) {
      current = proposal;
      current_ld = proposed_ld;
      if (step >= burn_in) ++accepted;
    }
    if (step >= burn_in) {
      batch.draws.push_back(current);
      batch.log_densities.push_back(current_ld);
    }
  }

  batch.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(n_draws);
  if (batch.acceptance_rate < 0.05 || batch.acceptance_rate > 0.95) {
    batch.warning = "acceptance rate " + std::to_string(batch.acceptance_rate) +
                    " outside [0.05, 0.95]; consider retuning proposal_scale";
  }
  return batch;
}

}  // namespace naturerisk
