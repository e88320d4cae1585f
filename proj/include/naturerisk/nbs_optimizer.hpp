#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "naturerisk/water_model.hpp"

namespace naturerisk {

struct OptimizeOptions {
  // Instances with at most this many complete assignments are enumerated;
  // larger ones switch to branch and bound.
  std::uint64_t exhaustive_cap = 100000;
  bool strict_sigmoid = false;
};

struct OptimalAssignment {
  NbsAssignment assignment;
  Trajectory trajectory;
  std::uint64_t evaluated = 0;  // complete assignments whose trajectory ran
  bool used_branch_and_bound = false;
};

// Maximizes the summed balance over t = 1..horizon subject to B_t >= 0 at
// every step. Ties break over fields in id order, preferring the option with
// the higher absorption ceiling, then the smaller option id. Throws
// InfeasibleError carrying the least-violating assignment and its first
// insolvent step when nothing is solvent.
OptimalAssignment optimize(const Catchment& catchment, const FinanceParams& finance,
                           const RainfallSeries& rainfall, int horizon,
                           const OptimizeOptions& options = {});

// Canonical "field=option,field=option" encoding in field-id order.
std::string assignment_key(const NbsAssignment& assignment);

struct OptimumDistribution {
  std::map<std::string, std::uint64_t> assignment_counts;  // key -> draws won
  McmcSummary objective;                                   // over feasible draws
  std::uint64_t infeasible_draws = 0;
  std::size_t n_draws = 0;
  double acceptance_rate = 1.0;
  std::optional<std::string> warning;
  bool deterministic = false;  // all priors were point masses
};

// Re-optimizes per posterior draw. With only point priors this collapses to a
// single exact solve whose assignment takes the whole histogram.
OptimumDistribution optimum_distribution(const Catchment& catchment,
                                         const FinanceParams& finance,
                                         const RainfallSeries& rainfall, int horizon,
                                         const WaterPriors& priors, std::size_t n_draws,
                                         std::size_t burn_in, std::uint64_t seed,
                                         double proposal_scale = 0.8,
                                         const OptimizeOptions& options = {});

}  // namespace naturerisk
