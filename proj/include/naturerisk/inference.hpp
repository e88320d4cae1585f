#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "naturerisk/discrete_model.hpp"
#include "naturerisk/factor_table.hpp"

namespace naturerisk {

// Partial assignment of variable -> state index. Ordered so error messages
// and iteration are deterministic.
using Evidence = std::map<std::string, int>;

// Exact marginal over the query variables by variable elimination
// (min-degree greedy order, registry-rank tie-breaks). Returns a normalized
// distribution; throws ImpossibleEvidenceError when the evidence has zero
// mass and ConfigError for unknown variables or out-of-range evidence.
FactorTable marginalize(const DiscreteModel& model, const std::vector<std::string>& query,
                        const Evidence& evidence = {});

// Same sum-product contraction without the final normalization. The cell
// values are raw joint masses; for a model of proper conditionals they sum
// to one, for sub-normalized sourcing rows the deficit stays visible.
FactorTable marginal_mass(const DiscreteModel& model, const std::vector<std::string>& query,
                          const Evidence& evidence = {});

inline constexpr std::size_t kDefaultEnumerationCap = std::size_t{1} << 24;

// Brute-force oracle: walks every joint assignment, multiplies all factor
// values, accumulates into the query cells and normalizes. Deliberately
// shares nothing with marginalize beyond FactorTable access; refuses models
// whose joint state space exceeds the cap.
FactorTable enumerate_joint(const DiscreteModel& model, const std::vector<std::string>& query,
                            const Evidence& evidence = {},
                            std::size_t state_space_cap = kDefaultEnumerationCap);

// Unnormalized companion of enumerate_joint, for cross-checking mass-level
// scores on sub-normalized graphs.
FactorTable enumerate_mass(const DiscreteModel& model, const std::vector<std::string>& query,
                           const Evidence& evidence = {},
                           std::size_t state_space_cap = kDefaultEnumerationCap);

}  // namespace naturerisk
