#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "naturerisk/beef_model.hpp"

namespace naturerisk {

enum class ScenarioKind { portfolio, divestment, embargo_dynamics };

// Declarative scenario description. Only the fields relevant for the given
// kind are consulted; the loader enforces that the relevant ones are present.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::portfolio;

  // portfolio: weight per supplier id, sums to 1.
  std::map<std::string, double> portfolio_weights;

  // divestment: (supplier, abattoir) edges to zero out.
  std::vector<std::pair<std::string, std::string>> divest_edges;

  // embargo-dynamics: per legislation strength, per state label, the
  // survival probability applied at each step.
  std::map<std::string, std::map<std::string, double>> survival_table;
  std::string legislation_strength;
  int horizon = 1;

  // true: removed sourcing mass is redistributed onto the remainder.
  // false: rows stay sub-normalized and the deficit counts as "no sourcing".
  bool renormalize = true;
};

struct PortfolioScore {
  double forest = 0.0;
  double nrp = 0.0;
};

// Weighted sum of per-supplier scores under the portfolio weights.
PortfolioScore portfolio_e_score(const SupplyChainGraph& graph, const FarmStateModel& states,
                                 const ScenarioSpec& spec);

// Returns a copy of the graph with the listed supplier->abattoir edges zeroed.
// With renormalize the affected rows are rescaled to sum to one again;
// zeroing a supplier's entire row that way raises NoValidSourcingError.
SupplyChainGraph apply_divestment(const SupplyChainGraph& graph, const ScenarioSpec& spec);

struct ProjectionStep {
  int step = 0;
  double expected_return = 0.0;
  double e_score_forest = 0.0;
};

// Steps 0..horizon of the embargo projection. Step 0 is the static model.
// At step t every farm path is damped by survival^t of its state; removed
// farms contribute zero cattle always, and the compliance score either
// averages over the survivors (renormalize) or reports raw compliant mass.
std::vector<ProjectionStep> embargo_projection(const SupplyChainGraph& graph,
                                               const FarmStateModel& states,
                                               const ScenarioSpec& spec,
                                               const std::string& supplier);

}  // namespace naturerisk
