#include "naturerisk/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "naturerisk/errors.hpp"
#include "naturerisk/inference.hpp"

namespace naturerisk {

namespace {

constexpr double kSumTolerance = 1e-9;

void require_kind(const ScenarioSpec& spec, ScenarioKind kind, const char* op) {
  if (spec.kind != kind) {
    throw ConfigError(std::string(op) + ": scenario kind does not match the operation");
  }
}

}  // namespace

PortfolioScore portfolio_e_score(const SupplyChainGraph& graph, const FarmStateModel& states,
                                 const ScenarioSpec& spec) {
  require_kind(spec, ScenarioKind::portfolio, "portfolio_e_score");
  if (spec.portfolio_weights.empty()) {
    throw ConfigError("portfolio_e_score: no portfolio weights");
  }
  double total = 0.0;
  for (const auto& [supplier, weight] : spec.portfolio_weights) {
    if (std::find(graph.suppliers.begin(), graph.suppliers.end(), supplier) ==
        graph.suppliers.end()) {
      throw ConfigError("portfolio_e_score: weight on unknown supplier '" + supplier + "'");
    }
    if (!std::isfinite(weight) || weight < 0.0) {
      throw InvariantError("portfolio_e_score: weights must be finite and non-negative");
    }
    total += weight;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw InvariantError("portfolio_e_score: weights sum to " + std::to_string(total) +
                         ", expected 1");
  }

  PortfolioScore score;
  for (const auto& [supplier, weight] : spec.portfolio_weights) {
    if (weight == 0.0) continue;
    score.forest += weight * e_score_forest(graph, states, supplier);
    score.nrp += weight * e_score_nrp(graph, states, supplier);
  }
  return score;
}

SupplyChainGraph apply_divestment(const SupplyChainGraph& graph, const ScenarioSpec& spec) {
  require_kind(spec, ScenarioKind::divestment, "apply_divestment");
  if (spec.divest_edges.empty()) {
    throw ConfigError("apply_divestment: no edges to divest");
  }

  SupplyChainGraph edited = graph;
  std::map<std::string, double> removed;  // per affected supplier
  for (const auto& [supplier, abattoir] : spec.divest_edges) {
    const auto row = edited.sourcing_b_to_a.find(supplier);
    if (row == edited.sourcing_b_to_a.end()) {
      throw ConfigError("apply_divestment: unknown supplier '" + supplier + "'");
    }
    const auto entry =
        std::find_if(row->second.begin(), row->second.end(),
                     [&](const auto& pair) { return pair.first == abattoir; });
    if (entry == row->second.end()) {
      throw ConfigError("apply_divestment: supplier '" + supplier + "' has no edge to '" +
                        abattoir + "'");
    }
    removed[supplier] += entry->second;
    entry->second = 0.0;
  }

  if (spec.renormalize) {
    for (const auto& [supplier, mass] : removed) {
      if (mass == 0.0) continue;  // zero-probability edges leave the row untouched
      auto& row = edited.sourcing_b_to_a.at(supplier);
      double remaining = 0.0;
      for (const auto& [abattoir, prob] : row) remaining += prob;
      if (remaining <= 0.0) {
        throw NoValidSourcingError("apply_divestment: supplier '" + supplier +
                                   "' has no abattoirs left to renormalize onto");
      }
      for (auto& [abattoir, prob] : row) prob /= remaining;
    }
  }
  return edited;
}

std::vector<ProjectionStep> embargo_projection(const SupplyChainGraph& graph,
                                               const FarmStateModel& states,
                                               const ScenarioSpec& spec,
                                               const std::string& supplier) {
  require_kind(spec, ScenarioKind::embargo_dynamics, "embargo_projection");
  if (spec.horizon < 1) {
    throw InvariantError("embargo_projection: horizon must be at least 1");
  }
  const auto column = spec.survival_table.find(spec.legislation_strength);
  if (column == spec.survival_table.end()) {
    throw ConfigError("embargo_projection: survival table has no entry for legislation '" +
                      spec.legislation_strength + "'");
  }
  std::vector<double> survival;
  for (const std::string& label : states.state_labels) {
    const auto it = column->second.find(label);
    if (it == column->second.end()) {
      throw ConfigError("embargo_projection: survival table misses state '" + label + "'");
    }
    if (!std::isfinite(it->second) || it->second < 0.0 || it->second > 1.0) {
      throw InvariantError("embargo_projection: survival probability for state '" + label +
                           "' outside [0,1]");
    }
    survival.push_back(it->second);
  }

  std::vector<ProjectionStep> steps;
  steps.reserve(static_cast<std::size_t>(spec.horizon) + 1);
  for (int t = 0; t <= spec.horizon; ++t) {
    ChainParts parts{true, false, true, {}};
    parts.state_weights.reserve(survival.size());
    for (double s : survival) {
      parts.state_weights.push_back(std::pow(s, static_cast<double>(t)));
    }
    const CompiledChain chain = compile_chain(graph, states, supplier, parts);

    // Cattle from removed farms vanish: the return is always mass-weighted.
    const std::vector<double> cattle_mass = marginal_mass(chain.model, {"C"}).values();
    double heads = 0.0;
    for (std::size_t c = 0; c < cattle_mass.size(); ++c) {
      heads += static_cast<double>(chain.cattle_levels[c]) * cattle_mass[c];
    }

    double e_score = 0.0;
    if (spec.renormalize) {
      try {
        e_score = marginalize(chain.model, {"L"}).values()[1];
      } catch (const ImpossibleEvidenceError&) {
        throw NoValidSourcingError("embargo_projection: every farm is eliminated at step " +
                                   std::to_string(t));
      }
    } else {
      e_score = marginal_mass(chain.model, {"L"}).values()[1];
    }

    steps.push_back({t, graph.return_per_head * heads, e_score});
  }
  return steps;
}

}  // namespace naturerisk
