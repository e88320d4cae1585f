#include "naturerisk/beef_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "naturerisk/errors.hpp"
#include "naturerisk/inference.hpp"

namespace naturerisk {

namespace {

constexpr double kSumTolerance = 1e-9;

void check_distribution(const std::vector<double>& values, const std::string& what) {
  if (values.empty()) {
    throw InvariantError(what + ": empty distribution");
  }
  double total = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvariantError(what + ": entries must be finite and non-negative");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw InvariantError(what + ": sums to " + std::to_string(total) + ", expected 1");
  }
}

template <typename T>
std::size_t index_of(const std::vector<T>& items, const T& value, const std::string& what) {
  const auto it = std::find(items.begin(), items.end(), value);
  if (it == items.end()) {
    throw ConfigError(what);
  }
  return static_cast<std::size_t>(it - items.begin());
}

void check_states(const FarmStateModel& states) {
  const std::size_t n = states.state_labels.size();
  if (n == 0) throw InvariantError("farm state model: no state labels");
  std::set<std::string> seen(states.state_labels.begin(), states.state_labels.end());
  if (seen.size() != n) throw InvariantError("farm state model: duplicate state label");
  if (states.p_compliance_given_state.size() != n) {
    throw InvariantError("farm state model: compliance vector length mismatch");
  }
  for (double p : states.p_compliance_given_state) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw InvariantError("farm state model: compliance probability outside [0,1]");
    }
  }
  if (states.nrp_bins.empty()) throw InvariantError("farm state model: no NRP bins");
  for (std::size_t i = 0; i < states.nrp_bins.size(); ++i) {
    const double b = states.nrp_bins[i];
    if (!std::isfinite(b) || b < 0.0 || b > 1.0) {
      throw InvariantError("farm state model: NRP bin outside [0,1]");
    }
    if (i > 0 && b <= states.nrp_bins[i - 1]) {
      throw InvariantError("farm state model: NRP bins must be strictly increasing");
    }
  }
  if (states.cattle_levels.empty()) throw InvariantError("farm state model: no cattle levels");
  for (int level : states.cattle_levels) {
    if (level < 0) throw InvariantError("farm state model: negative cattle level");
  }
  if (states.nrp_given_state.size() != n || states.cattle_given_state.size() != n) {
    throw InvariantError("farm state model: per-state distribution count mismatch");
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (states.nrp_given_state[s].size() != states.nrp_bins.size()) {
      throw InvariantError("farm state model: NRP row length mismatch");
    }
    check_distribution(states.nrp_given_state[s], "farm state model: NRP row");
    if (states.cattle_given_state[s].size() != states.cattle_levels.size()) {
      throw InvariantError("farm state model: cattle row length mismatch");
    }
    check_distribution(states.cattle_given_state[s], "farm state model: cattle row");
  }
}

void check_laundering_acyclic(const SupplyChainGraph& graph) {
  std::map<std::string, std::vector<std::string>> edges;
  for (const Farm& farm : graph.farms) {
    for (const auto& [source, p] : farm.laundering_sources) {
      (void)p;
      edges[farm.id].push_back(source);
    }
  }
  std::map<std::string, int> colour;  // 0 unseen, 1 on stack, 2 done
  for (const Farm& farm : graph.farms) {
    if (colour[farm.id] != 0) continue;
    std::vector<std::pair<std::string, std::size_t>> stack{{farm.id, 0}};
    colour[farm.id] = 1;
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      const auto& out = edges[id];
      if (next < out.size()) {
        const std::string& target = out[next++];
        if (colour[target] == 1) {
          throw InvariantError("supply chain: laundering cycle through farm '" + target + "'");
        }
        if (colour[target] == 0) {
          colour[target] = 1;
          stack.emplace_back(target, 0);
        }
      } else {
        colour[id] = 2;
        stack.pop_back();
      }
    }
  }
}

}  // namespace

void validate_graph(const SupplyChainGraph& graph, const FarmStateModel& states) {
  check_states(states);
  if (graph.suppliers.empty()) throw ConfigError("supply chain: no suppliers");
  if (graph.abattoirs.empty()) throw ConfigError("supply chain: no abattoirs");
  if (graph.farms.empty()) throw ConfigError("supply chain: no farms");
  if (!(graph.return_per_head > 0.0) || !std::isfinite(graph.return_per_head)) {
    throw InvariantError("supply chain: return_per_head must be positive");
  }

  std::set<std::string> ids;
  const auto claim = [&ids](const std::string& id, const char* kind) {
    if (!ids.insert(id).second) {
      throw ConfigError("supply chain: duplicate id '" + id + "' (" + kind + ")");
    }
  };
  for (const auto& id : graph.suppliers) claim(id, "supplier");
  for (const auto& id : graph.abattoirs) claim(id, "abattoir");
  for (const Farm& farm : graph.farms) claim(farm.id, "farm");

  const std::size_t n_states = states.state_labels.size();
  std::set<std::string> farm_ids;
  for (const Farm& farm : graph.farms) farm_ids.insert(farm.id);

  for (const Farm& farm : graph.farms) {
    const double p = farm.car_assessment.p_car_true;
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw InvariantError("farm '" + farm.id + "': p_car_true outside [0,1]");
    }
    if (farm.state_given_car_true.size() != n_states ||
        farm.state_given_car_false.size() != n_states) {
      throw InvariantError("farm '" + farm.id + "': state distribution length mismatch");
    }
    check_distribution(farm.state_given_car_true, "farm '" + farm.id + "' CAR-true states");
    check_distribution(farm.state_given_car_false, "farm '" + farm.id + "' CAR-false states");

    double laundered = 0.0;
    std::set<std::string> sources;
    for (const auto& [source, prob] : farm.laundering_sources) {
      if (!farm_ids.contains(source)) {
        throw ConfigError("farm '" + farm.id + "': unknown laundering source '" + source + "'");
      }
      if (source == farm.id) {
        throw InvariantError("farm '" + farm.id + "': self-laundering edge");
      }
      if (!sources.insert(source).second) {
        throw InvariantError("farm '" + farm.id + "': duplicate laundering source '" + source +
                             "'");
      }
      if (!std::isfinite(prob) || prob < 0.0) {
        throw InvariantError("farm '" + farm.id + "': laundering probability must be >= 0");
      }
      laundered += prob;
    }
    if (laundered > 1.0 + kSumTolerance) {
      throw InvariantError("farm '" + farm.id + "': laundering probabilities exceed 1");
    }
  }
  check_laundering_acyclic(graph);

  const auto check_rows = [&](const auto& rows, const std::vector<std::string>& owners,
                              const std::set<std::string>& targets, const std::string& what) {
    for (const std::string& owner : owners) {
      const auto it = rows.find(owner);
      if (it == rows.end()) {
        throw ConfigError(what + ": missing sourcing row for '" + owner + "'");
      }
      std::vector<double> probs;
      std::set<std::string> seen_targets;
      for (const auto& [target, prob] : it->second) {
        if (!targets.contains(target)) {
          throw ConfigError(what + ": row '" + owner + "' references unknown id '" + target +
                            "'");
        }
        if (!seen_targets.insert(target).second) {
          throw ConfigError(what + ": row '" + owner + "' repeats id '" + target + "'");
        }
        probs.push_back(prob);
      }
      check_distribution(probs, what + " row '" + owner + "'");
    }
    for (const auto& [owner, row] : rows) {
      (void)row;
      if (std::find(owners.begin(), owners.end(), owner) == owners.end()) {
        throw ConfigError(what + ": row for unknown id '" + owner + "'");
      }
    }
  };
  std::set<std::string> abattoir_set(graph.abattoirs.begin(), graph.abattoirs.end());
  check_rows(graph.sourcing_b_to_a, graph.suppliers, abattoir_set, "supplier sourcing");
  check_rows(graph.sourcing_a_to_f, graph.abattoirs, farm_ids, "abattoir sourcing");
}

std::vector<double> farm_state_distribution(const Farm& farm) {
  const double p = farm.car_assessment.p_car_true;
  std::vector<double> out(farm.state_given_car_true.size(), 0.0);
  for (std::size_t s = 0; s < out.size(); ++s) {
    out[s] = p * farm.state_given_car_true[s] + (1.0 - p) * farm.state_given_car_false[s];
  }
  return out;
}

namespace {

// Builds a one-row-per-parent table and picks the strictest kind it supports:
// a proper conditional when every row sums to one, a raw potential otherwise.
FactorTable rows_to_factor(const std::string& child, std::vector<std::string> scope,
                           std::vector<int> cards, const std::vector<std::vector<double>>& rows,
                           bool* proper) {
  std::vector<double> values;
  bool all_proper = true;
  for (const auto& row : rows) {
    double total = 0.0;
    for (double v : row) {
      if (!std::isfinite(v) || v < 0.0) {
        throw InvariantError("chain factor for '" + child + "': negative or non-finite value");
      }
      total += v;
      values.push_back(v);
    }
    if (std::abs(total - 1.0) > kSumTolerance) {
      if (total > 1.0 + kSumTolerance) {
        throw InvariantError("chain factor for '" + child + "': row mass exceeds 1");
      }
      all_proper = false;
    }
  }
  if (!all_proper) *proper = false;
  return all_proper
             ? FactorTable::conditional(child, std::move(scope), std::move(cards),
                                        std::move(values))
             : FactorTable::joint(std::move(scope), std::move(cards), std::move(values));
}

}  // namespace

CompiledChain compile_chain(const SupplyChainGraph& graph, const FarmStateModel& states,
                            const std::string& supplier, const ChainParts& parts) {
  index_of(graph.suppliers, supplier, "compile_chain: unknown supplier '" + supplier + "'");
  const auto b_row = graph.sourcing_b_to_a.find(supplier);
  if (b_row == graph.sourcing_b_to_a.end()) {
    throw ConfigError("compile_chain: supplier '" + supplier + "' has no sourcing row");
  }

  CompiledChain chain{DiscreteModel({FactorTable::joint({"placeholder"}, {1}, {1.0})}),
                      graph.abattoirs,
                      {},
                      states.state_labels,
                      states.nrp_bins,
                      states.cattle_levels,
                      true};
  for (const Farm& farm : graph.farms) chain.farm_ids.push_back(farm.id);

  const int n_a = static_cast<int>(chain.abattoir_ids.size());
  const int n_f = static_cast<int>(chain.farm_ids.size());
  const int n_s = static_cast<int>(states.state_labels.size());

  std::vector<FactorTable> factors;

  // p(A | B=supplier): a prior over abattoirs once the supplier is fixed.
  {
    std::vector<double> prior(static_cast<std::size_t>(n_a), 0.0);
    for (const auto& [aid, prob] : b_row->second) {
      prior[index_of(chain.abattoir_ids, aid,
                     "compile_chain: sourcing row for '" + supplier +
                         "' references unknown abattoir '" + aid + "'")] += prob;
    }
    factors.push_back(rows_to_factor("A", {"A"}, {n_a}, {prior}, &chain.proper));
  }

  // p(F_D | A).
  {
    std::vector<std::vector<double>> rows;
    for (const std::string& aid : chain.abattoir_ids) {
      const auto a_row = graph.sourcing_a_to_f.find(aid);
      if (a_row == graph.sourcing_a_to_f.end()) {
        throw ConfigError("compile_chain: abattoir '" + aid + "' has no sourcing row");
      }
      std::vector<double> row(static_cast<std::size_t>(n_f), 0.0);
      for (const auto& [fid, prob] : a_row->second) {
        row[index_of(chain.farm_ids, fid,
                     "compile_chain: sourcing row for '" + aid +
                         "' references unknown farm '" + fid + "'")] += prob;
      }
      rows.push_back(std::move(row));
    }
    factors.push_back(rows_to_factor("F_D", {"A", "F_D"}, {n_a, n_f}, rows, &chain.proper));
  }

  // p(F | F_D): laundering sources plus the self-origination residual.
  {
    std::vector<std::vector<double>> rows;
    for (std::size_t fd = 0; fd < graph.farms.size(); ++fd) {
      const Farm& farm = graph.farms[fd];
      std::vector<double> row(static_cast<std::size_t>(n_f), 0.0);
      double laundered = 0.0;
      for (const auto& [source, prob] : farm.laundering_sources) {
        row[index_of(chain.farm_ids, source,
                     "compile_chain: farm '" + farm.id + "' references unknown source '" +
                         source + "'")] += prob;
        laundered += prob;
      }
      if (laundered > 1.0 + kSumTolerance) {
        throw InvariantError("compile_chain: farm '" + farm.id +
                             "' laundering probabilities exceed 1");
      }
      row[fd] += farm.laundering_sources.empty() ? 1.0 : std::max(0.0, 1.0 - laundered);
      rows.push_back(std::move(row));
    }
    factors.push_back(rows_to_factor("F", {"F_D", "F"}, {n_f, n_f}, rows, &chain.proper));
  }

  // p(S | F): the CAR mixture per farm, optionally reweighted per state.
  {
    if (!parts.state_weights.empty() &&
        parts.state_weights.size() != static_cast<std::size_t>(n_s)) {
      throw ConfigError("compile_chain: state weight vector length mismatch");
    }
    bool weighted = false;
    for (double w : parts.state_weights) {
      if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
        throw InvariantError("compile_chain: state weights must lie in [0,1]");
      }
      if (w != 1.0) weighted = true;
    }
    std::vector<std::vector<double>> rows;
    for (const Farm& farm : graph.farms) {
      if (farm.state_given_car_true.size() != static_cast<std::size_t>(n_s) ||
          farm.state_given_car_false.size() != static_cast<std::size_t>(n_s)) {
        throw ConfigError("compile_chain: farm '" + farm.id +
                          "' state distributions do not match the state model");
      }
      std::vector<double> row = farm_state_distribution(farm);
      if (weighted) {
        for (int s = 0; s < n_s; ++s) row[static_cast<std::size_t>(s)] *= parts.state_weights[static_cast<std::size_t>(s)];
      }
      rows.push_back(std::move(row));
    }
    factors.push_back(rows_to_factor("S", {"F", "S"}, {n_f, n_s}, rows, &chain.proper));
  }

  if (parts.compliance) {
    std::vector<std::vector<double>> rows;
    for (int s = 0; s < n_s; ++s) {
      const double p = states.p_compliance_given_state[static_cast<std::size_t>(s)];
      rows.push_back({1.0 - p, p});
    }
    factors.push_back(rows_to_factor("L", {"S", "L"}, {n_s, 2}, rows, &chain.proper));
  }
  if (parts.nrp) {
    factors.push_back(rows_to_factor("N", {"S", "N"},
                                     {n_s, static_cast<int>(states.nrp_bins.size())},
                                     states.nrp_given_state, &chain.proper));
  }
  if (parts.cattle) {
    factors.push_back(rows_to_factor("C", {"S", "C"},
                                     {n_s, static_cast<int>(states.cattle_levels.size())},
                                     states.cattle_given_state, &chain.proper));
  }

  chain.model = DiscreteModel(std::move(factors));
  return chain;
}

namespace {

// Leaf marginal of the compiled chain: a normalized distribution on proper
// chains, raw mass when the chain carries a sub-normalized edit so the
// missing sourcing contributes nothing.
std::vector<double> leaf_values(const CompiledChain& chain, const std::string& var) {
  return chain.proper ? marginalize(chain.model, {var}).values()
                      : marginal_mass(chain.model, {var}).values();
}

}  // namespace

double compliance_probability(const SupplyChainGraph& graph, const FarmStateModel& states,
                              const std::string& supplier) {
  const CompiledChain chain = compile_chain(graph, states, supplier, {true, false, false, {}});
  return leaf_values(chain, "L")[1];
}

std::vector<double> nrp_distribution(const SupplyChainGraph& graph, const FarmStateModel& states,
                                     const std::string& supplier) {
  const CompiledChain chain = compile_chain(graph, states, supplier, {false, true, false, {}});
  return marginalize(chain.model, {"N"}).values();
}

double expected_return(const SupplyChainGraph& graph, const FarmStateModel& states,
                       const std::string& supplier) {
  const CompiledChain chain = compile_chain(graph, states, supplier, {false, false, true, {}});
  const std::vector<double> values = leaf_values(chain, "C");
  double heads = 0.0;
  for (std::size_t c = 0; c < values.size(); ++c) {
    heads += static_cast<double>(chain.cattle_levels[c]) * values[c];
  }
  return graph.return_per_head * heads;
}

double e_score_forest(const SupplyChainGraph& graph, const FarmStateModel& states,
                      const std::string& supplier) {
  return compliance_probability(graph, states, supplier);
}

double e_score_nrp(const SupplyChainGraph& graph, const FarmStateModel& states,
                   const std::string& supplier) {
  const CompiledChain chain = compile_chain(graph, states, supplier, {false, true, false, {}});
  const std::vector<double> values = leaf_values(chain, "N");
  double score = 0.0;
  for (std::size_t b = 0; b < values.size(); ++b) {
    score += chain.nrp_bins[b] * values[b];
  }
  return score;
}

double actor_e_score(const SupplyChainGraph& graph, const FarmStateModel& states,
                     const std::string& supplier, const std::string& actor, EScoreKind kind) {
  const ChainParts parts{kind == EScoreKind::forest, kind == EScoreKind::nrp, false, {}};
  const CompiledChain chain = compile_chain(graph, states, supplier, parts);

  Evidence evidence;
  const auto a_it = std::find(chain.abattoir_ids.begin(), chain.abattoir_ids.end(), actor);
  if (a_it != chain.abattoir_ids.end()) {
    evidence["A"] = static_cast<int>(a_it - chain.abattoir_ids.begin());
  } else {
    const auto f_it = std::find(chain.farm_ids.begin(), chain.farm_ids.end(), actor);
    if (f_it == chain.farm_ids.end()) {
      throw ConfigError("actor_e_score: unknown actor '" + actor + "'");
    }
    evidence["F"] = static_cast<int>(f_it - chain.farm_ids.begin());
  }

  if (kind == EScoreKind::forest) {
    return marginalize(chain.model, {"L"}, evidence).values()[1];
  }
  const std::vector<double> values = marginalize(chain.model, {"N"}, evidence).values();
  double score = 0.0;
  for (std::size_t b = 0; b < values.size(); ++b) {
    score += chain.nrp_bins[b] * values[b];
  }
  return score;
}

}  // namespace naturerisk
