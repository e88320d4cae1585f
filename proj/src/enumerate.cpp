#include <algorithm>
#include <vector>

#include "naturerisk/errors.hpp"
#include "naturerisk/inference.hpp"

namespace naturerisk {

// Brute-force enumeration over the full joint state space. This file is the
// oracle side of the marginalize/enumerate cross-check and must stay
// independent of the elimination machinery: it touches FactorTable only
// through variables()/cardinalities()/values().

namespace {

struct JointLayout {
  std::vector<std::string> names;  // registry order
  std::vector<int> cards;
  std::size_t total = 1;
};

JointLayout layout_of(const DiscreteModel& model, std::size_t cap) {
  JointLayout layout;
  layout.names = model.variable_order();
  for (const std::string& name : layout.names) {
    layout.cards.push_back(model.cardinality(name));
  }
  if (model.joint_size() > cap) {
    throw ConfigError("enumerate_joint: joint state space exceeds cap of " + std::to_string(cap) +
                      " states; the oracle is for desk scale only");
  }
  layout.total = model.joint_size();
  return layout;
}

FactorTable accumulate(const DiscreteModel& model, const std::vector<std::string>& query,
                       const Evidence& evidence, std::size_t cap, bool normalize) {
  if (query.empty()) {
    throw ConfigError("enumerate_joint: empty query");
  }
  const JointLayout layout = layout_of(model, cap);
  const std::size_t n = layout.names.size();

  std::vector<int> query_pos;  // positions of query variables in the joint
  for (const std::string& var : query) {
    const auto it = std::find(layout.names.begin(), layout.names.end(), var);
    if (it == layout.names.end()) {
      throw ConfigError("enumerate_joint: unknown query variable '" + var + "'");
    }
    if (evidence.contains(var)) {
      throw ConfigError("enumerate_joint: variable '" + var + "' is both query and evidence");
    }
    query_pos.push_back(static_cast<int>(it - layout.names.begin()));
  }
  // Output scope follows registry order, matching marginalize.
  std::sort(query_pos.begin(), query_pos.end());
  if (std::adjacent_find(query_pos.begin(), query_pos.end()) != query_pos.end()) {
    throw ConfigError("enumerate_joint: duplicate query variable");
  }
  std::vector<int> evidence_value(n, -1);
  for (const auto& [var, value] : evidence) {
    const auto it = std::find(layout.names.begin(), layout.names.end(), var);
    if (it == layout.names.end()) {
      throw ConfigError("enumerate_joint: unknown evidence variable '" + var + "'");
    }
    const std::size_t pos = static_cast<std::size_t>(it - layout.names.begin());
    if (value < 0 || value >= layout.cards[pos]) {
      throw ConfigError("enumerate_joint: evidence " + var + "=" + std::to_string(value) +
                        " outside cardinality " + std::to_string(layout.cards[pos]));
    }
    evidence_value[pos] = value;
  }

  // Per-factor map from factor scope position to joint position.
  struct FactorMap {
    const FactorTable* factor;
    std::vector<std::size_t> joint_pos;
  };
  std::vector<FactorMap> maps;
  for (const FactorTable& factor : model.factors()) {
    FactorMap m{&factor, {}};
    for (const std::string& var : factor.variables()) {
      const auto it = std::find(layout.names.begin(), layout.names.end(), var);
      m.joint_pos.push_back(static_cast<std::size_t>(it - layout.names.begin()));
    }
    maps.push_back(std::move(m));
  }

  std::vector<int> query_cards;
  std::size_t out_size = 1;
  for (int pos : query_pos) {
    query_cards.push_back(layout.cards[static_cast<std::size_t>(pos)]);
    out_size *= static_cast<std::size_t>(layout.cards[static_cast<std::size_t>(pos)]);
  }
  std::vector<double> accum(out_size, 0.0);

  std::vector<int> state(n, 0);
  std::vector<int> factor_state;
  for (std::size_t step = 0; step < layout.total; ++step) {
    bool consistent = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (evidence_value[i] >= 0 && state[i] != evidence_value[i]) {
        consistent = false;
        break;
      }
    }
    if (consistent) {
      double weight = 1.0;
      for (const FactorMap& m : maps) {
        factor_state.clear();
        for (std::size_t pos : m.joint_pos) factor_state.push_back(state[pos]);
        weight *= m.factor->at(factor_state);
        if (weight == 0.0) break;
      }
      std::size_t cell = 0;
      for (std::size_t q = 0; q < query_pos.size(); ++q) {
        cell = cell * static_cast<std::size_t>(query_cards[q]) +
               static_cast<std::size_t>(state[static_cast<std::size_t>(query_pos[q])]);
      }
      accum[cell] += weight;
    }
    for (std::size_t i = n; i-- > 0;) {
      if (++state[i] < layout.cards[i]) break;
      state[i] = 0;
    }
  }

  if (normalize) {
    double total = 0.0;
    for (double v : accum) total += v;
    if (total <= 0.0) {
      throw ImpossibleEvidenceError("enumerate_joint: evidence has probability zero");
    }
    for (double& v : accum) v /= total;
  }

  std::vector<std::string> out_names;
  for (int pos : query_pos) out_names.push_back(layout.names[static_cast<std::size_t>(pos)]);
  return FactorTable::joint(std::move(out_names), std::move(query_cards), std::move(accum));
}

}  // namespace

FactorTable enumerate_joint(const DiscreteModel& model, const std::vector<std::string>& query,
                            const Evidence& evidence, std::size_t state_space_cap) {
  return accumulate(model, query, evidence, state_space_cap, /*normalize=*/true);
}

FactorTable enumerate_mass(const DiscreteModel& model, const std::vector<std::string>& query,
                           const Evidence& evidence, std::size_t state_space_cap) {
  return accumulate(model, query, evidence, state_space_cap, /*normalize=*/false);
}

}  // namespace naturerisk
