#include "naturerisk/discrete_model.hpp"

#include <limits>

#include "naturerisk/errors.hpp"

namespace naturerisk {

DiscreteModel::DiscreteModel(std::vector<FactorTable> factors) : factors_(std::move(factors)) {
  register_variables();
  check_acyclic();
}

void DiscreteModel::register_variables() {
  for (const FactorTable& factor : factors_) {
    const auto& vars = factor.variables();
    const auto& cards = factor.cardinalities();
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const auto it = cardinality_.find(vars[i]);
      if (it == cardinality_.end()) {
        cardinality_.emplace(vars[i], cards[i]);
        rank_.emplace(vars[i], variable_order_.size());
        variable_order_.push_back(vars[i]);
        if (joint_size_ > std::numeric_limits<std::size_t>::max() /
                              static_cast<std::size_t>(cards[i])) {
          joint_size_ = std::numeric_limits<std::size_t>::max();
        } else {
          joint_size_ *= static_cast<std::size_t>(cards[i]);
        }
      } else if (it->second != cards[i]) {
        throw ConfigError("model: variable '" + vars[i] + "' registered with cardinality " +
                          std::to_string(it->second) + " but factor uses " +
                          std::to_string(cards[i]));
      }
    }
  }
}

// Conditional factors read as child <- parents must not form a cycle.
void DiscreteModel::check_acyclic() const {
  std::map<std::string, std::vector<std::string>> parents_of;
  for (const FactorTable& factor : factors_) {
    if (factor.kind() != FactorTable::Kind::conditional) continue;
    auto& parents = parents_of[factor.child()];
    for (const std::string& var : factor.variables()) {
      if (var != factor.child()) parents.push_back(var);
    }
  }
  // Iterative DFS with colouring.
  std::map<std::string, int> colour;  // 0 unvisited, 1 in progress, 2 done
  for (const auto& [child, _] : parents_of) {
    if (colour[child] != 0) continue;
    std::vector<std::pair<std::string, std::size_t>> stack{{child, 0}};
    colour[child] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto it = parents_of.find(node);
      const std::size_t degree = it == parents_of.end() ? 0 : it->second.size();
      if (next >= degree) {
        colour[node] = 2;
        stack.pop_back();
        continue;
      }
      const std::string& parent = it->second[next++];
      if (colour[parent] == 1) {
        throw ConfigError("model: conditional dependency cycle through '" + parent + "'");
      }
      if (colour[parent] == 0) {
        colour[parent] = 1;
        stack.emplace_back(parent, 0);
      }
    }
  }
}

int DiscreteModel::cardinality(const std::string& name) const {
  const auto it = cardinality_.find(name);
  if (it == cardinality_.end()) {
    throw ConfigError("model: unknown variable '" + name + "'");
  }
  return it->second;
}

std::size_t DiscreteModel::variable_rank(const std::string& name) const {
  const auto it = rank_.find(name);
  if (it == rank_.end()) {
    throw ConfigError("model: unknown variable '" + name + "'");
  }
  return it->second;
}

}  // namespace naturerisk
