#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "naturerisk/factor_table.hpp"

namespace naturerisk {

// A bag of factor tables with a consistent variable registry. The registry
// order (first appearance across factors) is the deterministic tie-break
// order used everywhere downstream, so two identical factor lists always
// produce bit-identical inference results.
class DiscreteModel {
 public:
  explicit DiscreteModel(std::vector<FactorTable> factors);

  const std::vector<FactorTable>& factors() const noexcept { return factors_; }
  const std::vector<std::string>& variable_order() const noexcept { return variable_order_; }

  bool has_variable(const std::string& name) const { return rank_.contains(name); }
  int cardinality(const std::string& name) const;
  std::size_t variable_rank(const std::string& name) const;

  // Product of all registered cardinalities, saturating at SIZE_MAX.
  std::size_t joint_size() const noexcept { return joint_size_; }

 private:
  void register_variables();
  void check_acyclic() const;

  std::vector<FactorTable> factors_;
  std::vector<std::string> variable_order_;
  std::map<std::string, int> cardinality_;
  std::map<std::string, std::size_t> rank_;
  std::size_t joint_size_ = 1;
};

}  // namespace naturerisk
