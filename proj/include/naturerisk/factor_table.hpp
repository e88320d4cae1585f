#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace naturerisk {

// A named discrete factor: an ordered variable scope, per-variable
// cardinalities and a non-negative value tensor in row-major order (last
// variable varies fastest). The universal currency of the inference core.
//
// Two kinds exist. A conditional table p(child | parents) additionally
// guarantees that for every parent assignment the child slice sums to one.
// A joint potential is any non-negative tensor; sub-normalized sourcing rows
// produced by scenario edits are carried this way.
class FactorTable {
 public:
  enum class Kind { conditional, joint_potential };

  static FactorTable conditional(std::string child, std::vector<std::string> variables,
                                 std::vector<int> cardinalities, std::vector<double> values);
  static FactorTable joint(std::vector<std::string> variables, std::vector<int> cardinalities,
                           std::vector<double> values);

  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const std::vector<int>& cardinalities() const noexcept { return cardinalities_; }
  const std::vector<double>& values() const noexcept { return values_; }
  Kind kind() const noexcept { return kind_; }
  const std::string& child() const noexcept { return child_; }

  std::size_t size() const noexcept { return values_.size(); }
  bool has_variable(const std::string& name) const;
  std::size_t variable_index(const std::string& name) const;

  // Flat row-major index of a full-scope assignment.
  std::size_t flat_index(std::span<const int> assignment) const;
  double at(std::span<const int> assignment) const { return values_[flat_index(assignment)]; }

  // Deterministic text form (variables, cardinalities, values at 17
  // significant digits) for golden tests.
  std::string dump() const;

 private:
  FactorTable(Kind kind, std::string child, std::vector<std::string> variables,
              std::vector<int> cardinalities, std::vector<double> values);

  void validate() const;

  Kind kind_;
  std::string child_;  // empty unless kind == conditional
  std::vector<std::string> variables_;
  std::vector<int> cardinalities_;
  std::vector<double> values_;
};

// Formats a double with 17 significant digits; shared by dump() and the CSV
// writer so golden files stay stable.
std::string format_double(double value);

}  // namespace naturerisk
