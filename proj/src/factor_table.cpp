#include "naturerisk/factor_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "naturerisk/errors.hpp"

namespace naturerisk {

namespace {
constexpr double kSumTolerance = 1e-9;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

FactorTable::FactorTable(Kind kind, std::string child, std::vector<std::string> variables,
                         std::vector<int> cardinalities, std::vector<double> values)
    : kind_(kind),
      child_(std::move(child)),
      variables_(std::move(variables)),
      cardinalities_(std::move(cardinalities)),
      values_(std::move(values)) {
  validate();
}

FactorTable FactorTable::conditional(std::string child, std::vector<std::string> variables,
                                     std::vector<int> cardinalities, std::vector<double> values) {
  return FactorTable(Kind::conditional, std::move(child), std::move(variables),
                     std::move(cardinalities), std::move(values));
}

FactorTable FactorTable::joint(std::vector<std::string> variables, std::vector<int> cardinalities,
                               std::vector<double> values) {
  return FactorTable(Kind::joint_potential, {}, std::move(variables), std::move(cardinalities),
                     std::move(values));
}

void FactorTable::validate() const {
  if (variables_.size() != cardinalities_.size()) {
    throw InvariantError("factor table: variable/cardinality count mismatch");
  }
  if (kind_ == Kind::conditional && !has_variable(child_)) {
    throw InvariantError("factor table: child '" + child_ + "' is not in the scope");
  }
  std::size_t expected = 1;
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (cardinalities_[i] <= 0) {
      throw InvariantError("factor table: non-positive cardinality for variable '" +
                           variables_[i] + "'");
    }
    for (std::size_t j = i + 1; j < variables_.size(); ++j) {
      if (variables_[i] == variables_[j]) {
        throw InvariantError("factor table: duplicate variable '" + variables_[i] + "'");
      }
    }
    expected *= static_cast<std::size_t>(cardinalities_[i]);
  }
  if (values_.size() != expected) {
    throw InvariantError("factor table: value tensor has " + std::to_string(values_.size()) +
                         " entries, expected " + std::to_string(expected));
  }
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvariantError("factor table: values must be finite and non-negative");
    }
  }
  if (kind_ == Kind::conditional) {
    const std::size_t child_pos = variable_index(child_);
    const int child_card = cardinalities_[child_pos];
    std::size_t child_stride = 1;
    for (std::size_t i = child_pos + 1; i < variables_.size(); ++i) {
      child_stride *= static_cast<std::size_t>(cardinalities_[i]);
    }
    const std::size_t block = child_stride * static_cast<std::size_t>(child_card);
    for (std::size_t base = 0; base < values_.size(); base += block) {
      for (std::size_t offset = 0; offset < child_stride; ++offset) {
        double sum = 0.0;
        for (int c = 0; c < child_card; ++c) {
          sum += values_[base + offset + static_cast<std::size_t>(c) * child_stride];
        }
        if (std::abs(sum - 1.0) > kSumTolerance) {
          throw InvariantError("factor table: conditional over '" + child_ +
                               "' sums to " + format_double(sum) + ", expected 1");
        }
      }
    }
  }
}

bool FactorTable::has_variable(const std::string& name) const {
  return std::find(variables_.begin(), variables_.end(), name) != variables_.end();
}

std::size_t FactorTable::variable_index(const std::string& name) const {
  const auto it = std::find(variables_.begin(), variables_.end(), name);
  if (it == variables_.end()) {
    throw ConfigError("factor table: unknown variable '" + name + "'");
  }
  return static_cast<std::size_t>(it - variables_.begin());
}

std::size_t FactorTable::flat_index(std::span<const int> assignment) const {
  std::size_t index = 0;
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    index = index * static_cast<std::size_t>(cardinalities_[i]) +
            static_cast<std::size_t>(assignment[i]);
  }
  return index;
}

std::string FactorTable::dump() const {
  std::ostringstream out;
  out << (kind_ == Kind::conditional ? "conditional(" + child_ + ")" : "joint") << "\n";
  out << "variables:";
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    out << ' ' << variables_[i] << '[' << cardinalities_[i] << ']';
  }
  out << "\nvalues:";
  for (double v : values_) {
    out << ' ' << format_double(v);
  }
  out << "\n";
  return out.str();
}

}  // namespace naturerisk
