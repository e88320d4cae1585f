#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace naturerisk {

// Exit-code family shared by the library and the CLI. The numeric values are
// part of the external contract: the CLI maps a caught error directly to its
// process exit status.
enum class errc : int {
  parse = 2,
  config = 3,
  invariant = 4,
  infeasible = 5,
  impossible_evidence = 6,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

// Input file could not be parsed as JSON at all.
class ParseError : public Error {
 public:
  explicit ParseError(std::string message) : Error(errc::parse, std::move(message)) {}
};

// Structural misuse: missing/mistyped fields, unknown ids, unknown variables,
// series-length mismatches, oracle state-space cap exceeded.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::string message) : Error(errc::config, std::move(message)) {}
};

// Well-formed data violating a numeric model invariant (distribution sums,
// probability ranges, negative quantities).
class InvariantError : public Error {
 public:
  explicit InvariantError(std::string message) : Error(errc::invariant, std::move(message)) {}
};

// Evidence with probability zero under the model.
class ImpossibleEvidenceError : public Error {
 public:
  explicit ImpossibleEvidenceError(std::string message)
      : Error(errc::impossible_evidence, std::move(message)) {}
};

// Every likelihood hypothesis received zero mass during a Bayes update.
class ContradictoryEvidenceError : public Error {
 public:
  explicit ContradictoryEvidenceError(std::string message)
      : Error(errc::impossible_evidence, std::move(message)) {}
};

// A scenario edit removed every sourcing option that renormalization needs.
class NoValidSourcingError : public Error {
 public:
  explicit NoValidSourcingError(std::string message)
      : Error(errc::infeasible, std::move(message)) {}
};

// A scenario edit or optimisation left no valid configuration. Carries enough
// structure for the CLI to render an infeasibility report.
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::string message, int first_insolvent_step,
                  std::vector<std::pair<std::string, std::string>> best_violation = {})
      : Error(errc::infeasible, std::move(message)),
        first_insolvent_step_(first_insolvent_step),
        best_violation_(std::move(best_violation)) {}

  int first_insolvent_step() const noexcept { return first_insolvent_step_; }
  const std::vector<std::pair<std::string, std::string>>& best_violation() const noexcept {
    return best_violation_;
  }

 private:
  int first_insolvent_step_;
  std::vector<std::pair<std::string, std::string>> best_violation_;
};

// One load-time validation finding, located by a JSON pointer.
struct ValidationIssue {
  std::string pointer;  // e.g. "/farms/0/state_given_car_true"
  std::string code;     // machine-readable, e.g. "E_SUM" or "E_MISSING"
  std::string message;
};

}  // namespace naturerisk
