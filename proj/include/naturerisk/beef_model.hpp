#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "naturerisk/discrete_model.hpp"

namespace naturerisk {

// Probability that a farm's self-declared land registry report is accurate.
struct CarAssessment {
  double p_car_true = 0.0;
};

struct Farm {
  std::string id;
  CarAssessment car_assessment;
  std::vector<double> state_given_car_true;
  std::vector<double> state_given_car_false;
  // (source farm id, probability that cattle arriving here originated there).
  // The residual mass is self-origination; a farm with no sources
  // self-originates with probability exactly 1.
  std::vector<std::pair<std::string, double>> laundering_sources;
};

// Per-state attachments. The farm state is a finite label; everything the
// arithmetic needs from the underlying land features is carried by the
// distributions attached to each state.
struct FarmStateModel {
  std::vector<std::string> state_labels;
  std::vector<double> p_compliance_given_state;
  std::vector<std::vector<double>> nrp_given_state;     // [state][bin]
  std::vector<std::vector<double>> cattle_given_state;  // [state][level]
  std::vector<double> nrp_bins;                         // midpoints, strictly increasing in [0,1]
  std::vector<int> cattle_levels;                       // head of cattle, non-negative
};

struct SupplyChainGraph {
  std::vector<std::string> suppliers;
  std::vector<std::string> abattoirs;
  std::vector<Farm> farms;
  // Sourcing rows; entries are (target id, probability). Rows normally sum to
  // one, but scenario edits may leave a supplier row sub-normalized.
  std::map<std::string, std::vector<std::pair<std::string, double>>> sourcing_b_to_a;
  std::map<std::string, std::vector<std::pair<std::string, double>>> sourcing_a_to_f;
  double return_per_head = 1.0;  // currency units per head of cattle
};

// Full invariant check: distribution sums, id resolution, dimension
// consistency against the state model, laundering acyclicity. The JSON loader
// runs its own pointer-precise pass first; this is the domain backstop.
void validate_graph(const SupplyChainGraph& graph, const FarmStateModel& states);

// CAR mixture: p_car_true * state_given_car_true + (1-p) * state_given_car_false.
std::vector<double> farm_state_distribution(const Farm& farm);

// Which leaf factors to attach. The sourcing spine A, F_D, F, S is always
// emitted; dropping unused leaves keeps elimination cheap. state_weights, when
// non-empty, multiplies the state rows (survival projection); any weight
// different from exactly 1 turns the state factor into a sub-normalized
// potential.
struct ChainParts {
  bool compliance = true;  // L
  bool nrp = true;         // N
  bool cattle = true;      // C
  std::vector<double> state_weights;
};

// A compiled supplier chain: the discrete model plus the index legends that
// map variable states back to ids. proper is false when any factor carries
// sub-normalized mass; scoring then switches from normalized marginals to raw
// mass so the missing sourcing contributes neither compliance nor return.
struct CompiledChain {
  DiscreteModel model;
  std::vector<std::string> abattoir_ids;
  std::vector<std::string> farm_ids;
  std::vector<std::string> state_labels;
  std::vector<double> nrp_bins;
  std::vector<int> cattle_levels;
  bool proper = true;
};

CompiledChain compile_chain(const SupplyChainGraph& graph, const FarmStateModel& states,
                            const std::string& supplier, const ChainParts& parts = {});

double compliance_probability(const SupplyChainGraph& graph, const FarmStateModel& states,
                              const std::string& supplier);

// Normalized marginal over the NRP bins.
std::vector<double> nrp_distribution(const SupplyChainGraph& graph, const FarmStateModel& states,
                                     const std::string& supplier);

double expected_return(const SupplyChainGraph& graph, const FarmStateModel& states,
                       const std::string& supplier);

double e_score_forest(const SupplyChainGraph& graph, const FarmStateModel& states,
                      const std::string& supplier);

double e_score_nrp(const SupplyChainGraph& graph, const FarmStateModel& states,
                   const std::string& supplier);

enum class EScoreKind { forest, nrp };

// Score conditioned on passing through a named abattoir or origin farm.
double actor_e_score(const SupplyChainGraph& graph, const FarmStateModel& states,
                     const std::string& supplier, const std::string& actor, EScoreKind kind);

}  // namespace naturerisk
