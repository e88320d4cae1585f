#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace naturerisk {

struct Field {
  std::string id;
  double area = 0.0;         // hectares, > 0
  double load_factor = 0.0;  // export propensity per mm of effective rain, >= 0
  std::vector<std::string> candidate_options;  // NbsOption ids, always includes "none" kind
};

enum class NbsKind { none, cultivated_buffer, grassland_buffer };

struct NbsOption {
  std::string id;
  NbsKind kind = NbsKind::none;
  double absorption_max = 0.0;  // in [0,1)
  int establishment_lag = 0;    // intervals until full absorption
  double payment_per_ha_per_interval = 0.0;
};

struct RainfallSeries {
  std::vector<double> values;  // mm per interval, >= 0
  std::string interval_label = "quarterly";
};

// Bond repayment R_t: either a fixed per-step series or a pollution-linked
// rule with a step-up when the step's pollution exceeds the threshold.
struct BondRepayment {
  enum class Kind { fixed, pollution_linked };
  Kind kind = Kind::fixed;
  std::vector<double> fixed_series;
  double base = 0.0;
  double step_up = 0.0;
  double threshold = 0.0;
};

struct FinanceParams {
  double initial_balance = 0.0;
  std::vector<double> income_per_interval;
  BondRepayment bond_repayment;
  std::vector<double> other_expenses;
  double chemical_cost_rate = 0.0;  // currency per pollution unit
  double fine_rate = 0.0;           // currency per lagged pollution unit
  double fine_cap_fraction = 0.0;   // fraction of the previous balance, in [0,1]
  // Fines are divided by this scale before the reputation exponential;
  // 0 means "use the initial balance" (fallback 1 when that is not positive).
  double reputation_scale = 0.0;
};

struct Catchment {
  std::string id;
  std::vector<Field> fields;
  std::vector<NbsOption> options;
  RainfallSeries rainfall;
  FinanceParams finance;
  double rain_exponent = 1.0;  // beta in rain^beta
};

// Field id -> chosen option id.
using NbsAssignment = std::map<std::string, std::string>;

void validate_catchment(const Catchment& catchment);

const NbsOption& find_option(const Catchment& catchment, const std::string& id);

// Absorption ramps linearly from 0 at age 0 to absorption_max at age
// establishment_lag and holds; a zero lag is immediately mature. Zero rain
// short-circuits to zero pollution.
double field_pollution(const Field& field, const NbsOption& option, int age, double rain,
                       double rain_exponent);

// Total pollution from every field during interval t (1-based); an option
// assigned at t=0 has age t-1 during interval t.
double catchment_pollution(const Catchment& catchment, const NbsAssignment& assignment, int t);

double chemical_cost(double pollution, double chemical_cost_rate);

// Fine for the current interval given the previous interval's pollution and
// closing balance: min(fine_rate * pollution_prev, cap_fraction * max(B, 0)).
double fine(double pollution_prev, double balance_prev, double fine_rate,
            double fine_cap_fraction);

// Per-interval scheme cost over all fields.
double nbs_cost(const Catchment& catchment, const NbsAssignment& assignment);

// exp(-sum(fines)/scale); scale must be positive.
double reputation(const std::vector<double>& fines, double scale);

// Mitigation-spend fraction times pollution cleanliness. The fraction is
// nbs/(chemical+nbs); with no spend at all it is 1 when the river is clean
// and 0 otherwise. Cleanliness is 2*sigmoid(-pollution), which is 1 at zero
// pollution; strict_sigmoid restores the raw sigmoid (0.5 at zero).
double water_e_score(double pollution, double chemical, double nbs, bool strict_sigmoid = false);

struct TrajectoryStep {
  int t = 0;
  double pollution = 0.0;
  double chemical = 0.0;
  double fine = 0.0;
  double nbs = 0.0;
  double repayment = 0.0;
  double balance = 0.0;
  double reputation = 1.0;
  double e_score = 1.0;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;  // t = 0..horizon; step 0 is the opening state
  double objective = 0.0;             // sum of B_t over t = 1..horizon
  bool feasible = true;               // B_t >= 0 at every step
  int first_insolvent_step = -1;
  double min_balance = 0.0;
};

Trajectory balance_trajectory(const Catchment& catchment, const NbsAssignment& assignment,
                              const FinanceParams& finance, const RainfallSeries& rainfall,
                              int horizon, bool strict_sigmoid = false);

// Prior over one scalar parameter. Point priors pin the value exactly and are
// excluded from the sampled vector.
struct ParamPrior {
  enum class Kind { point, uniform, normal };
  Kind kind = Kind::point;
  double value = 0.0;  // point
  double low = 0.0;    // uniform
  double high = 0.0;
  double mean = 0.0;  // normal
  double sd = 0.0;
};

struct WaterPriors {
  std::optional<ParamPrior> chemical_cost_rate;
  std::optional<ParamPrior> fine_rate;
  std::optional<ParamPrior> rain_exponent;
  std::map<std::string, ParamPrior> load_factors;  // field id -> prior
};

struct McmcSummary {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;  // sd / sqrt(n)
};

struct WaterMcmcResult {
  std::size_t n_draws = 0;
  double acceptance_rate = 1.0;
  std::optional<std::string> warning;
  bool deterministic = false;  // all priors were point masses; values are exact
  McmcSummary final_reputation;
  McmcSummary final_balance;
  McmcSummary objective;
  McmcSummary chemical_total;
  McmcSummary fine_total;
  std::vector<McmcSummary> e_score_series;  // per step 0..horizon
};

// Pushes parameter uncertainty through the deterministic pipeline with a
// random-walk sampler over the standardized prior space.
WaterMcmcResult expected_outputs_mcmc(const Catchment& catchment, const NbsAssignment& assignment,
                                      const FinanceParams& finance,
                                      const RainfallSeries& rainfall, int horizon,
                                      const WaterPriors& priors, std::size_t n_draws,
                                      std::size_t burn_in, std::uint64_t seed,
                                      double proposal_scale = 0.8, bool strict_sigmoid = false);

// Applies a draw of the uncertain parameters, returning modified copies.
// Shared by the MCMC summaries and the optimizer's per-draw solves.
struct SampledParams {
  Catchment catchment;
  FinanceParams finance;
};
SampledParams apply_params(const Catchment& catchment, const FinanceParams& finance,
                           const WaterPriors& priors, const std::vector<double>& theta);

// Free (non-point) parameter descriptors in deterministic order, the prior
// log-density over the standardized vector, and the standard init. Exposed so
// the optimizer's distribution sampler can share the exact same chain.
struct FreeParam {
  std::string name;  // "chemical_cost_rate", "fine_rate", "rain_exponent", "load_factor:<id>"
  ParamPrior prior;
};
std::vector<FreeParam> free_params(const WaterPriors& priors);
std::vector<double> standardized_init(const std::vector<FreeParam>& params);
double standardized_log_density(const std::vector<FreeParam>& params,
                                const std::vector<double>& u);
std::vector<double> to_theta(const std::vector<FreeParam>& params, const std::vector<double>& u);

// Rejects malformed priors (uniform high < low, normal sd <= 0, negative
// rates) and load-factor priors naming unknown fields.
void validate_priors(const WaterPriors& priors, const Catchment& catchment);

// Mean, sample sd (n-1 denominator) and standard error of the mean.
McmcSummary summarize_samples(const std::vector<double>& samples);

}  // namespace naturerisk
