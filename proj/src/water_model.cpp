#include "naturerisk/water_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "naturerisk/errors.hpp"
#include "naturerisk/mh_sampler.hpp"

namespace naturerisk {

namespace {

void check_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw InvariantError(what + " must be finite");
}

void check_nonnegative(double v, const std::string& what) {
  check_finite(v, what);
  if (v < 0.0) throw InvariantError(what + " must be non-negative");
}

const Field& find_field(const Catchment& catchment, const std::string& id) {
  const auto it = std::find_if(catchment.fields.begin(), catchment.fields.end(),
                               [&](const Field& f) { return f.id == id; });
  if (it == catchment.fields.end()) {
    throw ConfigError("catchment: unknown field '" + id + "'");
  }
  return *it;
}

const NbsOption& chosen_option(const Catchment& catchment, const Field& field,
                               const NbsAssignment& assignment) {
  const auto it = assignment.find(field.id);
  if (it == assignment.end()) {
    throw ConfigError("assignment: field '" + field.id + "' has no option assigned");
  }
  if (std::find(field.candidate_options.begin(), field.candidate_options.end(), it->second) ==
      field.candidate_options.end()) {
    throw ConfigError("assignment: option '" + it->second + "' is not a candidate for field '" +
                      field.id + "'");
  }
  return find_option(catchment, it->second);
}

}  // namespace

const NbsOption& find_option(const Catchment& catchment, const std::string& id) {
  const auto it = std::find_if(catchment.options.begin(), catchment.options.end(),
                               [&](const NbsOption& o) { return o.id == id; });
  if (it == catchment.options.end()) {
    throw ConfigError("catchment: unknown NbS option '" + id + "'");
  }
  return *it;
}

void validate_catchment(const Catchment& catchment) {
  if (catchment.fields.empty()) throw ConfigError("catchment: no fields");
  if (catchment.options.empty()) throw ConfigError("catchment: no NbS options");

  std::set<std::string> option_ids;
  for (const NbsOption& option : catchment.options) {
    if (!option_ids.insert(option.id).second) {
      throw ConfigError("catchment: duplicate option id '" + option.id + "'");
    }
    check_finite(option.absorption_max, "option '" + option.id + "' absorption_max");
    if (option.absorption_max < 0.0 || option.absorption_max >= 1.0) {
      throw InvariantError("option '" + option.id + "': absorption_max must lie in [0,1)");
    }
    if (option.establishment_lag < 0) {
      throw InvariantError("option '" + option.id + "': establishment_lag must be >= 0");
    }
    check_nonnegative(option.payment_per_ha_per_interval, "option '" + option.id + "' payment");
    if (option.kind == NbsKind::none &&
        (option.absorption_max != 0.0 || option.payment_per_ha_per_interval != 0.0)) {
      throw InvariantError("option '" + option.id +
                           "': a none option must have zero absorption and zero payment");
    }
  }

  std::set<std::string> field_ids;
  for (const Field& field : catchment.fields) {
    if (!field_ids.insert(field.id).second) {
      throw ConfigError("catchment: duplicate field id '" + field.id + "'");
    }
    check_finite(field.area, "field '" + field.id + "' area");
    if (field.area <= 0.0) {
      throw InvariantError("field '" + field.id + "': area must be positive");
    }
    check_nonnegative(field.load_factor, "field '" + field.id + "' load_factor");
    if (field.candidate_options.empty()) {
      throw ConfigError("field '" + field.id + "': no candidate options");
    }
    bool has_none = false;
    std::set<std::string> seen;
    for (const std::string& oid : field.candidate_options) {
      if (!seen.insert(oid).second) {
        throw ConfigError("field '" + field.id + "': duplicate candidate '" + oid + "'");
      }
      const NbsOption& option = find_option(catchment, oid);
      if (option.kind == NbsKind::none) has_none = true;
    }
    if (!has_none) {
      throw ConfigError("field '" + field.id + "': candidates must include a none option");
    }
  }

  for (double rain : catchment.rainfall.values) check_nonnegative(rain, "rainfall value");
  check_nonnegative(catchment.rain_exponent, "rain exponent");

  const FinanceParams& fin = catchment.finance;
  check_finite(fin.initial_balance, "initial balance");
  for (double v : fin.income_per_interval) check_finite(v, "income value");
  for (double v : fin.other_expenses) check_finite(v, "other-expenses value");
  check_nonnegative(fin.chemical_cost_rate, "chemical cost rate");
  check_nonnegative(fin.fine_rate, "fine rate");
  check_finite(fin.fine_cap_fraction, "fine cap fraction");
  if (fin.fine_cap_fraction < 0.0 || fin.fine_cap_fraction > 1.0) {
    throw InvariantError("fine cap fraction must lie in [0,1]");
  }
  check_nonnegative(fin.reputation_scale, "reputation scale");
  if (fin.bond_repayment.kind == BondRepayment::Kind::fixed) {
    for (double v : fin.bond_repayment.fixed_series) check_nonnegative(v, "bond repayment");
  } else {
    check_nonnegative(fin.bond_repayment.base, "bond repayment base");
    check_nonnegative(fin.bond_repayment.step_up, "bond repayment step-up");
    check_nonnegative(fin.bond_repayment.threshold, "bond repayment threshold");
  }
}

double field_pollution(const Field& field, const NbsOption& option, int age, double rain,
                       double rain_exponent) {
  if (age < 0) throw InvariantError("field_pollution: age must be >= 0");
  check_nonnegative(rain, "rain");
  check_nonnegative(rain_exponent, "rain exponent");
  if (rain == 0.0) return 0.0;
  const double ramp = option.establishment_lag == 0
                          ? 1.0
                          : std::min(1.0, static_cast<double>(age) /
                                              static_cast<double>(option.establishment_lag));
  const double absorption = option.absorption_max * ramp;
  return field.area * field.load_factor * std::pow(rain, rain_exponent) * (1.0 - absorption);
}

double catchment_pollution(const Catchment& catchment, const NbsAssignment& assignment, int t) {
  if (t < 1) throw InvariantError("catchment_pollution: t must be >= 1");
  if (static_cast<std::size_t>(t) > catchment.rainfall.values.size()) {
    throw ConfigError("catchment_pollution: step " + std::to_string(t) +
                      " beyond the rainfall series");
  }
  const double rain = catchment.rainfall.values[static_cast<std::size_t>(t - 1)];
  double total = 0.0;
  for (const Field& field : catchment.fields) {
    total += field_pollution(field, chosen_option(catchment, field, assignment), t - 1, rain,
                             catchment.rain_exponent);
  }
  return total;
}

double chemical_cost(double pollution, double chemical_cost_rate) {
  check_nonnegative(pollution, "pollution");
  check_nonnegative(chemical_cost_rate, "chemical cost rate");
  return chemical_cost_rate * pollution;
}

double fine(double pollution_prev, double balance_prev, double fine_rate,
            double fine_cap_fraction) {
  check_nonnegative(pollution_prev, "previous pollution");
  check_finite(balance_prev, "previous balance");
  check_nonnegative(fine_rate, "fine rate");
  if (fine_cap_fraction < 0.0 || fine_cap_fraction > 1.0) {
    throw InvariantError("fine cap fraction must lie in [0,1]");
  }
  return std::min(fine_rate * pollution_prev, fine_cap_fraction * std::max(balance_prev, 0.0));
}

double nbs_cost(const Catchment& catchment, const NbsAssignment& assignment) {
  double total = 0.0;
  for (const Field& field : catchment.fields) {
    total += chosen_option(catchment, field, assignment).payment_per_ha_per_interval * field.area;
  }
  return total;
}

double reputation(const std::vector<double>& fines, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InvariantError("reputation: scale must be positive");
  }
  double total = 0.0;
  for (double f : fines) {
    check_nonnegative(f, "fine");
    total += f / scale;
  }
  return std::exp(-total);
}

double water_e_score(double pollution, double chemical, double nbs, bool strict_sigmoid) {
  check_nonnegative(pollution, "pollution");
  check_nonnegative(chemical, "chemical cost");
  check_nonnegative(nbs, "NbS cost");
  double fraction = 0.0;
  if (chemical + nbs == 0.0) {
    fraction = pollution == 0.0 ? 1.0 : 0.0;
  } else {
    fraction = nbs / (chemical + nbs);
  }
  const double sigmoid = 1.0 / (1.0 + std::exp(pollution));
  const double cleanliness = strict_sigmoid ? sigmoid : 2.0 * sigmoid;
  return fraction * cleanliness;
}

Trajectory balance_trajectory(const Catchment& catchment, const NbsAssignment& assignment,
                              const FinanceParams& finance, const RainfallSeries& rainfall,
                              int horizon, bool strict_sigmoid) {
  if (horizon < 1) throw InvariantError("balance_trajectory: horizon must be >= 1");
  const auto need = static_cast<std::size_t>(horizon);
  if (rainfall.values.size() < need) {
    throw ConfigError("balance_trajectory: rainfall series shorter than the horizon");
  }
  if (finance.income_per_interval.size() < need) {
    throw ConfigError("balance_trajectory: income series shorter than the horizon");
  }
  if (finance.other_expenses.size() < need) {
    throw ConfigError("balance_trajectory: other-expenses series shorter than the horizon");
  }
  if (finance.bond_repayment.kind == BondRepayment::Kind::fixed &&
      finance.bond_repayment.fixed_series.size() < need) {
    throw ConfigError("balance_trajectory: bond repayment series shorter than the horizon");
  }

  // A working catchment that carries the caller's rainfall so pollution and
  // the series checks agree.
  Catchment working = catchment;
  working.rainfall = rainfall;

  const double scale = finance.reputation_scale > 0.0
                           ? finance.reputation_scale
                           : (finance.initial_balance > 0.0 ? finance.initial_balance : 1.0);
  const double step_nbs = nbs_cost(working, assignment);

  Trajectory out;
  out.steps.reserve(need + 1);
  TrajectoryStep start;
  start.t = 0;
  start.balance = finance.initial_balance;
  start.reputation = 1.0;
  start.e_score = water_e_score(0.0, 0.0, 0.0, strict_sigmoid);
  out.steps.push_back(start);

  double fines_normalized = 0.0;
  double prev_pollution = 0.0;
  for (int t = 1; t <= horizon; ++t) {
    const TrajectoryStep& prev = out.steps.back();
    TrajectoryStep step;
    step.t = t;
    step.pollution = catchment_pollution(working, assignment, t);
    step.chemical = chemical_cost(step.pollution, finance.chemical_cost_rate);
    step.nbs = step_nbs;
    step.fine = t == 1 ? 0.0
                       : fine(prev_pollution, prev.balance, finance.fine_rate,
                              finance.fine_cap_fraction);
    if (finance.bond_repayment.kind == BondRepayment::Kind::fixed) {
      step.repayment = finance.bond_repayment.fixed_series[static_cast<std::size_t>(t - 1)];
    } else {
      step.repayment = finance.bond_repayment.base +
                       (step.pollution > finance.bond_repayment.threshold
                            ? finance.bond_repayment.step_up
                            : 0.0);
    }
    step.balance = prev.balance + finance.income_per_interval[static_cast<std::size_t>(t - 1)] -
                   step.nbs - step.chemical - step.repayment - step.fine -
                   finance.other_expenses[static_cast<std::size_t>(t - 1)];
    fines_normalized += step.fine / scale;
    step.reputation = std::exp(-fines_normalized);
    step.e_score = water_e_score(step.pollution, step.chemical, step.nbs, strict_sigmoid);
    prev_pollution = step.pollution;
    out.steps.push_back(step);
  }

  out.min_balance = std::numeric_limits<double>::infinity();
  for (const TrajectoryStep& step : out.steps) {
    if (step.t >= 1) out.objective += step.balance;
    if (step.balance < out.min_balance) out.min_balance = step.balance;
    if (step.balance < 0.0 && out.feasible) {
      out.feasible = false;
      out.first_insolvent_step = step.t;
    }
  }
  return out;
}

std::vector<FreeParam> free_params(const WaterPriors& priors) {
  std::vector<FreeParam> out;
  const auto consider = [&out](const std::optional<ParamPrior>& prior, const std::string& name) {
    if (!prior.has_value()) return;
    if (prior->kind == ParamPrior::Kind::point) return;
    if (prior->kind == ParamPrior::Kind::uniform && prior->low == prior->high) return;
    out.push_back({name, *prior});
  };
  consider(priors.chemical_cost_rate, "chemical_cost_rate");
  consider(priors.fine_rate, "fine_rate");
  consider(priors.rain_exponent, "rain_exponent");
  for (const auto& [field_id, prior] : priors.load_factors) {
    consider(prior, "load_factor:" + field_id);
  }
  return out;
}

namespace {

void check_prior(const ParamPrior& prior, const std::string& name) {
  switch (prior.kind) {
    case ParamPrior::Kind::point:
      check_nonnegative(prior.value, "prior '" + name + "' value");
      break;
    case ParamPrior::Kind::uniform:
      check_nonnegative(prior.low, "prior '" + name + "' low");
      check_finite(prior.high, "prior '" + name + "' high");
      if (prior.high < prior.low) {
        throw InvariantError("prior '" + name + "': high must be >= low");
      }
      break;
    case ParamPrior::Kind::normal:
      check_nonnegative(prior.mean, "prior '" + name + "' mean");
      check_finite(prior.sd, "prior '" + name + "' sd");
      if (!(prior.sd > 0.0)) {
        throw InvariantError("prior '" + name + "': sd must be positive");
      }
      break;
  }
}

double prior_theta(const ParamPrior& prior, double u) {
  switch (prior.kind) {
    case ParamPrior::Kind::point:
      return prior.value;
    case ParamPrior::Kind::uniform:
      return prior.low + (prior.high - prior.low) * u;
    case ParamPrior::Kind::normal:
      return prior.mean + prior.sd * u;
  }
  return prior.value;
}

}  // namespace

std::vector<double> standardized_init(const std::vector<FreeParam>& params) {
  std::vector<double> init;
  init.reserve(params.size());
  for (const FreeParam& p : params) {
    init.push_back(p.prior.kind == ParamPrior::Kind::uniform ? 0.5 : 0.0);
  }
  return init;
}

double standardized_log_density(const std::vector<FreeParam>& params,
                                const std::vector<double>& u) {
  if (u.size() != params.size()) {
    throw ConfigError("standardized_log_density: dimension mismatch");
  }
  double logp = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ParamPrior& prior = params[i].prior;
    const double theta = prior_theta(prior, u[i]);
    if (theta < 0.0) return -std::numeric_limits<double>::infinity();
    switch (prior.kind) {
      case ParamPrior::Kind::uniform:
        if (u[i] < 0.0 || u[i] > 1.0) return -std::numeric_limits<double>::infinity();
        break;
      case ParamPrior::Kind::normal:
        logp += -0.5 * u[i] * u[i];
        break;
      case ParamPrior::Kind::point:
        break;
    }
  }
  return logp;
}

std::vector<double> to_theta(const std::vector<FreeParam>& params, const std::vector<double>& u) {
  if (u.size() != params.size()) {
    throw ConfigError("to_theta: dimension mismatch");
  }
  std::vector<double> theta;
  theta.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    theta.push_back(prior_theta(params[i].prior, u[i]));
  }
  return theta;
}

SampledParams apply_params(const Catchment& catchment, const FinanceParams& finance,
                           const WaterPriors& priors, const std::vector<double>& theta) {
  SampledParams out{catchment, finance};
  const std::vector<FreeParam> free = free_params(priors);
  if (theta.size() != free.size()) {
    throw ConfigError("apply_params: expected " + std::to_string(free.size()) +
                      " free parameter values, got " + std::to_string(theta.size()));
  }

  std::map<std::string, double> values;
  std::size_t next = 0;
  const auto pin = [&](const std::optional<ParamPrior>& prior, const std::string& name) {
    if (!prior.has_value()) return;
    check_prior(*prior, name);
    if (prior->kind == ParamPrior::Kind::point) {
      values[name] = prior->value;
    } else if (prior->kind == ParamPrior::Kind::uniform && prior->low == prior->high) {
      values[name] = prior->low;
    } else {
      values[name] = theta[next++];
    }
  };
  pin(priors.chemical_cost_rate, "chemical_cost_rate");
  pin(priors.fine_rate, "fine_rate");
  pin(priors.rain_exponent, "rain_exponent");
  for (const auto& [field_id, prior] : priors.load_factors) {
    find_field(catchment, field_id);  // reject unknown ids
    pin(prior, "load_factor:" + field_id);
  }

  if (const auto it = values.find("chemical_cost_rate"); it != values.end()) {
    out.finance.chemical_cost_rate = it->second;
    out.catchment.finance.chemical_cost_rate = it->second;
  }
  if (const auto it = values.find("fine_rate"); it != values.end()) {
    out.finance.fine_rate = it->second;
    out.catchment.finance.fine_rate = it->second;
  }
  if (const auto it = values.find("rain_exponent"); it != values.end()) {
    out.catchment.rain_exponent = it->second;
  }
  for (Field& field : out.catchment.fields) {
    const auto it = values.find("load_factor:" + field.id);
    if (it != values.end()) field.load_factor = it->second;
  }
  return out;
}

void validate_priors(const WaterPriors& priors, const Catchment& catchment) {
  if (priors.chemical_cost_rate) check_prior(*priors.chemical_cost_rate, "chemical_cost_rate");
  if (priors.fine_rate) check_prior(*priors.fine_rate, "fine_rate");
  if (priors.rain_exponent) check_prior(*priors.rain_exponent, "rain_exponent");
  for (const auto& [field_id, prior] : priors.load_factors) {
    find_field(catchment, field_id);
    check_prior(prior, "load_factor:" + field_id);
  }
}

McmcSummary summarize_samples(const std::vector<double>& samples) {
  McmcSummary s;
  if (samples.empty()) return s;
  const double n = static_cast<double>(samples.size());
  double total = 0.0;
  for (double v : samples) total += v;
  s.mean = total / n;
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double v : samples) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (n - 1.0));
    s.se = s.sd / std::sqrt(n);
  }
  return s;
}

namespace {

McmcSummary exact_summary(double value) { return {value, 0.0, 0.0}; }

}  // namespace

WaterMcmcResult expected_outputs_mcmc(const Catchment& catchment, const NbsAssignment& assignment,
                                      const FinanceParams& finance,
                                      const RainfallSeries& rainfall, int horizon,
                                      const WaterPriors& priors, std::size_t n_draws,
                                      std::size_t burn_in, std::uint64_t seed,
                                      double proposal_scale, bool strict_sigmoid) {
  validate_priors(priors, catchment);
  const std::vector<FreeParam> free = free_params(priors);
  WaterMcmcResult result;
  result.n_draws = n_draws;

  if (free.empty()) {
    const SampledParams params = apply_params(catchment, finance, priors, {});
    const Trajectory traj = balance_trajectory(params.catchment, assignment, params.finance,
                                               rainfall, horizon, strict_sigmoid);
    result.deterministic = true;
    result.acceptance_rate = 1.0;
    result.final_reputation = exact_summary(traj.steps.back().reputation);
    result.final_balance = exact_summary(traj.steps.back().balance);
    result.objective = exact_summary(traj.objective);
    double chem = 0.0, fines = 0.0;
    for (const TrajectoryStep& step : traj.steps) {
      chem += step.chemical;
      fines += step.fine;
      result.e_score_series.push_back(exact_summary(step.e_score));
    }
    result.chemical_total = exact_summary(chem);
    result.fine_total = exact_summary(fines);
    return result;
  }

  const auto log_density = [&free](const std::vector<double>& u) {
    return standardized_log_density(free, u);
  };
  const SampleBatch batch =
      mh_sample(log_density, standardized_init(free), proposal_scale, n_draws, burn_in, seed);
  result.acceptance_rate = batch.acceptance_rate;
  result.warning = batch.warning;

  std::vector<double> reputations, balances, objectives, chems, fines;
  std::vector<std::vector<double>> e_scores(static_cast<std::size_t>(horizon) + 1);
  for (const std::vector<double>& u : batch.draws) {
    const SampledParams params =
        apply_params(catchment, finance, priors, to_theta(free, u));
    const Trajectory traj = balance_trajectory(params.catchment, assignment, params.finance,
                                               rainfall, horizon, strict_sigmoid);
    reputations.push_back(traj.steps.back().reputation);
    balances.push_back(traj.steps.back().balance);
    objectives.push_back(traj.objective);
    double chem = 0.0, fine_sum = 0.0;
    for (const TrajectoryStep& step : traj.steps) {
      chem += step.chemical;
      fine_sum += step.fine;
      e_scores[static_cast<std::size_t>(step.t)].push_back(step.e_score);
    }
    chems.push_back(chem);
    fines.push_back(fine_sum);
  }

  result.final_reputation = summarize_samples(reputations);
  result.final_balance = summarize_samples(balances);
  result.objective = summarize_samples(objectives);
  result.chemical_total = summarize_samples(chems);
  result.fine_total = summarize_samples(fines);
  for (const auto& series : e_scores) result.e_score_series.push_back(summarize_samples(series));
  return result;
}

}  // namespace naturerisk
