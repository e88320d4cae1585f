#include "naturerisk/nbs_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "naturerisk/errors.hpp"
#include "naturerisk/mh_sampler.hpp"

namespace naturerisk {

namespace {

struct OptionPlan {
  const NbsOption* option = nullptr;
  std::vector<double> pollution;  // per step t = 1..horizon
  double weighted_cost = 0.0;     // sum_t (T-t+1) * (payment*area + kappa_rho*pollution_t)
};

struct FieldPlan {
  const Field* field = nullptr;
  std::vector<OptionPlan> options;    // ascending weighted cost
  std::vector<double> min_pollution;  // per step, over the candidates
  double min_weighted_cost = 0.0;
};

// Tie order over equal objectives: walk fields in id order; the first
// differing choice prefers the higher absorption ceiling, then the smaller
// option id.
bool tie_better(const Catchment& catchment, const NbsAssignment& a, const NbsAssignment& b) {
  auto ib = b.begin();
  for (auto ia = a.begin(); ia != a.end() && ib != b.end(); ++ia, ++ib) {
    if (ia->second == ib->second) continue;
    const NbsOption& oa = find_option(catchment, ia->second);
    const NbsOption& ob = find_option(catchment, ib->second);
    if (oa.absorption_max != ob.absorption_max) return oa.absorption_max > ob.absorption_max;
    return ia->second < ib->second;
  }
  return false;
}

struct Searcher {
  const Catchment& catchment;
  const FinanceParams& finance;
  const RainfallSeries& rainfall;
  int horizon;
  bool strict_sigmoid;
  bool use_bound;

  std::vector<FieldPlan> plans;
  std::vector<double> weights;  // weights[u] = horizon - u, so index t-1 -> T-t+1
  double const_head = 0.0;      // T*B0 + sum_t w_t*(I_t - other_t)
  std::vector<double> suffix_min_cost;
  std::vector<std::vector<double>> suffix_min_pol;

  NbsAssignment current;
  std::uint64_t evaluated = 0;
  std::optional<OptimalAssignment> best;
  std::optional<Trajectory> worst_trajectory;  // least-violating, by min_balance
  NbsAssignment worst_assignment;

  // Upper bound on the objective over every completion of fields >= i:
  // exact weighted cost for assigned fields, per-field minimum weighted cost
  // for the rest, repayments from a pollution lower bound, fines relaxed to
  // zero (capping makes true fines smaller than any linear estimate, so only
  // zero is a safe floor).
  double bound_at(std::size_t i, double assigned_cost,
                  const std::vector<double>& assigned_pol) const {
    double repay = 0.0;
    for (std::size_t u = 0; u < weights.size(); ++u) {
      double r = 0.0;
      if (finance.bond_repayment.kind == BondRepayment::Kind::fixed) {
        r = finance.bond_repayment.fixed_series[u];
      } else {
        const double pol_lb = assigned_pol[u] + suffix_min_pol[i][u];
        r = finance.bond_repayment.base +
            (pol_lb > finance.bond_repayment.threshold ? finance.bond_repayment.step_up : 0.0);
      }
      repay += weights[u] * r;
    }
    return const_head - assigned_cost - suffix_min_cost[i] - repay;
  }

  void evaluate_leaf() {
    ++evaluated;
    Trajectory traj =
        balance_trajectory(catchment, current, finance, rainfall, horizon, strict_sigmoid);
    if (traj.feasible) {
      if (!best || traj.objective > best->trajectory.objective ||
          (traj.objective == best->trajectory.objective &&
           tie_better(catchment, current, best->assignment))) {
        best = OptimalAssignment{current, std::move(traj), 0, false};
      }
    } else if (!best) {
      if (!worst_trajectory || traj.min_balance > worst_trajectory->min_balance ||
          (traj.min_balance == worst_trajectory->min_balance &&
           tie_better(catchment, current, worst_assignment))) {
        worst_trajectory = std::move(traj);
        worst_assignment = current;
      }
    }
  }

  void dfs(std::size_t i, double assigned_cost, const std::vector<double>& assigned_pol) {
    if (use_bound && best) {
      const double guard = 1e-9 * (1.0 + std::fabs(best->trajectory.objective));
      if (bound_at(i, assigned_cost, assigned_pol) < best->trajectory.objective - guard) return;
    }
    if (i == plans.size()) {
      evaluate_leaf();
      return;
    }
    const FieldPlan& plan = plans[i];
    std::vector<double> child_pol(assigned_pol.size());
    for (const OptionPlan& op : plan.options) {
      current[plan.field->id] = op.option->id;
      for (std::size_t u = 0; u < assigned_pol.size(); ++u) {
        child_pol[u] = assigned_pol[u] + op.pollution[u];
      }
      dfs(i + 1, assigned_cost + op.weighted_cost, child_pol);
    }
    current.erase(plan.field->id);
  }
};

void check_series(const FinanceParams& finance, const RainfallSeries& rainfall, int horizon) {
  const auto need = static_cast<std::size_t>(horizon);
  if (rainfall.values.size() < need) {
    throw ConfigError("optimize: rainfall series shorter than the horizon");
  }
  if (finance.income_per_interval.size() < need) {
    throw ConfigError("optimize: income series shorter than the horizon");
  }
  if (finance.other_expenses.size() < need) {
    throw ConfigError("optimize: other-expenses series shorter than the horizon");
  }
  if (finance.bond_repayment.kind == BondRepayment::Kind::fixed &&
      finance.bond_repayment.fixed_series.size() < need) {
    throw ConfigError("optimize: bond repayment series shorter than the horizon");
  }
}

}  // namespace

OptimalAssignment optimize(const Catchment& catchment, const FinanceParams& finance,
                           const RainfallSeries& rainfall, int horizon,
                           const OptimizeOptions& options) {
  if (horizon < 1) throw InvariantError("optimize: horizon must be >= 1");
  Catchment working = catchment;
  working.finance = finance;
  working.rainfall = rainfall;
  validate_catchment(working);
  check_series(finance, rainfall, horizon);

  const auto steps = static_cast<std::size_t>(horizon);
  Searcher s{working, finance, rainfall, horizon, options.strict_sigmoid, false};
  s.weights.resize(steps);
  for (std::size_t u = 0; u < steps; ++u) {
    s.weights[u] = static_cast<double>(steps - u);
  }
  s.const_head = static_cast<double>(horizon) * finance.initial_balance;
  for (std::size_t u = 0; u < steps; ++u) {
    s.const_head +=
        s.weights[u] * (finance.income_per_interval[u] - finance.other_expenses[u]);
  }

  std::uint64_t total = 1;
  for (const Field& field : working.fields) {
    FieldPlan plan;
    plan.field = &field;
    plan.min_pollution.assign(steps, std::numeric_limits<double>::infinity());
    plan.min_weighted_cost = std::numeric_limits<double>::infinity();
    for (const std::string& option_id : field.candidate_options) {
      OptionPlan op;
      op.option = &find_option(working, option_id);
      op.pollution.resize(steps);
      for (std::size_t u = 0; u < steps; ++u) {
        op.pollution[u] = field_pollution(field, *op.option, static_cast<int>(u),
                                          rainfall.values[u], working.rain_exponent);
        op.weighted_cost +=
            s.weights[u] * (op.option->payment_per_ha_per_interval * field.area +
                            finance.chemical_cost_rate * op.pollution[u]);
        plan.min_pollution[u] = std::min(plan.min_pollution[u], op.pollution[u]);
      }
      plan.min_weighted_cost = std::min(plan.min_weighted_cost, op.weighted_cost);
      plan.options.push_back(std::move(op));
    }
    std::sort(plan.options.begin(), plan.options.end(),
              [](const OptionPlan& a, const OptionPlan& b) {
                if (a.weighted_cost != b.weighted_cost) return a.weighted_cost < b.weighted_cost;
                return a.option->id < b.option->id;
              });
    const auto n = static_cast<std::uint64_t>(plan.options.size());
    total = total > std::numeric_limits<std::uint64_t>::max() / n
                ? std::numeric_limits<std::uint64_t>::max()
                : total * n;
    s.plans.push_back(std::move(plan));
  }
  std::sort(s.plans.begin(), s.plans.end(), [](const FieldPlan& a, const FieldPlan& b) {
    if (a.field->area != b.field->area) return a.field->area > b.field->area;
    return a.field->id < b.field->id;
  });

  s.use_bound = total > options.exhaustive_cap;
  s.suffix_min_cost.assign(s.plans.size() + 1, 0.0);
  s.suffix_min_pol.assign(s.plans.size() + 1, std::vector<double>(steps, 0.0));
  for (std::size_t i = s.plans.size(); i-- > 0;) {
    s.suffix_min_cost[i] = s.suffix_min_cost[i + 1] + s.plans[i].min_weighted_cost;
    for (std::size_t u = 0; u < steps; ++u) {
      s.suffix_min_pol[i][u] = s.suffix_min_pol[i + 1][u] + s.plans[i].min_pollution[u];
    }
  }

  s.dfs(0, 0.0, std::vector<double>(steps, 0.0));

  if (!s.best) {
    std::vector<std::pair<std::string, std::string>> violation(s.worst_assignment.begin(),
                                                               s.worst_assignment.end());
    throw InfeasibleError("optimize: no assignment keeps the balance non-negative at every step",
                          s.worst_trajectory->first_insolvent_step, std::move(violation));
  }
  s.best->evaluated = s.evaluated;
  s.best->used_branch_and_bound = s.use_bound;
  return *s.best;
}

std::string assignment_key(const NbsAssignment& assignment) {
  std::string out;
  for (const auto& [field, option] : assignment) {
    if (!out.empty()) out += ",";
    out += field + "=" + option;
  }
  return out;
}

OptimumDistribution optimum_distribution(const Catchment& catchment,
                                         const FinanceParams& finance,
                                         const RainfallSeries& rainfall, int horizon,
                                         const WaterPriors& priors, std::size_t n_draws,
                                         std::size_t burn_in, std::uint64_t seed,
                                         double proposal_scale, const OptimizeOptions& options) {
  if (n_draws < 1) throw ConfigError("optimum_distribution: n_draws must be >= 1");
  validate_priors(priors, catchment);
  const std::vector<FreeParam> free = free_params(priors);

  OptimumDistribution out;
  out.n_draws = n_draws;

  const auto solve_one = [&](const std::vector<double>& theta,
                             std::uint64_t count) -> std::optional<double> {
    const SampledParams params = apply_params(catchment, finance, priors, theta);
    try {
      const OptimalAssignment solved =
          optimize(params.catchment, params.finance, rainfall, horizon, options);
      out.assignment_counts[assignment_key(solved.assignment)] += count;
      return solved.trajectory.objective;
    } catch (const InfeasibleError&) {
      out.infeasible_draws += count;
      return std::nullopt;
    }
  };

  if (free.empty()) {
    out.deterministic = true;
    if (const std::optional<double> objective = solve_one({}, n_draws)) {
      out.objective = {*objective, 0.0, 0.0};
    }
    return out;
  }

  const auto log_density = [&free](const std::vector<double>& u) {
    return standardized_log_density(free, u);
  };
  const SampleBatch batch =
      mh_sample(log_density, standardized_init(free), proposal_scale, n_draws, burn_in, seed);
  out.acceptance_rate = batch.acceptance_rate;
  out.warning = batch.warning;

  std::vector<double> objectives;
  for (const std::vector<double>& u : batch.draws) {
    if (const std::optional<double> objective = solve_one(to_theta(free, u), 1)) {
      objectives.push_back(*objective);
    }
  }
  out.objective = summarize_samples(objectives);
  return out;
}

}  // namespace naturerisk
