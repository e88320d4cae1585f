#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "naturerisk/errors.hpp"
#include "naturerisk/nbs_optimizer.hpp"
#include "naturerisk/water_model.hpp"
#include "random_water.hpp"

using namespace naturerisk;
using testing::make_random_catchment;

namespace {

NbsOption make_option(const std::string& id, NbsKind kind, double absorption, int lag,
                      double payment) {
  NbsOption o;
  o.id = id;
  o.kind = kind;
  o.absorption_max = absorption;
  o.establishment_lag = lag;
  o.payment_per_ha_per_interval = payment;
  return o;
}

Field make_field(const std::string& id, double area, double load,
                 std::vector<std::string> candidates) {
  Field f;
  f.id = id;
  f.area = area;
  f.load_factor = load;
  f.candidate_options = std::move(candidates);
  return f;
}

void fill_series(FinanceParams& fin, int n, double income, double repayment, double other) {
  fin.income_per_interval.assign(static_cast<std::size_t>(n), income);
  fin.bond_repayment.fixed_series.assign(static_cast<std::size_t>(n), repayment);
  fin.other_expenses.assign(static_cast<std::size_t>(n), other);
}

// One field, one buffer: the buffer pays off exactly when fine_rate > 3.
Catchment switch_fixture() {
  Catchment c;
  c.id = "switch";
  c.options = {make_option("none", NbsKind::none, 0.0, 0, 0.0),
               make_option("buffer", NbsKind::grassland_buffer, 0.6, 0, 3.0)};
  c.fields = {make_field("f1", 10.0, 1.0, {"none", "buffer"})};
  c.rainfall.values = {2.0, 2.0, 2.0};
  c.rain_exponent = 1.0;
  c.finance.initial_balance = 1.0e6;
  fill_series(c.finance, 3, 1000.0, 0.0, 0.0);
  c.finance.chemical_cost_rate = 1.0;
  c.finance.fine_rate = 0.0;
  c.finance.fine_cap_fraction = 1.0;
  return c;
}

struct SolveOutcome {
  std::optional<OptimalAssignment> best;
  std::optional<InfeasibleError> failure;
};

SolveOutcome solve(const Catchment& c, int horizon, const OptimizeOptions& options) {
  SolveOutcome out;
  try {
    out.best = optimize(c, c.finance, c.rainfall, horizon, options);
  } catch (const InfeasibleError& e) {
    out.failure = e;
  }
  return out;
}

}  // namespace

TEST_CASE("assignment keys are canonical") {
  CHECK(assignment_key({{"b", "x"}, {"a", "y"}}) == "a=y,b=x");
  CHECK(assignment_key({{"f1", "none"}}) == "f1=none");
  CHECK(assignment_key({}) == "");
}

TEST_CASE("an overpriced buffer is never chosen") {
  Catchment c = switch_fixture();
  c.options[1] = make_option("buffer", NbsKind::grassland_buffer, 0.1, 0, 1000.0);
  const OptimalAssignment best = optimize(c, c.finance, c.rainfall, 3);
  CHECK(best.assignment.at("f1") == "none");
  CHECK(best.trajectory.feasible);
  CHECK(best.evaluated == 2);
  CHECK_FALSE(best.used_branch_and_bound);
}

TEST_CASE("solvency can force mitigation") {
  Catchment c;
  c.id = "forced";
  c.options = {make_option("none", NbsKind::none, 0.0, 0, 0.0),
               make_option("buffer", NbsKind::cultivated_buffer, 0.9, 0, 1.0)};
  c.fields = {make_field("f1", 10.0, 1.0, {"none", "buffer"})};
  c.rainfall.values = {1.0, 1.0, 1.0};
  c.finance.initial_balance = 400.0;
  fill_series(c.finance, 3, 0.0, 0.0, 0.0);
  c.finance.chemical_cost_rate = 50.0;  // treating 10 pollution units costs 500 > 400

  const OptimalAssignment best = optimize(c, c.finance, c.rainfall, 3);
  CHECK(best.assignment.at("f1") == "buffer");
  CHECK(best.trajectory.feasible);
  // the cheap assignment is insolvent from the very first interval
  FinanceParams fin = c.finance;
  const Trajectory none_run = balance_trajectory(c, {{"f1", "none"}}, fin, c.rainfall, 3);
  CHECK_FALSE(none_run.feasible);
  CHECK(none_run.first_insolvent_step == 1);
}

TEST_CASE("branch and bound reproduces the exhaustive optimum") {
  SUBCASE("three fields, three options each") {
    Catchment c;
    c.id = "grid";
    c.options = {make_option("none", NbsKind::none, 0.0, 0, 0.0),
                 make_option("grass", NbsKind::grassland_buffer, 0.4, 1, 2.0),
                 make_option("trees", NbsKind::cultivated_buffer, 0.7, 2, 5.0)};
    c.fields = {make_field("f1", 12.0, 1.4, {"none", "grass", "trees"}),
                make_field("f2", 6.0, 0.8, {"none", "grass", "trees"}),
                make_field("f3", 18.0, 2.1, {"none", "grass", "trees"})};
    c.rainfall.values = {8.0, 3.0, 11.0, 6.0};
    c.rain_exponent = 1.0;
    c.finance.initial_balance = 4000.0;
    fill_series(c.finance, 4, 600.0, 120.0, 40.0);
    c.finance.chemical_cost_rate = 2.5;
    c.finance.fine_rate = 4.0;
    c.finance.fine_cap_fraction = 0.3;

    const OptimalAssignment plain = optimize(c, c.finance, c.rainfall, 4);
    OptimizeOptions forced;
    forced.exhaustive_cap = 1;
    const OptimalAssignment pruned = optimize(c, c.finance, c.rainfall, 4, forced);
    CHECK_FALSE(plain.used_branch_and_bound);
    CHECK(plain.evaluated == 27);
    CHECK(pruned.used_branch_and_bound);
    CHECK(pruned.evaluated <= plain.evaluated);
    CHECK(pruned.assignment == plain.assignment);
    CHECK(pruned.trajectory.objective == plain.trajectory.objective);
  }
  SUBCASE("random instances, including infeasible ones") {
    std::mt19937_64 engine(31);
    int feasible_seen = 0;
    int infeasible_seen = 0;
    for (int i = 0; i < 100; ++i) {
      const int horizon = 3 + i % 3;
      Catchment c = make_random_catchment(engine, horizon);
      if (i % 3 == 2) {
        // starve the utility so insolvency is likely
        c.finance.initial_balance = 20.0;
        for (double& v : c.finance.income_per_interval) v = 0.0;
      }
      OptimizeOptions forced;
      forced.exhaustive_cap = 1;
      const SolveOutcome plain = solve(c, horizon, {});
      const SolveOutcome pruned = solve(c, horizon, forced);
      REQUIRE(plain.best.has_value() == pruned.best.has_value());
      if (plain.best) {
        ++feasible_seen;
        CHECK(pruned.best->assignment == plain.best->assignment);
        CHECK(pruned.best->trajectory.objective == plain.best->trajectory.objective);
        // re-verify solvency and the reported objective independently
        const Trajectory check =
            balance_trajectory(c, plain.best->assignment, c.finance, c.rainfall, horizon);
        CHECK(check.feasible);
        CHECK(check.objective == plain.best->trajectory.objective);
      } else {
        ++infeasible_seen;
        REQUIRE(plain.failure);
        REQUIRE(pruned.failure);
        CHECK(plain.failure->first_insolvent_step() == pruned.failure->first_insolvent_step());
        CHECK(plain.failure->best_violation() == pruned.failure->best_violation());
        CHECK_FALSE(plain.failure->best_violation().empty());
      }
    }
    CHECK(feasible_seen >= 30);
    CHECK(infeasible_seen >= 10);
  }
}

TEST_CASE("a dominated option never displaces the optimum") {
  std::mt19937_64 engine(32);
  for (int i = 0; i < 40; ++i) {
    const int horizon = 3;
    Catchment c = make_random_catchment(engine, horizon);
    const SolveOutcome before = solve(c, horizon, {});

    // same price, strictly weaker absorption: worse or tied on every axis
    Catchment extended = c;
    NbsOption weak = extended.options.back();
    weak.id = "zz_weak";
    weak.absorption_max *= 0.5;
    extended.options.push_back(weak);
    for (Field& f : extended.fields) f.candidate_options.push_back(weak.id);
    const SolveOutcome after = solve(extended, horizon, {});

    REQUIRE(before.best.has_value() == after.best.has_value());
    if (before.best) {
      CHECK(after.best->assignment == before.best->assignment);
      CHECK(after.best->trajectory.objective == before.best->trajectory.objective);
    } else {
      CHECK(after.failure->first_insolvent_step() == before.failure->first_insolvent_step());
    }
  }
}

TEST_CASE("stiffer fines never increase optimal pollution") {
  Catchment c = switch_fixture();
  double previous_total = std::numeric_limits<double>::infinity();
  for (double rate : {0.0, 1.0, 2.0, 2.9, 3.1, 4.0, 6.0, 10.0}) {
    c.finance.fine_rate = rate;
    const OptimalAssignment best = optimize(c, c.finance, c.rainfall, 3);
    double total = 0.0;
    for (const TrajectoryStep& step : best.trajectory.steps) total += step.pollution;
    CHECK(total <= previous_total + 1e-9);
    previous_total = total;
    if (rate < 3.0) {
      CHECK(best.assignment.at("f1") == "none");
    } else if (rate > 3.0) {
      CHECK(best.assignment.at("f1") == "buffer");
    }
  }
}

TEST_CASE("infeasible instances report the least violating assignment") {
  SUBCASE("insolvent before the first interval") {
    Catchment c = switch_fixture();
    c.finance.initial_balance = -5.0;
    try {
      optimize(c, c.finance, c.rainfall, 3);
      FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
      CHECK(e.first_insolvent_step() == 0);
      REQUIRE(e.best_violation().size() == 1);
      CHECK(e.best_violation()[0].first == "f1");
    }
  }
  SUBCASE("insolvency arriving mid-horizon") {
    Catchment c = switch_fixture();
    c.finance.initial_balance = 2500.0;
    fill_series(c.finance, 3, 0.0, 1200.0, 0.0);  // repayments alone exhaust the balance
    c.finance.chemical_cost_rate = 0.0;
    try {
      optimize(c, c.finance, c.rainfall, 3);
      FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
      CHECK(e.first_insolvent_step() == 3);
      REQUIRE_FALSE(e.best_violation().empty());
      // the least violating assignment skips the scheme payments
      CHECK(e.best_violation()[0].second == "none");
    }
  }
}

TEST_CASE("optimum distribution under parameter uncertainty") {
  const Catchment c = switch_fixture();
  SUBCASE("point priors collapse to one bucket") {
    WaterPriors priors;
    ParamPrior point;
    point.kind = ParamPrior::Kind::point;
    point.value = 0.5;
    priors.fine_rate = point;
    const OptimumDistribution dist =
        optimum_distribution(c, c.finance, c.rainfall, 3, priors, 777, 50, 5);
    CHECK(dist.deterministic);
    CHECK(dist.n_draws == 777);
    CHECK(dist.acceptance_rate == 1.0);
    CHECK(dist.infeasible_draws == 0);
    REQUIRE(dist.assignment_counts.size() == 1);
    CHECK(dist.assignment_counts.at("f1=none") == 777);
    Catchment pinned = c;
    pinned.finance.fine_rate = 0.5;
    const OptimalAssignment best = optimize(pinned, pinned.finance, pinned.rainfall, 3);
    CHECK(dist.objective.mean == best.trajectory.objective);
    CHECK(dist.objective.sd == 0.0);
  }
  SUBCASE("a prior straddling the switch point splits the histogram") {
    WaterPriors priors;
    ParamPrior uniform;
    uniform.kind = ParamPrior::Kind::uniform;
    uniform.low = 1.0;
    uniform.high = 5.0;
    priors.fine_rate = uniform;
    const OptimumDistribution dist =
        optimum_distribution(c, c.finance, c.rainfall, 3, priors, 4000, 500, 11);
    CHECK_FALSE(dist.deterministic);
    CHECK(dist.infeasible_draws == 0);
    REQUIRE(dist.assignment_counts.size() == 2);
    const std::uint64_t none_wins = dist.assignment_counts.at("f1=none");
    const std::uint64_t buffer_wins = dist.assignment_counts.at("f1=buffer");
    CHECK(none_wins + buffer_wins == 4000);
    CHECK(none_wins > 1400);
    CHECK(buffer_wins > 1400);

    const OptimumDistribution rerun =
        optimum_distribution(c, c.finance, c.rainfall, 3, priors, 4000, 500, 11);
    CHECK(rerun.assignment_counts == dist.assignment_counts);
    CHECK(rerun.objective.mean == dist.objective.mean);
    CHECK(rerun.objective.sd == dist.objective.sd);
  }
  SUBCASE("draw count must be positive") {
    WaterPriors priors;
    CHECK_THROWS_AS(optimum_distribution(c, c.finance, c.rainfall, 3, priors, 0, 0, 1),
                    ConfigError);
  }
}
