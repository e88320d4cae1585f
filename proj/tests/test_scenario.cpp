#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "naturerisk/beef_model.hpp"
#include "naturerisk/errors.hpp"
#include "naturerisk/scenario.hpp"
#include "random_graphs.hpp"

using namespace naturerisk;
using testing::GraphCase;
using testing::make_random_graph;
using testing::small_fixture;
using testing::two_state_model;

namespace {

// Two suppliers with disjoint chains: B1 sees only violating farms, B2 only
// compliant ones.
GraphCase split_fixture() {
  GraphCase c;
  c.states = two_state_model();
  Farm bad;
  bad.id = "F1";
  bad.car_assessment.p_car_true = 1.0;
  bad.state_given_car_true = {0.0, 1.0};
  bad.state_given_car_false = {0.0, 1.0};
  Farm good = bad;
  good.id = "F2";
  good.state_given_car_true = {1.0, 0.0};
  good.state_given_car_false = {1.0, 0.0};
  c.graph.suppliers = {"B1", "B2"};
  c.graph.abattoirs = {"A1", "A2"};
  c.graph.farms = {bad, good};
  c.graph.sourcing_b_to_a["B1"] = {{"A1", 1.0}};
  c.graph.sourcing_b_to_a["B2"] = {{"A2", 1.0}};
  c.graph.sourcing_a_to_f["A1"] = {{"F1", 1.0}};
  c.graph.sourcing_a_to_f["A2"] = {{"F2", 1.0}};
  return c;
}

}  // namespace

TEST_CASE("portfolio blends supplier scores") {
  SUBCASE("weight one is the identity") {
    const GraphCase c = small_fixture();
    ScenarioSpec spec;
    spec.kind = ScenarioKind::portfolio;
    spec.portfolio_weights = {{"B1", 1.0}};
    const PortfolioScore score = portfolio_e_score(c.graph, c.states, spec);
    CHECK(score.forest == e_score_forest(c.graph, c.states, "B1"));
    CHECK(score.nrp == e_score_nrp(c.graph, c.states, "B1"));
  }
  SUBCASE("an even split of a 0 and a 1 supplier is one half") {
    const GraphCase c = split_fixture();
    REQUIRE(e_score_forest(c.graph, c.states, "B1") == 0.0);
    REQUIRE(e_score_forest(c.graph, c.states, "B2") == 1.0);
    ScenarioSpec spec;
    spec.kind = ScenarioKind::portfolio;
    spec.portfolio_weights = {{"B1", 0.5}, {"B2", 0.5}};
    CHECK(portfolio_e_score(c.graph, c.states, spec).forest == 0.5);
  }
  SUBCASE("three suppliers match the componentwise sum") {
    std::mt19937_64 engine(31);
    GraphCase c = make_random_graph(engine);
    while (c.graph.suppliers.size() != 3) c = make_random_graph(engine);
    ScenarioSpec spec;
    spec.kind = ScenarioKind::portfolio;
    spec.portfolio_weights = {{"B1", 0.2}, {"B2", 0.3}, {"B3", 0.5}};
    const PortfolioScore score = portfolio_e_score(c.graph, c.states, spec);
    double forest = 0.0;
    double nrp = 0.0;
    for (const auto& [supplier, weight] : spec.portfolio_weights) {
      forest += weight * e_score_forest(c.graph, c.states, supplier);
      nrp += weight * e_score_nrp(c.graph, c.states, supplier);
    }
    CHECK(score.forest == forest);
    CHECK(score.nrp == nrp);
  }
  SUBCASE("rejects bad weight vectors") {
    const GraphCase c = small_fixture();
    ScenarioSpec spec;
    spec.kind = ScenarioKind::portfolio;
    spec.portfolio_weights = {{"B9", 1.0}};
    CHECK_THROWS_AS(portfolio_e_score(c.graph, c.states, spec), ConfigError);
    spec.portfolio_weights = {{"B1", 0.9}};
    CHECK_THROWS_AS(portfolio_e_score(c.graph, c.states, spec), InvariantError);
    spec.portfolio_weights = {{"B1", 1.0}};
    spec.kind = ScenarioKind::divestment;
    CHECK_THROWS_AS(portfolio_e_score(c.graph, c.states, spec), ConfigError);
  }
}

TEST_CASE("divestment edits sourcing rows deterministically") {
  SUBCASE("divesting a zero edge is a bitwise no-op") {
    GraphCase c = small_fixture();
    c.graph.abattoirs.push_back("A2");
    c.graph.sourcing_b_to_a["B1"] = {{"A1", 1.0}, {"A2", 0.0}};
    c.graph.sourcing_a_to_f["A2"] = {{"F1", 1.0}};
    ScenarioSpec spec;
    spec.kind = ScenarioKind::divestment;
    spec.divest_edges = {{"B1", "A2"}};
    const SupplyChainGraph edited = apply_divestment(c.graph, spec);
    CHECK(edited.sourcing_b_to_a.at("B1") == c.graph.sourcing_b_to_a.at("B1"));
    CHECK(e_score_forest(edited, c.states, "B1") == e_score_forest(c.graph, c.states, "B1"));
  }
  SUBCASE("an even row renormalizes onto the survivor") {
    GraphCase c = small_fixture();
    c.graph.abattoirs.push_back("A2");
    c.graph.sourcing_b_to_a["B1"] = {{"A1", 0.5}, {"A2", 0.5}};
    c.graph.sourcing_a_to_f["A2"] = {{"F1", 1.0}};
    ScenarioSpec spec;
    spec.kind = ScenarioKind::divestment;
    spec.divest_edges = {{"B1", "A1"}};
    const SupplyChainGraph edited = apply_divestment(c.graph, spec);
    const auto& row = edited.sourcing_b_to_a.at("B1");
    CHECK(row[0].second == 0.0);
    CHECK(row[1].second == 1.0);
  }
  SUBCASE("editing equals authoring the edited graph directly") {
    GraphCase c = split_fixture();
    c.graph.sourcing_b_to_a["B1"] = {{"A1", 0.25}, {"A2", 0.75}};
    ScenarioSpec spec;
    spec.kind = ScenarioKind::divestment;
    spec.divest_edges = {{"B1", "A1"}};
    const SupplyChainGraph edited = apply_divestment(c.graph, spec);

    GraphCase authored = split_fixture();
    authored.graph.sourcing_b_to_a["B1"] = {{"A2", 1.0}};
    CHECK(e_score_forest(edited, c.states, "B1") ==
          doctest::Approx(e_score_forest(authored.graph, authored.states, "B1"))
              .epsilon(1e-12));
    CHECK(expected_return(edited, c.states, "B1") ==
          doctest::Approx(expected_return(authored.graph, authored.states, "B1"))
              .epsilon(1e-12));
  }
  SUBCASE("divesting the only abattoir cannot renormalize") {
    const GraphCase c = small_fixture();
    ScenarioSpec spec;
    spec.kind = ScenarioKind::divestment;
    spec.divest_edges = {{"B1", "A1"}};
    CHECK_THROWS_AS(apply_divestment(c.graph, spec), NoValidSourcingError);
  }
  SUBCASE("without renormalization the deficit carries no mass") {
    GraphCase c = small_fixture();
    c.graph.abattoirs.push_back("A2");
    c.graph.sourcing_b_to_a["B1"] = {{"A1", 0.5}, {"A2", 0.5}};
    c.graph.sourcing_a_to_f["A2"] = {{"F1", 1.0}};
    const double before_compliance = compliance_probability(c.graph, c.states, "B1");
    const double before_return = expected_return(c.graph, c.states, "B1");

    ScenarioSpec spec;
    spec.kind = ScenarioKind::divestment;
    spec.divest_edges = {{"B1", "A1"}};
    spec.renormalize = false;
    const SupplyChainGraph edited = apply_divestment(c.graph, spec);
    CHECK(compliance_probability(edited, c.states, "B1") ==
          doctest::Approx(0.5 * before_compliance).epsilon(1e-12));
    CHECK(expected_return(edited, c.states, "B1") ==
          doctest::Approx(0.5 * before_return).epsilon(1e-12));

    spec.divest_edges = {{"B1", "A1"}, {"B1", "A2"}};
    const SupplyChainGraph gutted = apply_divestment(c.graph, spec);
    CHECK(compliance_probability(gutted, c.states, "B1") == 0.0);
    CHECK(expected_return(gutted, c.states, "B1") == 0.0);
  }
  SUBCASE("unknown edges are configuration errors") {
    const GraphCase c = small_fixture();
    ScenarioSpec spec;
    spec.kind = ScenarioKind::divestment;
    spec.divest_edges = {{"B9", "A1"}};
    CHECK_THROWS_AS(apply_divestment(c.graph, spec), ConfigError);
    spec.divest_edges = {{"B1", "A9"}};
    CHECK_THROWS_AS(apply_divestment(c.graph, spec), ConfigError);
    spec.divest_edges = {};
    CHECK_THROWS_AS(apply_divestment(c.graph, spec), ConfigError);
  }
}

namespace {

GraphCase lattice_fixture() {
  GraphCase c;
  c.states = two_state_model();
  Farm f1;
  f1.id = "F1";
  f1.car_assessment.p_car_true = 1.0;
  f1.state_given_car_true = {0.8, 0.2};
  f1.state_given_car_false = {0.8, 0.2};
  Farm f2 = f1;
  f2.id = "F2";
  f2.state_given_car_true = {0.3, 0.7};
  f2.state_given_car_false = {0.3, 0.7};
  c.graph.suppliers = {"B1"};
  c.graph.abattoirs = {"A1"};
  c.graph.farms = {f1, f2};
  c.graph.sourcing_b_to_a["B1"] = {{"A1", 1.0}};
  c.graph.sourcing_a_to_f["A1"] = {{"F1", 0.6}, {"F2", 0.4}};
  c.graph.return_per_head = 2.0;
  return c;
}

ScenarioSpec embargo_spec(double compliant_survival, double violating_survival, int horizon,
                          bool renormalize = true) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::embargo_dynamics;
  spec.survival_table = {{"strict",
                          {{"compliant", compliant_survival},
                           {"violating", violating_survival}}}};
  spec.legislation_strength = "strict";
  spec.horizon = horizon;
  spec.renormalize = renormalize;
  return spec;
}

}  // namespace

TEST_CASE("embargo projection dynamics") {
  SUBCASE("survival one is a bitwise fixed point") {
    const GraphCase c = lattice_fixture();
    const auto steps = embargo_projection(c.graph, c.states, embargo_spec(1.0, 1.0, 4), "B1");
    REQUIRE(steps.size() == 5);
    // The projection chain carries the cattle leaf as well, so agreement with
    // the standalone scores is exact only up to elimination-order rounding.
    CHECK(steps[0].expected_return ==
          doctest::Approx(expected_return(c.graph, c.states, "B1")).epsilon(1e-12));
    CHECK(steps[0].e_score_forest ==
          doctest::Approx(e_score_forest(c.graph, c.states, "B1")).epsilon(1e-12));
    for (const ProjectionStep& step : steps) {
      CHECK(step.expected_return == steps[0].expected_return);
      CHECK(step.e_score_forest == steps[0].e_score_forest);
    }
  }
  SUBCASE("zero survival for violators forces a perfect score") {
    const GraphCase c = lattice_fixture();
    const auto steps = embargo_projection(c.graph, c.states, embargo_spec(1.0, 0.0, 3), "B1");
    CHECK(steps[0].e_score_forest == doctest::Approx(0.6).epsilon(1e-12));
    for (std::size_t t = 1; t < steps.size(); ++t) {
      CHECK(steps[t].e_score_forest == 1.0);
    }
  }
  SUBCASE("three step lattice matches the hand unroll") {
    const GraphCase c = lattice_fixture();
    const auto steps = embargo_projection(c.graph, c.states, embargo_spec(1.0, 0.5, 3), "B1");
    REQUIRE(steps.size() == 4);
    for (int t = 0; t <= 3; ++t) {
      const double w0 = 0.6;  // (0.6*0.8 + 0.4*0.3) * 1^t
      const double w1 = 0.4 * std::pow(0.5, t);
      const double expected_ret = 2.0 * (w0 * 80.0 + w1 * 50.0);
      const double expected_e = w0 / (w0 + w1);
      CHECK(steps[t].expected_return == doctest::Approx(expected_ret).epsilon(1e-9));
      CHECK(steps[t].e_score_forest == doctest::Approx(expected_e).epsilon(1e-9));
    }
  }
  SUBCASE("the sub-normalized reading reports raw compliant mass") {
    const GraphCase c = lattice_fixture();
    const auto norm = embargo_projection(c.graph, c.states, embargo_spec(1.0, 0.5, 3), "B1");
    const auto raw = embargo_projection(c.graph, c.states, embargo_spec(1.0, 0.5, 3, false), "B1");
    for (std::size_t t = 0; t < norm.size(); ++t) {
      CHECK(raw[t].expected_return == norm[t].expected_return);
      CHECK(raw[t].e_score_forest == doctest::Approx(0.6).epsilon(1e-9));
    }
  }
  SUBCASE("eliminating every farm fails loudly") {
    const GraphCase c = lattice_fixture();
    CHECK_THROWS_AS(embargo_projection(c.graph, c.states, embargo_spec(0.0, 0.0, 2), "B1"),
                    NoValidSourcingError);
  }
  SUBCASE("rejects malformed specs") {
    const GraphCase c = lattice_fixture();
    ScenarioSpec spec = embargo_spec(1.0, 0.5, 0);
    CHECK_THROWS_AS(embargo_projection(c.graph, c.states, spec, "B1"), InvariantError);
    spec = embargo_spec(1.0, 0.5, 2);
    spec.legislation_strength = "lenient";
    CHECK_THROWS_AS(embargo_projection(c.graph, c.states, spec, "B1"), ConfigError);
    spec = embargo_spec(1.0, 1.5, 2);
    CHECK_THROWS_AS(embargo_projection(c.graph, c.states, spec, "B1"), InvariantError);
    spec = embargo_spec(1.0, 0.5, 2);
    spec.survival_table["strict"].erase("violating");
    CHECK_THROWS_AS(embargo_projection(c.graph, c.states, spec, "B1"), ConfigError);
  }
}
