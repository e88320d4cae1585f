#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "naturerisk/beef_model.hpp"

namespace naturerisk::testing {

struct GraphCase {
  SupplyChainGraph graph;
  FarmStateModel states;
};

// Two states: state 0 complies, state 1 violates.
inline FarmStateModel two_state_model() {
  FarmStateModel states;
  states.state_labels = {"compliant", "violating"};
  states.p_compliance_given_state = {1.0, 0.0};
  states.nrp_bins = {0.2, 0.8};
  states.nrp_given_state = {{0.9, 0.1}, {0.1, 0.9}};
  states.cattle_levels = {0, 100};
  states.cattle_given_state = {{0.2, 0.8}, {0.5, 0.5}};
  return states;
}

// One supplier -> one abattoir -> one farm whose CAR mixture lands on a
// 0.85/0.15 state split.
inline GraphCase small_fixture() {
  GraphCase c;
  c.states = two_state_model();
  Farm farm;
  farm.id = "F1";
  farm.car_assessment.p_car_true = 0.8;
  farm.state_given_car_true = {1.0, 0.0};
  farm.state_given_car_false = {0.25, 0.75};
  c.graph.suppliers = {"B1"};
  c.graph.abattoirs = {"A1"};
  c.graph.farms = {farm};
  c.graph.sourcing_b_to_a["B1"] = {{"A1", 1.0}};
  c.graph.sourcing_a_to_f["A1"] = {{"F1", 1.0}};
  c.graph.return_per_head = 1.0;
  return c;
}

inline std::vector<double> random_distribution(std::mt19937_64& engine, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  std::vector<double> out(n);
  double total = 0.0;
  for (double& v : out) {
    v = unit(engine);
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

inline GraphCase make_random_graph(std::mt19937_64& engine) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine);
  };

  GraphCase c;
  const int n_states = pick(2, 3);
  for (int s = 0; s < n_states; ++s) {
    c.states.state_labels.push_back("s" + std::to_string(s));
    c.states.p_compliance_given_state.push_back(unit(engine));
    c.states.nrp_given_state.push_back(random_distribution(engine, 3));
    c.states.cattle_given_state.push_back(random_distribution(engine, 3));
  }
  c.states.nrp_bins = {0.0, 0.5, 1.0};
  c.states.cattle_levels = {0, 40, 100};

  const int n_sup = pick(1, 3);
  const int n_ab = pick(1, 3);
  const int n_farm = pick(1, 4);
  for (int i = 0; i < n_sup; ++i) c.graph.suppliers.push_back("B" + std::to_string(i + 1));
  for (int i = 0; i < n_ab; ++i) c.graph.abattoirs.push_back("A" + std::to_string(i + 1));
  for (int i = 0; i < n_farm; ++i) {
    Farm farm;
    farm.id = "F" + std::to_string(i + 1);
    farm.car_assessment.p_car_true = unit(engine);
    farm.state_given_car_true = random_distribution(engine, n_states);
    farm.state_given_car_false = random_distribution(engine, n_states);
    if (i > 0 && unit(engine) < 0.4) {
      const int src = pick(0, i - 1);
      farm.laundering_sources.push_back({"F" + std::to_string(src + 1), 0.8 * unit(engine)});
    }
    c.graph.farms.push_back(farm);
  }
  for (const std::string& supplier : c.graph.suppliers) {
    const std::vector<double> row = random_distribution(engine, c.graph.abattoirs.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      c.graph.sourcing_b_to_a[supplier].push_back({c.graph.abattoirs[i], row[i]});
    }
  }
  for (const std::string& abattoir : c.graph.abattoirs) {
    const std::vector<double> row = random_distribution(engine, c.graph.farms.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      c.graph.sourcing_a_to_f[abattoir].push_back({c.graph.farms[i].id, row[i]});
    }
  }
  c.graph.return_per_head = 0.25 + 5.0 * unit(engine);
  return c;
}

// Independent expansion of p(L=1 | supplier) over explicit sourcing paths;
// shares only the plain graph structs with the engine.
inline double path_expansion_forest(const SupplyChainGraph& g, const FarmStateModel& st,
                                    const std::string& supplier) {
  std::map<std::string, double> farm_comp;
  for (const Farm& farm : g.farms) {
    const std::vector<double> dist = farm_state_distribution(farm);
    double v = 0.0;
    for (std::size_t s = 0; s < dist.size(); ++s) v += dist[s] * st.p_compliance_given_state[s];
    farm_comp[farm.id] = v;
  }
  std::map<std::string, double> origin_comp;
  for (const Farm& farm : g.farms) {
    double laundered = 0.0;
    double v = 0.0;
    for (const auto& [src, p] : farm.laundering_sources) {
      laundered += p;
      v += p * farm_comp.at(src);
    }
    v += std::max(0.0, 1.0 - laundered) * farm_comp.at(farm.id);
    origin_comp[farm.id] = v;
  }
  double total = 0.0;
  for (const auto& [abattoir, pa] : g.sourcing_b_to_a.at(supplier)) {
    for (const auto& [fd, pf] : g.sourcing_a_to_f.at(abattoir)) {
      total += pa * pf * origin_comp.at(fd);
    }
  }
  return total;
}

}  // namespace naturerisk::testing
