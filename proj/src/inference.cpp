#include "naturerisk/inference.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "naturerisk/errors.hpp"

namespace naturerisk {

namespace {

// Working factor inside the elimination: scope held as registry ranks in
// ascending order, values row-major over that scope.
struct WorkFactor {
  std::vector<std::size_t> scope;  // registry ranks, ascending
  std::vector<int> cards;
  std::vector<double> values;
};

std::string describe_evidence(const Evidence& evidence) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [var, value] : evidence) {
    if (!first) out << ", ";
    out << var << "=" << value;
    first = false;
  }
  return out.str();
}

void check_query_and_evidence(const DiscreteModel& model, const std::vector<std::string>& query,
                              const Evidence& evidence) {
  if (query.empty()) {
    throw ConfigError("marginalize: empty query");
  }
  std::set<std::string> seen;
  for (const std::string& var : query) {
    model.cardinality(var);  // throws on unknown
    if (evidence.contains(var)) {
      throw ConfigError("marginalize: variable '" + var + "' is both query and evidence");
    }
    if (!seen.insert(var).second) {
      throw ConfigError("marginalize: duplicate query variable '" + var + "'");
    }
  }
  for (const auto& [var, value] : evidence) {
    const int card = model.cardinality(var);
    if (value < 0 || value >= card) {
      throw ConfigError("marginalize: evidence " + var + "=" + std::to_string(value) +
                        " outside cardinality " + std::to_string(card));
    }
  }
}

// Converts a FactorTable into a WorkFactor, clamping evidence: evidence
// variables are dropped from the scope and the matching slice is kept.
WorkFactor reduce_factor(const DiscreteModel& model, const FactorTable& factor,
                         const Evidence& evidence) {
  const auto& vars = factor.variables();
  const std::size_t n = vars.size();
  std::vector<int> fixed(n, -1);
  std::vector<std::size_t> kept;  // positions within the factor scope
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = evidence.find(vars[i]);
    if (it != evidence.end()) {
      fixed[i] = it->second;
    } else {
      kept.push_back(i);
    }
  }

  // Target scope sorted by registry rank.
  std::vector<std::size_t> order(kept);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return model.variable_rank(vars[a]) < model.variable_rank(vars[b]);
  });

  WorkFactor out;
  std::size_t out_size = 1;
  for (std::size_t pos : order) {
    out.scope.push_back(model.variable_rank(vars[pos]));
    out.cards.push_back(factor.cardinalities()[pos]);
    out_size *= static_cast<std::size_t>(factor.cardinalities()[pos]);
  }
  out.values.assign(out_size, 0.0);

  // Walk the output cells with an odometer over the kept variables.
  std::vector<int> counter(order.size(), 0);
  std::vector<int> full(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (fixed[i] >= 0) full[i] = fixed[i];
  }
  for (std::size_t cell = 0; cell < out_size; ++cell) {
    for (std::size_t k = 0; k < order.size(); ++k) full[order[k]] = counter[k];
    out.values[cell] = factor.at(full);
    for (std::size_t k = order.size(); k-- > 0;) {
      if (++counter[k] < out.cards[k]) break;
      counter[k] = 0;
    }
  }
  return out;
}

// Multiplies two work factors over the union of their scopes.
WorkFactor multiply(const WorkFactor& a, const WorkFactor& b) {
  WorkFactor out;
  std::size_t ia = 0, ib = 0;
  while (ia < a.scope.size() || ib < b.scope.size()) {
    if (ib == b.scope.size() || (ia < a.scope.size() && a.scope[ia] < b.scope[ib])) {
      out.scope.push_back(a.scope[ia]);
      out.cards.push_back(a.cards[ia]);
      ++ia;
    } else if (ia == a.scope.size() || b.scope[ib] < a.scope[ia]) {
      out.scope.push_back(b.scope[ib]);
      out.cards.push_back(b.cards[ib]);
      ++ib;
    } else {
      out.scope.push_back(a.scope[ia]);
      out.cards.push_back(a.cards[ia]);
      ++ia;
      ++ib;
    }
  }
  std::size_t out_size = 1;
  for (int c : out.cards) out_size *= static_cast<std::size_t>(c);

  // Strides of each input within the output enumeration.
  const auto strides_for = [&](const WorkFactor& f) {
    std::vector<std::size_t> strides(out.scope.size(), 0);
    std::size_t stride = 1;
    for (std::size_t i = f.scope.size(); i-- > 0;) {
      const auto pos = std::find(out.scope.begin(), out.scope.end(), f.scope[i]);
      strides[static_cast<std::size_t>(pos - out.scope.begin())] = stride;
      stride *= static_cast<std::size_t>(f.cards[i]);
    }
    return strides;
  };
  const std::vector<std::size_t> sa = strides_for(a);
  const std::vector<std::size_t> sb = strides_for(b);

  out.values.assign(out_size, 0.0);
  std::vector<int> counter(out.scope.size(), 0);
  std::size_t idx_a = 0, idx_b = 0;
  for (std::size_t cell = 0; cell < out_size; ++cell) {
    out.values[cell] = a.values[idx_a] * b.values[idx_b];
    for (std::size_t k = out.scope.size(); k-- > 0;) {
      if (++counter[k] < out.cards[k]) {
        idx_a += sa[k];
        idx_b += sb[k];
        break;
      }
      counter[k] = 0;
      idx_a -= sa[k] * static_cast<std::size_t>(out.cards[k] - 1);
      idx_b -= sb[k] * static_cast<std::size_t>(out.cards[k] - 1);
    }
  }
  return out;
}

// Sums one variable (by registry rank) out of a factor.
WorkFactor sum_out(const WorkFactor& f, std::size_t rank) {
  const auto pos_it = std::find(f.scope.begin(), f.scope.end(), rank);
  const std::size_t pos = static_cast<std::size_t>(pos_it - f.scope.begin());
  const int card = f.cards[pos];

  WorkFactor out;
  for (std::size_t i = 0; i < f.scope.size(); ++i) {
    if (i == pos) continue;
    out.scope.push_back(f.scope[i]);
    out.cards.push_back(f.cards[i]);
  }
  std::size_t inner = 1;
  for (std::size_t i = pos + 1; i < f.scope.size(); ++i) {
    inner *= static_cast<std::size_t>(f.cards[i]);
  }
  const std::size_t out_size = f.values.size() / static_cast<std::size_t>(card);
  out.values.assign(out_size, 0.0);
  const std::size_t block = inner * static_cast<std::size_t>(card);
  std::size_t out_cell = 0;
  for (std::size_t base = 0; base < f.values.size(); base += block) {
    for (std::size_t offset = 0; offset < inner; ++offset, ++out_cell) {
      double sum = 0.0;
      for (int c = 0; c < card; ++c) {
        sum += f.values[base + offset + static_cast<std::size_t>(c) * inner];
      }
      out.values[out_cell] = sum;
    }
  }
  return out;
}

// Min-degree greedy elimination order over the variables to eliminate, with
// registry rank as the deterministic tie-break. Degree counts distinct
// co-occurring variables in the current scopes; eliminating a variable
// connects its neighbours (fill-in).
std::vector<std::size_t> elimination_order(const std::vector<WorkFactor>& factors,
                                           const std::set<std::size_t>& to_eliminate) {
  std::map<std::size_t, std::set<std::size_t>> adjacency;
  for (const WorkFactor& f : factors) {
    for (std::size_t a : f.scope) {
      for (std::size_t b : f.scope) {
        if (a != b) adjacency[a].insert(b);
      }
    }
  }
  std::set<std::size_t> remaining = to_eliminate;
  std::vector<std::size_t> order;
  order.reserve(remaining.size());
  while (!remaining.empty()) {
    std::size_t best = *remaining.begin();
    std::size_t best_degree = adjacency[best].size();
    for (std::size_t candidate : remaining) {
      const std::size_t degree = adjacency[candidate].size();
      if (degree < best_degree || (degree == best_degree && candidate < best)) {
        best = candidate;
        best_degree = degree;
      }
    }
    order.push_back(best);
    auto& neighbours = adjacency[best];
    for (std::size_t n1 : neighbours) {
      adjacency[n1].erase(best);
      for (std::size_t n2 : neighbours) {
        if (n1 != n2) adjacency[n1].insert(n2);
      }
    }
    adjacency.erase(best);
    remaining.erase(best);
  }
  return order;
}

// Full variable-elimination contraction down to the query scope,
// unnormalized.
WorkFactor contract(const DiscreteModel& model, const std::vector<std::string>& query,
                    const Evidence& evidence) {
  check_query_and_evidence(model, query, evidence);

  std::set<std::size_t> query_ranks;
  for (const std::string& var : query) query_ranks.insert(model.variable_rank(var));

  std::vector<WorkFactor> factors;
  factors.reserve(model.factors().size());
  for (const FactorTable& factor : model.factors()) {
    factors.push_back(reduce_factor(model, factor, evidence));
  }

  std::set<std::size_t> to_eliminate;
  for (const WorkFactor& f : factors) {
    for (std::size_t rank : f.scope) {
      if (!query_ranks.contains(rank)) to_eliminate.insert(rank);
    }
  }

  for (std::size_t rank : elimination_order(factors, to_eliminate)) {
    WorkFactor product;
    bool any = false;
    std::vector<WorkFactor> rest;
    rest.reserve(factors.size());
    for (WorkFactor& f : factors) {
      if (std::find(f.scope.begin(), f.scope.end(), rank) != f.scope.end()) {
        product = any ? multiply(product, f) : std::move(f);
        any = true;
      } else {
        rest.push_back(std::move(f));
      }
    }
    if (any) rest.push_back(sum_out(product, rank));
    factors = std::move(rest);
  }

  WorkFactor result;  // scalar 1 start
  result.values = {1.0};
  for (const WorkFactor& f : factors) result = multiply(result, f);
  return result;
}

FactorTable to_factor_table(const DiscreteModel& model, const std::vector<std::string>& query,
                            const WorkFactor& result) {
  // The contraction leaves exactly the query variables that appear in some
  // factor. A query variable missing from every factor has no distribution.
  for (const std::string& var : query) {
    const std::size_t rank = model.variable_rank(var);
    if (std::find(result.scope.begin(), result.scope.end(), rank) == result.scope.end()) {
      throw ConfigError("marginalize: query variable '" + var + "' appears in no factor");
    }
  }
  std::vector<std::string> names;
  std::vector<int> cards;
  for (std::size_t i = 0; i < result.scope.size(); ++i) {
    names.push_back(model.variable_order()[result.scope[i]]);
    cards.push_back(result.cards[i]);
  }
  return FactorTable::joint(std::move(names), std::move(cards), result.values);
}

}  // namespace

FactorTable marginal_mass(const DiscreteModel& model, const std::vector<std::string>& query,
                          const Evidence& evidence) {
  return to_factor_table(model, query, contract(model, query, evidence));
}

FactorTable marginalize(const DiscreteModel& model, const std::vector<std::string>& query,
                        const Evidence& evidence) {
  WorkFactor result = contract(model, query, evidence);
  double total = 0.0;
  for (double v : result.values) total += v;
  if (total <= 0.0) {
    throw ImpossibleEvidenceError("marginalize: evidence {" + describe_evidence(evidence) +
                                  "} has probability zero");
  }
  for (double& v : result.values) v /= total;
  return to_factor_table(model, query, result);
}

}  // namespace naturerisk
