#include "naturerisk/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace naturerisk {

namespace {

constexpr double kSumTolerance = 1e-9;

// RFC 6901 token escaping: "~" -> "~0", "/" -> "~1".
std::string escape_token(const std::string& token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::string ptr(const std::string& base, const std::string& token) {
  return base + "/" + escape_token(token);
}

std::string ptr(const std::string& base, std::size_t index) {
  return base + "/" + std::to_string(index);
}

struct Ctx {
  std::vector<ValidationIssue> issues;

  void add(std::string pointer, std::string code, std::string message) {
    issues.push_back({std::move(pointer), std::move(code), std::move(message)});
  }
  bool ok() const { return issues.empty(); }
};

const Json* member(Ctx& ctx, const Json& obj, const std::string& base, const char* key,
                   bool required) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) ctx.add(ptr(base, std::string(key)), "E_MISSING", "required member is missing");
    return nullptr;
  }
  return &*it;
}

const Json* object_at(Ctx& ctx, const Json& obj, const std::string& base, const char* key,
                      bool required) {
  const Json* node = member(ctx, obj, base, key, required);
  if (!node) return nullptr;
  if (!node->is_object()) {
    ctx.add(ptr(base, std::string(key)), "E_TYPE", "expected an object");
    return nullptr;
  }
  return node;
}

const Json* array_at(Ctx& ctx, const Json& obj, const std::string& base, const char* key,
                     bool required) {
  const Json* node = member(ctx, obj, base, key, required);
  if (!node) return nullptr;
  if (!node->is_array()) {
    ctx.add(ptr(base, std::string(key)), "E_TYPE", "expected an array");
    return nullptr;
  }
  return node;
}

std::optional<double> number_at(Ctx& ctx, const Json& obj, const std::string& base,
                                const char* key, bool required,
                                std::optional<double> fallback = std::nullopt) {
  const Json* node = member(ctx, obj, base, key, required);
  if (!node) return fallback;
  if (!node->is_number()) {
    ctx.add(ptr(base, std::string(key)), "E_TYPE", "expected a number");
    return fallback;
  }
  const double value = node->get<double>();
  if (!std::isfinite(value)) {
    ctx.add(ptr(base, std::string(key)), "E_RANGE", "value must be finite");
    return fallback;
  }
  return value;
}

std::optional<int> int_at(Ctx& ctx, const Json& obj, const std::string& base, const char* key,
                          bool required, std::optional<int> fallback = std::nullopt) {
  const Json* node = member(ctx, obj, base, key, required);
  if (!node) return fallback;
  if (!node->is_number_integer()) {
    ctx.add(ptr(base, std::string(key)), "E_TYPE", "expected an integer");
    return fallback;
  }
  return node->get<int>();
}

std::optional<std::string> string_at(Ctx& ctx, const Json& obj, const std::string& base,
                                     const char* key, bool required) {
  const Json* node = member(ctx, obj, base, key, required);
  if (!node) return std::nullopt;
  if (!node->is_string()) {
    ctx.add(ptr(base, std::string(key)), "E_TYPE", "expected a string");
    return std::nullopt;
  }
  return node->get<std::string>();
}

std::optional<bool> bool_at(Ctx& ctx, const Json& obj, const std::string& base, const char* key,
                            bool required) {
  const Json* node = member(ctx, obj, base, key, required);
  if (!node) return std::nullopt;
  if (!node->is_boolean()) {
    ctx.add(ptr(base, std::string(key)), "E_TYPE", "expected a boolean");
    return std::nullopt;
  }
  return node->get<bool>();
}

std::optional<std::vector<double>> number_array(Ctx& ctx, const Json& node,
                                                const std::string& pointer) {
  if (!node.is_array()) {
    ctx.add(pointer, "E_TYPE", "expected an array of numbers");
    return std::nullopt;
  }
  std::vector<double> values;
  values.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) {
      ctx.add(ptr(pointer, i), "E_TYPE", "expected a number");
      return std::nullopt;
    }
    const double v = node[i].get<double>();
    if (!std::isfinite(v)) {
      ctx.add(ptr(pointer, i), "E_RANGE", "value must be finite");
      return std::nullopt;
    }
    values.push_back(v);
  }
  return values;
}

std::optional<std::vector<double>> number_array_at(Ctx& ctx, const Json& obj,
                                                   const std::string& base, const char* key,
                                                   bool required) {
  const Json* node = member(ctx, obj, base, key, required);
  if (!node) return std::nullopt;
  return number_array(ctx, *node, ptr(base, std::string(key)));
}

std::optional<std::vector<std::string>> string_array_at(Ctx& ctx, const Json& obj,
                                                        const std::string& base, const char* key,
                                                        bool required) {
  const Json* node = array_at(ctx, obj, base, key, required);
  if (!node) return std::nullopt;
  std::vector<std::string> values;
  for (std::size_t i = 0; i < node->size(); ++i) {
    if (!(*node)[i].is_string()) {
      ctx.add(ptr(ptr(base, std::string(key)), i), "E_TYPE", "expected a string");
      return std::nullopt;
    }
    values.push_back((*node)[i].get<std::string>());
  }
  return values;
}

void check_unit_interval(Ctx& ctx, double value, const std::string& pointer) {
  if (value < 0.0 || value > 1.0) {
    ctx.add(pointer, "E_RANGE", "expected a probability in [0,1]");
  }
}

// Entries non-negative, total within tolerance of 1.
void check_distribution(Ctx& ctx, const std::vector<double>& row, const std::string& pointer,
                        const std::string& what) {
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] < 0.0) ctx.add(ptr(pointer, i), "E_RANGE", "probabilities must be non-negative");
    sum += row[i];
  }
  if (std::fabs(sum - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg << what << " sums to " << sum << ", expected 1";
    ctx.add(pointer, "E_SUM", msg.str());
  }
}

void check_unique(Ctx& ctx, const std::vector<std::string>& ids, const std::string& pointer,
                  const std::string& what) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i].empty()) ctx.add(ptr(pointer, i), "E_EMPTY", what + " id must be non-empty");
    if (!seen.insert(ids[i]).second) {
      ctx.add(ptr(pointer, i), "E_DUP", "duplicate " + what + " id '" + ids[i] + "'");
    }
  }
}

void check_header(Ctx& ctx, const Json& doc, DocumentType expected) {
  if (!doc.is_object()) {
    ctx.add("", "E_TYPE", "document is not a JSON object");
    return;
  }
  const std::optional<std::string> version = string_at(ctx, doc, "", "version", true);
  if (version && *version != kFormatVersion) {
    ctx.add("/version", "E_VERSION",
            "unsupported version '" + *version + "', expected '" + kFormatVersion + "'");
  }
  const std::optional<std::string> type = string_at(ctx, doc, "", "type", true);
  if (type && *type != document_type_name(expected)) {
    ctx.add("/type", "E_TYPE",
            "expected type '" + document_type_name(expected) + "', found '" + *type + "'");
  }
}

void domain_backstop(Ctx& ctx, const std::function<void()>& validate) {
  try {
    validate();
  } catch (const ConfigError& e) {
    ctx.add("", "E_DOMAIN_CONFIG", e.what());
  } catch (const Error& e) {
    ctx.add("", "E_DOMAIN", e.what());
  }
}

// ---------------------------------------------------------------------------
// supply chain

FarmStateModel read_states(Ctx& ctx, const Json& doc) {
  FarmStateModel states;
  const Json* node = object_at(ctx, doc, "", "states", true);
  if (!node) return states;
  const std::string base = "/states";

  if (auto labels = string_array_at(ctx, *node, base, "labels", true)) {
    states.state_labels = *labels;
    if (states.state_labels.empty()) ctx.add(ptr(base, "labels"), "E_EMPTY", "no state labels");
    check_unique(ctx, states.state_labels, ptr(base, "labels"), "state");
  }
  const std::size_t n_states = states.state_labels.size();

  if (auto p = number_array_at(ctx, *node, base, "p_compliance", true)) {
    states.p_compliance_given_state = *p;
    if (n_states > 0 && p->size() != n_states) {
      ctx.add(ptr(base, "p_compliance"), "E_LENGTH", "expected one entry per state label");
    }
    for (std::size_t i = 0; i < p->size(); ++i) {
      check_unit_interval(ctx, (*p)[i], ptr(ptr(base, "p_compliance"), i));
    }
  }

  if (auto bins = number_array_at(ctx, *node, base, "nrp_bins", true)) {
    states.nrp_bins = *bins;
    if (bins->empty()) ctx.add(ptr(base, "nrp_bins"), "E_EMPTY", "no NRP bins");
    for (std::size_t i = 0; i < bins->size(); ++i) {
      check_unit_interval(ctx, (*bins)[i], ptr(ptr(base, "nrp_bins"), i));
      if (i > 0 && (*bins)[i] <= (*bins)[i - 1]) {
        ctx.add(ptr(ptr(base, "nrp_bins"), i), "E_ORDER", "bins must be strictly increasing");
      }
    }
  }

  if (const Json* levels = array_at(ctx, *node, base, "cattle_levels", true)) {
    for (std::size_t i = 0; i < levels->size(); ++i) {
      if (!(*levels)[i].is_number_integer()) {
        ctx.add(ptr(ptr(base, "cattle_levels"), i), "E_TYPE", "expected an integer head count");
        continue;
      }
      const int level = (*levels)[i].get<int>();
      if (level < 0) {
        ctx.add(ptr(ptr(base, "cattle_levels"), i), "E_RANGE", "head counts are non-negative");
      }
      states.cattle_levels.push_back(level);
    }
    if (states.cattle_levels.empty()) {
      ctx.add(ptr(base, "cattle_levels"), "E_EMPTY", "no cattle levels");
    }
  }

  const auto read_rows = [&](const char* key, std::size_t width,
                             std::vector<std::vector<double>>& out) {
    const Json* rows = array_at(ctx, *node, base, key, true);
    if (!rows) return;
    const std::string rows_ptr = ptr(base, std::string(key));
    if (n_states > 0 && rows->size() != n_states) {
      ctx.add(rows_ptr, "E_LENGTH", "expected one row per state label");
    }
    for (std::size_t i = 0; i < rows->size(); ++i) {
      auto row = number_array(ctx, (*rows)[i], ptr(rows_ptr, i));
      if (!row) continue;
      if (width > 0 && row->size() != width) {
        ctx.add(ptr(rows_ptr, i), "E_LENGTH", "row width does not match the bin count");
      }
      check_distribution(ctx, *row, ptr(rows_ptr, i), std::string(key) + " row");
      out.push_back(std::move(*row));
    }
  };
  read_rows("nrp", states.nrp_bins.size(), states.nrp_given_state);
  read_rows("cattle", states.cattle_levels.size(), states.cattle_given_state);
  return states;
}

std::vector<Farm> read_farms(Ctx& ctx, const Json& doc, std::size_t n_states) {
  std::vector<Farm> farms;
  const Json* node = array_at(ctx, doc, "", "farms", true);
  if (!node) return farms;
  if (node->empty()) ctx.add("/farms", "E_EMPTY", "no farms");

  std::vector<std::string> ids;
  for (std::size_t i = 0; i < node->size(); ++i) {
    const std::string base = ptr("/farms", i);
    if (!(*node)[i].is_object()) {
      ctx.add(base, "E_TYPE", "expected an object");
      continue;
    }
    const Json& raw = (*node)[i];
    Farm farm;
    farm.id = string_at(ctx, raw, base, "id", true).value_or("");
    ids.push_back(farm.id);
    if (auto p = number_at(ctx, raw, base, "p_car_true", true)) {
      farm.car_assessment.p_car_true = *p;
      check_unit_interval(ctx, *p, ptr(base, "p_car_true"));
    }
    const auto read_state_row = [&](const char* key, std::vector<double>& out) {
      if (auto row = number_array_at(ctx, raw, base, key, true)) {
        out = *row;
        if (n_states > 0 && row->size() != n_states) {
          ctx.add(ptr(base, std::string(key)), "E_LENGTH", "expected one entry per state label");
        }
        check_distribution(ctx, *row, ptr(base, std::string(key)), std::string(key));
      }
    };
    read_state_row("state_given_car_true", farm.state_given_car_true);
    read_state_row("state_given_car_false", farm.state_given_car_false);

    if (raw.contains("laundering_sources")) {
      const Json* sources = array_at(ctx, raw, base, "laundering_sources", false);
      if (sources) {
        const std::string sources_ptr = ptr(base, "laundering_sources");
        double total = 0.0;
        for (std::size_t s = 0; s < sources->size(); ++s) {
          if (!(*sources)[s].is_object()) {
            ctx.add(ptr(sources_ptr, s), "E_TYPE", "expected an object");
            continue;
          }
          const std::string source_base = ptr(sources_ptr, s);
          const std::string from =
              string_at(ctx, (*sources)[s], source_base, "farm", true).value_or("");
          const double p =
              number_at(ctx, (*sources)[s], source_base, "p", true).value_or(0.0);
          check_unit_interval(ctx, p, ptr(source_base, "p"));
          total += p;
          farm.laundering_sources.emplace_back(from, p);
        }
        if (total > 1.0 + kSumTolerance) {
          std::ostringstream msg;
          msg << "laundering probabilities for farm '" << farm.id << "' sum to " << total
              << ", expected at most 1";
          ctx.add(sources_ptr, "E_SUM", msg.str());
        }
      }
    }
    farms.push_back(std::move(farm));
  }
  check_unique(ctx, ids, "/farms", "farm");
  return farms;
}

std::map<std::string, std::vector<std::pair<std::string, double>>> read_sourcing(
    Ctx& ctx, const Json& doc, const char* key, const std::vector<std::string>& sources,
    const std::vector<std::string>& targets, const std::string& source_kind,
    const std::string& target_kind) {
  std::map<std::string, std::vector<std::pair<std::string, double>>> rows;
  const Json* node = object_at(ctx, doc, "", key, true);
  if (!node) return rows;
  const std::string base = "/" + std::string(key);

  const std::set<std::string> source_set(sources.begin(), sources.end());
  const std::set<std::string> target_set(targets.begin(), targets.end());
  for (const auto& [id, row] : node->items()) {
    const std::string row_ptr = ptr(base, id);
    if (!source_set.contains(id)) {
      ctx.add(row_ptr, "E_UNKNOWN_ID", "unknown " + source_kind + " '" + id + "'");
    }
    if (!row.is_array()) {
      ctx.add(row_ptr, "E_TYPE", "expected an array of sourcing entries");
      continue;
    }
    std::vector<std::pair<std::string, double>> edges;
    std::set<std::string> seen;
    double total = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!row[i].is_object()) {
        ctx.add(ptr(row_ptr, i), "E_TYPE", "expected an object");
        continue;
      }
      const std::string entry_base = ptr(row_ptr, i);
      const std::string to = string_at(ctx, row[i], entry_base, "to", true).value_or("");
      const double p = number_at(ctx, row[i], entry_base, "p", true).value_or(0.0);
      if (!to.empty() && !target_set.contains(to)) {
        ctx.add(ptr(entry_base, "to"), "E_UNKNOWN_ID",
                "unknown " + target_kind + " '" + to + "'");
      }
      if (!to.empty() && !seen.insert(to).second) {
        ctx.add(ptr(entry_base, "to"), "E_DUP", "duplicate sourcing target '" + to + "'");
      }
      check_unit_interval(ctx, p, ptr(entry_base, "p"));
      total += p;
      edges.emplace_back(to, p);
    }
    if (std::fabs(total - 1.0) > kSumTolerance) {
      std::ostringstream msg;
      msg << "sourcing distribution of " << source_kind << " '" << id << "' sums to " << total
          << ", expected 1";
      ctx.add(row_ptr, "E_SUM", msg.str());
    }
    rows[id] = std::move(edges);
  }
  for (const std::string& id : sources) {
    if (!rows.contains(id)) {
      ctx.add(base, "E_MISSING", "no sourcing row for " + source_kind + " '" + id + "'");
    }
  }
  return rows;
}

ControversyInputs read_controversy(Ctx& ctx, const Json& node, const std::string& base,
                                   bool prior_required) {
  ControversyInputs inputs;
  if (!node.is_object()) {
    ctx.add(base, "E_TYPE", "expected an object");
    return inputs;
  }
  if (node.contains("prior") || prior_required) {
    if (auto prior = number_at(ctx, node, base, "prior", prior_required)) {
      inputs.prior = *prior;
      check_unit_interval(ctx, *prior, ptr(base, "prior"));
    }
  }
  if (auto classes = string_array_at(ctx, node, base, "classes", true)) {
    inputs.lexicon.classes = *classes;
    inputs.likelihood.classes = *classes;
    if (classes->empty()) ctx.add(ptr(base, "classes"), "E_EMPTY", "no sentiment classes");
    check_unique(ctx, *classes, ptr(base, "classes"), "class");
  }
  const std::set<std::string> class_set(inputs.lexicon.classes.begin(),
                                        inputs.lexicon.classes.end());

  if (const Json* lexicon = object_at(ctx, node, base, "lexicon", true)) {
    const std::string lex_ptr = ptr(base, "lexicon");
    for (const auto& [word, entry] : lexicon->items()) {
      const std::string entry_ptr = ptr(lex_ptr, word);
      if (!entry.is_object()) {
        ctx.add(entry_ptr, "E_TYPE", "expected an object");
        continue;
      }
      const std::string cls = string_at(ctx, entry, entry_ptr, "class", true).value_or("");
      const double weight = number_at(ctx, entry, entry_ptr, "weight", true).value_or(0.0);
      if (!cls.empty() && !class_set.contains(cls)) {
        ctx.add(ptr(entry_ptr, "class"), "E_UNKNOWN_ID", "unknown class '" + cls + "'");
      }
      if (weight < 0.0) {
        ctx.add(ptr(entry_ptr, "weight"), "E_RANGE", "weights are non-negative");
      }
      inputs.lexicon.weights[word] = {cls, weight};
    }
  }

  if (const Json* likelihood = object_at(ctx, node, base, "likelihood", true)) {
    const std::string like_ptr = ptr(base, "likelihood");
    const auto read_side = [&](const char* key, std::vector<double>& out) {
      if (auto row = number_array_at(ctx, *likelihood, like_ptr, key, true)) {
        out = *row;
        if (!class_set.empty() && row->size() != class_set.size()) {
          ctx.add(ptr(like_ptr, std::string(key)), "E_LENGTH",
                  "expected one entry per class");
        }
        check_distribution(ctx, *row, ptr(like_ptr, std::string(key)), std::string(key));
      }
    };
    read_side("given_compliant", inputs.likelihood.p_given_compliant);
    read_side("given_noncompliant", inputs.likelihood.p_given_noncompliant);
  }

  if (const Json* reports = array_at(ctx, node, base, "reports", true)) {
    const std::string reports_ptr = ptr(base, "reports");
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < reports->size(); ++i) {
      const std::string report_ptr = ptr(reports_ptr, i);
      if (!(*reports)[i].is_object()) {
        ctx.add(report_ptr, "E_TYPE", "expected an object");
        continue;
      }
      const Json& raw = (*reports)[i];
      Report report;
      report.id = string_at(ctx, raw, report_ptr, "id", true).value_or("");
      report.subject = string_at(ctx, raw, report_ptr, "subject", true).value_or("");
      ids.push_back(report.id);
      if (raw.contains("text")) {
        report.text = string_at(ctx, raw, report_ptr, "text", false).value_or("");
      }
      if (raw.contains("class")) {
        const std::string cls = string_at(ctx, raw, report_ptr, "class", false).value_or("");
        if (!cls.empty() && !class_set.contains(cls)) {
          ctx.add(ptr(report_ptr, "class"), "E_UNKNOWN_ID", "unknown class '" + cls + "'");
        }
        report.sentiment_class = cls;
      }
      if (report.text.empty() && !report.sentiment_class) {
        ctx.add(report_ptr, "E_MISSING", "report needs either text or an assigned class");
      }
      inputs.reports.push_back(std::move(report));
    }
    check_unique(ctx, ids, reports_ptr, "report");
  }
  return inputs;
}

SupplyChainDocument read_supply_chain(Ctx& ctx, const Json& doc) {
  SupplyChainDocument out;
  check_header(ctx, doc, DocumentType::supply_chain);
  if (!doc.is_object()) return out;

  out.id = string_at(ctx, doc, "", "id", false).value_or("");
  out.states = read_states(ctx, doc);
  const std::size_t n_states = out.states.state_labels.size();

  if (auto suppliers = string_array_at(ctx, doc, "", "suppliers", true)) {
    out.graph.suppliers = *suppliers;
    if (suppliers->empty()) ctx.add("/suppliers", "E_EMPTY", "no suppliers");
    check_unique(ctx, *suppliers, "/suppliers", "supplier");
  }
  if (auto abattoirs = string_array_at(ctx, doc, "", "abattoirs", true)) {
    out.graph.abattoirs = *abattoirs;
    if (abattoirs->empty()) ctx.add("/abattoirs", "E_EMPTY", "no abattoirs");
    check_unique(ctx, *abattoirs, "/abattoirs", "abattoir");
  }
  out.graph.farms = read_farms(ctx, doc, n_states);

  std::vector<std::string> farm_ids;
  for (const Farm& farm : out.graph.farms) farm_ids.push_back(farm.id);
  const std::set<std::string> farm_set(farm_ids.begin(), farm_ids.end());
  for (std::size_t i = 0; i < out.graph.farms.size(); ++i) {
    const Farm& farm = out.graph.farms[i];
    for (std::size_t s = 0; s < farm.laundering_sources.size(); ++s) {
      const std::string& from = farm.laundering_sources[s].first;
      if (!from.empty() && !farm_set.contains(from)) {
        ctx.add(ptr(ptr(ptr(ptr("/farms", i), "laundering_sources"), s), "farm"),
                "E_UNKNOWN_ID", "unknown farm '" + from + "'");
      }
    }
  }

  if (auto ret = number_at(ctx, doc, "", "return_per_head", false)) {
    out.graph.return_per_head = *ret;
    if (*ret < 0.0) ctx.add("/return_per_head", "E_RANGE", "return per head is non-negative");
  }

  out.graph.sourcing_b_to_a =
      read_sourcing(ctx, doc, "sourcing_supplier_to_abattoir", out.graph.suppliers,
                    out.graph.abattoirs, "supplier", "abattoir");
  out.graph.sourcing_a_to_f = read_sourcing(ctx, doc, "sourcing_abattoir_to_farm",
                                            out.graph.abattoirs, farm_ids, "abattoir", "farm");

  if (doc.contains("controversy")) {
    out.controversy = read_controversy(ctx, doc["controversy"], "/controversy", false);
  }

  if (ctx.ok()) {
    domain_backstop(ctx, [&] { validate_graph(out.graph, out.states); });
  }
  return out;
}

// ---------------------------------------------------------------------------
// catchment

std::optional<NbsKind> parse_kind(Ctx& ctx, const std::string& kind, const std::string& pointer) {
  if (kind == "none") return NbsKind::none;
  if (kind == "cultivated_buffer") return NbsKind::cultivated_buffer;
  if (kind == "grassland_buffer") return NbsKind::grassland_buffer;
  ctx.add(pointer, "E_ENUM",
          "unknown kind '" + kind + "', expected none|cultivated_buffer|grassland_buffer");
  return std::nullopt;
}

ParamPrior read_prior(Ctx& ctx, const Json& node, const std::string& base) {
  ParamPrior prior;
  if (!node.is_object()) {
    ctx.add(base, "E_TYPE", "expected an object");
    return prior;
  }
  const std::string kind = string_at(ctx, node, base, "kind", true).value_or("");
  if (kind == "point") {
    prior.kind = ParamPrior::Kind::point;
    prior.value = number_at(ctx, node, base, "value", true).value_or(0.0);
  } else if (kind == "uniform") {
    prior.kind = ParamPrior::Kind::uniform;
    prior.low = number_at(ctx, node, base, "low", true).value_or(0.0);
    prior.high = number_at(ctx, node, base, "high", true).value_or(0.0);
  } else if (kind == "normal") {
    prior.kind = ParamPrior::Kind::normal;
    prior.mean = number_at(ctx, node, base, "mean", true).value_or(0.0);
    prior.sd = number_at(ctx, node, base, "sd", true).value_or(0.0);
  } else if (!kind.empty()) {
    ctx.add(ptr(base, "kind"), "E_ENUM",
            "unknown prior kind '" + kind + "', expected point|uniform|normal");
  }
  return prior;
}

CatchmentDocument read_catchment(Ctx& ctx, const Json& doc) {
  CatchmentDocument out;
  check_header(ctx, doc, DocumentType::catchment);
  if (!doc.is_object()) return out;

  out.catchment.id = string_at(ctx, doc, "", "id", false).value_or("");

  std::vector<std::string> option_ids;
  if (const Json* options = array_at(ctx, doc, "", "options", true)) {
    if (options->empty()) ctx.add("/options", "E_EMPTY", "no options");
    for (std::size_t i = 0; i < options->size(); ++i) {
      const std::string base = ptr("/options", i);
      if (!(*options)[i].is_object()) {
        ctx.add(base, "E_TYPE", "expected an object");
        continue;
      }
      const Json& raw = (*options)[i];
      NbsOption option;
      option.id = string_at(ctx, raw, base, "id", true).value_or("");
      option_ids.push_back(option.id);
      if (auto kind = string_at(ctx, raw, base, "kind", true)) {
        option.kind = parse_kind(ctx, *kind, ptr(base, "kind")).value_or(NbsKind::none);
      }
      if (auto v = number_at(ctx, raw, base, "absorption_max", false, 0.0)) {
        option.absorption_max = *v;
        if (*v < 0.0 || *v >= 1.0) {
          ctx.add(ptr(base, "absorption_max"), "E_RANGE", "absorption must lie in [0,1)");
        }
      }
      option.establishment_lag = int_at(ctx, raw, base, "establishment_lag", false, 0).value_or(0);
      if (option.establishment_lag < 0) {
        ctx.add(ptr(base, "establishment_lag"), "E_RANGE", "lag is non-negative");
      }
      if (auto v = number_at(ctx, raw, base, "payment_per_ha_per_interval", false, 0.0)) {
        option.payment_per_ha_per_interval = *v;
        if (*v < 0.0) {
          ctx.add(ptr(base, "payment_per_ha_per_interval"), "E_RANGE",
                  "payments are non-negative");
        }
      }
      out.catchment.options.push_back(std::move(option));
    }
    check_unique(ctx, option_ids, "/options", "option");
  }
  const std::set<std::string> option_set(option_ids.begin(), option_ids.end());

  std::vector<std::string> field_ids;
  if (const Json* fields = array_at(ctx, doc, "", "fields", true)) {
    if (fields->empty()) ctx.add("/fields", "E_EMPTY", "no fields");
    for (std::size_t i = 0; i < fields->size(); ++i) {
      const std::string base = ptr("/fields", i);
      if (!(*fields)[i].is_object()) {
        ctx.add(base, "E_TYPE", "expected an object");
        continue;
      }
      const Json& raw = (*fields)[i];
      Field field;
      field.id = string_at(ctx, raw, base, "id", true).value_or("");
      field_ids.push_back(field.id);
      if (auto v = number_at(ctx, raw, base, "area", true)) {
        field.area = *v;
        if (*v <= 0.0) ctx.add(ptr(base, "area"), "E_RANGE", "area must be positive");
      }
      if (auto v = number_at(ctx, raw, base, "load_factor", true)) {
        field.load_factor = *v;
        if (*v < 0.0) ctx.add(ptr(base, "load_factor"), "E_RANGE", "load factor is non-negative");
      }
      if (auto candidates = string_array_at(ctx, raw, base, "candidates", true)) {
        field.candidate_options = *candidates;
        if (candidates->empty()) ctx.add(ptr(base, "candidates"), "E_EMPTY", "no candidates");
        check_unique(ctx, *candidates, ptr(base, "candidates"), "candidate");
        for (std::size_t k = 0; k < candidates->size(); ++k) {
          if (!option_set.contains((*candidates)[k])) {
            ctx.add(ptr(ptr(base, "candidates"), k), "E_UNKNOWN_ID",
                    "unknown option '" + (*candidates)[k] + "'");
          }
        }
      }
      out.catchment.fields.push_back(std::move(field));
    }
    check_unique(ctx, field_ids, "/fields", "field");
  }
  const std::set<std::string> field_set(field_ids.begin(), field_ids.end());

  if (const Json* rainfall = object_at(ctx, doc, "", "rainfall", true)) {
    if (auto values = number_array_at(ctx, *rainfall, "/rainfall", "values", true)) {
      out.catchment.rainfall.values = *values;
      for (std::size_t i = 0; i < values->size(); ++i) {
        if ((*values)[i] < 0.0) {
          ctx.add(ptr("/rainfall/values", i), "E_RANGE", "rainfall is non-negative");
        }
      }
    }
    if (rainfall->contains("interval_label")) {
      out.catchment.rainfall.interval_label =
          string_at(ctx, *rainfall, "/rainfall", "interval_label", false).value_or("quarterly");
    }
  }

  if (auto beta = number_at(ctx, doc, "", "rain_exponent", false, 1.0)) {
    out.catchment.rain_exponent = *beta;
    if (*beta < 0.0) ctx.add("/rain_exponent", "E_RANGE", "exponent is non-negative");
  }

  if (const Json* finance = object_at(ctx, doc, "", "finance", true)) {
    FinanceParams& fin = out.catchment.finance;
    const std::string base = "/finance";
    fin.initial_balance = number_at(ctx, *finance, base, "initial_balance", true).value_or(0.0);
    fin.income_per_interval =
        number_array_at(ctx, *finance, base, "income_per_interval", true).value_or(std::vector<double>{});
    fin.other_expenses =
        number_array_at(ctx, *finance, base, "other_expenses", true).value_or(std::vector<double>{});
    if (auto v = number_at(ctx, *finance, base, "chemical_cost_rate", true)) {
      fin.chemical_cost_rate = *v;
      if (*v < 0.0) ctx.add(ptr(base, "chemical_cost_rate"), "E_RANGE", "rate is non-negative");
    }
    if (auto v = number_at(ctx, *finance, base, "fine_rate", true)) {
      fin.fine_rate = *v;
      if (*v < 0.0) ctx.add(ptr(base, "fine_rate"), "E_RANGE", "rate is non-negative");
    }
    if (auto v = number_at(ctx, *finance, base, "fine_cap_fraction", true)) {
      fin.fine_cap_fraction = *v;
      check_unit_interval(ctx, *v, ptr(base, "fine_cap_fraction"));
    }
    if (auto v = number_at(ctx, *finance, base, "reputation_scale", false, 0.0)) {
      fin.reputation_scale = *v;
      if (*v < 0.0) ctx.add(ptr(base, "reputation_scale"), "E_RANGE", "scale is non-negative");
    }
    if (const Json* bond = object_at(ctx, *finance, base, "bond_repayment", true)) {
      const std::string bond_ptr = ptr(base, "bond_repayment");
      const std::string kind = string_at(ctx, *bond, bond_ptr, "kind", true).value_or("");
      if (kind == "fixed") {
        fin.bond_repayment.kind = BondRepayment::Kind::fixed;
        fin.bond_repayment.fixed_series =
            number_array_at(ctx, *bond, bond_ptr, "series", true).value_or(std::vector<double>{});
        for (std::size_t i = 0; i < fin.bond_repayment.fixed_series.size(); ++i) {
          if (fin.bond_repayment.fixed_series[i] < 0.0) {
            ctx.add(ptr(ptr(bond_ptr, "series"), i), "E_RANGE", "repayments are non-negative");
          }
        }
      } else if (kind == "pollution_linked") {
        fin.bond_repayment.kind = BondRepayment::Kind::pollution_linked;
        fin.bond_repayment.base = number_at(ctx, *bond, bond_ptr, "base", true).value_or(0.0);
        fin.bond_repayment.step_up =
            number_at(ctx, *bond, bond_ptr, "step_up", true).value_or(0.0);
        fin.bond_repayment.threshold =
            number_at(ctx, *bond, bond_ptr, "threshold", true).value_or(0.0);
        if (fin.bond_repayment.base < 0.0 || fin.bond_repayment.step_up < 0.0 ||
            fin.bond_repayment.threshold < 0.0) {
          ctx.add(bond_ptr, "E_RANGE", "repayment terms are non-negative");
        }
      } else if (!kind.empty()) {
        ctx.add(ptr(bond_ptr, "kind"), "E_ENUM",
                "unknown repayment kind '" + kind + "', expected fixed|pollution_linked");
      }
    }
  }

  if (doc.contains("horizon")) {
    out.horizon = int_at(ctx, doc, "", "horizon", false);
    if (out.horizon && *out.horizon < 1) {
      ctx.add("/horizon", "E_RANGE", "horizon must be at least 1");
    }
  }

  if (doc.contains("assignment")) {
    if (const Json* assignment = object_at(ctx, doc, "", "assignment", false)) {
      NbsAssignment map;
      for (const auto& [field, option] : assignment->items()) {
        const std::string entry_ptr = ptr("/assignment", field);
        if (!field_set.contains(field)) {
          ctx.add(entry_ptr, "E_UNKNOWN_ID", "unknown field '" + field + "'");
        }
        if (!option.is_string()) {
          ctx.add(entry_ptr, "E_TYPE", "expected an option id string");
          continue;
        }
        const std::string option_id = option.get<std::string>();
        if (!option_set.contains(option_id)) {
          ctx.add(entry_ptr, "E_UNKNOWN_ID", "unknown option '" + option_id + "'");
        }
        map[field] = option_id;
      }
      out.assignment = std::move(map);
    }
  }

  if (doc.contains("priors")) {
    if (const Json* priors = object_at(ctx, doc, "", "priors", false)) {
      WaterPriors parsed;
      const std::string base = "/priors";
      if (priors->contains("chemical_cost_rate")) {
        parsed.chemical_cost_rate =
            read_prior(ctx, (*priors)["chemical_cost_rate"], ptr(base, "chemical_cost_rate"));
      }
      if (priors->contains("fine_rate")) {
        parsed.fine_rate = read_prior(ctx, (*priors)["fine_rate"], ptr(base, "fine_rate"));
      }
      if (priors->contains("rain_exponent")) {
        parsed.rain_exponent =
            read_prior(ctx, (*priors)["rain_exponent"], ptr(base, "rain_exponent"));
      }
      if (priors->contains("load_factors")) {
        if (const Json* loads = object_at(ctx, *priors, base, "load_factors", false)) {
          const std::string loads_ptr = ptr(base, "load_factors");
          for (const auto& [field, prior] : loads->items()) {
            if (!field_set.contains(field)) {
              ctx.add(ptr(loads_ptr, field), "E_UNKNOWN_ID", "unknown field '" + field + "'");
            }
            parsed.load_factors[field] = read_prior(ctx, prior, ptr(loads_ptr, field));
          }
        }
      }
      out.priors = std::move(parsed);
    }
  }

  if (ctx.ok()) {
    domain_backstop(ctx, [&] {
      validate_catchment(out.catchment);
      if (out.priors) validate_priors(*out.priors, out.catchment);
      if (out.assignment) {
        for (const Field& field : out.catchment.fields) {
          const auto it = out.assignment->find(field.id);
          if (it == out.assignment->end()) {
            throw ConfigError("assignment is missing field '" + field.id + "'");
          }
          if (std::find(field.candidate_options.begin(), field.candidate_options.end(),
                        it->second) == field.candidate_options.end()) {
            throw ConfigError("option '" + it->second + "' is not a candidate for field '" +
                              field.id + "'");
          }
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// scenario

ScenarioDocument read_scenario(Ctx& ctx, const Json& doc) {
  ScenarioDocument out;
  check_header(ctx, doc, DocumentType::scenario);
  if (!doc.is_object()) return out;

  out.id = string_at(ctx, doc, "", "id", false).value_or("");
  const std::string kind = string_at(ctx, doc, "", "kind", true).value_or("");
  if (doc.contains("renormalize")) {
    out.spec.renormalize = bool_at(ctx, doc, "", "renormalize", false).value_or(true);
  }

  if (kind == "portfolio") {
    out.spec.kind = ScenarioKind::portfolio;
    if (const Json* weights = object_at(ctx, doc, "", "weights", true)) {
      double total = 0.0;
      for (const auto& [supplier, weight] : weights->items()) {
        const std::string entry_ptr = ptr("/weights", supplier);
        if (!weight.is_number()) {
          ctx.add(entry_ptr, "E_TYPE", "expected a number");
          continue;
        }
        const double w = weight.get<double>();
        if (!(w >= 0.0) || !std::isfinite(w)) {
          ctx.add(entry_ptr, "E_RANGE", "weights are non-negative");
        }
        total += w;
        out.spec.portfolio_weights[supplier] = w;
      }
      if (out.spec.portfolio_weights.empty()) {
        ctx.add("/weights", "E_EMPTY", "no portfolio weights");
      } else if (std::fabs(total - 1.0) > kSumTolerance) {
        std::ostringstream msg;
        msg << "portfolio weights sum to " << total << ", expected 1";
        ctx.add("/weights", "E_SUM", msg.str());
      }
    }
  } else if (kind == "divestment") {
    out.spec.kind = ScenarioKind::divestment;
    if (const Json* edges = array_at(ctx, doc, "", "divest", true)) {
      if (edges->empty()) ctx.add("/divest", "E_EMPTY", "no edges to divest");
      for (std::size_t i = 0; i < edges->size(); ++i) {
        const std::string base = ptr("/divest", i);
        if (!(*edges)[i].is_object()) {
          ctx.add(base, "E_TYPE", "expected an object");
          continue;
        }
        const std::string supplier =
            string_at(ctx, (*edges)[i], base, "supplier", true).value_or("");
        const std::string abattoir =
            string_at(ctx, (*edges)[i], base, "abattoir", true).value_or("");
        out.spec.divest_edges.emplace_back(supplier, abattoir);
      }
    }
  } else if (kind == "embargo_dynamics") {
    out.spec.kind = ScenarioKind::embargo_dynamics;
    if (const Json* survival = object_at(ctx, doc, "", "survival", true)) {
      if (survival->empty()) ctx.add("/survival", "E_EMPTY", "no survival table");
      for (const auto& [strength, row] : survival->items()) {
        const std::string row_ptr = ptr("/survival", strength);
        if (!row.is_object()) {
          ctx.add(row_ptr, "E_TYPE", "expected an object of state survival probabilities");
          continue;
        }
        std::map<std::string, double> parsed;
        for (const auto& [state, p] : row.items()) {
          const std::string entry_ptr = ptr(row_ptr, state);
          if (!p.is_number()) {
            ctx.add(entry_ptr, "E_TYPE", "expected a number");
            continue;
          }
          const double value = p.get<double>();
          check_unit_interval(ctx, value, entry_ptr);
          parsed[state] = value;
        }
        out.spec.survival_table[strength] = std::move(parsed);
      }
    }
    out.spec.legislation_strength =
        string_at(ctx, doc, "", "legislation_strength", true).value_or("");
    if (!out.spec.legislation_strength.empty() &&
        !out.spec.survival_table.contains(out.spec.legislation_strength)) {
      ctx.add("/legislation_strength", "E_UNKNOWN_ID",
              "strength '" + out.spec.legislation_strength + "' is not in the survival table");
    }
    out.spec.horizon = int_at(ctx, doc, "", "horizon", true).value_or(1);
    if (out.spec.horizon < 1) ctx.add("/horizon", "E_RANGE", "horizon must be at least 1");
  } else if (!kind.empty()) {
    ctx.add("/kind", "E_ENUM",
            "unknown kind '" + kind + "', expected portfolio|divestment|embargo_dynamics");
  }
  return out;
}

ControversyDocument read_controversy_document(Ctx& ctx, const Json& doc) {
  ControversyDocument out;
  check_header(ctx, doc, DocumentType::controversy);
  if (!doc.is_object()) return out;
  out.id = string_at(ctx, doc, "", "id", false).value_or("");
  out.inputs = read_controversy(ctx, doc, "", true);
  return out;
}

std::string issue_line(const ValidationIssue& issue) {
  std::string where = issue.pointer.empty() ? std::string("<document>") : issue.pointer;
  return where + " [" + issue.code + "] " + issue.message;
}

[[noreturn]] void throw_issues(const std::vector<ValidationIssue>& issues) {
  std::string message;
  bool schema = false;
  for (const ValidationIssue& issue : issues) {
    if (!message.empty()) message += "; ";
    message += issue_line(issue);
    schema = schema || issue_is_schema(issue);
  }
  if (schema) throw ConfigError(message);
  throw InvariantError(message);
}

template <typename T, typename Reader>
T load_checked(const Json& doc, Reader reader) {
  Ctx ctx;
  T out = reader(ctx, doc);
  if (!ctx.ok()) throw_issues(ctx.issues);
  return out;
}

Json prior_to_json(const ParamPrior& prior) {
  Json out = Json::object();
  switch (prior.kind) {
    case ParamPrior::Kind::point:
      out["kind"] = "point";
      out["value"] = prior.value;
      break;
    case ParamPrior::Kind::uniform:
      out["kind"] = "uniform";
      out["low"] = prior.low;
      out["high"] = prior.high;
      break;
    case ParamPrior::Kind::normal:
      out["kind"] = "normal";
      out["mean"] = prior.mean;
      out["sd"] = prior.sd;
      break;
  }
  return out;
}

Json controversy_to_json(const ControversyInputs& inputs) {
  Json out = Json::object();
  if (inputs.prior) out["prior"] = *inputs.prior;
  out["classes"] = inputs.lexicon.classes;
  Json lexicon = Json::object();
  for (const auto& [word, entry] : inputs.lexicon.weights) {
    lexicon[word] = Json{{"class", entry.first}, {"weight", entry.second}};
  }
  out["lexicon"] = std::move(lexicon);
  out["likelihood"] = Json{{"given_compliant", inputs.likelihood.p_given_compliant},
                           {"given_noncompliant", inputs.likelihood.p_given_noncompliant}};
  Json reports = Json::array();
  for (const Report& report : inputs.reports) {
    Json entry = Json{{"id", report.id}, {"subject", report.subject}};
    if (!report.text.empty()) entry["text"] = report.text;
    if (report.sentiment_class) entry["class"] = *report.sentiment_class;
    reports.push_back(std::move(entry));
  }
  out["reports"] = std::move(reports);
  return out;
}

Json sourcing_to_json(
    const std::map<std::string, std::vector<std::pair<std::string, double>>>& rows) {
  Json out = Json::object();
  for (const auto& [id, edges] : rows) {
    Json row = Json::array();
    for (const auto& [to, p] : edges) row.push_back(Json{{"to", to}, {"p", p}});
    out[id] = std::move(row);
  }
  return out;
}

}  // namespace

std::string document_type_name(DocumentType type) {
  switch (type) {
    case DocumentType::supply_chain:
      return "supply_chain";
    case DocumentType::catchment:
      return "catchment";
    case DocumentType::scenario:
      return "scenario";
    case DocumentType::controversy:
      return "controversy";
  }
  return "unknown";
}

bool issue_is_schema(const ValidationIssue& issue) {
  static const std::set<std::string> schema_codes = {
      "E_VERSION", "E_TYPE",   "E_MISSING",       "E_EMPTY",
      "E_DUP",     "E_ENUM",   "E_UNKNOWN_ID",    "E_LENGTH",
      "E_DOMAIN_CONFIG",
  };
  return schema_codes.contains(issue.code);
}

bool ValidationReport::has_schema_issue() const {
  return std::any_of(issues.begin(), issues.end(), issue_is_schema);
}

int ValidationReport::exit_code() const {
  if (issues.empty()) return 0;
  return has_schema_issue() ? static_cast<int>(errc::config) : static_cast<int>(errc::invariant);
}

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

Json parse_json_file(const std::string& path) {
  return parse_json_text(read_text_file(path), path);
}

DocumentType document_type(const Json& doc) {
  if (!doc.is_object() || !doc.contains("type") || !doc["type"].is_string()) {
    throw ConfigError("document has no string 'type' member");
  }
  const std::string type = doc["type"].get<std::string>();
  for (DocumentType candidate :
       {DocumentType::supply_chain, DocumentType::catchment, DocumentType::scenario,
        DocumentType::controversy}) {
    if (type == document_type_name(candidate)) return candidate;
  }
  throw ConfigError("unknown document type '" + type + "'");
}

ValidationReport validate_document(const Json& doc) {
  ValidationReport report;
  DocumentType type;
  try {
    type = document_type(doc);
  } catch (const ConfigError& e) {
    report.issues.push_back({"/type", "E_TYPE", e.what()});
    return report;
  }
  report.type = type;
  Ctx ctx;
  switch (type) {
    case DocumentType::supply_chain:
      read_supply_chain(ctx, doc);
      break;
    case DocumentType::catchment:
      read_catchment(ctx, doc);
      break;
    case DocumentType::scenario:
      read_scenario(ctx, doc);
      break;
    case DocumentType::controversy:
      read_controversy_document(ctx, doc);
      break;
  }
  report.issues = std::move(ctx.issues);
  return report;
}

SupplyChainDocument load_supply_chain(const Json& doc) {
  return load_checked<SupplyChainDocument>(
      doc, [](Ctx& ctx, const Json& d) { return read_supply_chain(ctx, d); });
}

CatchmentDocument load_catchment(const Json& doc) {
  return load_checked<CatchmentDocument>(
      doc, [](Ctx& ctx, const Json& d) { return read_catchment(ctx, d); });
}

ScenarioDocument load_scenario(const Json& doc) {
  return load_checked<ScenarioDocument>(
      doc, [](Ctx& ctx, const Json& d) { return read_scenario(ctx, d); });
}

ControversyDocument load_controversy(const Json& doc) {
  return load_checked<ControversyDocument>(
      doc, [](Ctx& ctx, const Json& d) { return read_controversy_document(ctx, d); });
}

Json to_json(const SupplyChainDocument& doc) {
  Json out = Json::object();
  out["version"] = kFormatVersion;
  out["type"] = document_type_name(DocumentType::supply_chain);
  if (!doc.id.empty()) out["id"] = doc.id;

  Json states = Json::object();
  states["labels"] = doc.states.state_labels;
  states["p_compliance"] = doc.states.p_compliance_given_state;
  states["nrp_bins"] = doc.states.nrp_bins;
  states["nrp"] = doc.states.nrp_given_state;
  states["cattle_levels"] = doc.states.cattle_levels;
  states["cattle"] = doc.states.cattle_given_state;
  out["states"] = std::move(states);

  out["return_per_head"] = doc.graph.return_per_head;
  out["suppliers"] = doc.graph.suppliers;
  out["abattoirs"] = doc.graph.abattoirs;

  Json farms = Json::array();
  for (const Farm& farm : doc.graph.farms) {
    Json entry = Json::object();
    entry["id"] = farm.id;
    entry["p_car_true"] = farm.car_assessment.p_car_true;
    entry["state_given_car_true"] = farm.state_given_car_true;
    entry["state_given_car_false"] = farm.state_given_car_false;
    if (!farm.laundering_sources.empty()) {
      Json sources = Json::array();
      for (const auto& [from, p] : farm.laundering_sources) {
        sources.push_back(Json{{"farm", from}, {"p", p}});
      }
      entry["laundering_sources"] = std::move(sources);
    }
    farms.push_back(std::move(entry));
  }
  out["farms"] = std::move(farms);

  out["sourcing_supplier_to_abattoir"] = sourcing_to_json(doc.graph.sourcing_b_to_a);
  out["sourcing_abattoir_to_farm"] = sourcing_to_json(doc.graph.sourcing_a_to_f);
  if (doc.controversy) out["controversy"] = controversy_to_json(*doc.controversy);
  return out;
}

Json to_json(const CatchmentDocument& doc) {
  Json out = Json::object();
  out["version"] = kFormatVersion;
  out["type"] = document_type_name(DocumentType::catchment);
  if (!doc.catchment.id.empty()) out["id"] = doc.catchment.id;

  Json options = Json::array();
  for (const NbsOption& option : doc.catchment.options) {
    const char* kind = option.kind == NbsKind::none
                           ? "none"
                           : (option.kind == NbsKind::cultivated_buffer ? "cultivated_buffer"
                                                                        : "grassland_buffer");
    options.push_back(Json{{"id", option.id},
                           {"kind", kind},
                           {"absorption_max", option.absorption_max},
                           {"establishment_lag", option.establishment_lag},
                           {"payment_per_ha_per_interval", option.payment_per_ha_per_interval}});
  }
  out["options"] = std::move(options);

  Json fields = Json::array();
  for (const Field& field : doc.catchment.fields) {
    fields.push_back(Json{{"id", field.id},
                          {"area", field.area},
                          {"load_factor", field.load_factor},
                          {"candidates", field.candidate_options}});
  }
  out["fields"] = std::move(fields);

  out["rainfall"] = Json{{"values", doc.catchment.rainfall.values},
                         {"interval_label", doc.catchment.rainfall.interval_label}};
  out["rain_exponent"] = doc.catchment.rain_exponent;

  const FinanceParams& fin = doc.catchment.finance;
  Json finance = Json::object();
  finance["initial_balance"] = fin.initial_balance;
  finance["income_per_interval"] = fin.income_per_interval;
  finance["other_expenses"] = fin.other_expenses;
  if (fin.bond_repayment.kind == BondRepayment::Kind::fixed) {
    finance["bond_repayment"] =
        Json{{"kind", "fixed"}, {"series", fin.bond_repayment.fixed_series}};
  } else {
    finance["bond_repayment"] = Json{{"kind", "pollution_linked"},
                                     {"base", fin.bond_repayment.base},
                                     {"step_up", fin.bond_repayment.step_up},
                                     {"threshold", fin.bond_repayment.threshold}};
  }
  finance["chemical_cost_rate"] = fin.chemical_cost_rate;
  finance["fine_rate"] = fin.fine_rate;
  finance["fine_cap_fraction"] = fin.fine_cap_fraction;
  finance["reputation_scale"] = fin.reputation_scale;
  out["finance"] = std::move(finance);

  if (doc.horizon) out["horizon"] = *doc.horizon;
  if (doc.assignment) {
    Json assignment = Json::object();
    for (const auto& [field, option] : *doc.assignment) assignment[field] = option;
    out["assignment"] = std::move(assignment);
  }
  if (doc.priors) {
    Json priors = Json::object();
    if (doc.priors->chemical_cost_rate) {
      priors["chemical_cost_rate"] = prior_to_json(*doc.priors->chemical_cost_rate);
    }
    if (doc.priors->fine_rate) priors["fine_rate"] = prior_to_json(*doc.priors->fine_rate);
    if (doc.priors->rain_exponent) {
      priors["rain_exponent"] = prior_to_json(*doc.priors->rain_exponent);
    }
    if (!doc.priors->load_factors.empty()) {
      Json loads = Json::object();
      for (const auto& [field, prior] : doc.priors->load_factors) {
        loads[field] = prior_to_json(prior);
      }
      priors["load_factors"] = std::move(loads);
    }
    out["priors"] = std::move(priors);
  }
  return out;
}

Json to_json(const ScenarioDocument& doc) {
  Json out = Json::object();
  out["version"] = kFormatVersion;
  out["type"] = document_type_name(DocumentType::scenario);
  if (!doc.id.empty()) out["id"] = doc.id;
  switch (doc.spec.kind) {
    case ScenarioKind::portfolio: {
      out["kind"] = "portfolio";
      Json weights = Json::object();
      for (const auto& [supplier, weight] : doc.spec.portfolio_weights) {
        weights[supplier] = weight;
      }
      out["weights"] = std::move(weights);
      break;
    }
    case ScenarioKind::divestment: {
      out["kind"] = "divestment";
      Json edges = Json::array();
      for (const auto& [supplier, abattoir] : doc.spec.divest_edges) {
        edges.push_back(Json{{"supplier", supplier}, {"abattoir", abattoir}});
      }
      out["divest"] = std::move(edges);
      break;
    }
    case ScenarioKind::embargo_dynamics: {
      out["kind"] = "embargo_dynamics";
      Json survival = Json::object();
      for (const auto& [strength, row] : doc.spec.survival_table) {
        Json states = Json::object();
        for (const auto& [state, p] : row) states[state] = p;
        survival[strength] = std::move(states);
      }
      out["survival"] = std::move(survival);
      out["legislation_strength"] = doc.spec.legislation_strength;
      out["horizon"] = doc.spec.horizon;
      break;
    }
  }
  out["renormalize"] = doc.spec.renormalize;
  return out;
}

Json to_json(const ControversyDocument& doc) {
  Json out = Json::object();
  out["version"] = kFormatVersion;
  out["type"] = document_type_name(DocumentType::controversy);
  if (!doc.id.empty()) out["id"] = doc.id;
  const Json inputs = controversy_to_json(doc.inputs);
  for (const auto& [key, value] : inputs.items()) out[key] = value;
  return out;
}

Json to_json(const McmcSummary& summary) {
  return Json{{"mean", summary.mean}, {"sd", summary.sd}, {"se", summary.se}};
}

Json to_json(const Trajectory& trajectory) {
  Json steps = Json::array();
  for (const TrajectoryStep& step : trajectory.steps) {
    steps.push_back(Json{{"t", step.t},
                         {"pollution", step.pollution},
                         {"chemical", step.chemical},
                         {"fine", step.fine},
                         {"nbs", step.nbs},
                         {"repayment", step.repayment},
                         {"balance", step.balance},
                         {"reputation", step.reputation},
                         {"e_score", step.e_score}});
  }
  return Json{{"steps", std::move(steps)},
              {"objective", trajectory.objective},
              {"feasible", trajectory.feasible},
              {"first_insolvent_step", trajectory.first_insolvent_step},
              {"min_balance", trajectory.min_balance}};
}

std::string trajectory_csv(const Trajectory& trajectory) {
  std::string out = "t,pollution,chemical,fine,nbs,repayment,balance,reputation,e_score\r\n";
  for (const TrajectoryStep& step : trajectory.steps) {
    out += std::to_string(step.t);
    for (double v : {step.pollution, step.chemical, step.fine, step.nbs, step.repayment,
                     step.balance, step.reputation, step.e_score}) {
      out += ',';
      out += format_double(v);
    }
    out += "\r\n";
  }
  return out;
}

std::string mcmc_series_csv(const WaterMcmcResult& result) {
  std::string out = "t,e_score_mean,e_score_sd,e_score_se\r\n";
  for (std::size_t t = 0; t < result.e_score_series.size(); ++t) {
    const McmcSummary& summary = result.e_score_series[t];
    out += std::to_string(t);
    for (double v : {summary.mean, summary.sd, summary.se}) {
      out += ',';
      out += format_double(v);
    }
    out += "\r\n";
  }
  return out;
}

std::string dump_json(const Json& doc) { return doc.dump(2) + "\n"; }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file '" + path + "'");
  out << content;
  if (!out) throw ConfigError("failed writing file '" + path + "'");
}

}  // namespace naturerisk
