#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "naturerisk/beef_model.hpp"
#include "naturerisk/controversy.hpp"
#include "naturerisk/errors.hpp"
#include "naturerisk/inference.hpp"
#include "naturerisk/io.hpp"
#include "naturerisk/nbs_optimizer.hpp"
#include "naturerisk/scenario.hpp"
#include "naturerisk/water_model.hpp"

namespace {

using namespace naturerisk;

constexpr double kOracleTolerance = 1e-9;

struct Flags {
  std::string input;
  std::string scenario;
  std::string output;
  std::uint64_t seed = 0;
  int horizon = 0;  // 0 derives from the document or the rainfall series
  int threads = 1;
  bool oracle = false;
  bool strict_sigmoid = false;
  std::uint64_t draws = 0;
  std::uint64_t burn_in = 1000;
};

// Sub-seed derivation for commands that run more than one chain; a single
// chain uses the configured seed unchanged so module-level reruns match.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void check_threads(const Flags& flags) {
  if (flags.threads < 1) throw ConfigError("--threads must be at least 1");
}

std::string sibling_csv_path(const std::string& output) {
  const std::size_t dot = output.find_last_of('.');
  const std::size_t slash = output.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return output + ".csv";
  }
  return output.substr(0, dot) + ".csv";
}

void emit_text(const Flags& flags, const std::string& text) {
  if (flags.output.empty()) {
    std::cout << text;
  } else {
    write_text_file(flags.output, text);
  }
}

void emit_json(const Flags& flags, const Json& doc,
               const std::optional<std::string>& csv = std::nullopt) {
  emit_text(flags, dump_json(doc));
  if (csv && !flags.output.empty()) {
    write_text_file(sibling_csv_path(flags.output), *csv);
  }
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const Flags& flags) {
  const Json doc = parse_json_file(flags.input);
  const ValidationReport report = validate_document(doc);
  std::string text;
  if (report.ok()) {
    text = "valid " + document_type_name(*report.type) + "\n";
  } else {
    for (const ValidationIssue& issue : report.issues) {
      const std::string where = issue.pointer.empty() ? "<document>" : issue.pointer;
      text += where + " [" + issue.code + "] " + issue.message + "\n";
    }
  }
  emit_text(flags, text);
  return report.exit_code();
}

// ---------------------------------------------------------------------------
// score-beef

double enumerated_compliance(const CompiledChain& chain) {
  return enumerate_joint(chain.model, {"L"}).values()[1];
}

std::vector<double> enumerated_nrp(const CompiledChain& chain) {
  return enumerate_joint(chain.model, {"N"}).values();
}

double enumerated_return(const SupplyChainGraph& graph, const CompiledChain& chain) {
  const std::vector<double> values = enumerate_joint(chain.model, {"C"}).values();
  double heads = 0.0;
  for (std::size_t c = 0; c < values.size(); ++c) {
    heads += static_cast<double>(chain.cattle_levels[c]) * values[c];
  }
  return graph.return_per_head * heads;
}

Json actor_scores_json(const SupplyChainGraph& graph, const FarmStateModel& states,
                       const std::string& supplier, const std::vector<std::string>& actors) {
  Json rows = Json::array();
  for (const std::string& actor : actors) {
    try {
      const double forest = actor_e_score(graph, states, supplier, actor, EScoreKind::forest);
      const double nrp = actor_e_score(graph, states, supplier, actor, EScoreKind::nrp);
      rows.push_back(Json{{"id", actor}, {"e_score_forest", forest}, {"e_score_nrp", nrp}});
    } catch (const ImpossibleEvidenceError&) {
      // actor carries zero probability mass for this supplier; nothing to score
    }
  }
  return rows;
}

std::map<std::string, std::vector<Report>> classified_by_subject(
    const ControversyInputs& inputs) {
  std::map<std::string, std::vector<Report>> by_subject;
  for (const Report& report : inputs.reports) {
    Report classified = report;
    if (!classified.sentiment_class) {
      classified.sentiment_class = classify(report, inputs.lexicon).sentiment_class;
    }
    by_subject[classified.subject].push_back(std::move(classified));
  }
  return by_subject;
}

int cmd_score_beef(const Flags& flags) {
  check_threads(flags);
  const SupplyChainDocument doc = load_supply_chain(parse_json_file(flags.input));
  const SupplyChainGraph& graph = doc.graph;
  const FarmStateModel& states = doc.states;

  std::map<std::string, std::vector<Report>> controversy_reports;
  if (doc.controversy) {
    controversy_reports = classified_by_subject(*doc.controversy);
    const std::set<std::string> suppliers(graph.suppliers.begin(), graph.suppliers.end());
    for (const auto& [subject, reports] : controversy_reports) {
      if (!suppliers.contains(subject)) {
        throw ConfigError("controversy report subject '" + subject + "' is not a supplier");
      }
    }
  }

  Json out = Json::object();
  out["version"] = kFormatVersion;
  out["type"] = "beef_scores";
  if (!doc.id.empty()) out["input_id"] = doc.id;

  double oracle_max_delta = 0.0;
  Json suppliers = Json::array();
  for (const std::string& supplier : graph.suppliers) {
    Json row = Json::object();
    row["id"] = supplier;
    const double forest = e_score_forest(graph, states, supplier);
    const double nrp = e_score_nrp(graph, states, supplier);
    const double ret = expected_return(graph, states, supplier);
    row["e_score_forest"] = forest;
    row["e_score_nrp"] = nrp;
    row["expected_return"] = ret;
    row["nrp_distribution"] = nrp_distribution(graph, states, supplier);

    std::vector<std::string> abattoirs;
    std::vector<std::string> farms;
    std::set<std::string> seen_farms;
    if (const auto it = graph.sourcing_b_to_a.find(supplier); it != graph.sourcing_b_to_a.end()) {
      for (const auto& [abattoir, p] : it->second) {
        if (p <= 0.0) continue;
        abattoirs.push_back(abattoir);
        if (const auto af = graph.sourcing_a_to_f.find(abattoir);
            af != graph.sourcing_a_to_f.end()) {
          for (const auto& [farm, q] : af->second) {
            if (q > 0.0 && seen_farms.insert(farm).second) farms.push_back(farm);
          }
        }
      }
    }
    row["abattoirs"] = actor_scores_json(graph, states, supplier, abattoirs);
    row["origin_farms"] = actor_scores_json(graph, states, supplier, farms);

    if (doc.controversy) {
      if (const auto it = controversy_reports.find(supplier);
          it != controversy_reports.end()) {
        const double prior = doc.controversy->prior.value_or(forest);
        const double posterior =
            bayes_update_compliance(prior, it->second, doc.controversy->likelihood);
        row["controversy"] = Json{{"prior", prior},
                                  {"posterior", posterior},
                                  {"n_reports", it->second.size()}};
      }
    }

    if (flags.oracle) {
      const CompiledChain chain = compile_chain(graph, states, supplier);
      const double compliance_enum = enumerated_compliance(chain);
      const std::vector<double> nrp_enum = enumerated_nrp(chain);
      const double return_enum = enumerated_return(graph, chain);
      double delta = std::fabs(compliance_enum - forest);
      const std::vector<double> nrp_engine =
          row["nrp_distribution"].get<std::vector<double>>();
      for (std::size_t b = 0; b < nrp_enum.size(); ++b) {
        delta = std::max(delta, std::fabs(nrp_enum[b] - nrp_engine[b]));
      }
      delta = std::max(delta, std::fabs(return_enum - ret) / (1.0 + std::fabs(ret)));
      oracle_max_delta = std::max(oracle_max_delta, delta);
      row["oracle"] = Json{{"compliance", compliance_enum},
                           {"expected_return", return_enum},
                           {"nrp_distribution", nrp_enum},
                           {"max_abs_delta", delta}};
    }
    suppliers.push_back(std::move(row));
  }
  out["suppliers"] = std::move(suppliers);

  if (flags.oracle) {
    out["oracle_max_abs_delta"] = oracle_max_delta;
    if (oracle_max_delta > kOracleTolerance) {
      throw InvariantError("oracle cross-check failed: max delta " +
                           format_double(oracle_max_delta) + " exceeds " +
                           format_double(kOracleTolerance));
    }
  }
  emit_json(flags, out);
  return 0;
}

// ---------------------------------------------------------------------------
// scenario

Json supplier_scores_json(const SupplyChainGraph& graph, const FarmStateModel& states) {
  Json rows = Json::array();
  for (const std::string& supplier : graph.suppliers) {
    rows.push_back(Json{{"id", supplier},
                        {"e_score_forest", e_score_forest(graph, states, supplier)},
                        {"e_score_nrp", e_score_nrp(graph, states, supplier)},
                        {"expected_return", expected_return(graph, states, supplier)}});
  }
  return rows;
}

int cmd_scenario(const Flags& flags) {
  check_threads(flags);
  const SupplyChainDocument doc = load_supply_chain(parse_json_file(flags.input));
  const ScenarioDocument scenario = load_scenario(parse_json_file(flags.scenario));
  const ScenarioSpec& spec = scenario.spec;

  Json out = Json::object();
  out["version"] = kFormatVersion;
  out["type"] = "scenario_result";
  if (!doc.id.empty()) out["input_id"] = doc.id;
  if (!scenario.id.empty()) out["scenario_id"] = scenario.id;

  switch (spec.kind) {
    case ScenarioKind::portfolio: {
      out["kind"] = "portfolio";
      const PortfolioScore score = portfolio_e_score(doc.graph, doc.states, spec);
      out["e_score"] = Json{{"forest", score.forest}, {"nrp", score.nrp}};
      Json components = Json::array();
      for (const auto& [supplier, weight] : spec.portfolio_weights) {
        components.push_back(
            Json{{"id", supplier},
                 {"weight", weight},
                 {"e_score_forest", e_score_forest(doc.graph, doc.states, supplier)},
                 {"e_score_nrp", e_score_nrp(doc.graph, doc.states, supplier)}});
      }
      out["components"] = std::move(components);
      break;
    }
    case ScenarioKind::divestment: {
      out["kind"] = "divestment";
      out["renormalize"] = spec.renormalize;
      Json edges = Json::array();
      for (const auto& [supplier, abattoir] : spec.divest_edges) {
        edges.push_back(Json{{"supplier", supplier}, {"abattoir", abattoir}});
      }
      out["divested_edges"] = std::move(edges);
      const SupplyChainGraph edited = apply_divestment(doc.graph, spec);
      out["suppliers"] = supplier_scores_json(edited, doc.states);
      break;
    }
    case ScenarioKind::embargo_dynamics: {
      out["kind"] = "embargo_dynamics";
      out["legislation_strength"] = spec.legislation_strength;
      out["horizon"] = spec.horizon;
      out["renormalize"] = spec.renormalize;
      Json suppliers = Json::array();
      for (const std::string& supplier : doc.graph.suppliers) {
        const std::vector<ProjectionStep> steps =
            embargo_projection(doc.graph, doc.states, spec, supplier);
        Json rows = Json::array();
        for (const ProjectionStep& step : steps) {
          rows.push_back(Json{{"step", step.step},
                              {"expected_return", step.expected_return},
                              {"e_score_forest", step.e_score_forest}});
        }
        suppliers.push_back(Json{{"id", supplier}, {"steps", std::move(rows)}});
      }
      out["suppliers"] = std::move(suppliers);
      break;
    }
  }
  emit_json(flags, out);
  return 0;
}

// ---------------------------------------------------------------------------
// water commands

int resolve_horizon(const Flags& flags, const CatchmentDocument& doc) {
  if (flags.horizon > 0) return flags.horizon;
  if (doc.horizon) return *doc.horizon;
  return static_cast<int>(doc.catchment.rainfall.values.size());
}

NbsAssignment default_assignment(const CatchmentDocument& doc) {
  if (doc.assignment) return *doc.assignment;
  NbsAssignment assignment;
  for (const Field& field : doc.catchment.fields) {
    for (const std::string& candidate : field.candidate_options) {
      if (find_option(doc.catchment, candidate).kind == NbsKind::none) {
        assignment[field.id] = candidate;
        break;
      }
    }
  }
  return assignment;
}

Json assignment_json(const NbsAssignment& assignment) {
  Json out = Json::object();
  for (const auto& [field, option] : assignment) out[field] = option;
  return out;
}

Json distribution_json(const OptimumDistribution& dist) {
  Json counts = Json::object();
  for (const auto& [key, n] : dist.assignment_counts) counts[key] = n;
  Json out = Json{{"n_draws", dist.n_draws},
                  {"deterministic", dist.deterministic},
                  {"acceptance_rate", dist.acceptance_rate},
                  {"assignment_counts", std::move(counts)},
                  {"objective", to_json(dist.objective)},
                  {"infeasible_draws", dist.infeasible_draws}};
  if (dist.warning) out["warning"] = *dist.warning;
  return out;
}

int cmd_optimize_water(const Flags& flags) {
  check_threads(flags);
  const CatchmentDocument doc = load_catchment(parse_json_file(flags.input));
  const int horizon = resolve_horizon(flags, doc);
  OptimizeOptions options;
  options.strict_sigmoid = flags.strict_sigmoid;

  const OptimalAssignment best =
      optimize(doc.catchment, doc.catchment.finance, doc.catchment.rainfall, horizon, options);

  Json out = Json::object();
  out["version"] = kFormatVersion;
  out["type"] = "water_optimum";
  if (!doc.catchment.id.empty()) out["input_id"] = doc.catchment.id;
  out["horizon"] = horizon;
  out["assignment"] = assignment_json(best.assignment);
  out["objective"] = best.trajectory.objective;
  out["evaluated"] = best.evaluated;
  out["used_branch_and_bound"] = best.used_branch_and_bound;
  out["trajectory"] = to_json(best.trajectory);

  if (flags.draws > 0 && doc.priors) {
    out["distribution"] = distribution_json(optimum_distribution(
        doc.catchment, doc.catchment.finance, doc.catchment.rainfall, horizon, *doc.priors,
        flags.draws, flags.burn_in, flags.seed, 0.8, options));
  }
  emit_json(flags, out, trajectory_csv(best.trajectory));
  return 0;
}

int cmd_project_water(const Flags& flags) {
  check_threads(flags);
  const CatchmentDocument doc = load_catchment(parse_json_file(flags.input));
  const int horizon = resolve_horizon(flags, doc);
  const NbsAssignment assignment = default_assignment(doc);

  Json out = Json::object();
  out["version"] = kFormatVersion;
  out["type"] = "water_projection";
  if (!doc.catchment.id.empty()) out["input_id"] = doc.catchment.id;
  out["horizon"] = horizon;
  out["assignment"] = assignment_json(assignment);

  if (flags.draws == 0) {
    const Trajectory trajectory =
        balance_trajectory(doc.catchment, assignment, doc.catchment.finance,
                           doc.catchment.rainfall, horizon, flags.strict_sigmoid);
    out["deterministic"] = true;
    out["trajectory"] = to_json(trajectory);
    emit_json(flags, out, trajectory_csv(trajectory));
    return 0;
  }

  const WaterPriors priors = doc.priors.value_or(WaterPriors{});
  const WaterMcmcResult result = expected_outputs_mcmc(
      doc.catchment, assignment, doc.catchment.finance, doc.catchment.rainfall, horizon, priors,
      flags.draws, flags.burn_in, flags.seed, 0.8, flags.strict_sigmoid);

  out["deterministic"] = result.deterministic;
  out["n_draws"] = result.n_draws;
  out["acceptance_rate"] = result.acceptance_rate;
  if (result.warning) out["warning"] = *result.warning;
  out["summaries"] = Json{{"final_balance", to_json(result.final_balance)},
                          {"final_reputation", to_json(result.final_reputation)},
                          {"objective", to_json(result.objective)},
                          {"chemical_total", to_json(result.chemical_total)},
                          {"fine_total", to_json(result.fine_total)}};
  Json series = Json::array();
  for (std::size_t t = 0; t < result.e_score_series.size(); ++t) {
    Json entry = to_json(result.e_score_series[t]);
    entry["t"] = t;
    series.push_back(std::move(entry));
  }
  out["e_score_series"] = std::move(series);
  emit_json(flags, out, mcmc_series_csv(result));
  return 0;
}

// ---------------------------------------------------------------------------
// report

std::string md_row(const std::vector<std::string>& cells) {
  std::string row = "|";
  for (const std::string& cell : cells) row += " " + cell + " |";
  return row + "\n";
}

std::string md_table(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  std::string out = md_row(header);
  std::vector<std::string> rule(header.size(), "---");
  out += md_row(rule);
  for (const auto& row : rows) out += md_row(row);
  return out;
}

std::string fmt(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

std::string report_supply_chain(const Flags& flags, const SupplyChainDocument& doc) {
  const SupplyChainGraph& graph = doc.graph;
  const FarmStateModel& states = doc.states;
  std::string md = "# Nature risk report: " + (doc.id.empty() ? "supply chain" : doc.id) + "\n\n";
  md += "## Supplier scores\n\n";
  std::vector<std::vector<std::string>> rows;
  for (const std::string& supplier : graph.suppliers) {
    rows.push_back({supplier, fmt(e_score_forest(graph, states, supplier)),
                    fmt(e_score_nrp(graph, states, supplier)),
                    fmt(expected_return(graph, states, supplier))});
  }
  md += md_table({"supplier", "E-score (forest)", "E-score (NRP)", "expected return"}, rows);

  if (doc.controversy) {
    md += "\n## Controversy updates\n\n";
    const auto by_subject = classified_by_subject(*doc.controversy);
    std::vector<std::vector<std::string>> controversy_rows;
    for (const std::string& supplier : graph.suppliers) {
      const auto it = by_subject.find(supplier);
      if (it == by_subject.end()) continue;
      const double prior =
          doc.controversy->prior.value_or(e_score_forest(graph, states, supplier));
      const double posterior =
          bayes_update_compliance(prior, it->second, doc.controversy->likelihood);
      controversy_rows.push_back({supplier, fmt(prior), fmt(posterior),
                                  std::to_string(it->second.size())});
    }
    md += md_table({"supplier", "prior", "posterior", "reports"}, controversy_rows);
  }

  if (!flags.scenario.empty()) {
    const ScenarioDocument scenario = load_scenario(parse_json_file(flags.scenario));
    const ScenarioSpec& spec = scenario.spec;
    md += "\n## Scenario\n\n";
    switch (spec.kind) {
      case ScenarioKind::portfolio: {
        const PortfolioScore score = portfolio_e_score(graph, states, spec);
        md += "Portfolio E-score: forest " + fmt(score.forest) + ", NRP " + fmt(score.nrp) +
              ".\n";
        break;
      }
      case ScenarioKind::divestment: {
        const SupplyChainGraph edited = apply_divestment(graph, spec);
        md += "Scores after divesting " + std::to_string(spec.divest_edges.size()) +
              " edge(s):\n\n";
        std::vector<std::vector<std::string>> edited_rows;
        for (const std::string& supplier : edited.suppliers) {
          edited_rows.push_back({supplier, fmt(e_score_forest(edited, states, supplier)),
                                 fmt(e_score_nrp(edited, states, supplier)),
                                 fmt(expected_return(edited, states, supplier))});
        }
        md += md_table({"supplier", "E-score (forest)", "E-score (NRP)", "expected return"},
                       edited_rows);
        break;
      }
      case ScenarioKind::embargo_dynamics: {
        md += "Embargo dynamics under '" + spec.legislation_strength + "' legislation:\n\n";
        for (const std::string& supplier : graph.suppliers) {
          md += "### " + supplier + "\n\n";
          std::vector<std::vector<std::string>> step_rows;
          for (const ProjectionStep& step :
               embargo_projection(graph, states, spec, supplier)) {
            step_rows.push_back({std::to_string(step.step), fmt(step.expected_return),
                                 fmt(step.e_score_forest)});
          }
          md += md_table({"step", "expected return", "E-score (forest)"}, step_rows);
          md += "\n";
        }
        break;
      }
    }
  }
  return md;
}

std::string report_catchment(const Flags& flags, const CatchmentDocument& doc) {
  const Catchment& catchment = doc.catchment;
  const int horizon = resolve_horizon(flags, doc);
  std::string md =
      "# Water risk report: " + (catchment.id.empty() ? "catchment" : catchment.id) + "\n\n";

  const NbsAssignment assignment = default_assignment(doc);
  const Trajectory trajectory = balance_trajectory(
      catchment, assignment, catchment.finance, catchment.rainfall, horizon,
      flags.strict_sigmoid);
  md += "## Baseline trajectory (assignment: " + assignment_key(assignment) + ")\n\n";
  std::vector<std::vector<std::string>> rows;
  for (const TrajectoryStep& step : trajectory.steps) {
    rows.push_back({std::to_string(step.t), fmt(step.pollution), fmt(step.fine),
                    fmt(step.balance), fmt(step.reputation), fmt(step.e_score)});
  }
  md += md_table({"t", "pollution", "fine", "balance", "reputation", "E-score"}, rows);
  md += "\nObjective " + fmt(trajectory.objective) + ", " +
        (trajectory.feasible ? "solvent at every step" : "insolvent at step " +
             std::to_string(trajectory.first_insolvent_step)) + ".\n";

  md += "\n## Optimal scheme\n\n";
  try {
    OptimizeOptions options;
    options.strict_sigmoid = flags.strict_sigmoid;
    const OptimalAssignment best =
        optimize(catchment, catchment.finance, catchment.rainfall, horizon, options);
    md += "Best assignment: " + assignment_key(best.assignment) + " with objective " +
          fmt(best.trajectory.objective) + ".\n";
  } catch (const InfeasibleError& e) {
    md += "No feasible scheme: first insolvent step " +
          std::to_string(e.first_insolvent_step()) + ".\n";
  }

  if (flags.draws > 0 && doc.priors) {
    const WaterMcmcResult result = expected_outputs_mcmc(
        catchment, assignment, catchment.finance, catchment.rainfall, horizon, *doc.priors,
        flags.draws, flags.burn_in, splitmix64(flags.seed), 0.8, flags.strict_sigmoid);
    md += "\n## Parameter uncertainty (" + std::to_string(result.n_draws) + " draws)\n\n";
    md += md_table({"quantity", "mean", "sd", "se"},
                   {{"final balance", fmt(result.final_balance.mean),
                     fmt(result.final_balance.sd), fmt(result.final_balance.se)},
                    {"final reputation", fmt(result.final_reputation.mean),
                     fmt(result.final_reputation.sd), fmt(result.final_reputation.se)},
                    {"objective", fmt(result.objective.mean), fmt(result.objective.sd),
                     fmt(result.objective.se)}});
  }
  return md;
}

std::string report_controversy(const ControversyDocument& doc) {
  std::string md = "# Controversy report" + (doc.id.empty() ? "" : ": " + doc.id) + "\n\n";
  const auto by_subject = classified_by_subject(doc.inputs);
  std::vector<std::vector<std::string>> rows;
  for (const auto& [subject, reports] : by_subject) {
    const double posterior =
        bayes_update_compliance(*doc.inputs.prior, reports, doc.inputs.likelihood);
    rows.push_back({subject, fmt(*doc.inputs.prior), fmt(posterior),
                    std::to_string(reports.size())});
  }
  md += md_table({"subject", "prior", "posterior", "reports"}, rows);
  return md;
}

int cmd_report(const Flags& flags) {
  check_threads(flags);
  const Json doc = parse_json_file(flags.input);
  std::string md;
  switch (document_type(doc)) {
    case DocumentType::supply_chain:
      md = report_supply_chain(flags, load_supply_chain(doc));
      break;
    case DocumentType::catchment:
      md = report_catchment(flags, load_catchment(doc));
      break;
    case DocumentType::controversy:
      md = report_controversy(load_controversy(doc));
      break;
    case DocumentType::scenario:
      throw ConfigError(
          "scenario documents are applied with --scenario alongside a supply_chain input");
  }
  emit_text(flags, md);
  return 0;
}

void add_common(CLI::App* cmd, Flags& flags, bool with_scenario, bool with_sampling) {
  cmd->add_option("--input", flags.input, "input document (JSON)")->required();
  cmd->add_option("--output", flags.output, "output path (stdout when omitted)");
  cmd->add_option("--threads", flags.threads, "upper bound on worker threads");
  if (with_scenario) cmd->add_option("--scenario", flags.scenario, "scenario document (JSON)");
  if (with_sampling) {
    cmd->add_option("--seed", flags.seed, "sampler seed");
    cmd->add_option("--horizon", flags.horizon, "projection horizon (steps)");
    cmd->add_option("--draws", flags.draws, "MCMC draws (0 = deterministic)");
    cmd->add_option("--burn-in", flags.burn_in, "MCMC burn-in");
    cmd->add_flag("--strict-paper-sigmoid", flags.strict_sigmoid,
                  "use the raw sigmoid cleanliness term (0.5 at zero pollution)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"naturerisk: probabilistic nature-related financial risk engine"};
  app.require_subcommand(1);

  Flags flags;
  CLI::App* validate = app.add_subcommand("validate", "validate a document and report issues");
  validate->add_option("--input", flags.input, "input document (JSON)")->required();
  validate->add_option("--output", flags.output, "output path (stdout when omitted)");

  CLI::App* score_beef =
      app.add_subcommand("score-beef", "score suppliers of a beef supply chain");
  add_common(score_beef, flags, false, false);
  score_beef->add_flag("--oracle", flags.oracle,
                       "cross-check against brute-force enumeration");

  CLI::App* scenario = app.add_subcommand("scenario", "run a scenario over a supply chain");
  add_common(scenario, flags, true, false);
  scenario->get_option("--scenario")->required();

  CLI::App* optimize_water =
      app.add_subcommand("optimize-water", "choose the best per-field scheme");
  add_common(optimize_water, flags, false, true);

  CLI::App* project_water =
      app.add_subcommand("project-water", "project a catchment trajectory");
  add_common(project_water, flags, false, true);

  CLI::App* report = app.add_subcommand("report", "render a Markdown summary");
  add_common(report, flags, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (validate->parsed()) return cmd_validate(flags);
    if (score_beef->parsed()) return cmd_score_beef(flags);
    if (scenario->parsed()) return cmd_scenario(flags);
    if (optimize_water->parsed()) return cmd_optimize_water(flags);
    if (project_water->parsed()) return cmd_project_water(flags);
    if (report->parsed()) return cmd_report(flags);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "; first insolvent step "
              << e.first_insolvent_step();
    if (!e.best_violation().empty()) {
      std::cerr << "; least violating assignment ";
      bool first = true;
      for (const auto& [field, option] : e.best_violation()) {
        if (!first) std::cerr << ",";
        std::cerr << field << "=" << option;
        first = false;
      }
    }
    std::cerr << "\n";
    return static_cast<int>(e.code());
  } catch (const naturerisk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  }
  return 0;
}
