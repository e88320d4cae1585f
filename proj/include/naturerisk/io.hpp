#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "naturerisk/beef_model.hpp"
#include "naturerisk/controversy.hpp"
#include "naturerisk/errors.hpp"
#include "naturerisk/scenario.hpp"
#include "naturerisk/water_model.hpp"

namespace naturerisk {

// All documents are JSON objects carrying version "naturerisk/1" and a
// "type" discriminator. Unknown members are ignored, so annotated examples
// with "$comment" members validate unchanged.
inline constexpr const char* kFormatVersion = "naturerisk/1";

using Json = nlohmann::ordered_json;

enum class DocumentType { supply_chain, catchment, scenario, controversy };

std::string document_type_name(DocumentType type);

// Controversy inputs: a shared class list, a word lexicon, class likelihoods
// under both compliance hypotheses and the report corpus. The prior is
// required in a standalone document; embedded in a supply chain it defaults
// to each supplier's model compliance.
struct ControversyInputs {
  std::optional<double> prior;
  Lexicon lexicon;
  SentimentLikelihood likelihood;
  std::vector<Report> reports;
};

struct SupplyChainDocument {
  std::string id;
  SupplyChainGraph graph;
  FarmStateModel states;
  std::optional<ControversyInputs> controversy;
};

struct CatchmentDocument {
  Catchment catchment;
  std::optional<int> horizon;
  std::optional<NbsAssignment> assignment;
  std::optional<WaterPriors> priors;
};

struct ScenarioDocument {
  std::string id;
  ScenarioSpec spec;
};

struct ControversyDocument {
  std::string id;
  ControversyInputs inputs;
};

// Findings for a whole document. Schema-level issues (structure, types,
// unresolved ids) outrank numeric invariant violations when choosing the
// process exit code.
struct ValidationReport {
  std::optional<DocumentType> type;
  std::vector<ValidationIssue> issues;

  bool ok() const noexcept { return issues.empty(); }
  bool has_schema_issue() const;
  // 0 when clean, otherwise errc::config or errc::invariant.
  int exit_code() const;
};

bool issue_is_schema(const ValidationIssue& issue);

// Parses bytes or a file into JSON; throws ParseError with the origin and
// the parser's position message.
Json parse_json_text(const std::string& text, const std::string& origin);
Json parse_json_file(const std::string& path);

DocumentType document_type(const Json& doc);  // throws ConfigError

// Full structural + invariant pass without throwing; loaders reuse this and
// refuse to return a partially valid model.
ValidationReport validate_document(const Json& doc);

SupplyChainDocument load_supply_chain(const Json& doc);
CatchmentDocument load_catchment(const Json& doc);
ScenarioDocument load_scenario(const Json& doc);
ControversyDocument load_controversy(const Json& doc);

// Serializers produce documents the loaders accept verbatim (round-trip).
Json to_json(const SupplyChainDocument& doc);
Json to_json(const CatchmentDocument& doc);
Json to_json(const ScenarioDocument& doc);
Json to_json(const ControversyDocument& doc);
Json to_json(const Trajectory& trajectory);
Json to_json(const McmcSummary& summary);

// RFC 4180 rows (CRLF): t, pollution, chemical, fine, nbs, repayment,
// balance, reputation, e_score.
std::string trajectory_csv(const Trajectory& trajectory);

// Per-step e-score summaries of an MCMC run: t, mean, sd, se.
std::string mcmc_series_csv(const WaterMcmcResult& result);

// Canonical dump: two-space indent, trailing newline. Identical models give
// identical bytes, which the golden tests rely on.
std::string dump_json(const Json& doc);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace naturerisk
