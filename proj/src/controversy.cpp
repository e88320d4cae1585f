#include "naturerisk/controversy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "naturerisk/errors.hpp"

namespace naturerisk {

namespace {

constexpr double kSumTolerance = 1e-9;

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

void check_likelihood(const SentimentLikelihood& likelihood) {
  const std::size_t n = likelihood.classes.size();
  if (n == 0) throw InvariantError("sentiment likelihood: no classes");
  if (likelihood.p_given_compliant.size() != n || likelihood.p_given_noncompliant.size() != n) {
    throw InvariantError("sentiment likelihood: row length does not match the class list");
  }
  for (const auto* row : {&likelihood.p_given_compliant, &likelihood.p_given_noncompliant}) {
    double total = 0.0;
    for (double p : *row) {
      if (!std::isfinite(p) || p < 0.0) {
        throw InvariantError("sentiment likelihood: probabilities must be non-negative");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > kSumTolerance) {
      throw InvariantError("sentiment likelihood: row sums to " + std::to_string(total) +
                           ", expected 1");
    }
  }
}

}  // namespace

Classification classify(const Report& report, const Lexicon& lexicon) {
  if (report.sentiment_class.has_value()) {
    return {*report.sentiment_class, 1.0};
  }
  if (report.text.empty()) {
    throw ConfigError("classify: report '" + report.id + "' has neither text nor class");
  }
  if (lexicon.classes.empty()) {
    throw ConfigError("classify: lexicon has no classes");
  }

  std::vector<double> scores(lexicon.classes.size(), 0.0);
  for (const std::string& token : tokenize(report.text)) {
    const auto it = lexicon.weights.find(token);
    if (it == lexicon.weights.end()) continue;
    const auto& [klass, weight] = it->second;
    const auto pos = std::find(lexicon.classes.begin(), lexicon.classes.end(), klass);
    if (pos == lexicon.classes.end()) {
      throw ConfigError("classify: lexicon word '" + token + "' points at unknown class '" +
                        klass + "'");
    }
    scores[static_cast<std::size_t>(pos - lexicon.classes.begin())] += weight;
  }

  double total = 0.0;
  std::size_t best = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    total += scores[i];
    if (scores[i] > scores[best]) best = i;  // strict: ties keep the earlier class
  }
  if (total <= 0.0) {
    return {lexicon.classes.front(), 1.0 / static_cast<double>(lexicon.classes.size())};
  }
  return {lexicon.classes[best], scores[best] / total};
}

double bayes_update_compliance(double prior, const std::vector<Report>& reports,
                               const SentimentLikelihood& likelihood) {
  if (!std::isfinite(prior) || prior < 0.0 || prior > 1.0) {
    throw InvariantError("bayes_update_compliance: prior outside [0,1]");
  }
  check_likelihood(likelihood);

  // Fold identical classes by count so the result cannot depend on report
  // order even at the last bit.
  std::vector<std::size_t> counts(likelihood.classes.size(), 0);
  for (const Report& report : reports) {
    if (!report.sentiment_class.has_value()) {
      throw ConfigError("bayes_update_compliance: report '" + report.id + "' is unclassified");
    }
    const auto pos = std::find(likelihood.classes.begin(), likelihood.classes.end(),
                               *report.sentiment_class);
    if (pos == likelihood.classes.end()) {
      throw ConfigError("bayes_update_compliance: class '" + *report.sentiment_class +
                        "' missing from the likelihood table");
    }
    ++counts[static_cast<std::size_t>(pos - likelihood.classes.begin())];
  }

  double mass_compliant = prior;
  double mass_noncompliant = 1.0 - prior;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (std::size_t k = 0; k < counts[c]; ++k) {
      mass_compliant *= likelihood.p_given_compliant[c];
      mass_noncompliant *= likelihood.p_given_noncompliant[c];
    }
  }

  const double total = mass_compliant + mass_noncompliant;
  if (total <= 0.0) {
    throw ContradictoryEvidenceError(
        "bayes_update_compliance: both compliance hypotheses have zero likelihood");
  }
  return mass_compliant / total;
}

}  // namespace naturerisk
