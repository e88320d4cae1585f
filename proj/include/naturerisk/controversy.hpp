#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace naturerisk {

// A controversy report about a supplier. Either the text or an already
// assigned sentiment class must be present.
struct Report {
  std::string id;
  std::string subject;
  std::string text;
  std::optional<std::string> sentiment_class;
};

// p(class | L) for both compliance hypotheses, rows aligned with classes.
struct SentimentLikelihood {
  std::vector<std::string> classes;
  std::vector<double> p_given_compliant;     // L = 1
  std::vector<double> p_given_noncompliant;  // L = 0
};

// Word scorer: each word contributes its weight to one class. The class list
// fixes the argmax tie-break order and the uniform fallback.
struct Lexicon {
  std::vector<std::string> classes;
  std::map<std::string, std::pair<std::string, double>> weights;  // word -> (class, weight)
};

struct Classification {
  std::string sentiment_class;
  double confidence = 0.0;
};

// Passthrough when the report already carries a class (confidence 1).
// Otherwise argmax of summed lexicon weights over lowercased word tokens,
// ties broken by class order; all-zero scores fall back to the first class
// with a uniform-share confidence.
Classification classify(const Report& report, const Lexicon& lexicon);

// Sequential Bayes update of p(L=1) treating report classes as conditionally
// independent given L. Reports must already be classified; the update is
// order-invariant because identical classes are folded by count.
double bayes_update_compliance(double prior, const std::vector<Report>& reports,
                               const SentimentLikelihood& likelihood);

}  // namespace naturerisk
