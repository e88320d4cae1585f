#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "naturerisk/controversy.hpp"
#include "naturerisk/errors.hpp"

using namespace naturerisk;

namespace {

Lexicon fixture_lexicon() {
  Lexicon lex;
  lex.classes = {"negative-risk", "neutral", "positive-opportunity"};
  lex.weights = {
      {"illegal", {"negative-risk", 2.0}},
      {"deforestation", {"negative-risk", 1.5}},
      {"fine", {"negative-risk", 1.0}},
      {"embargoed", {"negative-risk", 2.5}},
      {"audit", {"neutral", 1.0}},
      {"restoration", {"positive-opportunity", 2.0}},
      {"replanting", {"positive-opportunity", 1.5}},
  };
  return lex;
}

SentimentLikelihood fixture_likelihood() {
  SentimentLikelihood lik;
  lik.classes = {"negative-risk", "neutral", "positive-opportunity"};
  lik.p_given_compliant = {0.1, 0.6, 0.3};
  lik.p_given_noncompliant = {0.6, 0.3, 0.1};
  return lik;
}

Report classified(const std::string& id, const std::string& cls) {
  Report r;
  r.id = id;
  r.subject = "sup-1";
  r.sentiment_class = cls;
  return r;
}

}  // namespace

TEST_CASE("classify") {
  const Lexicon lex = fixture_lexicon();

  SUBCASE("an assigned class passes through with full confidence") {
    Report r = classified("r1", "negative-risk");
    r.text = "anything at all";
    const Classification c = classify(r, lex);
    CHECK(c.sentiment_class == "negative-risk");
    CHECK(c.confidence == 1.0);
  }
  SUBCASE("unknown words fall back to the first class") {
    Report r;
    r.id = "r2";
    r.text = "quarterly shareholder letter";
    const Classification c = classify(r, lex);
    CHECK(c.sentiment_class == "negative-risk");
    CHECK(c.confidence == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("weights sum per class, case and punctuation aside") {
    Report r;
    r.id = "r3";
    r.text = "Illegal deforestation: fine issued, farm embargoed.";
    const Classification c = classify(r, lex);
    CHECK(c.sentiment_class == "negative-risk");
    CHECK(c.confidence == doctest::Approx(1.0).epsilon(1e-12));

    r.text = "Illegal deforestation halted; restoration and replanting started; audit passed.";
    const Classification mixed = classify(r, lex);
    // negative 3.5, positive 3.5, neutral 1.0: the earlier class wins the tie
    CHECK(mixed.sentiment_class == "negative-risk");
    CHECK(mixed.confidence == doctest::Approx(3.5 / 8.0).epsilon(1e-12));
  }
  SUBCASE("a later class can win outright") {
    Report r;
    r.id = "r4";
    r.text = "restoration replanting restoration";
    const Classification c = classify(r, lex);
    CHECK(c.sentiment_class == "positive-opportunity");
    CHECK(c.confidence == doctest::Approx(5.5 / 5.5).epsilon(1e-12));
  }
  SUBCASE("no text and no class is a configuration error") {
    Report r;
    r.id = "r5";
    CHECK_THROWS_AS(classify(r, lex), ConfigError);
  }
}

TEST_CASE("bayes update of the compliance posterior") {
  const SentimentLikelihood lik = fixture_likelihood();

  SUBCASE("uninformative likelihood leaves the prior untouched") {
    SentimentLikelihood flat = lik;
    flat.p_given_compliant = {0.2, 0.5, 0.3};
    flat.p_given_noncompliant = {0.2, 0.5, 0.3};
    const std::vector<Report> reports = {classified("r1", "negative-risk"),
                                         classified("r2", "neutral"),
                                         classified("r3", "positive-opportunity")};
    CHECK(bayes_update_compliance(0.37, reports, flat) ==
          doctest::Approx(0.37).epsilon(1e-12));
  }
  SUBCASE("an absorbing prior stays absorbed") {
    const std::vector<Report> reports = {classified("r1", "negative-risk")};
    CHECK(bayes_update_compliance(1.0, reports, lik) == 1.0);
    CHECK(bayes_update_compliance(0.0, reports, lik) == 0.0);
  }
  SUBCASE("the 0.85 prior fixture lands on 0.4857") {
    const std::vector<Report> reports = {classified("r1", "negative-risk")};
    const double posterior = bayes_update_compliance(0.85, reports, lik);
    CHECK(posterior == doctest::Approx(0.4857).epsilon(5e-4));
    CHECK(posterior ==
          doctest::Approx(0.85 * 0.1 / (0.85 * 0.1 + 0.15 * 0.6)).epsilon(1e-14));
  }
  SUBCASE("report order cannot matter") {
    std::vector<Report> reports;
    const char* classes[] = {"negative-risk", "neutral", "positive-opportunity"};
    for (int i = 0; i < 8; ++i) {
      reports.push_back(classified("r" + std::to_string(i), classes[i % 3]));
    }
    const double reference = bayes_update_compliance(0.7, reports, lik);
    std::mt19937_64 engine(5);
    for (int trial = 0; trial < 10; ++trial) {
      std::shuffle(reports.begin(), reports.end(), engine);
      CHECK(bayes_update_compliance(0.7, reports, lik) == reference);
    }
  }
  SUBCASE("zero likelihood under both hypotheses is contradictory") {
    SentimentLikelihood zero = lik;
    zero.p_given_compliant = {0.0, 0.7, 0.3};
    zero.p_given_noncompliant = {0.0, 0.6, 0.4};
    const std::vector<Report> reports = {classified("r1", "negative-risk")};
    CHECK_THROWS_AS(bayes_update_compliance(0.5, reports, zero),
                    ContradictoryEvidenceError);
  }
  SUBCASE("a damaging report never raises the posterior") {
    std::vector<Report> reports;
    double posterior = 0.8;
    for (int i = 0; i < 6; ++i) {
      reports.push_back(classified("r" + std::to_string(i), "negative-risk"));
      const double next = bayes_update_compliance(0.8, reports, lik);
      CHECK(next <= posterior);
      posterior = next;
    }
  }
  SUBCASE("rejects malformed inputs") {
    const std::vector<Report> reports = {classified("r1", "negative-risk")};
    CHECK_THROWS_AS(bayes_update_compliance(-0.1, reports, lik), InvariantError);
    CHECK_THROWS_AS(bayes_update_compliance(1.1, reports, lik), InvariantError);
    Report unclassified;
    unclassified.id = "r9";
    unclassified.text = "plain text";
    CHECK_THROWS_AS(bayes_update_compliance(0.5, {unclassified}, lik), ConfigError);
    CHECK_THROWS_AS(bayes_update_compliance(0.5, {classified("r1", "unheard-of")}, lik),
                    ConfigError);
    SentimentLikelihood bad = lik;
    bad.p_given_compliant = {0.5, 0.6, 0.3};
    CHECK_THROWS_AS(bayes_update_compliance(0.5, reports, bad), InvariantError);
  }
}
