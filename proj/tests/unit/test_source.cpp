#include <cmath>
#include <sstream>

#include "diatrack/errors.hpp"
#include "diatrack/harness.hpp"
#include "diatrack/ngram.hpp"
#include "diatrack/source.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace diatrack;
using testsupport::corpus_T;
using testsupport::data_path;
using testsupport::default_model;

namespace {

/// Source text with the same conditional distribution in every context.
std::string flat_source_text(const std::vector<std::pair<std::string, double>>& probs) {
  std::vector<std::string> symbols{kBoundaryToken};
  for (const auto& [a, p] : probs) symbols.push_back(a);
  std::ostringstream out;
  out << "[trigrams]\n";
  for (const auto& c2 : symbols) {
    for (const auto& c1 : symbols) {
      if (c1 == kBoundaryToken && c2 != kBoundaryToken) continue;
      for (const auto& [a, p] : probs) out << c2 << '\t' << c1 << '\t' << a << '\t' << p << '\n';
    }
  }
  return out.str();
}

const std::vector<std::pair<std::string, double>> kUnigramProbs{
    {"BEGRUESSUNG", 0.10},   {"INIT_TERMINABSPRACHE", 0.10},
    {"VORSCHLAG", 0.20},     {"AKZEPTANZ", 0.14},
    {"ABLEHNUNG", 0.12},     {"AUFFORDERUNG_VORSCHLAG", 0.08},
    {"AUFFORDERUNG_STELLUNG", 0.07}, {"BESTAETIGUNG", 0.07},
    {"DELIBERATION", 0.02},  {"VERABSCHIEDUNG", 0.10}};

std::string deterministic_source_text() {
  return "[trigrams]\n"
         "<s>\t<s>\tBEGRUESSUNG\t1.0\n"
         "<s>\tBEGRUESSUNG\tINIT_TERMINABSPRACHE\t1.0\n"
         "BEGRUESSUNG\tINIT_TERMINABSPRACHE\tVORSCHLAG\t1.0\n"
         "INIT_TERMINABSPRACHE\tVORSCHLAG\tABLEHNUNG\t1.0\n"
         "VORSCHLAG\tABLEHNUNG\tVORSCHLAG\t1.0\n"
         "ABLEHNUNG\tVORSCHLAG\tAKZEPTANZ\t1.0\n"
         "VORSCHLAG\tAKZEPTANZ\tBESTAETIGUNG\t1.0\n"
         "AKZEPTANZ\tBESTAETIGUNG\tVERABSCHIEDUNG\t1.0\n";
}

}  // namespace

TEST_CASE("generation is deterministic for a fixed seed") {
  SyntheticSource source =
      SyntheticSource::load_file(data_path("fixtures/negotiation.source"),
                                 default_model().inventory);
  Corpus a = source.generate(25, 7, "VERABSCHIEDUNG");
  Corpus b = source.generate(25, 7, "VERABSCHIEDUNG");
  Corpus c = source.generate(25, 8, "VERABSCHIEDUNG");
  CHECK(write_corpus(a) == write_corpus(b));
  CHECK(write_corpus(a) != write_corpus(c));
  CHECK(a.dialogues.size() == 25);
  for (const Dialogue& d : a.dialogues) {
    REQUIRE_FALSE(d.turns.empty());
    CHECK(d.turns.back().act == "VERABSCHIEDUNG");
  }
}

TEST_CASE("source rows must be exact probability distributions") {
  CHECK_THROWS_AS(
      SyntheticSource::load("[trigrams]\n<s>\t<s>\tVORSCHLAG\t0.5\n", default_model().inventory),
      ValidationError);
  CHECK_THROWS_AS(SyntheticSource::load("[unigrams]\nVORSCHLAG\t3\n", default_model().inventory),
                  ValidationError);  // no trigram section
  CHECK_THROWS_AS(
      SyntheticSource::load("[trigrams]\n<s>\t<s>\tFROBNICATE\t1.0\n", default_model().inventory),
      UnknownActError);
}

TEST_CASE("a source that cannot reach its terminal is rejected") {
  std::string text =
      "[trigrams]\n"
      "<s>\t<s>\tVORSCHLAG\t1.0\n"
      "<s>\tVORSCHLAG\tVORSCHLAG\t1.0\n"
      "VORSCHLAG\tVORSCHLAG\tVORSCHLAG\t1.0\n";
  SyntheticSource source = SyntheticSource::load(text, default_model().inventory);
  CHECK_THROWS_AS(source.generate(1, 7, "VERABSCHIEDUNG"), NonterminatingSourceError);
}

TEST_CASE("generated frequencies converge to the source distribution") {
  SyntheticSource source =
      SyntheticSource::load_file(data_path("fixtures/negotiation.source"),
                                 default_model().inventory);
  Corpus sample = source.generate(1000, 20260809, "VERABSCHIEDUNG");
  NGramModel counts = NGramModel::train(sample, default_model().inventory);

  const ActInventory& inv = default_model().inventory;
  // Check the heavily sampled (INIT, VORSCHLAG) context cell by cell:
  // each empirical share must sit within five binomial standard errors.
  std::uint64_t n = 0;
  for (int a = 0; a < inv.size(); ++a)
    n += counts.trigram_count("INIT_TERMINABSPRACHE", "VORSCHLAG", inv.name(a));
  REQUIRE(n > 200);
  std::vector<double> expected = source.conditional({"INIT_TERMINABSPRACHE", "VORSCHLAG"});
  for (int a = 0; a < inv.size(); ++a) {
    double p = expected[(std::size_t)a];
    double emp =
        (double)counts.trigram_count("INIT_TERMINABSPRACHE", "VORSCHLAG", inv.name(a)) / (double)n;
    double tolerance = 5.0 * std::sqrt(std::max(p * (1 - p), 1e-6) / (double)n) + 1e-9;
    CAPTURE(inv.name(a));
    CHECK(std::abs(emp - p) <= tolerance);
  }
}

TEST_CASE("the empirical source of a trained model reproduces its rows") {
  NGramModel m = NGramModel::train(corpus_T(), default_model().inventory);
  SyntheticSource source = SyntheticSource::from_model(m);
  std::vector<double> row = source.conditional({"ABLEHNUNG", "VORSCHLAG"});
  REQUIRE_FALSE(row.empty());
  CHECK(row[(std::size_t)default_model().inventory.require("AKZEPTANZ")] == 1.0);
  std::vector<double> start = source.conditional({});
  CHECK(start[(std::size_t)default_model().inventory.require("BEGRUESSUNG")] == 1.0);
}

TEST_CASE("the ceiling of a deterministic source is perfect prediction") {
  SyntheticSource source =
      SyntheticSource::load(deterministic_source_text(), default_model().inventory);
  Corpus sample = source.generate(50, 3, "VERABSCHIEDUNG");
  std::vector<double> ceiling = source.bayes_top_k(sample, {1, 2, 3});
  CHECK(ceiling[0] == 100.0);
  CHECK(ceiling[1] == 100.0);
  CHECK(ceiling[2] == 100.0);
}

TEST_CASE("the ceiling of a uniform source is k over m") {
  std::vector<std::pair<std::string, double>> uniform{{"VORSCHLAG", 0.25},
                                                      {"AKZEPTANZ", 0.25},
                                                      {"ABLEHNUNG", 0.25},
                                                      {"VERABSCHIEDUNG", 0.25}};
  SyntheticSource source =
      SyntheticSource::load(flat_source_text(uniform), default_model().inventory);
  Corpus sample = source.generate(2000, 11, "VERABSCHIEDUNG");
  std::vector<double> ceiling = source.bayes_top_k(sample, {1, 2, 3, 4});
  double n = (double)sample.act_count();
  for (std::size_t i = 0; i < 4; ++i) {
    double expected = 100.0 * (double)(i + 1) / 4.0;
    double sigma = 100.0 * std::sqrt(0.25 * 0.75 / n);
    CHECK(std::abs(ceiling[i] - expected) <= 5.0 * sigma + 1e-9);
  }
  CHECK(ceiling[3] == 100.0);
}

TEST_CASE("held-out estimation recovers a unigram regime") {
  SyntheticSource source =
      SyntheticSource::load(flat_source_text(kUnigramProbs), default_model().inventory);
  Corpus corpus = source.generate(500, 42, "VERABSCHIEDUNG");
  auto [train, held] = harness::split_corpus(corpus, 0.1);
  NGramModel m = NGramModel::train(train, default_model().inventory);
  InterpolationWeights w = m.estimate_weights(held);
  CHECK(w.unigram >= 0.95);  // q1 -> 1 within 0.05
  CHECK(std::abs(w.unigram + w.bigram + w.trigram - 1.0) < 1e-12);
}

TEST_CASE("held-out estimation recovers a deterministic trigram regime") {
  SyntheticSource source =
      SyntheticSource::load(deterministic_source_text(), default_model().inventory);
  Corpus corpus = source.generate(500, 20260809, "VERABSCHIEDUNG");
  auto [train, held] = harness::split_corpus(corpus, 0.8);
  NGramModel m = NGramModel::train(train, default_model().inventory);
  InterpolationWeights w = m.estimate_weights(held);
  CHECK(w.trigram > w.unigram);
  CHECK(w.trigram > w.bigram);
  CHECK(w.trigram > 0.9);
}

TEST_CASE("a trained model predicts a deterministic source perfectly") {
  SyntheticSource source =
      SyntheticSource::load(deterministic_source_text(), default_model().inventory);
  Corpus train_sample = source.generate(100, 1, "VERABSCHIEDUNG");
  Corpus test_sample = source.generate(50, 2, "VERABSCHIEDUNG");
  auto [counts, held] = harness::split_corpus(train_sample, 0.8);
  NGramModel m = NGramModel::train(counts, default_model().inventory);
  m.estimate_weights(held);
  std::vector<std::pair<std::string, const Corpus*>> sets{{"det", &test_sample}};
  EvaluationReport report = evaluate(m, sets, {1}, false);
  CHECK(report.sets[0].accuracy[0] == 100.0);
}
