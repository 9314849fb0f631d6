#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "diatrack/errors.hpp"
#include "diatrack/harness.hpp"
#include "diatrack/source.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace diatrack;
using namespace diatrack::harness;
using testsupport::check_golden;
using testsupport::corpus_T;
using testsupport::data_path;
using testsupport::default_model;
using testsupport::default_plans;
using testsupport::slurp;
using testsupport::tiny_corpus;

namespace {

std::string temp_dir() {
  static std::string dir = [] {
    std::filesystem::path p = std::filesystem::temp_directory_path() / "diatrack_harness_tests";
    std::filesystem::create_directories(p);
    return p.string();
  }();
  return dir;
}

}  // namespace

TEST_CASE("corpus splitting honors the fraction and stays usable") {
  auto [train, held] = split_corpus(corpus_T(), 0.5);
  REQUIRE(train.dialogues.size() == 1);
  REQUIRE(held.dialogues.size() == 1);
  CHECK(train.dialogues[0].id == "D1");
  CHECK(held.dialogues[0].id == "D2");

  CHECK_THROWS_AS(split_corpus(corpus_T(), 1.0), UsageError);
  CHECK_THROWS_AS(split_corpus(corpus_T(), 0.0), UsageError);

  Corpus single;
  single.dialogues.push_back(corpus_T().dialogues[0]);
  CHECK_THROWS_AS(split_corpus(single, 0.5), DegenerateHeldOutError);

  // Tiny fractions still leave one dialogue on each side.
  auto [t2, h2] = split_corpus(corpus_T(), 0.01);
  CHECK(t2.dialogues.size() == 1);
  CHECK(h2.dialogues.size() == 1);
}

TEST_CASE("cmd_train writes a loadable model, deterministically") {
  TrainOptions opt;
  opt.corpus_path = data_path("fixtures/tiny.corpus");
  opt.model_def_path = data_path("default.model");
  opt.split = 0.5;
  opt.out_path = temp_dir() + "/t_model_a.ngrams";
  std::ostringstream out;
  CHECK(cmd_train(opt, out) == kExitOk);
  CHECK(out.str().find("weights") != std::string::npos);

  opt.out_path = temp_dir() + "/t_model_b.ngrams";
  std::ostringstream out2;
  cmd_train(opt, out2);
  CHECK(slurp(temp_dir() + "/t_model_a.ngrams") == slurp(temp_dir() + "/t_model_b.ngrams"));

  NGramModel loaded =
      NGramModel::load_file(temp_dir() + "/t_model_a.ngrams", default_model().inventory);
  CHECK(loaded.trained());
  // Weights were estimated on D2, the held-out half.
  NGramModel by_hand = NGramModel::train(split_corpus(tiny_corpus(), 0.5).first,
                                         default_model().inventory);
  Corpus held;
  held.dialogues.push_back(tiny_corpus().dialogues[1]);
  InterpolationWeights w = by_hand.estimate_weights(held);
  CHECK(loaded.weights().unigram == doctest::Approx(w.unigram).epsilon(1e-12));
  CHECK(loaded.weights().trigram == doctest::Approx(w.trigram).epsilon(1e-12));
}

TEST_CASE("evaluation covers the whole inventory at full k") {
  NGramModel m = NGramModel::train(corpus_T(), default_model().inventory);
  m.set_weights({0.2, 0.3, 0.5});
  Corpus t = corpus_T();
  std::vector<std::pair<std::string, const Corpus*>> sets{{"T", &t}};
  int full = default_model().inventory.size();
  EvaluationReport report = evaluate(m, sets, {1, 2, 3, full}, false);
  REQUIRE(report.sets.size() == 1);
  CHECK(report.sets[0].acts == 14);
  CHECK(report.sets[0].accuracy.back() == 100.0);
  for (std::size_t i = 1; i < report.sets[0].accuracy.size(); ++i)
    CHECK(report.sets[0].accuracy[i] >= report.sets[0].accuracy[i - 1]);

  // skip_initial drops one scored position per dialogue.
  EvaluationReport skipped = evaluate(m, sets, {1}, true);
  CHECK(skipped.sets[0].acts == 12);
}

TEST_CASE("the report renders as a k-by-testset table") {
  NGramModel m = NGramModel::train(corpus_T(), default_model().inventory);
  m.set_weights({0.2, 0.3, 0.5});
  Corpus t = corpus_T();
  std::vector<std::pair<std::string, const Corpus*>> sets{{"TS1", &t}, {"TS2", &t}};
  EvaluationReport report = evaluate(m, sets, {1, 2, 3}, false);
  std::string table = render_report(report);
  check_golden("eval_report.txt", table);

  // Structure: a header row plus one row per k, tab-separated columns.
  std::istringstream lines(table);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "Pred.\tTS1\tTS2");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(line.find('\t') != std::string::npos);
    CHECK(line.find('%') != std::string::npos);
  }
  CHECK(rows == 3);
}

TEST_CASE("cmd_eval reads files and prints the table") {
  TrainOptions train;
  train.corpus_path = data_path("fixtures/tiny.corpus");
  train.model_def_path = data_path("default.model");
  train.split = 0.5;
  train.out_path = temp_dir() + "/eval_model.ngrams";
  std::ostringstream ignore;
  cmd_train(train, ignore);

  EvalOptions opt;
  opt.model_path = train.out_path;
  opt.model_def_path = data_path("default.model");
  opt.corpus_paths = {data_path("fixtures/tiny.corpus"), data_path("fixtures/excerpt.corpus")};
  std::ostringstream out;
  CHECK(cmd_eval(opt, out) == kExitOk);
  std::istringstream lines(out.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "Pred.\ttiny\texcerpt");
}

TEST_CASE("replay of a conformant dialogue reports a clean summary") {
  NGramModel m = NGramModel::train(corpus_T(), default_model().inventory);
  m.set_weights({0.2, 0.3, 0.5});
  ReplayResult r =
      replay_dialogue(default_model(), default_plans(), m, tiny_corpus().dialogues[0], 2);
  CHECK(r.inconsistencies == 0);
  CHECK(r.repairs == 0);
  CHECK(r.transcript.find("Summary: 6 turns, 0 inconsistencies, 0 repairs\n") !=
        std::string::npos);
}

TEST_CASE("the excerpt replay transcript is stable") {
  NGramModel m = NGramModel::train(corpus_T(), default_model().inventory);
  m.set_weights({0.2, 0.3, 0.5});
  ReplayResult r = replay_dialogue(default_model(), default_plans(), m,
                                   testsupport::excerpt_corpus().dialogues[0], 2);
  CHECK(r.inconsistencies == 0);
  check_golden("replay_excerpt.txt", r.transcript);
  CHECK(r.transcript.find("Prediction: (") != std::string::npos);
  CHECK(r.transcript.find("****Failed****") != std::string::npos);
}

TEST_CASE("an injected out-of-model act is repaired exactly once") {
  NGramModel m = NGramModel::train(corpus_T(), default_model().inventory);
  m.set_weights({0.2, 0.3, 0.5});
  Dialogue d = tiny_corpus().dialogues[1];
  Turn injected;
  injected.dialogue_id = d.id;
  injected.turn_id = "X";
  injected.speaker = "A";
  injected.act = "AUFFORDERUNG_STELLUNG";
  d.turns.insert(d.turns.begin() + 2, injected);

  ReplayResult r = replay_dialogue(default_model(), default_plans(), m, d, 2);
  CHECK(r.inconsistencies == 1);
  CHECK(r.repairs == 1);
  CHECK(r.transcript.find("Summary: 9 turns, 1 inconsistencies, 1 repairs\n") !=
        std::string::npos);
}

TEST_CASE("cmd_replay resolves the dialogue and honors --strict") {
  TrainOptions train;
  train.corpus_path = data_path("fixtures/tiny.corpus");
  train.model_def_path = data_path("default.model");
  train.split = 0.5;
  train.out_path = temp_dir() + "/replay_model.ngrams";
  std::ostringstream ignore;
  cmd_train(train, ignore);

  ReplayOptions opt;
  opt.model_path = train.out_path;
  opt.model_def_path = data_path("default.model");
  opt.operators_path = data_path("default.plans");
  opt.corpus_path = data_path("fixtures/tiny.corpus");
  opt.dialogue_id = "D1";
  opt.events_path = temp_dir() + "/replay_events.log";
  std::ostringstream out;
  CHECK(cmd_replay(opt, out) == kExitOk);
  CHECK(out.str().find("1: BEGRUESSUNG") != std::string::npos);
  std::string events = slurp(opt.events_path);
  CHECK(events.find("accepted\tBEGRUESSUNG\tS0\tS1\n") == 0);
  CHECK(std::count(events.begin(), events.end(), '\n') == 6);

  opt.dialogue_id = "NOPE";
  std::ostringstream out2;
  CHECK_THROWS_AS(cmd_replay(opt, out2), ValidationError);
}

TEST_CASE("cmd_generate and cmd_bayes run against the shipped source") {
  GenerateOptions gen;
  gen.source_path = data_path("fixtures/negotiation.source");
  gen.model_def_path = data_path("default.model");
  gen.out_path = temp_dir() + "/gen.corpus";
  gen.count = 30;
  gen.seed = 7;
  std::ostringstream out;
  CHECK(cmd_generate(gen, out) == kExitOk);
  Corpus generated = read_corpus_file(gen.out_path, default_model().inventory);
  CHECK(generated.dialogues.size() == 30);

  BayesOptions bayes;
  bayes.source_path = gen.source_path;
  bayes.model_def_path = gen.model_def_path;
  bayes.corpus_path = gen.out_path;
  std::ostringstream bout;
  CHECK(cmd_bayes(bayes, bout) == kExitOk);
  std::istringstream lines(bout.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "Pred.\tceiling");
}

TEST_CASE("trained accuracy never beats the ceiling by more than noise") {
  SyntheticSource source = SyntheticSource::load_file(data_path("fixtures/negotiation.source"),
                                                      default_model().inventory);
  Corpus corpus = source.generate(400, 5, "VERABSCHIEDUNG");
  auto [train_all, test] = split_corpus(corpus, 0.8);
  auto [counts, held] = split_corpus(train_all, 0.9);
  NGramModel m = NGramModel::train(counts, default_model().inventory);
  m.estimate_weights(held);

  std::vector<int> ks{1, 2, 3};
  std::vector<std::pair<std::string, const Corpus*>> sets{{"test", &test}};
  EvaluationReport report = evaluate(m, sets, ks, false);
  std::vector<double> ceiling = source.bayes_top_k(test, ks);
  for (std::size_t i = 0; i < ks.size(); ++i)
    CHECK(report.sets[0].accuracy[i] <= ceiling[i] + 1.0);
}
