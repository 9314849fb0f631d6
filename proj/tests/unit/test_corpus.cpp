#include <random>

#include "diatrack/corpus.hpp"
#include "diatrack/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace diatrack;
using testsupport::data_path;
using testsupport::default_model;
using testsupport::excerpt_corpus;
using testsupport::slurp;
using testsupport::tiny_corpus;

TEST_CASE("tiny fixture: two dialogues, fourteen acts") {
  const Corpus& c = tiny_corpus();
  REQUIRE(c.dialogues.size() == 2);
  CHECK(c.dialogues[0].turns.size() == 6);
  CHECK(c.dialogues[1].turns.size() == 8);
  CHECK(c.act_count() == 14);
  CHECK(c.dialogues[0].id == "D1");
  const Turn& t3 = c.dialogues[0].turns[2];
  CHECK(t3.act == "VORSCHLAG");
  REQUIRE(t3.theme.size() == 3);
  CHECK(t3.theme[0] == std::pair<std::string, std::string>{"month", "October"});
}

TEST_CASE("writer reproduces the fixture byte for byte") {
  CHECK(write_corpus(tiny_corpus()) == slurp(data_path("fixtures/tiny.corpus")));
  CHECK(write_corpus(excerpt_corpus()) == slurp(data_path("fixtures/excerpt.corpus")));
}

TEST_CASE("empty input and empty corpus") {
  Corpus empty = read_corpus("", default_model().inventory);
  CHECK(empty.dialogues.empty());
  CHECK(empty.act_count() == 0);
  CHECK(write_corpus(empty) == "# corpus\n");
  CHECK(act_sequences(empty).empty());
}

TEST_CASE("unknown act errors carry the line number") {
  std::string text = "# corpus\nD1\t1\tA\tBEGRUESSUNG\t-\t-\nD1\t2\tB\tFOO\t-\t-\n";
  try {
    read_corpus(text, default_model().inventory);
    FAIL("expected UnknownActError");
  } catch (const UnknownActError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(e.label() == "FOO");
  }
}

TEST_CASE("malformed lines are positioned parse errors") {
  CHECK_THROWS_AS(read_corpus("D1\t1\tA\tVORSCHLAG\t-\n", default_model().inventory), ParseError);
  CHECK_THROWS_AS(read_corpus("D1\t1\tA\tVORSCHLAG\tmonth\t-\n", default_model().inventory),
                  ParseError);
  CHECK_THROWS_AS(
      read_corpus("D1\t1\tA\tVORSCHLAG\t-\t-\nD1\t1\tB\tAKZEPTANZ\t-\t-\n",
                  default_model().inventory),
      ParseError);  // duplicate turn id
}

TEST_CASE("act sequences in turn order") {
  auto seqs = act_sequences(tiny_corpus());
  REQUIRE(seqs.size() == 2);
  CHECK(seqs[0].first == "D1");
  CHECK(seqs[0].second ==
        std::vector<std::string>{"BEGRUESSUNG", "INIT_TERMINABSPRACHE", "VORSCHLAG", "AKZEPTANZ",
                                 "BESTAETIGUNG", "VERABSCHIEDUNG"});

  auto excerpt = act_sequences(excerpt_corpus());
  REQUIRE(excerpt.size() == 1);
  CHECK(excerpt[0].first == "EX");
  CHECK(excerpt[0].second ==
        std::vector<std::string>{"INIT_TERMINABSPRACHE", "VORSCHLAG", "VORSCHLAG", "VORSCHLAG",
                                 "ABLEHNUNG", "VORSCHLAG"});
}

TEST_CASE("speaker filter drops turns") {
  auto seqs = act_sequences(excerpt_corpus(), {"DE"});
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0].second ==
        std::vector<std::string>{"INIT_TERMINABSPRACHE", "ABLEHNUNG", "VORSCHLAG"});
}

TEST_CASE("dialogue breaks on id change without a blank line") {
  std::string text =
      "D1\t1\tA\tBEGRUESSUNG\t-\t-\n"
      "D2\t1\tA\tBEGRUESSUNG\t-\t-\n";
  Corpus c = read_corpus(text, default_model().inventory);
  CHECK(c.dialogues.size() == 2);
}

TEST_CASE("tabs and backslashes in utterances round-trip") {
  Corpus c;
  Dialogue d;
  d.id = "D1";
  Turn t;
  t.dialogue_id = "D1";
  t.turn_id = "1";
  t.speaker = "A";
  t.act = "VORSCHLAG";
  t.utterance = "a\tb\\c\\\td";
  d.turns.push_back(t);
  c.dialogues.push_back(d);

  std::string text = write_corpus(c);
  Corpus again = read_corpus(text, default_model().inventory);
  REQUIRE(again.dialogues.size() == 1);
  CHECK(again.dialogues[0].turns[0].utterance == t.utterance);
  CHECK(write_corpus(again) == text);
}

TEST_CASE("round-trip equality over both fixtures") {
  for (const Corpus* c : {&tiny_corpus(), &excerpt_corpus()}) {
    Corpus again = read_corpus(write_corpus(*c), default_model().inventory);
    REQUIRE(again.dialogues.size() == c->dialogues.size());
    for (std::size_t i = 0; i < c->dialogues.size(); ++i) {
      REQUIRE(again.dialogues[i].turns.size() == c->dialogues[i].turns.size());
      for (std::size_t j = 0; j < c->dialogues[i].turns.size(); ++j) {
        const Turn& a = again.dialogues[i].turns[j];
        const Turn& b = c->dialogues[i].turns[j];
        CHECK(a.turn_id == b.turn_id);
        CHECK(a.act == b.act);
        CHECK(a.theme == b.theme);
        CHECK(a.utterance == b.utterance);
      }
    }
  }
}

TEST_CASE("parser is total: random bytes never crash") {
  std::mt19937 rng(42);
  const std::string alphabet = "ABCD\t\n#=;-\\ VORSCHLAGabz123[]";
  for (int round = 0; round < 300; ++round) {
    std::uniform_int_distribution<std::size_t> len(0, 120);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string text;
    std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) text += alphabet[pick(rng)];
    try {
      read_corpus(text, default_model().inventory);
    } catch (const Error&) {
      // any diatrack error is acceptable; crashes are not
    }
  }
  CHECK(true);
}
