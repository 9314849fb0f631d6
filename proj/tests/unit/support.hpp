// Shared fixtures for the unit suites.
#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "diatrack/corpus.hpp"
#include "diatrack/model.hpp"
#include "diatrack/ngram.hpp"
#include "diatrack/plan.hpp"

namespace testsupport {

inline std::string data_path(const std::string& rel) {
  return std::string(DIATRACK_DATA_DIR) + "/" + rel;
}

inline std::string golden_path(const std::string& rel) {
  return std::string(DIATRACK_GOLDEN_DIR) + "/" + rel;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline const diatrack::DialogueModel& default_model() {
  static diatrack::DialogueModel model = diatrack::load_model_file(data_path("default.model"));
  return model;
}

inline const diatrack::OperatorLibrary& default_plans() {
  static diatrack::OperatorLibrary lib = [] {
    diatrack::OperatorLibrary l =
        diatrack::OperatorLibrary::parse_file(data_path("default.plans"));
    l.link(default_model().inventory);
    return l;
  }();
  return lib;
}

inline const diatrack::Corpus& tiny_corpus() {
  static diatrack::Corpus corpus =
      diatrack::read_corpus_file(data_path("fixtures/tiny.corpus"), default_model().inventory);
  return corpus;
}

inline const diatrack::Corpus& excerpt_corpus() {
  static diatrack::Corpus corpus =
      diatrack::read_corpus_file(data_path("fixtures/excerpt.corpus"), default_model().inventory);
  return corpus;
}

/// Corpus from bare act sequences (turn ids are 1..n, speakers alternate).
inline diatrack::Corpus make_corpus(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& sequences) {
  diatrack::Corpus corpus;
  for (const auto& [id, acts] : sequences) {
    diatrack::Dialogue d;
    d.id = id;
    for (std::size_t i = 0; i < acts.size(); ++i) {
      diatrack::Turn t;
      t.dialogue_id = id;
      t.turn_id = std::to_string(i + 1);
      t.speaker = (i % 2 == 0) ? "A" : "B";
      t.act = acts[i];
      d.turns.push_back(std::move(t));
    }
    corpus.dialogues.push_back(std::move(d));
  }
  return corpus;
}

/// The tiny training corpus T used across the predictor tests.
inline diatrack::Corpus corpus_T() {
  return make_corpus({
      {"D1",
       {"BEGRUESSUNG", "INIT_TERMINABSPRACHE", "VORSCHLAG", "AKZEPTANZ", "BESTAETIGUNG",
        "VERABSCHIEDUNG"}},
      {"D2",
       {"BEGRUESSUNG", "INIT_TERMINABSPRACHE", "VORSCHLAG", "ABLEHNUNG", "VORSCHLAG", "AKZEPTANZ",
        "BESTAETIGUNG", "VERABSCHIEDUNG"}},
  });
}

/// Compares against a golden file; set DIATRACK_REGOLDEN=1 to rewrite.
inline void check_golden(const std::string& name, const std::string& actual) {
  std::string path = golden_path(name);
  if (std::getenv("DIATRACK_REGOLDEN") != nullptr) {
    std::ofstream out(path, std::ios::binary);
    out << actual;
    return;
  }
  std::string expected = slurp(path);
  if (actual != expected) {
    MESSAGE("golden mismatch for " << name << "\n--- expected ---\n"
                                   << expected << "\n--- actual ---\n" << actual);
  }
  CHECK(actual == expected);
}

/// [acts] section with the full default inventory, for custom machines.
inline std::string acts_section() {
  return "[acts]\n"
         "BEGRUESSUNG phase\n"
         "INIT_TERMINABSPRACHE phase\n"
         "VORSCHLAG phase\n"
         "AKZEPTANZ phase\n"
         "ABLEHNUNG phase\n"
         "AUFFORDERUNG_VORSCHLAG phase\n"
         "AUFFORDERUNG_STELLUNG phase\n"
         "BESTAETIGUNG phase\n"
         "VERABSCHIEDUNG phase\n";
}

}  // namespace testsupport
