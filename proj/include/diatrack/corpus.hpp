#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "diatrack/model.hpp"

namespace diatrack {

/// One speaker contribution, annotated with its speech act and an
/// optional theme (key=value pairs standing in for semantic content).
struct Turn {
  std::string dialogue_id;
  std::string turn_id;
  std::string speaker;
  std::string act;
  std::vector<std::pair<std::string, std::string>> theme;
  std::string utterance;  // empty when absent

  bool has_theme() const { return !theme.empty(); }
};

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;
};

struct Corpus {
  std::vector<Dialogue> dialogues;

  std::size_t act_count() const {
    std::size_t n = 0;
    for (const auto& d : dialogues) n += d.turns.size();
    return n;
  }
  const Dialogue* find(const std::string& dialogue_id) const;
};

/// Parses a tab-separated corpus document, validating acts against the
/// inventory. Malformed input raises ParseError/UnknownActError with a
/// line number.
Corpus read_corpus(const std::string& document, const ActInventory& inventory);
Corpus read_corpus_file(const std::string& path, const ActInventory& inventory);

/// Canonical serialization; read_corpus(write_corpus(c)) == c and fixture
/// files are byte-identical to their rewritten form.
std::string write_corpus(const Corpus& corpus);

/// Per-dialogue act sequences, in turn order. Turns whose speaker is in
/// `skip_speakers` are dropped (used to exclude mediator turns).
std::vector<std::pair<std::string, std::vector<std::string>>> act_sequences(
    const Corpus& corpus, const std::vector<std::string>& skip_speakers = {});

}  // namespace diatrack
