#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "diatrack/corpus.hpp"
#include "diatrack/eval.hpp"
#include "diatrack/model.hpp"
#include "diatrack/ngram.hpp"
#include "diatrack/plan.hpp"

namespace diatrack::harness {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInconsistent = 3;  // replay --strict only

struct TrainOptions {
  std::string corpus_path;
  std::string model_def_path;
  std::string out_path;
  double split = 0.9;  // fraction of dialogues used for counting
  std::vector<std::string> skip_speakers;
};

struct EvalOptions {
  std::string model_path;
  std::string model_def_path;
  std::vector<std::string> corpus_paths;
  std::vector<int> ks = {1, 2, 3};
  bool skip_initial = false;
  std::vector<std::string> skip_speakers;
};

struct ReplayOptions {
  std::string model_path;
  std::string model_def_path;
  std::string operators_path;
  std::string corpus_path;
  std::string dialogue_id;
  std::string events_path;  // optional serialized event log output
  int predictions = 2;
  bool strict = false;  // exit 3 when the dialogue had inconsistencies
};

struct GenerateOptions {
  std::string source_path;
  std::string model_def_path;
  std::string out_path;
  int count = 1;
  std::uint64_t seed = 0;
  std::string terminal_act = "VERABSCHIEDUNG";
};

struct BayesOptions {
  std::string source_path;
  std::string model_def_path;
  std::string corpus_path;
  std::vector<int> ks = {1, 2, 3};
};

/// Trains on the split's first fraction (deterministic dialogue order),
/// estimates weights on the remainder, writes the persistence format.
int cmd_train(const TrainOptions& opt, std::ostream& out);

int cmd_eval(const EvalOptions& opt, std::ostream& out);

int cmd_replay(const ReplayOptions& opt, std::ostream& out);

int cmd_generate(const GenerateOptions& opt, std::ostream& out);

int cmd_bayes(const BayesOptions& opt, std::ostream& out);

// Reusable pieces (also exercised directly by tests).

/// Splits dialogues into (training, held-out) by fraction; both parts are
/// non-empty for corpora of two or more dialogues.
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double split);

/// Applies the speaker filter, turning each dialogue into its filtered
/// act sequence but keeping turn annotations.
Corpus filter_speakers(const Corpus& corpus, const std::vector<std::string>& skip);

/// The replay transcript for one dialogue (the CLI prints this).
struct ReplayResult {
  std::string transcript;
  std::string event_log;  // one event per line: kind, act, from, to
  std::size_t inconsistencies = 0;
  std::size_t repairs = 0;
};
ReplayResult replay_dialogue(const DialogueModel& model, const OperatorLibrary& library,
                             const NGramModel& predictor, const Dialogue& dialogue,
                             int predictions);

}  // namespace diatrack::harness
