#include "diatrack/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "diatrack/errors.hpp"
#include "diatrack/session.hpp"
#include "diatrack/source.hpp"
#include "text_util.hpp"

namespace diatrack::harness {

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double split) {
  if (!(split > 0.0 && split < 1.0)) throw UsageError("split must be strictly between 0 and 1");
  std::size_t n = corpus.dialogues.size();
  if (n < 2)
    throw DegenerateHeldOutError(
        "need at least two dialogues to hold data out for weight estimation; "
        "provide a larger corpus or train weights elsewhere");
  std::size_t train_count = static_cast<std::size_t>(std::floor(split * static_cast<double>(n)));
  train_count = std::clamp<std::size_t>(train_count, 1, n - 1);

  Corpus training, held_out;
  for (std::size_t i = 0; i < n; ++i)
    (i < train_count ? training : held_out).dialogues.push_back(corpus.dialogues[i]);
  return {std::move(training), std::move(held_out)};
}

Corpus filter_speakers(const Corpus& corpus, const std::vector<std::string>& skip) {
  if (skip.empty()) return corpus;
  Corpus out;
  for (const Dialogue& d : corpus.dialogues) {
    Dialogue filtered;
    filtered.id = d.id;
    for (const Turn& t : d.turns) {
      if (std::find(skip.begin(), skip.end(), t.speaker) == skip.end())
        filtered.turns.push_back(t);
    }
    if (!filtered.turns.empty()) out.dialogues.push_back(std::move(filtered));
  }
  return out;
}

int cmd_train(const TrainOptions& opt, std::ostream& out) {
  DialogueModel model = load_model_file(opt.model_def_path);
  Corpus corpus = read_corpus_file(opt.corpus_path, model.inventory);
  corpus = filter_speakers(corpus, opt.skip_speakers);

  auto [training, held_out] = split_corpus(corpus, opt.split);
  NGramModel ngram = NGramModel::train(training, model.inventory);
  InterpolationWeights w = ngram.estimate_weights(held_out);

  detail::write_file(opt.out_path, ngram.save());
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "trained on %zu dialogues (%zu acts), weights q1=%.4f q2=%.4f q3=%.4f from %zu "
                "held-out dialogues",
                training.dialogues.size(), training.act_count(), w.unigram, w.bigram, w.trigram,
                held_out.dialogues.size());
  out << buf << '\n' << "wrote " << opt.out_path << '\n';
  return kExitOk;
}

int cmd_eval(const EvalOptions& opt, std::ostream& out) {
  DialogueModel model = load_model_file(opt.model_def_path);
  NGramModel ngram = NGramModel::load_file(opt.model_path, model.inventory);

  std::vector<Corpus> corpora;
  std::vector<std::pair<std::string, const Corpus*>> sets;
  corpora.reserve(opt.corpus_paths.size());
  for (const std::string& path : opt.corpus_paths) {
    Corpus c = filter_speakers(read_corpus_file(path, model.inventory), opt.skip_speakers);
    corpora.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    std::string name = opt.corpus_paths[i];
    auto slash = name.find_last_of('/');
    if (slash != std::string::npos) name = name.substr(slash + 1);
    auto dot = name.find_last_of('.');
    if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
    sets.emplace_back(name, &corpora[i]);
  }

  EvaluationReport report = evaluate(ngram, sets, opt.ks, opt.skip_initial);
  out << render_report(report);
  return kExitOk;
}

ReplayResult replay_dialogue(const DialogueModel& model, const OperatorLibrary& library,
                             const NGramModel& predictor, const Dialogue& dialogue,
                             int predictions) {
  DialogueSession session(model, library, &predictor, predictions);
  std::ostringstream out;

  std::vector<TurnResult> results;
  results.reserve(dialogue.turns.size());
  for (const Turn& turn : dialogue.turns) results.push_back(session.process(turn));
  session.finish();

  for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
    const Turn& turn = dialogue.turns[i];
    const TurnResult& r = results[i];
    out << turn.turn_id << ": " << turn.act << '\n';
    if (!r.next_prediction.empty()) {
      // Forecast for the following utterance; the marker flags a miss.
      out << "Prediction: (";
      for (std::size_t j = 0; j < r.next_prediction.size(); ++j) {
        if (j) out << ' ';
        out << r.next_prediction[j].act;
      }
      out << ')';
      if (i + 1 < dialogue.turns.size()) {
        const std::string& next_act = dialogue.turns[i + 1].act;
        bool hit = std::any_of(r.next_prediction.begin(), r.next_prediction.end(),
                               [&](const ScoredPrediction& p) { return p.act == next_act; });
        if (!hit) out << " ****Failed****";
      }
      out << '\n';
    }
    out << "Tracker: " << to_string(r.tracker_event.kind) << " [" << r.tracker_event.from_state
        << " -> " << r.tracker_event.to_state << "]\n";
    out << '\n';
  }

  out << "Memory:\n" << session.memory_dump() << '\n';
  ReplayResult result;
  result.event_log = serialize_events(session.tracker().events());
  result.inconsistencies = session.inconsistency_count();
  result.repairs = session.repair_count();
  out << "Summary: " << dialogue.turns.size() << " turns, " << result.inconsistencies
      << " inconsistencies, " << result.repairs << " repairs\n";
  result.transcript = out.str();
  return result;
}

int cmd_replay(const ReplayOptions& opt, std::ostream& out) {
  DialogueModel model = load_model_file(opt.model_def_path);
  OperatorLibrary library = OperatorLibrary::parse_file(opt.operators_path);
  library.link(model.inventory);
  NGramModel ngram = NGramModel::load_file(opt.model_path, model.inventory);
  Corpus corpus = read_corpus_file(opt.corpus_path, model.inventory);

  const Dialogue* dialogue = corpus.find(opt.dialogue_id);
  if (dialogue == nullptr)
    throw ValidationError("dialogue " + opt.dialogue_id + " not found in " + opt.corpus_path);

  ReplayResult result = replay_dialogue(model, library, ngram, *dialogue, opt.predictions);
  out << result.transcript;
  if (!opt.events_path.empty()) detail::write_file(opt.events_path, result.event_log);
  if (opt.strict && result.inconsistencies > 0) return kExitInconsistent;
  return kExitOk;
}

int cmd_generate(const GenerateOptions& opt, std::ostream& out) {
  DialogueModel model = load_model_file(opt.model_def_path);
  SyntheticSource source = SyntheticSource::load_file(opt.source_path, model.inventory);
  Corpus corpus = source.generate(opt.count, opt.seed, opt.terminal_act);
  detail::write_file(opt.out_path, write_corpus(corpus));
  out << "generated " << corpus.dialogues.size() << " dialogues (" << corpus.act_count()
      << " acts) -> " << opt.out_path << '\n';
  return kExitOk;
}

int cmd_bayes(const BayesOptions& opt, std::ostream& out) {
  DialogueModel model = load_model_file(opt.model_def_path);
  SyntheticSource source = SyntheticSource::load_file(opt.source_path, model.inventory);
  Corpus corpus = read_corpus_file(opt.corpus_path, model.inventory);
  std::vector<double> ceiling = source.bayes_top_k(corpus, opt.ks);
  char buf[64];
  out << "Pred.\tceiling\n";
  for (std::size_t i = 0; i < opt.ks.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.2f %%", ceiling[i]);
    out << opt.ks[i] << '\t' << buf << '\n';
  }
  return kExitOk;
}

}  // namespace diatrack::harness
