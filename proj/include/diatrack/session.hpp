#pragma once

#include <string>
#include <vector>

#include "diatrack/corpus.hpp"
#include "diatrack/memory.hpp"
#include "diatrack/model.hpp"
#include "diatrack/ngram.hpp"
#include "diatrack/plan.hpp"
#include "diatrack/tracker.hpp"

namespace diatrack {

struct TurnResult {
  TrackerEvent tracker_event;
  std::vector<ScoredPrediction> next_prediction;  // for the following act
};

/// One dialogue run through all three layers: the tracker validates each
/// act against the machine, the planner grows the intentional structure
/// and fires operator actions, and resolution acts update the thematic
/// record. Sessions are single-threaded; the shared model, library and
/// predictor are read-only.
class DialogueSession {
 public:
  DialogueSession(const DialogueModel& model, const OperatorLibrary& library,
                  const NGramModel* predictor = nullptr, int prediction_k = 2);

  TurnResult process(const Turn& turn);
  /// Closes the plan tree at end of dialogue.
  void finish();

  const DialogueTracker& tracker() const { return tracker_; }
  const Planner& planner() const { return planner_; }
  const DialogueMemory& memory() const { return memory_; }
  DialogueMemory& memory() { return memory_; }

  std::size_t inconsistency_count() const { return tracker_.inconsistency_count(); }
  std::size_t repair_count() const { return planner_.repairs().size(); }

  /// Three-section memory dump: [intentional] plan tree, [thematic],
  /// [referential].
  std::string memory_dump() const;

 private:
  const DialogueModel* model_;
  const NGramModel* predictor_;
  int prediction_k_;
  DialogueTracker tracker_;
  Planner planner_;
  DialogueMemory memory_;
};

}  // namespace diatrack
