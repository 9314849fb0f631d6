#pragma once

#include <string>
#include <vector>

#include "diatrack/model.hpp"
#include "diatrack/ngram.hpp"

namespace diatrack {

enum class TrackerEventKind {
  Accepted,
  AnywhereAccepted,
  ClarificationOpened,
  ClarificationClosed,
  Inconsistency,
  FallbackApplied,
};

std::string to_string(TrackerEventKind kind);

struct TrackerEvent {
  TrackerEventKind kind;
  std::string act;
  std::string from_state;
  std::string to_state;
};

/// One line per event: kind<TAB>act<TAB>from<TAB>to.
std::string serialize_events(const std::vector<TrackerEvent>& events);

/// Steps the dialogue machine over the observed act stream. Never rejects
/// an in-inventory act: inconsistent acts trigger the fallback strategy
/// and processing continues. One tracker per dialogue session.
class DialogueTracker {
 public:
  explicit DialogueTracker(const DialogueModel& model);

  /// Processes one act and returns the terminal event. Inconsistent acts
  /// additionally log an Inconsistency event just before the returned
  /// FallbackApplied one. The optional predictor scores fallback states.
  TrackerEvent step(const std::string& act, const NGramModel* predictor = nullptr);

  /// true iff the machine is in a final state with no open clarification.
  bool is_complete() const;

  /// Most probable state after an act that is inadmissible in the current
  /// state: candidates are all states with an incoming transition labeled
  /// `act`, scored by the summed predictor probability of their outgoing
  /// labels given history-plus-act. Falls back to the current state when
  /// no candidate or no predictor exists.
  std::string fallback_state(const std::string& act, const NGramModel* predictor) const;

  const std::string& current_state() const { return current_; }
  std::size_t clarification_depth() const { return saved_states_.size(); }
  const std::vector<std::string>& history() const { return history_; }
  const std::vector<TrackerEvent>& events() const { return events_; }
  std::size_t inconsistency_count() const;

 private:
  const DialogueModel* model_;
  std::string current_;
  std::vector<std::string> saved_states_;  // clarification stack
  std::vector<std::string> history_;
  std::vector<TrackerEvent> events_;
};

}  // namespace diatrack
