#include "diatrack/tracker.hpp"

#include <sstream>

#include "diatrack/errors.hpp"

namespace diatrack {

std::string to_string(TrackerEventKind kind) {
  switch (kind) {
    case TrackerEventKind::Accepted: return "accepted";
    case TrackerEventKind::AnywhereAccepted: return "anywhere-accepted";
    case TrackerEventKind::ClarificationOpened: return "clarification-opened";
    case TrackerEventKind::ClarificationClosed: return "clarification-closed";
    case TrackerEventKind::Inconsistency: return "inconsistency";
    case TrackerEventKind::FallbackApplied: return "fallback-applied";
  }
  return "?";
}

std::string serialize_events(const std::vector<TrackerEvent>& events) {
  std::ostringstream out;
  for (const TrackerEvent& e : events)
    out << to_string(e.kind) << '\t' << e.act << '\t' << e.from_state << '\t' << e.to_state
        << '\n';
  return out.str();
}

DialogueTracker::DialogueTracker(const DialogueModel& model)
    : model_(&model), current_(model.machine.initial()) {}

bool DialogueTracker::is_complete() const {
  return saved_states_.empty() && model_->machine.is_final(current_);
}

std::size_t DialogueTracker::inconsistency_count() const {
  std::size_t n = 0;
  for (const TrackerEvent& e : events_)
    if (e.kind == TrackerEventKind::Inconsistency) ++n;
  return n;
}

std::string DialogueTracker::fallback_state(const std::string& act,
                                            const NGramModel* predictor) const {
  std::vector<std::string> candidates = model_->machine.states_with_incoming(act);
  if (candidates.empty()) return current_;
  if (candidates.size() == 1) return candidates.front();
  // Several candidates can only be ranked statistically.
  if (predictor == nullptr || !predictor->trained()) return current_;

  // History as if the act had been admissible.
  std::vector<std::string> hist = history_;
  hist.push_back(act);

  std::string best = candidates.front();
  double best_score = -1.0;
  for (const std::string& state : candidates) {
    double score = 0.0;
    for (const std::string& label : model_->machine.outgoing_labels(state))
      score += predictor->probability(hist, label);
    if (score > best_score) {  // ties keep the earlier (definition-order) state
      best_score = score;
      best = state;
    }
  }
  return best;
}

TrackerEvent DialogueTracker::step(const std::string& act, const NGramModel* predictor) {
  const ActInventory& inv = model_->inventory;
  if (!inv.contains(act)) throw UnknownActError(act);
  const DialogueMachine& machine = model_->machine;

  ActClass cls = inv.class_of(act);
  TrackerEvent event;
  event.act = act;
  event.from_state = current_;

  if (cls == ActClass::ClarificationOpen) {
    // An embedded clarification is itself a dialogue: save the state and
    // restart the machine. Recursion nests via the stack.
    saved_states_.push_back(current_);
    current_ = machine.initial();
    event.kind = TrackerEventKind::ClarificationOpened;
    event.to_state = current_;
  } else if (cls == ActClass::ClarificationClose && !saved_states_.empty()) {
    current_ = saved_states_.back();
    saved_states_.pop_back();
    event.kind = TrackerEventKind::ClarificationClosed;
    event.to_state = current_;
  } else if (cls == ActClass::Anywhere || machine.is_anywhere(act)) {
    event.kind = TrackerEventKind::AnywhereAccepted;
    event.to_state = current_;
  } else if (auto next = machine.successor(current_, act)) {
    current_ = *next;
    event.kind = TrackerEventKind::Accepted;
    event.to_state = current_;
  } else {
    // Inconsistent with the dialogue model (this also covers a
    // clarification close with nothing open). Signal it, then fall back.
    events_.push_back({TrackerEventKind::Inconsistency, act, current_, current_});
    std::string chosen = fallback_state(act, predictor);  // appends act itself
    history_.push_back(act);
    event.kind = TrackerEventKind::FallbackApplied;
    event.to_state = chosen;
    current_ = chosen;
    events_.push_back(event);
    return event;
  }

  history_.push_back(act);
  events_.push_back(event);
  return event;
}

}  // namespace diatrack
