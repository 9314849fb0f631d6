#include "diatrack/session.hpp"

#include <sstream>

namespace diatrack {

DialogueSession::DialogueSession(const DialogueModel& model, const OperatorLibrary& library,
                                 const NGramModel* predictor, int prediction_k)
    : model_(&model),
      predictor_(predictor),
      prediction_k_(prediction_k),
      tracker_(model),
      planner_(library, model.inventory) {}

TurnResult DialogueSession::process(const Turn& turn) {
  TurnResult result;
  result.tracker_event = tracker_.step(turn.act, predictor_);
  planner_.advance(turn, result.tracker_event.kind, memory_, predictor_);

  // Resolution acts update the thematic record; proposals were already
  // filed by the OFFER operator's retrieve-theme action.
  if (turn.act == "AKZEPTANZ" || turn.act == "ABLEHNUNG" || turn.act == "BESTAETIGUNG")
    memory_.resolve_theme(turn.act, turn.turn_id);

  // Theme annotations double as surface realizations of the negotiated
  // objects, keyed by slot name.
  for (const auto& [key, value] : turn.theme)
    memory_.record_realization(turn.turn_id, key, value);

  if (predictor_ != nullptr && predictor_->trained())
    result.next_prediction = predictor_->predict_top_k(tracker_.history(), prediction_k_);
  return result;
}

void DialogueSession::finish() { planner_.finalize(); }

std::string DialogueSession::memory_dump() const {
  std::ostringstream out;
  out << "[intentional]\n" << planner_.dump();
  out << memory_.dump_thematic();
  out << memory_.dump_referential();
  return out.str();
}

}  // namespace diatrack
