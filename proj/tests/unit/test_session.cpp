#include "diatrack/memory.hpp"
#include "diatrack/session.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace diatrack;
using testsupport::corpus_T;
using testsupport::default_model;
using testsupport::default_plans;
using testsupport::excerpt_corpus;
using testsupport::tiny_corpus;

namespace {

NGramModel trained_predictor() {
  NGramModel m = NGramModel::train(corpus_T(), default_model().inventory);
  m.set_weights({0.2, 0.3, 0.5});
  return m;
}

void run_dialogue(DialogueSession& session, const Dialogue& d) {
  for (const Turn& t : d.turns) session.process(t);
  session.finish();
}

}  // namespace

TEST_CASE("a conformant dialogue flows through all three layers") {
  NGramModel predictor = trained_predictor();
  DialogueSession session(default_model(), default_plans(), &predictor);
  run_dialogue(session, tiny_corpus().dialogues[0]);

  CHECK(session.inconsistency_count() == 0);
  CHECK(session.repair_count() == 0);
  CHECK(session.tracker().is_complete());
  CHECK(session.planner().fully_satisfied());

  std::string dump = session.memory_dump();
  CHECK(dump.find("[intentional]\n") == 0);
  CHECK(dump.find("[thematic]\n") != std::string::npos);
  CHECK(dump.find("[referential]\n") != std::string::npos);
}

TEST_CASE("the thematic lifecycle of D2: reject then accept then confirm") {
  DialogueSession session(default_model(), default_plans());
  run_dialogue(session, tiny_corpus().dialogues[1]);

  const auto& records = session.memory().thematic();
  REQUIRE(records.size() == 2);
  CHECK(records[0].status == ThemeStatus::Rejected);
  CHECK(records[0].round == 0);
  CHECK(records[0].slots.at("week") == "1");
  CHECK(records[1].status == ThemeStatus::Confirmed);
  CHECK(records[1].round == 1);
  CHECK(records[1].slots.at("week") == "3");
  // Theme pairs were auto-recorded as realizations.
  CHECK(session.memory().realizations("month").size() == 2);
}

TEST_CASE("the excerpt produces the narrated thematic chain") {
  DialogueSession session(default_model(), default_plans());
  run_dialogue(session, excerpt_corpus().dialogues[0]);

  CHECK(session.inconsistency_count() == 0);
  CHECK(session.repair_count() == 0);

  const auto& records = session.memory().thematic();
  REQUIRE(records.size() == 4);
  // October alone, then narrowed to the fifth (a refinement), then the
  // counter-proposal 4-8 which gets rejected, then the 8-13 proposal.
  CHECK(records[0].status == ThemeStatus::Proposed);
  CHECK(records[1].status == ThemeStatus::Refined);
  CHECK(records[1].parent == 0);
  CHECK(records[2].status == ThemeStatus::Rejected);
  CHECK(records[2].slots.at("day_from") == "4");
  CHECK(records[2].resolved_in == "EL007/1");
  CHECK(records[3].status == ThemeStatus::Proposed);
  CHECK(records[3].round == 1);
  CHECK(records[3].slots.at("day_to") == "13");
  CHECK(session.memory().last_topic_kind() == "time");
  testsupport::check_golden("memory_excerpt.txt", session.memory_dump());
}

TEST_CASE("anywhere acts pass through without disturbing the plan") {
  DialogueSession session(default_model(), default_plans());
  const char* acts[] = {"BEGRUESSUNG", "INIT_TERMINABSPRACHE", "DELIBERATION",
                        "VORSCHLAG",   "AKZEPTANZ",            "BESTAETIGUNG",
                        "VERABSCHIEDUNG"};
  int i = 0;
  for (const char* a : acts) {
    Turn t;
    t.dialogue_id = "D";
    t.turn_id = "t" + std::to_string(++i);
    t.speaker = "A";
    t.act = a;
    session.process(t);
  }
  session.finish();
  CHECK(session.inconsistency_count() == 0);
  CHECK(session.repair_count() == 0);
  CHECK(session.planner().digression_count() == 1);
  CHECK(session.tracker().is_complete());
}

TEST_CASE("clarification sub-dialogues suspend and resume the machine") {
  DialogueSession session(default_model(), default_plans());
  const char* acts[] = {"INIT_TERMINABSPRACHE", "KLAERUNG_BEGINN", "KLAERUNG_ENDE", "VORSCHLAG",
                        "AKZEPTANZ",            "BESTAETIGUNG",    "VERABSCHIEDUNG"};
  int i = 0;
  for (const char* a : acts) {
    Turn t;
    t.dialogue_id = "D";
    t.turn_id = "t" + std::to_string(++i);
    t.speaker = "A";
    t.act = a;
    session.process(t);
  }
  session.finish();
  CHECK(session.inconsistency_count() == 0);
  CHECK(session.repair_count() == 0);
  CHECK(session.tracker().is_complete());
  CHECK(session.planner().digression_count() == 2);
  std::string dump = session.memory_dump();
  CHECK(dump.find("digression(clarification)") != std::string::npos);
}

TEST_CASE("per-turn results carry the forecast for the next act") {
  NGramModel predictor = trained_predictor();
  DialogueSession session(default_model(), default_plans(), &predictor, 2);
  Turn t;
  t.dialogue_id = "D";
  t.turn_id = "t1";
  t.speaker = "A";
  t.act = "BEGRUESSUNG";
  TurnResult r = session.process(t);
  REQUIRE(r.next_prediction.size() == 2);
  // After a greeting the tables only ever saw INIT_TERMINABSPRACHE.
  CHECK(r.next_prediction[0].act == "INIT_TERMINABSPRACHE");
  CHECK(r.tracker_event.kind == TrackerEventKind::Accepted);
}

TEST_CASE("replays are deterministic") {
  NGramModel predictor = trained_predictor();
  auto run_once = [&] {
    DialogueSession session(default_model(), default_plans(), &predictor);
    run_dialogue(session, excerpt_corpus().dialogues[0]);
    return session.memory_dump() + serialize_events(session.tracker().events());
  };
  CHECK(run_once() == run_once());
}
