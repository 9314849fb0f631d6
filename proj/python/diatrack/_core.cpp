// Python bindings for the dialogue-act tracking engine.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "diatrack/corpus.hpp"
#include "diatrack/errors.hpp"
#include "diatrack/eval.hpp"
#include "diatrack/harness.hpp"
#include "diatrack/memory.hpp"
#include "diatrack/model.hpp"
#include "diatrack/ngram.hpp"
#include "diatrack/plan.hpp"
#include "diatrack/session.hpp"
#include "diatrack/source.hpp"
#include "diatrack/tracker.hpp"

namespace py = pybind11;
using namespace diatrack;

namespace {

// Shared immutable context: model definition + operator library.
struct Engine {
  DialogueModel model;
  OperatorLibrary library;
};

Engine make_engine(const std::string& model_def_path, const std::string& operators_path) {
  Engine e{load_model_file(model_def_path), OperatorLibrary::parse_file(operators_path)};
  e.library.link(e.model.inventory);
  return e;
}

py::dict turn_to_dict(const Turn& t) {
  py::dict d;
  d["dialogue_id"] = t.dialogue_id;
  d["turn_id"] = t.turn_id;
  d["speaker"] = t.speaker;
  d["act"] = t.act;
  py::dict theme;
  for (const auto& [k, v] : t.theme) theme[py::str(k)] = v;
  d["theme"] = theme;
  d["utterance"] = t.utterance;
  return d;
}

Turn turn_from_args(const std::string& act, const std::string& turn_id,
                    const std::map<std::string, std::string>& theme) {
  Turn t;
  t.act = act;
  t.turn_id = turn_id;
  for (const auto& [k, v] : theme) t.theme.emplace_back(k, v);
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "three-layer dialogue-act tracking engine";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<UnknownActError>(m, "UnknownActError", PyExc_KeyError);
  py::register_exception<UntrainedModelError>(m, "UntrainedModelError", PyExc_RuntimeError);
  py::register_exception<DegenerateHeldOutError>(m, "DegenerateHeldOutError", PyExc_ValueError);
  py::register_exception<NonterminatingSourceError>(m, "NonterminatingSourceError",
                                                    PyExc_RuntimeError);
  py::register_exception<UnprocessedTurnError>(m, "UnprocessedTurnError", PyExc_KeyError);

  py::class_<DialogueModel>(m, "DialogueModel")
      .def_static("load", [](const std::string& path) { return load_model_file(path); },
                  py::arg("path"))
      .def_static("loads", [](const std::string& text) { return load_model(text); },
                  py::arg("text"))
      .def("acts",
           [](const DialogueModel& self) {
             std::vector<std::string> names;
             for (const auto& a : self.inventory.acts()) names.push_back(a.name);
             return names;
           })
      .def("validate_act",
           [](const DialogueModel& self, const std::string& label) {
             return validate_act(self.inventory, label);
           },
           py::arg("label"))
      .def("keywords_for",
           [](const DialogueModel& self, const std::string& label) {
             return self.inventory.keywords_for(label);
           },
           py::arg("label"))
      .def("initial_state", [](const DialogueModel& self) { return self.machine.initial(); })
      .def("dumps", [](const DialogueModel& self) { return write_model(self); });

  py::class_<Corpus>(m, "Corpus")
      .def_static("load",
                  [](const std::string& path, const DialogueModel& model) {
                    return read_corpus_file(path, model.inventory);
                  },
                  py::arg("path"), py::arg("model"))
      .def_static("loads",
                  [](const std::string& text, const DialogueModel& model) {
                    return read_corpus(text, model.inventory);
                  },
                  py::arg("text"), py::arg("model"))
      .def("dumps", [](const Corpus& self) { return write_corpus(self); })
      .def("act_count", &Corpus::act_count)
      .def("dialogue_ids",
           [](const Corpus& self) {
             std::vector<std::string> ids;
             for (const auto& d : self.dialogues) ids.push_back(d.id);
             return ids;
           })
      .def("act_sequences",
           [](const Corpus& self, const std::vector<std::string>& skip_speakers) {
             return act_sequences(self, skip_speakers);
           },
           py::arg("skip_speakers") = std::vector<std::string>{})
      .def("turns", [](const Corpus& self, const std::string& dialogue_id) {
        const Dialogue* d = self.find(dialogue_id);
        if (d == nullptr) throw ValidationError("dialogue " + dialogue_id + " not found");
        py::list out;
        for (const Turn& t : d->turns) out.append(turn_to_dict(t));
        return out;
      });

  py::class_<ScoredPrediction>(m, "ScoredPrediction")
      .def_readonly("act", &ScoredPrediction::act)
      .def_readonly("probability", &ScoredPrediction::probability)
      .def("__repr__", [](const ScoredPrediction& p) {
        std::ostringstream s;
        s << "ScoredPrediction(" << p.act << ", " << p.probability << ")";
        return s.str();
      });

  py::class_<NGramModel>(m, "NGramModel")
      .def_static("train",
                  [](const Corpus& corpus, const DialogueModel& model) {
                    return NGramModel::train(corpus, model.inventory);
                  },
                  py::arg("corpus"), py::arg("model"))
      .def_static("load",
                  [](const std::string& path, const DialogueModel& model) {
                    return NGramModel::load_file(path, model.inventory);
                  },
                  py::arg("path"), py::arg("model"))
      .def("estimate_weights",
           [](NGramModel& self, const Corpus& held_out) {
             InterpolationWeights w = self.estimate_weights(held_out);
             return py::make_tuple(w.unigram, w.bigram, w.trigram);
           },
           py::arg("held_out"))
      .def("weights",
           [](const NGramModel& self) {
             const InterpolationWeights& w = self.weights();
             return py::make_tuple(w.unigram, w.bigram, w.trigram);
           })
      .def("set_weights",
           [](NGramModel& self, double q1, double q2, double q3) {
             self.set_weights({q1, q2, q3});
           },
           py::arg("q1"), py::arg("q2"), py::arg("q3"))
      .def("probability", &NGramModel::probability, py::arg("history"), py::arg("candidate"))
      .def("predict_top_k", &NGramModel::predict_top_k, py::arg("history"), py::arg("k"))
      .def("predict_keywords", &NGramModel::predict_keywords, py::arg("history"), py::arg("k"))
      .def("online_update", &NGramModel::online_update, py::arg("observed"), py::arg("history"))
      .def("unigram_count", &NGramModel::unigram_count, py::arg("act"))
      .def("bigram_count", &NGramModel::bigram_count, py::arg("context"), py::arg("act"))
      .def("trigram_count", &NGramModel::trigram_count, py::arg("context2"), py::arg("context1"),
           py::arg("act"))
      .def("dumps", &NGramModel::save)
      .def("save", [](const NGramModel& self, const std::string& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path);
        out << self.save();
      });

  py::class_<Engine>(m, "Engine")
      .def(py::init(&make_engine), py::arg("model_def_path"), py::arg("operators_path"))
      .def_property_readonly("model", [](const Engine& e) { return e.model; });

  py::class_<DialogueSession>(m, "Session")
      .def(py::init([](const Engine& engine, const NGramModel* predictor, int prediction_k) {
             return new DialogueSession(engine.model, engine.library, predictor, prediction_k);
           }),
           py::arg("engine"), py::arg("predictor") = nullptr, py::arg("prediction_k") = 2,
           py::keep_alive<1, 2>(), py::keep_alive<1, 3>())
      .def("process",
           [](DialogueSession& self, const std::string& act, const std::string& turn_id,
              const std::map<std::string, std::string>& theme) {
             Turn turn = turn_from_args(act, turn_id, theme);
             TurnResult r = self.process(turn);
             py::dict out;
             out["event"] = to_string(r.tracker_event.kind);
             out["from_state"] = r.tracker_event.from_state;
             out["to_state"] = r.tracker_event.to_state;
             py::list preds;
             for (const auto& p : r.next_prediction)
               preds.append(py::make_tuple(p.act, p.probability));
             out["next_prediction"] = preds;
             return out;
           },
           py::arg("act"), py::arg("turn_id"), py::arg("theme") = std::map<std::string, std::string>{})
      .def("finish", &DialogueSession::finish)
      .def("is_complete", [](const DialogueSession& self) { return self.tracker().is_complete(); })
      .def("current_state",
           [](const DialogueSession& self) { return self.tracker().current_state(); })
      .def("inconsistencies", &DialogueSession::inconsistency_count)
      .def("repairs", &DialogueSession::repair_count)
      .def("plan_tree", [](const DialogueSession& self) { return self.planner().dump(); })
      .def("memory_dump", &DialogueSession::memory_dump)
      .def("event_log",
           [](const DialogueSession& self) { return serialize_events(self.tracker().events()); })
      .def("annotate", [](const DialogueSession& self, const std::string& turn_id) {
        PragmaticAnnotation a = self.planner().annotate(turn_id);
        py::dict out;
        out["act"] = a.act;
        out["phase"] = a.phase;
        out["round"] = a.round;
        out["repaired"] = a.repaired;
        return out;
      });

  py::class_<SyntheticSource>(m, "SyntheticSource")
      .def_static("load",
                  [](const std::string& path, const DialogueModel& model) {
                    return SyntheticSource::load_file(path, model.inventory);
                  },
                  py::arg("path"), py::arg("model"))
      .def_static("from_model", &SyntheticSource::from_model, py::arg("model"))
      .def("generate", &SyntheticSource::generate, py::arg("count"), py::arg("seed"),
           py::arg("terminal_act") = "VERABSCHIEDUNG", py::arg("max_len") = 10000)
      .def("bayes_top_k", &SyntheticSource::bayes_top_k, py::arg("sample"), py::arg("ks"));

  m.def(
      "evaluate",
      [](const NGramModel& model, const std::vector<std::pair<std::string, Corpus>>& test_sets,
         const std::vector<int>& ks, bool skip_initial) {
        std::vector<std::pair<std::string, const Corpus*>> sets;
        sets.reserve(test_sets.size());
        for (const auto& [name, corpus] : test_sets) sets.emplace_back(name, &corpus);
        EvaluationReport report = evaluate(model, sets, ks, skip_initial);
        py::dict out;
        out["ks"] = report.ks;
        py::list sets_out;
        for (const auto& s : report.sets) {
          py::dict d;
          d["name"] = s.name;
          d["dialogues"] = s.dialogues;
          d["acts"] = s.acts;
          d["accuracy"] = s.accuracy;
          sets_out.append(d);
        }
        out["sets"] = sets_out;
        out["table"] = render_report(report);
        return out;
      },
      py::arg("model"), py::arg("test_sets"), py::arg("ks"), py::arg("skip_initial") = false);

  m.def(
      "replay",
      [](const Engine& engine, const NGramModel& predictor, const Corpus& corpus,
         const std::string& dialogue_id, int predictions) {
        const Dialogue* d = corpus.find(dialogue_id);
        if (d == nullptr) throw ValidationError("dialogue " + dialogue_id + " not found");
        harness::ReplayResult r =
            harness::replay_dialogue(engine.model, engine.library, predictor, *d, predictions);
        py::dict out;
        out["transcript"] = r.transcript;
        out["inconsistencies"] = r.inconsistencies;
        out["repairs"] = r.repairs;
        return out;
      },
      py::arg("engine"), py::arg("predictor"), py::arg("corpus"), py::arg("dialogue_id"),
      py::arg("predictions") = 2);
}
