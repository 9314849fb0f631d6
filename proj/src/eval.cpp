#include "diatrack/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "diatrack/errors.hpp"

namespace diatrack {

EvaluationReport evaluate(const NGramModel& model,
                          const std::vector<std::pair<std::string, const Corpus*>>& test_sets,
                          const std::vector<int>& ks, bool skip_initial) {
  if (!model.trained()) throw UntrainedModelError();
  EvaluationReport report;
  report.ks = ks;

  const ActInventory& inv = model.inventory();
  for (const auto& [name, corpus] : test_sets) {
    EvaluationReport::SetResult result;
    result.name = name;
    result.dialogues = corpus->dialogues.size();
    std::vector<std::size_t> hits(ks.size(), 0);
    std::size_t positions = 0;

    for (const Dialogue& d : corpus->dialogues) {
      std::vector<std::string> history;
      for (std::size_t i = 0; i < d.turns.size(); ++i) {
        const std::string& act = d.turns[i].act;
        inv.require(act);
        if (!(skip_initial && i == 0)) {
          // Rank of the true act in the full prediction order.
          auto ranked = model.predict_top_k(history, inv.size());
          int rank = 1;
          for (const ScoredPrediction& p : ranked) {
            if (p.act == act) break;
            ++rank;
          }
          ++positions;
          for (std::size_t j = 0; j < ks.size(); ++j)
            if (rank <= ks[j]) ++hits[j];
        }
        history.push_back(act);
      }
    }
    result.acts = positions;
    result.accuracy.resize(ks.size(), 0.0);
    for (std::size_t j = 0; j < ks.size(); ++j)
      result.accuracy[j] =
          positions == 0 ? 0.0 : 100.0 * static_cast<double>(hits[j]) / static_cast<double>(positions);
    report.sets.push_back(std::move(result));
  }
  return report;
}

std::string render_report(const EvaluationReport& report) {
  std::ostringstream out;
  char buf[64];
  out << "Pred.";
  for (const auto& s : report.sets) out << '\t' << s.name;
  out << '\n';
  for (std::size_t j = 0; j < report.ks.size(); ++j) {
    out << report.ks[j];
    for (const auto& s : report.sets) {
      std::snprintf(buf, sizeof(buf), "%.2f %%", s.accuracy[j]);
      out << '\t' << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace diatrack
