#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "diatrack/corpus.hpp"
#include "diatrack/ngram.hpp"

namespace diatrack {

/// Top-k prediction accuracy per test set; accuracy is monotone
/// non-decreasing in k by construction (hits are counted by rank).
struct EvaluationReport {
  std::vector<int> ks;
  struct SetResult {
    std::string name;
    std::size_t dialogues = 0;
    std::size_t acts = 0;
    std::vector<double> accuracy;  // percentage per k, aligned with ks
  };
  std::vector<SetResult> sets;
};

/// Scores every padded act position of each test corpus: a position is a
/// hit at k when the true act ranks within the model's top-k prediction.
/// skip_initial drops dialogue-initial positions (pure boundary context).
EvaluationReport evaluate(const NGramModel& model,
                          const std::vector<std::pair<std::string, const Corpus*>>& test_sets,
                          const std::vector<int>& ks, bool skip_initial = false);

/// Table layout: one column per test set, one row per k.
std::string render_report(const EvaluationReport& report);

}  // namespace diatrack
