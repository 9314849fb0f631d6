#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "diatrack/corpus.hpp"
#include "diatrack/model.hpp"
#include "diatrack/ngram.hpp"

namespace diatrack {

/// A known trigram source over the inventory, used to generate synthetic
/// corpora and to compute the exact prediction ceiling on a sample.
/// Boundary handling matches the predictor: every dialogue starts from
/// the (<s>, <s>) context.
class SyntheticSource {
 public:
  /// Loads a source spec: the model persistence format whose [trigrams]
  /// section holds exact conditional probabilities (each context row must
  /// sum to 1 within 1e-12).
  static SyntheticSource load(const std::string& text, const ActInventory& inventory);
  static SyntheticSource load_file(const std::string& path, const ActInventory& inventory);

  /// Empirical source: the trained model's trigram rows normalized to
  /// conditional probabilities.
  static SyntheticSource from_model(const NGramModel& model);

  /// Samples `count` dialogues, each walked from the boundary context
  /// until `terminal_act` is emitted (inclusive). Deterministic given the
  /// seed. Raises NonterminatingSourceError when the terminal is
  /// unreachable or a dialogue exceeds `max_len` acts.
  Corpus generate(int count, std::uint64_t seed, const std::string& terminal_act,
                  int max_len = 10000) const;

  /// Conditional distribution over the inventory for a (possibly
  /// boundary-padded) history; empty when the context is undefined.
  std::vector<double> conditional(const std::vector<std::string>& history) const;

  /// Exact top-k accuracy of predicting with this source on the sample,
  /// one percentage per k. This is the ceiling for any trained model.
  std::vector<double> bayes_top_k(const Corpus& sample, const std::vector<int>& ks) const;

  const ActInventory& inventory() const { return inventory_; }

 private:
  explicit SyntheticSource(const ActInventory& inventory);
  int boundary() const { return inventory_.size(); }
  const std::vector<double>* row(int ctx2, int ctx1) const;
  void validate_rows() const;
  void check_terminal_reachable(const std::string& terminal_act) const;

  ActInventory inventory_;
  // (ctx2, ctx1) -> probability per act; contexts absent from the map are
  // undefined (never produced by the source).
  std::map<std::pair<int, int>, std::vector<double>> rows_;
};

}  // namespace diatrack
