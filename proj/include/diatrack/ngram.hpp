#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diatrack/corpus.hpp"
#include "diatrack/model.hpp"

namespace diatrack {

/// Token used for the two synthetic boundary symbols that pad each
/// dialogue start. Boundary symbols condition predictions but are never
/// predicted and carry no unigram mass.
inline constexpr const char* kBoundaryToken = "<s>";

/// Interpolation weights over unigram/bigram/trigram estimates.
struct InterpolationWeights {
  double unigram = 1.0 / 3.0;
  double bigram = 1.0 / 3.0;
  double trigram = 1.0 / 3.0;

  void validate() const;  // non-negative, sum to 1 within 1e-12
};

struct ScoredPrediction {
  std::string act;
  double probability;
};

/// Raw n-gram counts over act sequences padded with two boundary symbols.
/// Context ids run over [0, acts] where id == acts is the boundary.
class NGramTables {
 public:
  NGramTables() = default;
  explicit NGramTables(int act_count);

  int act_count() const { return acts_; }
  int boundary_id() const { return acts_; }

  void add_event(int ctx2, int ctx1, int act);
  void add_sequence(const std::vector<int>& acts);

  std::uint64_t total_unigrams() const { return total_; }
  std::uint64_t unigram(int act) const;
  std::uint64_t bigram(int ctx, int act) const;
  std::uint64_t trigram(int ctx2, int ctx1, int act) const;
  std::uint64_t bigram_context_total(int ctx) const;
  std::uint64_t trigram_context_total(int ctx2, int ctx1) const;
  /// Occurrences of a symbol including boundary padding (boundary symbols
  /// appear twice per dialogue; real acts equal their unigram count).
  std::uint64_t occurrences(int symbol) const;

  // Relative frequencies; zero when the context was never seen.
  double rel_unigram(int act) const;
  double rel_bigram(int ctx, int act) const;
  double rel_trigram(int ctx2, int ctx1, int act) const;

  bool operator==(const NGramTables& other) const;

 private:
  int acts_ = 0;
  std::vector<std::uint64_t> uni_;         // [act]
  std::vector<std::uint64_t> bi_;          // [ctx][act]
  std::vector<std::uint64_t> tri_;         // [ctx2][ctx1][act]
  std::vector<std::uint64_t> bi_total_;    // per ctx
  std::vector<std::uint64_t> tri_total_;   // per (ctx2, ctx1)
  std::uint64_t total_ = 0;                // real acts only
};

/// The statistical layer: trained tables plus interpolation weights,
/// bound to an act inventory. Instances are immutable snapshots; the
/// updating operations return new models.
class NGramModel {
 public:
  explicit NGramModel(const ActInventory& inventory);

  /// Counts all padded n-gram events of the corpus.
  static NGramModel train(const Corpus& corpus, const ActInventory& inventory);

  /// Held-out re-estimation of the interpolation weights. Starts from
  /// uniform weights and iterates expectation updates until the largest
  /// per-iteration weight change drops below 1e-6 (at most 200 rounds).
  InterpolationWeights estimate_weights(const Corpus& held_out);

  /// Interpolated probability of `candidate` after `history` (only the
  /// last two acts condition the estimate; boundary symbols substitute
  /// for missing history). When a conditioning context has zero count its
  /// weight is reassigned to the next lower order, so the distribution
  /// over the inventory sums to 1 exactly.
  double probability(const std::vector<std::string>& history, const std::string& candidate) const;

  /// The k most probable next acts, ties broken by inventory order.
  std::vector<ScoredPrediction> predict_top_k(const std::vector<std::string>& history,
                                              int k) const;

  /// Union of the keyword lists of the top-k predicted acts, in
  /// prediction-rank order, first occurrence kept.
  std::vector<std::string> predict_keywords(const std::vector<std::string>& history, int k) const;

  /// New snapshot with the event (history, observed) counted.
  NGramModel online_update(const std::string& observed,
                           const std::vector<std::string>& history) const;

  const NGramTables& tables() const { return tables_; }
  const InterpolationWeights& weights() const { return weights_; }
  void set_weights(const InterpolationWeights& w);
  const ActInventory& inventory() const { return inventory_; }
  bool trained() const { return tables_.total_unigrams() > 0; }

  // Count accessors by label (kBoundaryToken allowed in context slots).
  std::uint64_t unigram_count(const std::string& act) const;
  std::uint64_t bigram_count(const std::string& ctx, const std::string& act) const;
  std::uint64_t trigram_count(const std::string& ctx2, const std::string& ctx1,
                              const std::string& act) const;

  /// Text persistence (sections [weights], [unigrams], [bigrams],
  /// [trigrams], deterministic inventory order).
  std::string save() const;
  static NGramModel load(const std::string& text, const ActInventory& inventory);
  static NGramModel load_file(const std::string& path, const ActInventory& inventory);

 private:
  int symbol_id(const std::string& label) const;  // act id or boundary
  void context_ids(const std::vector<std::string>& history, int& ctx2, int& ctx1) const;
  std::vector<double> distribution(int ctx2, int ctx1) const;

  ActInventory inventory_;
  NGramTables tables_;
  InterpolationWeights weights_;
};

}  // namespace diatrack
