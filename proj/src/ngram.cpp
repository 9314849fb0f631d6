#include "diatrack/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "diatrack/errors.hpp"
#include "text_util.hpp"

namespace diatrack {

void InterpolationWeights::validate() const {
  if (unigram < 0 || bigram < 0 || trigram < 0)
    throw ValidationError("interpolation weights must be non-negative");
  if (std::abs(unigram + bigram + trigram - 1.0) > 1e-12)
    throw ValidationError("interpolation weights must sum to 1");
}

NGramTables::NGramTables(int act_count) : acts_(act_count) {
  std::size_t m = static_cast<std::size_t>(acts_);
  std::size_t ctx = m + 1;
  uni_.assign(m, 0);
  bi_.assign(ctx * m, 0);
  tri_.assign(ctx * ctx * m, 0);
  bi_total_.assign(ctx, 0);
  tri_total_.assign(ctx * ctx, 0);
}

void NGramTables::add_event(int ctx2, int ctx1, int act) {
  std::size_t m = static_cast<std::size_t>(acts_);
  std::size_t ctx = m + 1;
  uni_[static_cast<std::size_t>(act)] += 1;
  total_ += 1;
  bi_[static_cast<std::size_t>(ctx1) * m + static_cast<std::size_t>(act)] += 1;
  bi_total_[static_cast<std::size_t>(ctx1)] += 1;
  std::size_t tc = static_cast<std::size_t>(ctx2) * ctx + static_cast<std::size_t>(ctx1);
  tri_[tc * m + static_cast<std::size_t>(act)] += 1;
  tri_total_[tc] += 1;
}

void NGramTables::add_sequence(const std::vector<int>& acts) {
  int b = boundary_id();
  int ctx2 = b, ctx1 = b;
  for (int act : acts) {
    add_event(ctx2, ctx1, act);
    ctx2 = ctx1;
    ctx1 = act;
  }
}

std::uint64_t NGramTables::unigram(int act) const { return uni_[static_cast<std::size_t>(act)]; }

std::uint64_t NGramTables::bigram(int ctx, int act) const {
  return bi_[static_cast<std::size_t>(ctx) * static_cast<std::size_t>(acts_) +
             static_cast<std::size_t>(act)];
}

std::uint64_t NGramTables::trigram(int ctx2, int ctx1, int act) const {
  std::size_t ctx = static_cast<std::size_t>(acts_) + 1;
  std::size_t tc = static_cast<std::size_t>(ctx2) * ctx + static_cast<std::size_t>(ctx1);
  return tri_[tc * static_cast<std::size_t>(acts_) + static_cast<std::size_t>(act)];
}

std::uint64_t NGramTables::bigram_context_total(int ctx) const {
  return bi_total_[static_cast<std::size_t>(ctx)];
}

std::uint64_t NGramTables::trigram_context_total(int ctx2, int ctx1) const {
  std::size_t ctx = static_cast<std::size_t>(acts_) + 1;
  return tri_total_[static_cast<std::size_t>(ctx2) * ctx + static_cast<std::size_t>(ctx1)];
}

std::uint64_t NGramTables::occurrences(int symbol) const {
  // Both boundary symbols of a padded sequence condition the (<s>, <s>)
  // trigram context exactly once, so that total counts the sequences.
  if (symbol == boundary_id()) return 2 * trigram_context_total(boundary_id(), boundary_id());
  return unigram(symbol);
}

double NGramTables::rel_unigram(int act) const {
  return total_ == 0 ? 0.0 : static_cast<double>(unigram(act)) / static_cast<double>(total_);
}

double NGramTables::rel_bigram(int ctx, int act) const {
  std::uint64_t t = bigram_context_total(ctx);
  return t == 0 ? 0.0 : static_cast<double>(bigram(ctx, act)) / static_cast<double>(t);
}

double NGramTables::rel_trigram(int ctx2, int ctx1, int act) const {
  std::uint64_t t = trigram_context_total(ctx2, ctx1);
  return t == 0 ? 0.0 : static_cast<double>(trigram(ctx2, ctx1, act)) / static_cast<double>(t);
}

bool NGramTables::operator==(const NGramTables& other) const {
  return acts_ == other.acts_ && uni_ == other.uni_ && bi_ == other.bi_ && tri_ == other.tri_ &&
         total_ == other.total_;
}

NGramModel::NGramModel(const ActInventory& inventory)
    : inventory_(inventory), tables_(inventory.size()) {}

NGramModel NGramModel::train(const Corpus& corpus, const ActInventory& inventory) {
  NGramModel model(inventory);
  for (const Dialogue& d : corpus.dialogues) {
    std::vector<int> ids;
    ids.reserve(d.turns.size());
    for (const Turn& t : d.turns) ids.push_back(inventory.require(t.act));
    model.tables_.add_sequence(ids);
  }
  return model;
}

int NGramModel::symbol_id(const std::string& label) const {
  if (label == kBoundaryToken) return tables_.boundary_id();
  return inventory_.require(label);
}

void NGramModel::context_ids(const std::vector<std::string>& history, int& ctx2, int& ctx1) const {
  int b = tables_.boundary_id();
  std::size_t n = history.size();
  ctx1 = n >= 1 ? inventory_.require(history[n - 1]) : b;
  ctx2 = n >= 2 ? inventory_.require(history[n - 2]) : b;
}

double NGramModel::probability(const std::vector<std::string>& history,
                               const std::string& candidate) const {
  if (!trained()) throw UntrainedModelError();
  int act = inventory_.require(candidate);
  int ctx2, ctx1;
  context_ids(history, ctx2, ctx1);

  // Redistribute the weight of unseen conditioning contexts downward.
  double q1 = weights_.unigram, q2 = weights_.bigram, q3 = weights_.trigram;
  if (tables_.trigram_context_total(ctx2, ctx1) == 0) {
    q2 += q3;
    q3 = 0.0;
  }
  if (tables_.bigram_context_total(ctx1) == 0) {
    q1 += q2;
    q2 = 0.0;
  }
  double p = q1 * tables_.rel_unigram(act);
  if (q2 > 0) p += q2 * tables_.rel_bigram(ctx1, act);
  if (q3 > 0) p += q3 * tables_.rel_trigram(ctx2, ctx1, act);
  return p;
}

std::vector<double> NGramModel::distribution(int ctx2, int ctx1) const {
  double q1 = weights_.unigram, q2 = weights_.bigram, q3 = weights_.trigram;
  if (tables_.trigram_context_total(ctx2, ctx1) == 0) {
    q2 += q3;
    q3 = 0.0;
  }
  if (tables_.bigram_context_total(ctx1) == 0) {
    q1 += q2;
    q2 = 0.0;
  }
  std::vector<double> dist(static_cast<std::size_t>(inventory_.size()));
  for (int a = 0; a < inventory_.size(); ++a) {
    double p = q1 * tables_.rel_unigram(a);
    if (q2 > 0) p += q2 * tables_.rel_bigram(ctx1, a);
    if (q3 > 0) p += q3 * tables_.rel_trigram(ctx2, ctx1, a);
    dist[static_cast<std::size_t>(a)] = p;
  }
  return dist;
}

std::vector<ScoredPrediction> NGramModel::predict_top_k(const std::vector<std::string>& history,
                                                        int k) const {
  if (!trained()) throw UntrainedModelError();
  if (k < 1) throw ValidationError("k must be >= 1");
  int ctx2, ctx1;
  context_ids(history, ctx2, ctx1);
  std::vector<double> dist = distribution(ctx2, ctx1);

  std::vector<int> order(dist.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dist[static_cast<std::size_t>(a)] > dist[static_cast<std::size_t>(b)];
  });  // stable keeps inventory order among ties

  std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  std::vector<ScoredPrediction> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i)
    out.push_back({inventory_.name(order[i]), dist[static_cast<std::size_t>(order[i])]});
  return out;
}

std::vector<std::string> NGramModel::predict_keywords(const std::vector<std::string>& history,
                                                      int k) const {
  std::vector<std::string> out;
  for (const ScoredPrediction& p : predict_top_k(history, k)) {
    for (const std::string& w : inventory_.keywords_for(p.act)) {
      if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
    }
  }
  return out;
}

NGramModel NGramModel::online_update(const std::string& observed,
                                     const std::vector<std::string>& history) const {
  int act = inventory_.require(observed);
  for (const std::string& h : history) inventory_.require(h);
  NGramModel next(*this);
  int ctx2, ctx1;
  context_ids(history, ctx2, ctx1);
  next.tables_.add_event(ctx2, ctx1, act);
  return next;
}

void NGramModel::set_weights(const InterpolationWeights& w) {
  w.validate();
  weights_ = w;
}

InterpolationWeights NGramModel::estimate_weights(const Corpus& held_out) {
  struct Event {
    int ctx2, ctx1, act;
  };
  std::vector<Event> events;
  int b = tables_.boundary_id();
  for (const Dialogue& d : held_out.dialogues) {
    int ctx2 = b, ctx1 = b;
    for (const Turn& t : d.turns) {
      int act = inventory_.require(t.act);
      events.push_back({ctx2, ctx1, act});
      ctx2 = ctx1;
      ctx1 = act;
    }
  }
  if (events.empty())
    throw DegenerateHeldOutError("held-out corpus has no trigram events");

  double q1 = 1.0 / 3.0, q2 = 1.0 / 3.0, q3 = 1.0 / 3.0;
  for (int iter = 0; iter < 200; ++iter) {
    double e1 = 0, e2 = 0, e3 = 0;
    for (const Event& ev : events) {
      double c1 = q1 * tables_.rel_unigram(ev.act);
      double c2 = q2 * tables_.rel_bigram(ev.ctx1, ev.act);
      double c3 = q3 * tables_.rel_trigram(ev.ctx2, ev.ctx1, ev.act);
      double denom = c1 + c2 + c3;
      if (denom <= 0) continue;  // event unexplainable by the trained tables
      e1 += c1 / denom;
      e2 += c2 / denom;
      e3 += c3 / denom;
    }
    double total = e1 + e2 + e3;
    if (total <= 0)
      throw DegenerateHeldOutError(
          "no held-out event is assigned probability by the trained tables");
    double n1 = e1 / total, n2 = e2 / total, n3 = e3 / total;
    double delta = std::max({std::abs(n1 - q1), std::abs(n2 - q2), std::abs(n3 - q3)});
    q1 = n1;
    q2 = n2;
    q3 = n3;
    if (delta < 1e-6) break;
  }
  // Guard against accumulated rounding before the sum-to-1 validation.
  double norm = q1 + q2 + q3;
  weights_ = InterpolationWeights{q1 / norm, q2 / norm, q3 / norm};
  weights_.validate();
  return weights_;
}

std::uint64_t NGramModel::unigram_count(const std::string& act) const {
  return tables_.unigram(inventory_.require(act));
}

std::uint64_t NGramModel::bigram_count(const std::string& ctx, const std::string& act) const {
  return tables_.bigram(symbol_id(ctx), inventory_.require(act));
}

std::uint64_t NGramModel::trigram_count(const std::string& ctx2, const std::string& ctx1,
                                        const std::string& act) const {
  return tables_.trigram(symbol_id(ctx2), symbol_id(ctx1), inventory_.require(act));
}

namespace {

std::string format_weight(double w) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", w);
  return buf;
}

}  // namespace

std::string NGramModel::save() const {
  std::ostringstream out;
  out << "[weights]\n"
      << format_weight(weights_.unigram) << '\t' << format_weight(weights_.bigram) << '\t'
      << format_weight(weights_.trigram) << '\n';

  int m = inventory_.size();
  int b = tables_.boundary_id();
  auto symbol_name = [&](int id) -> std::string {
    return id == b ? kBoundaryToken : inventory_.name(id);
  };

  out << "[unigrams]\n";
  for (int a = 0; a < m; ++a) {
    if (tables_.unigram(a)) out << inventory_.name(a) << '\t' << tables_.unigram(a) << '\n';
  }
  // Context order: boundary first, then inventory order.
  auto ctx_loop = [&](auto&& body) {
    body(b);
    for (int c = 0; c < m; ++c) body(c);
  };
  out << "[bigrams]\n";
  ctx_loop([&](int c) {
    for (int a = 0; a < m; ++a) {
      if (tables_.bigram(c, a))
        out << symbol_name(c) << '\t' << inventory_.name(a) << '\t' << tables_.bigram(c, a) << '\n';
    }
  });
  out << "[trigrams]\n";
  ctx_loop([&](int c2) {
    ctx_loop([&](int c1) {
      for (int a = 0; a < m; ++a) {
        if (tables_.trigram(c2, c1, a))
          out << symbol_name(c2) << '\t' << symbol_name(c1) << '\t' << inventory_.name(a) << '\t'
              << tables_.trigram(c2, c1, a) << '\n';
      }
    });
  });
  return out.str();
}

NGramModel NGramModel::load(const std::string& text, const ActInventory& inventory) {
  NGramModel model(inventory);
  detail::LineReader reader(text);
  std::string line;
  int section = -1;  // 0 weights, 1 uni, 2 bi, 3 tri
  bool have_weights = false;

  auto symbol = [&](const std::string& tok) -> int {
    if (tok == kBoundaryToken) return model.tables_.boundary_id();
    int id = inventory.id_of(tok);
    if (id < 0) throw UnknownActError(tok, reader.line_no());
    return id;
  };
  auto count_of = [&](const std::string& tok) -> std::uint64_t {
    try {
      std::size_t used = 0;
      unsigned long long v = std::stoull(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ParseError(reader.line_no(), "bad count '" + tok + "'");
    }
  };

  // Counts are rebuilt event by event so derived totals stay consistent.
  struct Ev { int c2, c1, a; std::uint64_t n; };
  std::vector<Ev> tri_events;
  std::vector<std::pair<int, std::uint64_t>> uni_counts;
  std::vector<std::tuple<int, int, std::uint64_t>> bi_counts;

  while (reader.next(line)) {
    if (line == "[weights]") { section = 0; continue; }
    if (line == "[unigrams]") { section = 1; continue; }
    if (line == "[bigrams]") { section = 2; continue; }
    if (line == "[trigrams]") { section = 3; continue; }
    if (line.front() == '[') throw ParseError(reader.line_no(), "unknown section " + line);

    auto tok = detail::split_ws(line);
    switch (section) {
      case 0: {
        if (tok.size() != 3) throw ParseError(reader.line_no(), "expected three weights");
        try {
          model.weights_ = InterpolationWeights{std::stod(tok[0]), std::stod(tok[1]),
                                                std::stod(tok[2])};
        } catch (const std::exception&) {
          throw ParseError(reader.line_no(), "bad weight value");
        }
        model.weights_.validate();
        have_weights = true;
        break;
      }
      case 1:
        if (tok.size() != 2) throw ParseError(reader.line_no(), "expected 'ACT count'");
        uni_counts.emplace_back(symbol(tok[0]), count_of(tok[1]));
        break;
      case 2:
        if (tok.size() != 3) throw ParseError(reader.line_no(), "expected 'CTX ACT count'");
        bi_counts.emplace_back(symbol(tok[0]), symbol(tok[1]), count_of(tok[2]));
        break;
      case 3:
        if (tok.size() != 4) throw ParseError(reader.line_no(), "expected 'CTX CTX ACT count'");
        tri_events.push_back({symbol(tok[0]), symbol(tok[1]), symbol(tok[2]), count_of(tok[3])});
        break;
      default:
        throw ParseError(reader.line_no(), "content before first section");
    }
  }
  if (!have_weights) throw ValidationError("model file has no [weights] section");

  // Trigram events imply the bigram and unigram counts; replay them and
  // then cross-check the redundant sections.
  for (const Ev& e : tri_events) {
    if (e.a >= model.tables_.act_count() || e.a == model.tables_.boundary_id())
      throw ValidationError("boundary symbol cannot be predicted");
    for (std::uint64_t i = 0; i < e.n; ++i) model.tables_.add_event(e.c2, e.c1, e.a);
  }
  for (const auto& [a, n] : uni_counts) {
    if (model.tables_.unigram(a) != n)
      throw ValidationError("unigram count for " + inventory.name(a) +
                            " disagrees with the trigram section");
  }
  for (const auto& [c, a, n] : bi_counts) {
    if (model.tables_.bigram(c, a) != n)
      throw ValidationError("bigram count disagrees with the trigram section");
  }
  return model;
}

NGramModel NGramModel::load_file(const std::string& path, const ActInventory& inventory) {
  return load(detail::read_file(path), inventory);
}

}  // namespace diatrack
