#include "diatrack/source.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <set>

#include "diatrack/errors.hpp"
#include "text_util.hpp"

namespace diatrack {

SyntheticSource::SyntheticSource(const ActInventory& inventory) : inventory_(inventory) {}

const std::vector<double>* SyntheticSource::row(int ctx2, int ctx1) const {
  auto it = rows_.find({ctx2, ctx1});
  return it == rows_.end() ? nullptr : &it->second;
}

void SyntheticSource::validate_rows() const {
  for (const auto& [ctx, probs] : rows_) {
    double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double p : probs)
      if (p < 0) throw ValidationError("source probability is negative");
    if (std::abs(sum - 1.0) > 1e-12)
      throw ValidationError("source context row does not sum to 1 (got " + std::to_string(sum) +
                            ")");
  }
}

SyntheticSource SyntheticSource::load(const std::string& text, const ActInventory& inventory) {
  SyntheticSource source(inventory);
  detail::LineReader reader(text);
  std::string line;
  int section = -1;  // only [trigrams] carries the distribution
  auto symbol = [&](const std::string& tok) -> int {
    if (tok == kBoundaryToken) return source.boundary();
    int id = inventory.id_of(tok);
    if (id < 0) throw UnknownActError(tok, reader.line_no());
    return id;
  };
  while (reader.next(line)) {
    if (line == "[weights]") { section = 0; continue; }
    if (line == "[unigrams]") { section = 1; continue; }
    if (line == "[bigrams]") { section = 2; continue; }
    if (line == "[trigrams]") { section = 3; continue; }
    if (line.front() == '[') throw ParseError(reader.line_no(), "unknown section " + line);
    if (section != 3) continue;  // lower orders are implied by the trigram rows

    auto tok = detail::split_ws(line);
    if (tok.size() != 4)
      throw ParseError(reader.line_no(), "expected 'CTX CTX ACT probability'");
    int c2 = symbol(tok[0]);
    int c1 = symbol(tok[1]);
    int act = inventory.id_of(tok[2]);
    if (act < 0) throw UnknownActError(tok[2], reader.line_no());
    double p;
    try {
      p = std::stod(tok[3]);
    } catch (const std::exception&) {
      throw ParseError(reader.line_no(), "bad probability '" + tok[3] + "'");
    }
    auto& probs = source.rows_[{c2, c1}];
    if (probs.empty()) probs.assign(static_cast<std::size_t>(inventory.size()), 0.0);
    probs[static_cast<std::size_t>(act)] += p;
  }
  if (source.rows_.empty()) throw ValidationError("source has no [trigrams] section");
  source.validate_rows();
  return source;
}

SyntheticSource SyntheticSource::load_file(const std::string& path,
                                           const ActInventory& inventory) {
  return load(detail::read_file(path), inventory);
}

SyntheticSource SyntheticSource::from_model(const NGramModel& model) {
  SyntheticSource source(model.inventory());
  const NGramTables& t = model.tables();
  int m = t.act_count();
  for (int c2 = 0; c2 <= m; ++c2) {
    for (int c1 = 0; c1 <= m; ++c1) {
      std::uint64_t total = t.trigram_context_total(c2, c1);
      if (total == 0) continue;
      std::vector<double> probs(static_cast<std::size_t>(m), 0.0);
      for (int a = 0; a < m; ++a)
        probs[static_cast<std::size_t>(a)] =
            static_cast<double>(t.trigram(c2, c1, a)) / static_cast<double>(total);
      source.rows_[{c2, c1}] = std::move(probs);
    }
  }
  if (source.rows_.empty()) throw ValidationError("model has no trigram counts");
  source.validate_rows();
  return source;
}

std::vector<double> SyntheticSource::conditional(const std::vector<std::string>& history) const {
  int b = boundary();
  std::size_t n = history.size();
  int c1 = n >= 1 ? inventory_.require(history[n - 1]) : b;
  int c2 = n >= 2 ? inventory_.require(history[n - 2]) : b;
  const std::vector<double>* r = row(c2, c1);
  return r == nullptr ? std::vector<double>{} : *r;
}

void SyntheticSource::check_terminal_reachable(const std::string& terminal_act) const {
  int terminal = inventory_.require(terminal_act);
  int b = boundary();
  std::set<std::pair<int, int>> visited;
  std::deque<std::pair<int, int>> queue{{b, b}};
  visited.insert({b, b});
  while (!queue.empty()) {
    auto [c2, c1] = queue.front();
    queue.pop_front();
    const std::vector<double>* r = row(c2, c1);
    if (r == nullptr)
      throw NonterminatingSourceError("source reaches undefined context (" +
                                      (c2 == b ? std::string(kBoundaryToken) : inventory_.name(c2)) +
                                      ", " +
                                      (c1 == b ? std::string(kBoundaryToken) : inventory_.name(c1)) +
                                      ")");
    for (int a = 0; a < inventory_.size(); ++a) {
      if ((*r)[static_cast<std::size_t>(a)] <= 0) continue;
      if (a == terminal) return;  // terminal emittable from a reachable context
      if (visited.insert({c1, a}).second) queue.push_back({c1, a});
    }
  }
  throw NonterminatingSourceError("terminal act " + terminal_act +
                                  " is unreachable from the boundary context");
}

Corpus SyntheticSource::generate(int count, std::uint64_t seed, const std::string& terminal_act,
                                 int max_len) const {
  int terminal = inventory_.require(terminal_act);
  check_terminal_reachable(terminal_act);

  std::mt19937_64 rng(seed);
  // Fixed 53-bit uniform; keeps output identical across standard libraries.
  auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  Corpus corpus;
  int b = boundary();
  for (int d = 0; d < count; ++d) {
    Dialogue dialogue;
    char id[16];
    std::snprintf(id, sizeof(id), "S%04d", d + 1);
    dialogue.id = id;

    int c2 = b, c1 = b;
    for (int pos = 1;; ++pos) {
      if (pos > max_len)
        throw NonterminatingSourceError("dialogue exceeded " + std::to_string(max_len) + " acts");
      const std::vector<double>* r = row(c2, c1);
      if (r == nullptr)
        throw NonterminatingSourceError("source reached undefined context while sampling");
      double u = uniform();
      double acc = 0.0;
      int chosen = -1;
      for (int a = 0; a < inventory_.size(); ++a) {
        acc += (*r)[static_cast<std::size_t>(a)];
        if (u < acc) {
          chosen = a;
          break;
        }
      }
      if (chosen < 0) {  // numeric tail: take the last act with mass
        for (int a = inventory_.size() - 1; a >= 0; --a) {
          if ((*r)[static_cast<std::size_t>(a)] > 0) {
            chosen = a;
            break;
          }
        }
      }
      Turn turn;
      turn.dialogue_id = dialogue.id;
      turn.turn_id = std::to_string(pos);
      turn.speaker = (pos % 2 == 1) ? "A" : "B";
      turn.act = inventory_.name(chosen);
      dialogue.turns.push_back(std::move(turn));
      if (chosen == terminal) break;
      c2 = c1;
      c1 = chosen;
    }
    corpus.dialogues.push_back(std::move(dialogue));
  }
  return corpus;
}

std::vector<double> SyntheticSource::bayes_top_k(const Corpus& sample,
                                                 const std::vector<int>& ks) const {
  int b = boundary();
  std::vector<std::size_t> hits(ks.size(), 0);
  std::size_t positions = 0;

  for (const Dialogue& d : sample.dialogues) {
    int c2 = b, c1 = b;
    for (const Turn& t : d.turns) {
      int act = inventory_.require(t.act);
      const std::vector<double>* r = row(c2, c1);
      if (r == nullptr)
        throw ValidationError("sample contains context unknown to the source (dialogue " + d.id +
                              ", turn " + t.turn_id + ")");
      // Rank of the true act: acts with higher probability, plus earlier
      // inventory positions among equals (the predictor's tie order).
      double p_true = (*r)[static_cast<std::size_t>(act)];
      int rank = 1;
      for (int a = 0; a < inventory_.size(); ++a) {
        if (a == act) continue;
        double p = (*r)[static_cast<std::size_t>(a)];
        if (p > p_true || (p == p_true && a < act)) ++rank;
      }
      ++positions;
      for (std::size_t i = 0; i < ks.size(); ++i)
        if (rank <= ks[i]) ++hits[i];
      c2 = c1;
      c1 = act;
    }
  }
  std::vector<double> out(ks.size(), 0.0);
  if (positions == 0) return out;
  for (std::size_t i = 0; i < ks.size(); ++i)
    out[i] = 100.0 * static_cast<double>(hits[i]) / static_cast<double>(positions);
  return out;
}

}  // namespace diatrack
