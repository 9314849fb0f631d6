#include "diatrack/corpus.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "diatrack/errors.hpp"
#include "text_util.hpp"

namespace diatrack {

namespace {

std::string escape_field(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '\\') out += "\\\\";
    else if (c == '\t') out += "\\t";
    else out += c;
  }
  return out;
}

std::string unescape_field(const std::string& s, int line) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (i + 1 >= s.size()) throw ParseError(line, "dangling escape at end of field");
    char c = s[++i];
    if (c == '\\') out += '\\';
    else if (c == 't') out += '\t';
    else throw ParseError(line, std::string("unknown escape \\") + c);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_theme(const std::string& field, int line) {
  std::vector<std::pair<std::string, std::string>> theme;
  if (field == "-" || field.empty()) return theme;
  for (const std::string& pair : detail::split(field, ';')) {
    auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ParseError(line, "theme pair is not key=value: " + pair);
    theme.emplace_back(pair.substr(0, eq), pair.substr(eq + 1));
  }
  return theme;
}

}  // namespace

const Dialogue* Corpus::find(const std::string& dialogue_id) const {
  for (const auto& d : dialogues) {
    if (d.id == dialogue_id) return &d;
  }
  return nullptr;
}

Corpus read_corpus(const std::string& document, const ActInventory& inventory) {
  Corpus corpus;
  Dialogue current;
  std::set<std::string> seen_turn_ids;
  std::set<std::string> finished_dialogues;

  auto flush = [&] {
    if (!current.turns.empty()) {
      if (!finished_dialogues.insert(current.id).second)
        throw ValidationError("dialogue " + current.id + " appears in two separate blocks");
      corpus.dialogues.push_back(std::move(current));
    }
    current = Dialogue{};
    seen_turn_ids.clear();
  };

  detail::LineReader reader(document);
  std::string raw;
  while (reader.next_raw(raw)) {
    std::string stripped = detail::trim(raw);
    if (stripped.empty()) {  // blank line separates dialogues
      flush();
      continue;
    }
    if (stripped[0] == '#') continue;

    auto fields = detail::split(raw, '\t');
    if (fields.size() != 6)
      throw ParseError(reader.line_no(),
                       "expected 6 tab-separated fields, got " + std::to_string(fields.size()));

    Turn turn;
    turn.dialogue_id = fields[0];
    turn.turn_id = fields[1];
    turn.speaker = fields[2];
    turn.act = fields[3];
    turn.theme = parse_theme(fields[4], reader.line_no());
    std::string utt = unescape_field(fields[5], reader.line_no());
    turn.utterance = (utt == "-") ? "" : utt;

    if (turn.dialogue_id.empty()) throw ParseError(reader.line_no(), "empty dialogue id");
    if (turn.turn_id.empty()) throw ParseError(reader.line_no(), "empty turn id");
    if (!inventory.contains(turn.act)) throw UnknownActError(turn.act, reader.line_no());

    if (!current.turns.empty() && current.id != turn.dialogue_id) flush();
    if (current.turns.empty()) current.id = turn.dialogue_id;
    if (!seen_turn_ids.insert(turn.turn_id).second)
      throw ParseError(reader.line_no(),
                       "duplicate turn id " + turn.turn_id + " in dialogue " + current.id);
    current.turns.push_back(std::move(turn));
  }
  flush();
  return corpus;
}

Corpus read_corpus_file(const std::string& path, const ActInventory& inventory) {
  return read_corpus(detail::read_file(path), inventory);
}

std::string write_corpus(const Corpus& corpus) {
  std::ostringstream out;
  out << "# corpus\n";
  for (std::size_t d = 0; d < corpus.dialogues.size(); ++d) {
    if (d) out << '\n';
    for (const Turn& t : corpus.dialogues[d].turns) {
      out << t.dialogue_id << '\t' << t.turn_id << '\t' << t.speaker << '\t' << t.act << '\t';
      if (t.theme.empty()) {
        out << '-';
      } else {
        for (std::size_t i = 0; i < t.theme.size(); ++i) {
          if (i) out << ';';
          out << t.theme[i].first << '=' << t.theme[i].second;
        }
      }
      out << '\t' << (t.utterance.empty() ? "-" : escape_field(t.utterance)) << '\n';
    }
  }
  return out.str();
}

std::vector<std::pair<std::string, std::vector<std::string>>> act_sequences(
    const Corpus& corpus, const std::vector<std::string>& skip_speakers) {
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  out.reserve(corpus.dialogues.size());
  for (const Dialogue& d : corpus.dialogues) {
    std::vector<std::string> acts;
    acts.reserve(d.turns.size());
    for (const Turn& t : d.turns) {
      if (std::find(skip_speakers.begin(), skip_speakers.end(), t.speaker) != skip_speakers.end())
        continue;
      acts.push_back(t.act);
    }
    out.emplace_back(d.id, std::move(acts));
  }
  return out;
}

}  // namespace diatrack
