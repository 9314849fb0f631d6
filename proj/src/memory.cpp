#include "diatrack/memory.hpp"

#include <sstream>

namespace diatrack {

namespace {

const char* kDateKeys[] = {"month", "week", "day", "day_from", "day_to", "date", "time", "hour"};
const char* kPlaceKeys[] = {"place", "location", "city", "room"};

bool is_date_key(const std::string& k) {
  for (const char* d : kDateKeys)
    if (k == d) return true;
  return false;
}

bool is_place_key(const std::string& k) {
  for (const char* p : kPlaceKeys)
    if (k == p) return true;
  return false;
}

/// Strict slot-superset: every slot of `older` appears unchanged in
/// `newer`, and `newer` adds at least one slot.
bool narrows(const std::map<std::string, std::string>& newer,
             const std::map<std::string, std::string>& older) {
  if (newer.size() <= older.size()) return false;
  for (const auto& [k, v] : older) {
    auto it = newer.find(k);
    if (it == newer.end() || it->second != v) return false;
  }
  return true;
}

}  // namespace

std::string to_string(ThemeStatus status) {
  switch (status) {
    case ThemeStatus::Proposed: return "proposed";
    case ThemeStatus::Rejected: return "rejected";
    case ThemeStatus::Accepted: return "accepted";
    case ThemeStatus::Confirmed: return "confirmed";
    case ThemeStatus::Refined: return "refined";
  }
  return "?";
}

int DialogueMemory::find_latest_open() const {
  // Only the current round is negotiable: proposals left open when a
  // round closed are dead, never resolved retroactively.
  for (int i = static_cast<int>(records_.size()) - 1; i >= 0; --i) {
    const ThematicRecord& r = records_[static_cast<std::size_t>(i)];
    if (r.open() && r.round == round_) return i;
  }
  return -1;
}

void DialogueMemory::retrieve_theme(const Turn& turn) {
  // A round that already holds an accepted record is done negotiating;
  // a fresh proposal opens the next round.
  if (round_has_accepted_) {
    ++round_;
    round_has_accepted_ = false;
  }

  ThematicRecord rec;
  rec.round = round_;
  rec.proposed_in = turn.turn_id;
  for (const auto& [k, v] : turn.theme) rec.slots[k] = v;
  if (turn.theme.empty())
    warnings_.push_back("turn " + turn.turn_id + " carries no theme pairs");

  int prev = find_latest_open();
  if (prev >= 0) {
    const ThematicRecord& p = records_[static_cast<std::size_t>(prev)];
    if (p.round == round_ && narrows(rec.slots, p.slots)) {
      rec.status = ThemeStatus::Refined;
      rec.parent = prev;
    }
  }
  records_.push_back(std::move(rec));
}

void DialogueMemory::resolve_theme(const std::string& act, const std::string& turn_id) {
  if (act == "AKZEPTANZ" || act == "ABLEHNUNG") {
    // A round that already holds an accepted record is settled; earlier
    // open proposals are no longer up for resolution (keeps the round's
    // single-acceptance invariant).
    int idx = round_has_accepted_ ? -1 : find_latest_open();
    if (idx < 0) {
      warnings_.push_back("turn " + turn_id + ": " + act + " with no open proposal");
      return;
    }
    ThematicRecord& rec = records_[static_cast<std::size_t>(idx)];
    rec.resolved_in = turn_id;
    if (act == "AKZEPTANZ") {
      rec.status = ThemeStatus::Accepted;
      round_has_accepted_ = true;
    } else {
      rec.status = ThemeStatus::Rejected;
      ++round_;  // the rejected item is off the table
    }
    return;
  }
  if (act == "BESTAETIGUNG") {
    for (int i = static_cast<int>(records_.size()) - 1; i >= 0; --i) {
      ThematicRecord& rec = records_[static_cast<std::size_t>(i)];
      if (rec.status == ThemeStatus::Accepted) {
        rec.status = ThemeStatus::Confirmed;
        rec.resolved_in = turn_id;
        ++round_;
        round_has_accepted_ = false;
        return;
      }
    }
    warnings_.push_back("turn " + turn_id + ": BESTAETIGUNG with nothing accepted");
    return;
  }
  warnings_.push_back("turn " + turn_id + ": " + act + " does not resolve themes");
}

void DialogueMemory::record_realization(const std::string& turn_id, const std::string& object_key,
                                        const std::string& surface) {
  referential_[object_key].emplace_back(turn_id, surface);
}

std::optional<ThematicRecord> DialogueMemory::latest_accepted() const {
  for (int i = static_cast<int>(records_.size()) - 1; i >= 0; --i) {
    const ThematicRecord& rec = records_[static_cast<std::size_t>(i)];
    if (rec.status == ThemeStatus::Accepted || rec.status == ThemeStatus::Confirmed) return rec;
  }
  return std::nullopt;
}

std::vector<ThematicRecord> DialogueMemory::open_proposals() const {
  std::vector<ThematicRecord> out;
  for (const ThematicRecord& rec : records_)
    if (rec.open()) out.push_back(rec);
  return out;
}

std::string DialogueMemory::last_topic_kind() const {
  if (records_.empty()) return "none";
  const ThematicRecord& rec = records_.back();
  bool date = false, place = false;
  for (const auto& [k, v] : rec.slots) {
    date = date || is_date_key(k);
    place = place || is_place_key(k);
  }
  if (date) return "time";
  if (place) return "place";
  return "none";
}

std::vector<std::pair<std::string, std::string>> DialogueMemory::realizations(
    const std::string& key) const {
  auto it = referential_.find(key);
  if (it == referential_.end()) return {};
  return it->second;
}

std::string DialogueMemory::dump_thematic() const {
  std::ostringstream out;
  out << "[thematic]\n";
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const ThematicRecord& r = records_[i];
    out << i << '\t' << "round=" << r.round << '\t' << to_string(r.status) << '\t';
    if (r.slots.empty()) {
      out << '-';
    } else {
      bool first = true;
      for (const auto& [k, v] : r.slots) {
        if (!first) out << ';';
        out << k << '=' << v;
        first = false;
      }
    }
    out << '\t' << "proposed_in=" << r.proposed_in << '\t'
        << "resolved_in=" << (r.resolved_in.empty() ? "-" : r.resolved_in) << '\t' << "parent=";
    if (r.parent < 0) out << '-';
    else out << r.parent;
    out << '\n';
  }
  return out.str();
}

std::string DialogueMemory::dump_referential() const {
  std::ostringstream out;
  out << "[referential]\n";
  for (const auto& [key, entries] : referential_) {
    out << key << ':';
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (i) out << ';';
      out << ' ' << entries[i].first << " \"" << entries[i].second << '"';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace diatrack
