#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diatrack/corpus.hpp"

namespace diatrack {

enum class ThemeStatus { Proposed, Rejected, Accepted, Confirmed, Refined };

std::string to_string(ThemeStatus status);

/// One negotiated item (a date/place proposal) and its fate.
struct ThematicRecord {
  int round = 0;
  std::map<std::string, std::string> slots;  // sorted keys for stable dumps
  ThemeStatus status = ThemeStatus::Proposed;
  std::string proposed_in;
  std::string resolved_in;  // empty while open
  int parent = -1;          // index of the record this one narrows

  bool open() const { return status == ThemeStatus::Proposed || status == ThemeStatus::Refined; }
};

/// The incrementally built discourse record. The intentional layer (the
/// plan tree) is owned by the planner; this class holds the thematic and
/// referential layers plus the negotiation-round counter shared with the
/// planner's annotations. Append-only: statuses move monotonically along
/// proposed/refined -> rejected|accepted -> confirmed.
class DialogueMemory {
 public:
  /// Files the turn's theme as a new record with status proposed, or
  /// refined (with a parent link) when it narrows the currently open
  /// record of the same round by strict slot-superset. Records a warning
  /// when the turn carries no theme pairs.
  void retrieve_theme(const Turn& turn);

  /// AKZEPTANZ accepts and ABLEHNUNG rejects the most recent open record;
  /// BESTAETIGUNG confirms the most recent accepted one. Resolving
  /// nothing records a warning and changes no record.
  void resolve_theme(const std::string& act, const std::string& turn_id);

  void record_realization(const std::string& turn_id, const std::string& object_key,
                          const std::string& surface);

  // Queries.
  std::optional<ThematicRecord> latest_accepted() const;  // accepted or confirmed
  std::vector<ThematicRecord> open_proposals() const;
  /// "time" | "place" | "none", from the most recent record's slot keys.
  std::string last_topic_kind() const;
  std::vector<std::pair<std::string, std::string>> realizations(const std::string& key) const;

  const std::vector<ThematicRecord>& thematic() const { return records_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  int current_round() const { return round_; }

  /// Dump of the thematic and referential sections; the session prepends
  /// the intentional section rendered from the plan tree.
  std::string dump_thematic() const;
  std::string dump_referential() const;

 private:
  int find_latest_open() const;

  std::vector<ThematicRecord> records_;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> referential_;
  std::vector<std::string> warnings_;
  int round_ = 0;
  bool round_has_accepted_ = false;
};

}  // namespace diatrack
