#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace diatrack {

enum class ActClass { Phase, Anywhere, ClarificationOpen, ClarificationClose };

std::string to_string(ActClass cls);

struct ActInfo {
  std::string name;
  ActClass cls = ActClass::Phase;
  std::string closes_with;  // counterpart act for clarification-opening acts
};

/// The closed set of speech-act labels the engine operates on.
/// File order is the canonical inventory order used for tie-breaking.
class ActInventory {
 public:
  void add(ActInfo info);
  void set_keywords(const std::string& act, std::vector<std::string> words);

  bool contains(const std::string& label) const;
  int id_of(const std::string& label) const;          // -1 when absent
  int require(const std::string& label) const;        // throws UnknownActError
  int size() const { return static_cast<int>(acts_.size()); }
  const ActInfo& act(int id) const { return acts_[static_cast<std::size_t>(id)]; }
  const std::string& name(int id) const { return acts_[static_cast<std::size_t>(id)].name; }
  const std::vector<ActInfo>& acts() const { return acts_; }

  ActClass class_of(const std::string& label) const;
  const std::vector<std::string>& keywords_for(const std::string& label) const;

 private:
  std::vector<ActInfo> acts_;
  std::unordered_map<std::string, int> index_;
  std::unordered_map<std::string, std::vector<std::string>> keywords_;
  static const std::vector<std::string> kNoKeywords;
};

struct Transition {
  std::string from;
  std::string act;
  std::string to;
};

/// Deterministic machine over speech acts describing admissible sequences.
class DialogueMachine {
 public:
  const std::string& initial() const { return initial_; }
  const std::vector<std::string>& finals() const { return finals_; }
  const std::vector<std::string>& states() const { return states_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<std::string>& anywhere() const { return anywhere_; }

  bool is_final(const std::string& state) const;
  bool is_anywhere(const std::string& act) const;
  /// Successor of (state, act), or nullopt when no transition exists.
  std::optional<std::string> successor(const std::string& state, const std::string& act) const;
  /// States with an incoming transition labeled `act`, in definition order.
  std::vector<std::string> states_with_incoming(const std::string& act) const;
  /// Labels of outgoing transitions of `state`, deduplicated, definition order.
  std::vector<std::string> outgoing_labels(const std::string& state) const;
  /// Position of `state` in definition order (tie-breaking).
  int state_order(const std::string& state) const;

 private:
  friend class MachineBuilder;
  std::vector<std::string> states_;  // definition order
  std::unordered_map<std::string, int> state_index_;
  std::string initial_;
  std::vector<std::string> finals_;
  std::vector<Transition> transitions_;
  std::unordered_map<std::string, std::unordered_map<std::string, std::string>> edges_;
  std::vector<std::string> anywhere_;
};

struct DialogueModel {
  ActInventory inventory;
  DialogueMachine machine;
};

/// Parses and validates a model definition document.
/// Sections, in fixed order: [acts], [machine], [anywhere], [keywords].
DialogueModel load_model(const std::string& definition_text);
DialogueModel load_model_file(const std::string& path);

/// Canonical serialization; load_model(write_model(m)) is structurally m.
std::string write_model(const DialogueModel& model);

/// True iff `label` is a member of the inventory.
bool validate_act(const ActInventory& inventory, const std::string& label);

}  // namespace diatrack
