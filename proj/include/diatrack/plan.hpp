#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "diatrack/corpus.hpp"
#include "diatrack/memory.hpp"
#include "diatrack/model.hpp"
#include "diatrack/ngram.hpp"
#include "diatrack/tracker.hpp"

namespace diatrack {

struct Constraint {
  std::string name;
  std::string arg;  // empty for zero-argument predicates
};

struct SequenceElement {
  std::string goal;
  bool iterated = false;  // iterated elements are optional-repeatable
};

/// A decomposition rule: a goal achieved either by one primitive speech
/// act or by an ordered sequence of subgoals (possibly iterated).
struct PlanOperator {
  std::string name;
  std::string goal;
  std::vector<Constraint> constraints;
  std::vector<std::string> actions;
  bool primitive = false;
  std::string act;                        // for primitive operators
  std::vector<SequenceElement> elements;  // for sequence operators
};

/// Parsed and linked operator definitions. Each goal is defined by
/// exactly one operator; the goal graph is acyclic except through
/// iterated elements.
class OperatorLibrary {
 public:
  /// Parses the operator listing syntax (begin-plan-operator ...
  /// end-plan-operator blocks).
  static OperatorLibrary parse(const std::string& text);
  static OperatorLibrary parse_file(const std::string& path);

  /// Resolves goal references, validates primitive acts against the
  /// inventory and precomputes first/expansion sets. Must be called once
  /// before use.
  void link(const ActInventory& inventory);

  bool defines(const std::string& goal) const;
  const PlanOperator& operator_for(const std::string& goal) const;
  const std::vector<PlanOperator>& operators() const { return ops_; }

  /// Acts that can start an expansion of `goal`.
  const std::set<std::string>& first_acts(const std::string& goal) const;
  /// Acts of the leftmost all-mandatory expansion of `goal` (what a
  /// repair has to fill in when the goal is skipped entirely).
  const std::vector<std::string>& mandatory_acts(const std::string& goal) const;
  /// All acts reachable anywhere under `goal`.
  const std::set<std::string>& reachable_acts(const std::string& goal) const;
  /// Whether `goal` can expand to the empty act sequence.
  bool nullable(const std::string& goal) const;

 private:
  void check_cycles() const;

  std::vector<PlanOperator> ops_;
  std::map<std::string, int> by_goal_;
  std::map<std::string, std::set<std::string>> first_;
  std::map<std::string, std::vector<std::string>> mandatory_;
  std::map<std::string, std::set<std::string>> reachable_;
  std::map<std::string, bool> nullable_;
  bool linked_ = false;
};

enum class NodeStatus { Open, Satisfied, Repaired };
enum class LeafOrigin { Turn, Virtual };
enum class DigressionTag { None, Repair, Anywhere, Clarification };

std::string to_string(NodeStatus status);

struct PlanNode {
  int id = -1;
  int parent = -1;
  std::string symbol;  // goal symbol, act name (leaves), or "digression"
  bool leaf = false;
  NodeStatus status = NodeStatus::Open;
  LeafOrigin origin = LeafOrigin::Turn;
  DigressionTag tag = DigressionTag::None;
  std::string turn_id;     // bound turn for non-virtual leaves
  int round = 0;           // negotiation round at attach time
  bool via_repair = false; // attached as part of a repair resolution
  int element_index = -1;  // which parent element this node instantiates
  std::size_t progress = 0;  // scan position into the operator's elements
  std::vector<int> children;
  std::vector<std::string> failed_constraints;
};

struct ScoredAlternative {
  std::string error_kind;
  std::string resolution;
  double score = 0.0;
};

struct RepairDecision {
  std::string error_kind;  // unexpected-act | missing-act | out-of-phase
  std::string resolution;  // attach-digression | insert-virtual | advance-phase
  std::vector<std::string> inserted;  // virtual acts, for insert-virtual
  std::vector<ScoredAlternative> alternatives;
};

struct PragmaticAnnotation {
  std::string act;
  std::string phase;  // enclosing root-level goal
  int round = 0;
  bool repaired = false;
};

/// Incremental top-down plan recognition over the act stream. Expansion
/// is act-guided and leftmost: the planner descends from the current open
/// frontier, expanding operators until the primitive matching the act is
/// reached. Acts the grammar cannot take are classified and repaired, so
/// any input stream yields a well-formed tree.
class Planner {
 public:
  Planner(const OperatorLibrary& library, const ActInventory& inventory,
          std::string root_goal = "SCHEDULE-MEETING");

  /// Processes one turn. `event` is the tracker's verdict for the same
  /// act: inconsistency/fallback routes straight to repair, anywhere and
  /// clarification events attach as tagged digressions.
  void advance(const Turn& turn, TrackerEventKind event, DialogueMemory& memory,
               const NGramModel* predictor = nullptr);

  /// Closes every completable open node (end of dialogue).
  void finalize();

  PragmaticAnnotation annotate(const std::string& turn_id) const;

  /// Indented tree dump, one node per line with status and turn binding.
  std::string dump() const;

  const std::vector<RepairDecision>& repairs() const { return repairs_; }
  const std::vector<PlanNode>& nodes() const { return nodes_; }
  const PlanNode& root() const { return nodes_[0]; }

  // Test/inspection helpers.
  std::vector<std::string> leaf_acts(bool include_repaired = true) const;
  std::vector<std::string> turn_bound_leaf_acts() const;
  std::size_t repaired_node_count() const;
  std::size_t digression_count() const;
  bool fully_satisfied() const;
  /// Root-level goal symbols in order (the phase structure).
  std::vector<std::string> phase_symbols() const;
  /// Leaf acts under the given root-level child index.
  std::vector<std::string> phase_leaf_acts(int root_child_index) const;

 private:
  int new_node(std::string symbol, int parent, int element_index, bool leaf);
  PlanNode& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const PlanNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  int open_child_at(const PlanNode& parent, int element_index) const;
  bool has_settled_child_at(const PlanNode& parent, int element_index) const;

  bool attach(int node_id, const Turn& turn, DialogueMemory& memory);
  void attach_leaf(int primitive_node_id, const Turn& turn, DialogueMemory& memory);
  bool completable(int node_id) const;
  void close(int node_id);

  /// Forward scan that may skip blocked mandatory goals. In probe mode
  /// only collects the acts that would have to be skipped; in apply mode
  /// materializes the skips (virtual leaves or repaired markers) and
  /// attaches the act.
  bool skip_scan(int node_id, const Turn& turn, bool apply, bool insert_virtual,
                 std::vector<std::string>& skipped, DialogueMemory* memory);
  /// Whether a fresh expansion of `goal` could take the act after
  /// skipping mandatory content; pure, accumulates the skips.
  bool scan_fresh(const std::string& goal, const std::string& act,
                  std::vector<std::string>& skipped) const;
  void materialize_skipped(int parent_id, int element_index, const std::string& goal,
                           bool insert_virtual);

  void repair(const Turn& turn, DialogueMemory& memory, const NGramModel* predictor);
  void attach_digression(const Turn& turn, DigressionTag tag, NodeStatus status, int round);
  int current_phase_node() const;

  void eval_constraints(int node_id, const PlanOperator& op, const DialogueMemory& memory);
  void run_actions(const PlanOperator& op, const Turn& turn, DialogueMemory& memory);

  void dump_node(int node_id, int depth, std::string& out) const;

  const OperatorLibrary* library_;
  const ActInventory* inventory_;
  std::vector<PlanNode> nodes_;
  std::vector<std::string> history_;
  std::vector<RepairDecision> repairs_;
  std::map<std::string, int> leaf_by_turn_;
  const DialogueMemory* memory_view_ = nullptr;  // set during advance for constraints
};

}  // namespace diatrack
