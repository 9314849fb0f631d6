#include "diatrack/plan.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>

#include "diatrack/errors.hpp"
#include "text_util.hpp"

namespace diatrack {

namespace {

constexpr int kDigressionElement = -2;
constexpr std::size_t kInsertVirtualThreshold = 2;  // skipped primitives beyond this advance the phase

struct Token {
  std::string text;
  int line;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  int line = 1;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back({cur, line});
      cur.clear();
    }
  };
  bool comment = false;
  for (char c : text) {
    if (c == '\n') {
      flush();
      ++line;
      comment = false;
      continue;
    }
    if (comment) continue;
    if (c == '#') {
      flush();
      comment = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
      continue;
    }
    if (c == '(' || c == ')') {
      flush();
      tokens.push_back({std::string(1, c), line});
      continue;
    }
    cur += c;
  }
  flush();
  return tokens;
}

bool is_goal_ref(const std::string& tok) {
  return tok.size() >= 3 && tok.front() == '[' && tok.back() == ']';
}

std::string strip_brackets(const std::string& tok) { return tok.substr(1, tok.size() - 2); }

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}
  bool done() const { return pos_ >= tokens_.size(); }
  const Token& peek() const {
    if (done()) throw ParseError(last_line(), "unexpected end of operator definitions");
    return tokens_[pos_];
  }
  Token take() {
    Token t = peek();
    ++pos_;
    return t;
  }
  void expect(const std::string& text) {
    Token t = take();
    if (t.text != text)
      throw ParseError(t.line, "expected '" + text + "', got '" + t.text + "'");
  }
  int last_line() const { return tokens_.empty() ? 1 : tokens_.back().line; }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::string parse_goal_token(TokenStream& ts) {
  Token t = ts.take();
  if (!is_goal_ref(t.text)) throw ParseError(t.line, "expected [GOAL], got '" + t.text + "'");
  return strip_brackets(t.text);
}

std::vector<Constraint> parse_constraints(TokenStream& ts) {
  std::vector<Constraint> out;
  Token t = ts.take();
  if (t.text == "nil") return out;
  if (t.text != "(") throw ParseError(t.line, "constraints must be nil or (...)");
  // Either a single (pred arg) or a list ((pred arg) (pred) ...).
  if (ts.peek().text == "(") {
    while (ts.peek().text != ")") {
      ts.expect("(");
      Constraint c;
      c.name = ts.take().text;
      if (ts.peek().text != ")") c.arg = ts.take().text;
      ts.expect(")");
      out.push_back(std::move(c));
    }
    ts.expect(")");
    return out;
  }
  Constraint c;
  c.name = ts.take().text;
  if (ts.peek().text != ")") c.arg = ts.take().text;
  ts.expect(")");
  out.push_back(std::move(c));
  return out;
}

std::vector<std::string> parse_actions(TokenStream& ts) {
  std::vector<std::string> out;
  Token t = ts.take();
  if (t.text == "nil") return out;
  if (t.text != "(") throw ParseError(t.line, "actions must be nil or (...)");
  while (ts.peek().text != ")") out.push_back(ts.take().text);
  ts.expect(")");
  return out;
}

void parse_subgoals(TokenStream& ts, PlanOperator& op) {
  Token t = ts.take();
  if (t.text == "primitive") {
    op.primitive = true;
    // The act may be stated explicitly; otherwise the goal symbol names it.
    if (!ts.done() && ts.peek().text != "end-plan-operator" && ts.peek().text != "goal" &&
        ts.peek().text != "constraints" && ts.peek().text != "actions") {
      op.act = ts.take().text;
    } else {
      op.act = op.goal;
    }
    return;
  }
  if (t.text == "iterate") {
    op.elements.push_back({parse_goal_token(ts), true});
    return;
  }
  if (t.text != "(") throw ParseError(t.line, "subgoals must be primitive, iterate [G] or (...)");
  if (ts.peek().text == "sequence") ts.take();
  while (ts.peek().text != ")") {
    Token item = ts.take();
    if (item.text == "iterate") {
      op.elements.push_back({parse_goal_token(ts), true});
    } else if (is_goal_ref(item.text)) {
      op.elements.push_back({strip_brackets(item.text), false});
    } else {
      throw ParseError(item.line, "expected [GOAL] or iterate [GOAL], got '" + item.text + "'");
    }
  }
  ts.expect(")");
  if (op.elements.empty()) throw ParseError(t.line, "empty subgoal sequence");
}

}  // namespace

OperatorLibrary OperatorLibrary::parse(const std::string& text) {
  OperatorLibrary lib;
  TokenStream ts(tokenize(text));
  while (!ts.done()) {
    Token t = ts.take();
    if (t.text != "begin-plan-operator")
      throw ParseError(t.line, "expected begin-plan-operator, got '" + t.text + "'");
    PlanOperator op;
    op.name = ts.take().text;
    bool have_goal = false, have_subgoals = false;
    while (true) {
      Token field = ts.take();
      if (field.text == "end-plan-operator") break;
      if (field.text == "goal") {
        op.goal = parse_goal_token(ts);
        have_goal = true;
      } else if (field.text == "constraints") {
        op.constraints = parse_constraints(ts);
      } else if (field.text == "actions") {
        op.actions = parse_actions(ts);
      } else if (field.text == "subgoals") {
        if (!have_goal) throw ParseError(field.line, "subgoals before goal in " + op.name);
        parse_subgoals(ts, op);
        have_subgoals = true;
      } else {
        throw ParseError(field.line, "unknown field '" + field.text + "' in " + op.name);
      }
    }
    if (!have_goal) throw ParseError(t.line, "operator " + op.name + " has no goal");
    if (!have_subgoals) throw ParseError(t.line, "operator " + op.name + " has no subgoals");
    if (lib.by_goal_.count(op.goal))
      throw ValidationError("duplicate goal [" + op.goal + "] (operator " + op.name + ")");
    lib.by_goal_.emplace(op.goal, static_cast<int>(lib.ops_.size()));
    lib.ops_.push_back(std::move(op));
  }
  if (lib.ops_.empty()) throw ValidationError("operator library is empty");
  return lib;
}

OperatorLibrary OperatorLibrary::parse_file(const std::string& path) {
  return parse(detail::read_file(path));
}

bool OperatorLibrary::defines(const std::string& goal) const { return by_goal_.count(goal) != 0; }

const PlanOperator& OperatorLibrary::operator_for(const std::string& goal) const {
  auto it = by_goal_.find(goal);
  if (it == by_goal_.end()) throw ValidationError("undefined goal [" + goal + "]");
  return ops_[static_cast<std::size_t>(it->second)];
}

void OperatorLibrary::check_cycles() const {
  // Cycles are only admissible through iterated elements.
  enum class Mark { White, Gray, Black };
  std::map<std::string, Mark> marks;
  std::vector<std::pair<std::string, std::size_t>> stack;
  for (const PlanOperator& op : ops_) {
    if (marks[op.goal] != Mark::White) continue;
    stack.emplace_back(op.goal, 0);
    marks[op.goal] = Mark::Gray;
    while (!stack.empty()) {
      auto& [goal, idx] = stack.back();
      const PlanOperator& cur = operator_for(goal);
      if (cur.primitive || idx >= cur.elements.size()) {
        marks[goal] = Mark::Black;
        stack.pop_back();
        continue;
      }
      const SequenceElement& el = cur.elements[idx++];
      if (el.iterated) continue;
      Mark m = marks[el.goal];
      if (m == Mark::Gray)
        throw ValidationError("cyclic goal [" + el.goal + "] (cycle not through iterate)");
      if (m == Mark::White) {
        marks[el.goal] = Mark::Gray;
        stack.emplace_back(el.goal, 0);
      }
    }
  }
}

void OperatorLibrary::link(const ActInventory& inventory) {
  // Resolve references and primitive acts.
  for (PlanOperator& op : ops_) {
    if (op.primitive) {
      if (!inventory.contains(op.act))
        throw ValidationError("primitive operator " + op.name + " names unknown act " + op.act);
      continue;
    }
    for (const SequenceElement& el : op.elements) {
      if (!defines(el.goal))
        throw ValidationError("undefined goal [" + el.goal + "] referenced by " + op.name);
    }
  }
  check_cycles();

  // nullable: a goal whose expansion can be empty.
  std::map<std::string, bool> nullable;
  for (const PlanOperator& op : ops_) nullable[op.goal] = !op.primitive;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const PlanOperator& op : ops_) {
      if (op.primitive) continue;
      bool n = true;
      for (const SequenceElement& el : op.elements)
        if (!el.iterated && !nullable[el.goal]) n = false;
      if (nullable[op.goal] != n) {
        nullable[op.goal] = n;
        changed = true;
      }
    }
  }
  nullable_ = nullable;

  // first acts, to fixpoint (cycles through iterate converge).
  for (const PlanOperator& op : ops_) first_[op.goal] = {};
  changed = true;
  while (changed) {
    changed = false;
    for (const PlanOperator& op : ops_) {
      std::set<std::string>& f = first_[op.goal];
      std::size_t before = f.size();
      if (op.primitive) {
        f.insert(op.act);
      } else {
        for (const SequenceElement& el : op.elements) {
          const std::set<std::string>& sub = first_[el.goal];
          f.insert(sub.begin(), sub.end());
          if (!el.iterated && !nullable[el.goal]) break;
        }
      }
      changed = changed || f.size() != before;
    }
  }

  // reachable acts, to fixpoint.
  for (const PlanOperator& op : ops_) reachable_[op.goal] = {};
  changed = true;
  while (changed) {
    changed = false;
    for (const PlanOperator& op : ops_) {
      std::set<std::string>& r = reachable_[op.goal];
      std::size_t before = r.size();
      if (op.primitive) {
        r.insert(op.act);
      } else {
        for (const SequenceElement& el : op.elements) {
          const std::set<std::string>& sub = reachable_[el.goal];
          r.insert(sub.begin(), sub.end());
        }
      }
      changed = changed || r.size() != before;
    }
  }

  // leftmost all-mandatory expansion (acyclic over mandatory edges).
  for (const PlanOperator& op : ops_) mandatory_.emplace(op.goal, std::vector<std::string>{});
  std::function<const std::vector<std::string>&(const std::string&)> expand =
      [&](const std::string& goal) -> const std::vector<std::string>& {
    std::vector<std::string>& m = mandatory_[goal];
    if (!m.empty()) return m;
    const PlanOperator& op = operator_for(goal);
    if (op.primitive) {
      m.push_back(op.act);
    } else {
      for (const SequenceElement& el : op.elements) {
        if (el.iterated) continue;
        const std::vector<std::string>& sub = expand(el.goal);
        m.insert(m.end(), sub.begin(), sub.end());
      }
    }
    return m;
  };
  for (const PlanOperator& op : ops_) expand(op.goal);

  linked_ = true;
}

const std::set<std::string>& OperatorLibrary::first_acts(const std::string& goal) const {
  auto it = first_.find(goal);
  if (it == first_.end()) throw ValidationError("undefined goal [" + goal + "]");
  return it->second;
}

const std::vector<std::string>& OperatorLibrary::mandatory_acts(const std::string& goal) const {
  auto it = mandatory_.find(goal);
  if (it == mandatory_.end()) throw ValidationError("undefined goal [" + goal + "]");
  return it->second;
}

const std::set<std::string>& OperatorLibrary::reachable_acts(const std::string& goal) const {
  auto it = reachable_.find(goal);
  if (it == reachable_.end()) throw ValidationError("undefined goal [" + goal + "]");
  return it->second;
}

bool OperatorLibrary::nullable(const std::string& goal) const {
  auto it = nullable_.find(goal);
  return it != nullable_.end() && it->second;
}

std::string to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::Open: return "open";
    case NodeStatus::Satisfied: return "satisfied";
    case NodeStatus::Repaired: return "repaired";
  }
  return "?";
}

Planner::Planner(const OperatorLibrary& library, const ActInventory& inventory,
                 std::string root_goal)
    : library_(&library), inventory_(&inventory) {
  library.operator_for(root_goal);  // must be defined
  new_node(std::move(root_goal), -1, -1, false);
}

int Planner::new_node(std::string symbol, int parent, int element_index, bool leaf) {
  PlanNode n;
  n.id = static_cast<int>(nodes_.size());
  n.parent = parent;
  n.symbol = std::move(symbol);
  n.leaf = leaf;
  n.element_index = element_index;
  nodes_.push_back(std::move(n));
  if (parent >= 0) node(parent).children.push_back(nodes_.back().id);
  return nodes_.back().id;
}

int Planner::open_child_at(const PlanNode& parent, int element_index) const {
  for (auto it = parent.children.rbegin(); it != parent.children.rend(); ++it) {
    const PlanNode& c = node(*it);
    if (c.element_index == element_index && c.status == NodeStatus::Open) return c.id;
  }
  return -1;
}

bool Planner::has_settled_child_at(const PlanNode& parent, int element_index) const {
  for (int id : parent.children) {
    const PlanNode& c = node(id);
    if (c.element_index == element_index && c.status != NodeStatus::Open) return true;
  }
  return false;
}

void Planner::eval_constraints(int node_id, const PlanOperator& op,
                               const DialogueMemory& memory) {
  for (const Constraint& c : op.constraints) {
    bool pass;
    if (c.name == "seen") {
      pass = std::find(history_.begin(), history_.end(), c.arg) != history_.end();
    } else if (c.name == "not-seen") {
      pass = std::find(history_.begin(), history_.end(), c.arg) == history_.end();
    } else if (c.name == "theme-open") {
      pass = !memory.open_proposals().empty();
    } else if (c.name == "no-theme-open") {
      pass = memory.open_proposals().empty();
    } else {
      // Unknown predicates never block; they are recorded as unevaluated.
      node(node_id).failed_constraints.push_back("unevaluated:" + c.name);
      continue;
    }
    if (!pass)
      node(node_id).failed_constraints.push_back(c.name + (c.arg.empty() ? "" : " " + c.arg));
  }
}

void Planner::run_actions(const PlanOperator& op, const Turn& turn, DialogueMemory& memory) {
  for (const std::string& action : op.actions) {
    if (action == "retrieve-theme") memory.retrieve_theme(turn);
    // Other action names are accepted but have no built-in semantics.
  }
}

void Planner::attach_leaf(int primitive_node_id, const Turn& turn, DialogueMemory& memory) {
  const PlanOperator& op = library_->operator_for(node(primitive_node_id).symbol);
  int leaf = new_node(turn.act, primitive_node_id, 0, true);
  node(leaf).turn_id = turn.turn_id;
  node(leaf).round = memory.current_round();
  node(leaf).status = NodeStatus::Satisfied;
  node(primitive_node_id).status = NodeStatus::Satisfied;
  leaf_by_turn_[turn.turn_id] = leaf;
  eval_constraints(primitive_node_id, op, memory);
  run_actions(op, turn, memory);
}

bool Planner::attach(int node_id, const Turn& turn, DialogueMemory& memory) {
  const PlanOperator& op = library_->operator_for(node(node_id).symbol);
  if (op.primitive) {
    if (!node(node_id).children.empty()) return false;
    if (turn.act != op.act) return false;
    attach_leaf(node_id, turn, memory);
    return true;
  }
  std::size_t ei = node(node_id).progress;
  while (ei < op.elements.size()) {
    const SequenceElement& el = op.elements[ei];
    int oc = open_child_at(node(node_id), static_cast<int>(ei));
    if (oc >= 0) {
      if (attach(oc, turn, memory)) {
        node(node_id).progress = ei;
        return true;
      }
      if (!completable(oc)) return false;
      close(oc);
    }
    bool in_first = library_->first_acts(el.goal).count(turn.act) != 0;
    if (el.iterated) {
      // Spawn a fresh expansion unless the act also starts the following
      // sibling (then the iterate closes instead).
      bool next_claims = ei + 1 < op.elements.size() &&
                         library_->first_acts(op.elements[ei + 1].goal).count(turn.act) != 0;
      if (in_first && !next_claims) {
        int child = new_node(el.goal, node_id, static_cast<int>(ei), false);
        bool ok = attach(child, turn, memory);
        assert(ok);
        (void)ok;
        node(node_id).progress = ei;
        return true;
      }
    } else {
      if (!has_settled_child_at(node(node_id), static_cast<int>(ei))) {
        if (in_first) {
          int child = new_node(el.goal, node_id, static_cast<int>(ei), false);
          bool ok = attach(child, turn, memory);
          assert(ok);
          (void)ok;
          node(node_id).progress = ei;
          return true;
        }
        if (!library_->nullable(el.goal)) return false;  // blocked mandatory goal
      }
    }
    ++ei;
  }
  return false;  // exhausted: the caller may close this node
}

bool Planner::completable(int node_id) const {
  const PlanNode& n = node(node_id);
  if (n.leaf) return n.status != NodeStatus::Open;
  const PlanOperator& op = library_->operator_for(n.symbol);
  if (op.primitive) return !n.children.empty() || n.status != NodeStatus::Open;
  for (int cid : n.children) {
    const PlanNode& c = node(cid);
    if (c.status == NodeStatus::Open && !completable(cid)) return false;
  }
  for (std::size_t ei = 0; ei < op.elements.size(); ++ei) {
    const SequenceElement& el = op.elements[ei];
    if (el.iterated || library_->nullable(el.goal)) continue;
    bool covered = has_settled_child_at(n, static_cast<int>(ei));
    if (!covered) {
      int oc = open_child_at(n, static_cast<int>(ei));
      covered = oc >= 0;  // open children were checked completable above
    }
    if (!covered) return false;
  }
  return true;
}

void Planner::close(int node_id) {
  PlanNode& n = node(node_id);
  for (int cid : n.children)
    if (node(cid).status == NodeStatus::Open) close(cid);
  if (n.status == NodeStatus::Open) n.status = NodeStatus::Satisfied;
}

void Planner::materialize_skipped(int parent_id, int element_index, const std::string& goal,
                                  bool insert_virtual) {
  const PlanOperator& op = library_->operator_for(goal);
  int id = new_node(goal, parent_id, element_index, false);
  if (!insert_virtual) {
    // advance-phase: mark the gap without inventing content.
    node(id).status = NodeStatus::Repaired;
    return;
  }
  if (op.primitive) {
    int leaf = new_node(op.act, id, 0, true);
    node(leaf).origin = LeafOrigin::Virtual;
    node(leaf).status = NodeStatus::Repaired;
    node(leaf).via_repair = true;
    node(id).status = NodeStatus::Repaired;
    return;
  }
  for (std::size_t ei = 0; ei < op.elements.size(); ++ei) {
    const SequenceElement& el = op.elements[ei];
    if (el.iterated || library_->nullable(el.goal)) continue;
    materialize_skipped(id, static_cast<int>(ei), el.goal, true);
  }
  node(id).status = NodeStatus::Repaired;
}

bool Planner::scan_fresh(const std::string& goal, const std::string& act,
                         std::vector<std::string>& skipped) const {
  const PlanOperator& op = library_->operator_for(goal);
  if (op.primitive) return act == op.act;
  for (std::size_t ei = 0; ei < op.elements.size(); ++ei) {
    const SequenceElement& el = op.elements[ei];
    bool in_first = library_->first_acts(el.goal).count(act) != 0;
    bool next_claims = ei + 1 < op.elements.size() &&
                       library_->first_acts(op.elements[ei + 1].goal).count(act) != 0;
    if (el.iterated) {
      if (in_first && !next_claims) return true;
      if (!in_first && library_->reachable_acts(el.goal).count(act)) {
        std::size_t mark = skipped.size();
        if (scan_fresh(el.goal, act, skipped)) return true;
        skipped.resize(mark);
      }
      continue;
    }
    if (in_first) return true;
    if (library_->reachable_acts(el.goal).count(act)) {
      std::size_t mark = skipped.size();
      if (scan_fresh(el.goal, act, skipped)) return true;
      skipped.resize(mark);
    }
    if (!library_->nullable(el.goal)) {
      const std::vector<std::string>& acts = library_->mandatory_acts(el.goal);
      skipped.insert(skipped.end(), acts.begin(), acts.end());
    }
  }
  return false;
}

bool Planner::skip_scan(int node_id, const Turn& turn, bool apply, bool insert_virtual,
                        std::vector<std::string>& skipped, DialogueMemory* memory) {
  const PlanOperator& op = library_->operator_for(node(node_id).symbol);
  if (op.primitive) {
    if (!node(node_id).children.empty()) return false;
    if (turn.act == op.act) {
      if (apply) attach_leaf(node_id, turn, *memory);
      return true;
    }
    skipped.push_back(op.act);
    if (apply) {
      if (insert_virtual) {
        int leaf = new_node(op.act, node_id, 0, true);
        node(leaf).origin = LeafOrigin::Virtual;
        node(leaf).status = NodeStatus::Repaired;
        node(leaf).via_repair = true;
      }
      node(node_id).status = NodeStatus::Repaired;
    }
    return false;
  }
  std::size_t ei = node(node_id).progress;
  while (ei < op.elements.size()) {
    const SequenceElement& el = op.elements[ei];
    int oc = open_child_at(node(node_id), static_cast<int>(ei));
    bool scanned_open_child = oc >= 0;
    if (oc >= 0) {
      if (skip_scan(oc, turn, apply, insert_virtual, skipped, memory)) {
        if (apply) node(node_id).progress = ei;
        return true;
      }
      // The child's own scan accounted for its remaining mandatory acts.
      if (apply) close(oc);
    }
    bool in_first = library_->first_acts(el.goal).count(turn.act) != 0;
    bool next_claims = ei + 1 < op.elements.size() &&
                       library_->first_acts(op.elements[ei + 1].goal).count(turn.act) != 0;
    bool fresh_allowed =
        el.iterated || (!scanned_open_child &&
                        !has_settled_child_at(node(node_id), static_cast<int>(ei)));
    if (fresh_allowed) {
      if (in_first && !(el.iterated && next_claims)) {
        if (apply) {
          int child = new_node(el.goal, node_id, static_cast<int>(ei), false);
          bool ok = attach(child, turn, *memory);
          assert(ok);
          (void)ok;
          node(node_id).progress = ei;
        }
        return true;
      }
      // The act may sit deeper inside this goal, past skippable content.
      if (!in_first && library_->reachable_acts(el.goal).count(turn.act)) {
        std::vector<std::string> trial;
        if (scan_fresh(el.goal, turn.act, trial)) {
          skipped.insert(skipped.end(), trial.begin(), trial.end());
          if (apply) {
            int child = new_node(el.goal, node_id, static_cast<int>(ei), false);
            std::vector<std::string> applied;
            bool ok = skip_scan(child, turn, true, insert_virtual, applied, memory);
            assert(ok);
            (void)ok;
            node(node_id).progress = ei;
          }
          return true;
        }
      }
    }
    if (!el.iterated && !scanned_open_child &&
        !has_settled_child_at(node(node_id), static_cast<int>(ei)) &&
        !library_->nullable(el.goal)) {
      const std::vector<std::string>& acts = library_->mandatory_acts(el.goal);
      skipped.insert(skipped.end(), acts.begin(), acts.end());
      if (apply) materialize_skipped(node_id, static_cast<int>(ei), el.goal, insert_virtual);
    }
    ++ei;
  }
  return false;
}

int Planner::current_phase_node() const {
  // Deepest open node on the frontier; digressions attach there so leaf
  // order stays chronological.
  int cur = 0;
  while (true) {
    int next = -1;
    for (auto it = node(cur).children.rbegin(); it != node(cur).children.rend(); ++it) {
      if (node(*it).status == NodeStatus::Open && !node(*it).leaf) {
        next = *it;
        break;
      }
    }
    if (next < 0) return cur;
    cur = next;
  }
}

void Planner::attach_digression(const Turn& turn, DigressionTag tag, NodeStatus status,
                                int round) {
  int parent = current_phase_node();
  int wrapper = new_node("digression", parent, kDigressionElement, false);
  node(wrapper).tag = tag;
  node(wrapper).status = status;
  int leaf = new_node(turn.act, wrapper, 0, true);
  node(leaf).turn_id = turn.turn_id;
  node(leaf).round = round;
  node(leaf).status = status;
  node(leaf).via_repair = (tag == DigressionTag::Repair);
  leaf_by_turn_[turn.turn_id] = leaf;
}

void Planner::repair(const Turn& turn, DialogueMemory& memory, const NGramModel* predictor) {
  std::vector<std::string> skipped;
  bool found = skip_scan(0, turn, /*apply=*/false, /*insert_virtual=*/false, skipped, nullptr);

  auto score_given = [&](const std::vector<std::string>& hist) -> double {
    if (predictor == nullptr || !predictor->trained()) return 0.0;
    return predictor->probability(hist, turn.act);
  };

  std::vector<ScoredAlternative> alternatives;
  if (found) {
    std::string resolution =
        skipped.size() <= kInsertVirtualThreshold ? "insert-virtual" : "advance-phase";
    std::vector<std::string> implied = history_;
    implied.insert(implied.end(), skipped.begin(), skipped.end());
    alternatives.push_back({"missing-act", resolution, score_given(implied)});
  }
  bool out_of_phase = false;
  for (int cid : node(0).children) {
    const PlanNode& c = node(cid);
    if (c.status == NodeStatus::Open || c.element_index == kDigressionElement) continue;
    if (library_->reachable_acts(c.symbol).count(turn.act)) {
      out_of_phase = true;
      break;
    }
  }
  if (out_of_phase)
    alternatives.push_back({"out-of-phase", "attach-digression", score_given(history_)});
  alternatives.push_back({"unexpected-act", "attach-digression", score_given(history_)});

  std::size_t best = 0;
  for (std::size_t i = 1; i < alternatives.size(); ++i)
    if (alternatives[i].score > alternatives[best].score) best = i;

  RepairDecision decision;
  decision.error_kind = alternatives[best].error_kind;
  decision.resolution = alternatives[best].resolution;
  decision.alternatives = alternatives;

  if (decision.resolution == "attach-digression") {
    attach_digression(turn, DigressionTag::Repair, NodeStatus::Repaired, memory.current_round());
  } else {
    decision.inserted = skipped;
    std::vector<std::string> applied_skips;
    bool ok = skip_scan(0, turn, /*apply=*/true,
                        /*insert_virtual=*/decision.resolution == "insert-virtual", applied_skips,
                        &memory);
    assert(ok);
    (void)ok;
    auto it = leaf_by_turn_.find(turn.turn_id);
    if (it != leaf_by_turn_.end()) node(it->second).via_repair = true;
  }
  repairs_.push_back(std::move(decision));
}

void Planner::advance(const Turn& turn, TrackerEventKind event, DialogueMemory& memory,
                      const NGramModel* predictor) {
  inventory_->require(turn.act);
  switch (event) {
    case TrackerEventKind::AnywhereAccepted:
      attach_digression(turn, DigressionTag::Anywhere, NodeStatus::Satisfied,
                        memory.current_round());
      break;
    case TrackerEventKind::ClarificationOpened:
    case TrackerEventKind::ClarificationClosed:
      attach_digression(turn, DigressionTag::Clarification, NodeStatus::Satisfied,
                        memory.current_round());
      break;
    case TrackerEventKind::Inconsistency:
    case TrackerEventKind::FallbackApplied:
      repair(turn, memory, predictor);
      break;
    case TrackerEventKind::Accepted:
      if (!attach(0, turn, memory)) repair(turn, memory, predictor);
      break;
  }
  history_.push_back(turn.act);
}

void Planner::finalize() {
  // Post-order close of everything that can be considered done.
  std::function<void(int)> walk = [&](int id) {
    for (int cid : node(id).children) walk(cid);
    if (!node(id).leaf && node(id).status == NodeStatus::Open && completable(id))
      node(id).status = NodeStatus::Satisfied;
  };
  walk(0);
}

PragmaticAnnotation Planner::annotate(const std::string& turn_id) const {
  auto it = leaf_by_turn_.find(turn_id);
  if (it == leaf_by_turn_.end()) throw UnprocessedTurnError(turn_id);
  const PlanNode& leaf = node(it->second);

  int cur = leaf.id;
  while (node(cur).parent > 0) cur = node(cur).parent;
  std::string phase = node(cur).symbol;
  if (phase == "digression" || node(cur).leaf) phase = root().symbol;

  PragmaticAnnotation ann;
  ann.act = leaf.symbol;
  ann.phase = phase;
  ann.round = leaf.round;
  ann.repaired = leaf.via_repair || leaf.status == NodeStatus::Repaired;
  return ann;
}

void Planner::dump_node(int node_id, int depth, std::string& out) const {
  const PlanNode& n = node(node_id);
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  if (n.symbol == "digression") {
    out += "digression(";
    switch (n.tag) {
      case DigressionTag::Repair: out += "repair"; break;
      case DigressionTag::Anywhere: out += "anywhere"; break;
      case DigressionTag::Clarification: out += "clarification"; break;
      case DigressionTag::None: out += "?"; break;
    }
    out += ")";
  } else {
    out += n.symbol;
  }
  out += ' ';
  out += to_string(n.status);
  if (n.leaf) {
    if (n.origin == LeafOrigin::Virtual) out += " virtual";
    else out += " turn=" + n.turn_id;
  }
  for (const std::string& c : n.failed_constraints) out += " !" + c;
  out += '\n';
  for (int cid : n.children) dump_node(cid, depth + 1, out);
}

std::string Planner::dump() const {
  std::string out;
  dump_node(0, 0, out);
  return out;
}

std::vector<std::string> Planner::leaf_acts(bool include_repaired) const {
  std::vector<std::string> out;
  std::function<void(int)> walk = [&](int id) {
    const PlanNode& n = node(id);
    if (n.leaf) {
      if (include_repaired || (n.status != NodeStatus::Repaired && !n.via_repair))
        out.push_back(n.symbol);
      return;
    }
    for (int cid : n.children) walk(cid);
  };
  walk(0);
  return out;
}

std::vector<std::string> Planner::turn_bound_leaf_acts() const {
  std::vector<std::string> out;
  std::function<void(int)> walk = [&](int id) {
    const PlanNode& n = node(id);
    if (n.leaf) {
      if (n.origin == LeafOrigin::Turn) out.push_back(n.symbol);
      return;
    }
    for (int cid : n.children) walk(cid);
  };
  walk(0);
  return out;
}

std::size_t Planner::repaired_node_count() const {
  std::size_t n = 0;
  for (const PlanNode& nd : nodes_)
    if (nd.status == NodeStatus::Repaired) ++n;
  return n;
}

std::size_t Planner::digression_count() const {
  std::size_t n = 0;
  for (const PlanNode& nd : nodes_)
    if (nd.symbol == "digression" && !nd.leaf) ++n;
  return n;
}

bool Planner::fully_satisfied() const {
  for (const PlanNode& nd : nodes_)
    if (nd.status != NodeStatus::Satisfied) return false;
  return true;
}

std::vector<std::string> Planner::phase_symbols() const {
  std::vector<std::string> out;
  for (int cid : root().children)
    if (node(cid).element_index != kDigressionElement) out.push_back(node(cid).symbol);
  return out;
}

std::vector<std::string> Planner::phase_leaf_acts(int root_child_index) const {
  std::vector<std::string> out;
  int seen = 0;
  for (int cid : root().children) {
    if (node(cid).element_index == kDigressionElement) continue;
    if (seen++ != root_child_index) continue;
    std::function<void(int)> walk = [&](int id) {
      const PlanNode& n = node(id);
      if (n.leaf) {
        out.push_back(n.symbol);
        return;
      }
      for (int c : n.children) walk(c);
    };
    walk(cid);
    break;
  }
  return out;
}

}  // namespace diatrack
