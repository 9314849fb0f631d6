#include "diatrack/model.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "diatrack/errors.hpp"
#include "text_util.hpp"

namespace diatrack {

namespace {

// The acts the engine requires in every inventory.
const char* kCoreActs[] = {
    "BEGRUESSUNG",        "VERABSCHIEDUNG",         "INIT_TERMINABSPRACHE",
    "BESTAETIGUNG",       "AKZEPTANZ",              "ABLEHNUNG",
    "VORSCHLAG",          "AUFFORDERUNG_VORSCHLAG", "AUFFORDERUNG_STELLUNG",
};

ActClass parse_class(const std::string& token, std::string& closes_with, int line) {
  if (token == "phase") return ActClass::Phase;
  if (token == "anywhere") return ActClass::Anywhere;
  if (token == "clarification-close") return ActClass::ClarificationClose;
  if (token.rfind("clarification-open:", 0) == 0) {
    closes_with = token.substr(std::string("clarification-open:").size());
    if (closes_with.empty())
      throw ParseError(line, "clarification-open needs a closing act, e.g. clarification-open:NAME");
    return ActClass::ClarificationOpen;
  }
  throw ParseError(line, "unknown act class '" + token + "'");
}

}  // namespace

std::string to_string(ActClass cls) {
  switch (cls) {
    case ActClass::Phase: return "phase";
    case ActClass::Anywhere: return "anywhere";
    case ActClass::ClarificationOpen: return "clarification-open";
    case ActClass::ClarificationClose: return "clarification-close";
  }
  return "phase";
}

const std::vector<std::string> ActInventory::kNoKeywords{};

void ActInventory::add(ActInfo info) {
  if (info.name.empty()) throw ValidationError("act name empty");
  if (index_.count(info.name)) throw ValidationError("duplicate act " + info.name);
  index_.emplace(info.name, static_cast<int>(acts_.size()));
  acts_.push_back(std::move(info));
}

void ActInventory::set_keywords(const std::string& act, std::vector<std::string> words) {
  require(act);
  keywords_[act] = std::move(words);
}

bool ActInventory::contains(const std::string& label) const { return index_.count(label) != 0; }

int ActInventory::id_of(const std::string& label) const {
  auto it = index_.find(label);
  return it == index_.end() ? -1 : it->second;
}

int ActInventory::require(const std::string& label) const {
  int id = id_of(label);
  if (id < 0) throw UnknownActError(label);
  return id;
}

ActClass ActInventory::class_of(const std::string& label) const {
  return acts_[static_cast<std::size_t>(require(label))].cls;
}

const std::vector<std::string>& ActInventory::keywords_for(const std::string& label) const {
  require(label);
  auto it = keywords_.find(label);
  return it == keywords_.end() ? kNoKeywords : it->second;
}

bool DialogueMachine::is_final(const std::string& state) const {
  return std::find(finals_.begin(), finals_.end(), state) != finals_.end();
}

bool DialogueMachine::is_anywhere(const std::string& act) const {
  return std::find(anywhere_.begin(), anywhere_.end(), act) != anywhere_.end();
}

std::optional<std::string> DialogueMachine::successor(const std::string& state,
                                                      const std::string& act) const {
  auto it = edges_.find(state);
  if (it == edges_.end()) return std::nullopt;
  auto jt = it->second.find(act);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

std::vector<std::string> DialogueMachine::states_with_incoming(const std::string& act) const {
  std::vector<std::string> out;
  for (const auto& t : transitions_) {
    if (t.act == act && std::find(out.begin(), out.end(), t.to) == out.end()) out.push_back(t.to);
  }
  std::sort(out.begin(), out.end(), [this](const std::string& a, const std::string& b) {
    return state_order(a) < state_order(b);
  });
  return out;
}

std::vector<std::string> DialogueMachine::outgoing_labels(const std::string& state) const {
  std::vector<std::string> out;
  for (const auto& t : transitions_) {
    if (t.from == state && std::find(out.begin(), out.end(), t.act) == out.end())
      out.push_back(t.act);
  }
  return out;
}

int DialogueMachine::state_order(const std::string& state) const {
  auto it = state_index_.find(state);
  return it == state_index_.end() ? -1 : it->second;
}

// Builder with access to DialogueMachine internals; keeps the machine type
// immutable for everyone else.
class MachineBuilder {
 public:
  void touch_state(const std::string& s) {
    if (machine_.state_index_.emplace(s, static_cast<int>(machine_.states_.size())).second)
      machine_.states_.push_back(s);
  }
  void set_initial(const std::string& s) {
    touch_state(s);
    machine_.initial_ = s;
  }
  void add_final(const std::string& s) {
    touch_state(s);
    if (!machine_.is_final(s)) machine_.finals_.push_back(s);
  }
  void add_transition(const std::string& from, const std::string& act, const std::string& to,
                      int line) {
    touch_state(from);
    touch_state(to);
    auto& row = machine_.edges_[from];
    if (row.count(act))
      throw ValidationError("nondeterministic: two transitions from " + from + " on " + act +
                            " (line " + std::to_string(line) + ")");
    row.emplace(act, to);
    machine_.transitions_.push_back({from, act, to});
  }
  void add_anywhere(const std::string& act) { machine_.anywhere_.push_back(act); }
  DialogueMachine take() { return std::move(machine_); }

 private:
  DialogueMachine machine_;
};

namespace {

void validate_model(const DialogueModel& m) {
  const ActInventory& inv = m.inventory;
  if (inv.size() == 0) throw ValidationError("inventory empty");
  for (const char* core : kCoreActs) {
    if (!inv.contains(core)) throw ValidationError(std::string("missing required act ") + core);
  }
  for (const ActInfo& a : inv.acts()) {
    if (a.cls == ActClass::ClarificationOpen) {
      if (!inv.contains(a.closes_with))
        throw ValidationError("clarification closer " + a.closes_with + " of " + a.name +
                              " is not in the inventory");
      if (inv.class_of(a.closes_with) != ActClass::ClarificationClose)
        throw ValidationError("clarification closer " + a.closes_with +
                              " is not classed clarification-close");
    }
  }

  const DialogueMachine& mc = m.machine;
  if (mc.initial().empty()) throw ValidationError("machine has no initial state");
  if (mc.finals().empty()) throw ValidationError("machine has no final state");
  for (const Transition& t : mc.transitions()) {
    if (!inv.contains(t.act)) throw UnknownActError(t.act);
    ActClass cls = inv.class_of(t.act);
    if (cls != ActClass::Phase)
      throw ValidationError("act " + t.act + " is classed " + to_string(cls) +
                            " and may not label a transition");
  }
  for (const std::string& a : mc.anywhere()) {
    if (!inv.contains(a)) throw UnknownActError(a);
    if (inv.class_of(a) != ActClass::Anywhere)
      throw ValidationError("act " + a + " in [anywhere] is not classed anywhere");
  }

  // Every final state must be reachable from the initial state.
  std::set<std::string> reached{mc.initial()};
  std::deque<std::string> queue{mc.initial()};
  while (!queue.empty()) {
    std::string s = queue.front();
    queue.pop_front();
    for (const Transition& t : mc.transitions()) {
      if (t.from == s && reached.insert(t.to).second) queue.push_back(t.to);
    }
  }
  for (const std::string& f : mc.finals()) {
    if (!reached.count(f)) throw ValidationError("final state " + f + " unreachable from initial");
  }
}

}  // namespace

DialogueModel load_model(const std::string& definition_text) {
  detail::LineReader reader(definition_text);
  ActInventory inventory;
  MachineBuilder builder;
  std::vector<std::pair<std::string, std::vector<std::string>>> pending_keywords;

  // Section order is fixed: acts, machine, anywhere, keywords.
  static const std::vector<std::string> kSections = {"[acts]", "[machine]", "[anywhere]",
                                                     "[keywords]"};
  int section = -1;  // index into kSections
  bool saw_initial = false, saw_final = false;

  std::string line;
  while (reader.next(line)) {
    if (line.front() == '[') {
      auto it = std::find(kSections.begin(), kSections.end(), line);
      if (it == kSections.end())
        throw ParseError(reader.line_no(), "unknown section " + line);
      int idx = static_cast<int>(it - kSections.begin());
      if (idx <= section)
        throw ParseError(reader.line_no(), "section " + line + " out of order");
      section = idx;
      continue;
    }
    switch (section) {
      case 0: {  // [acts]
        auto tok = detail::split_ws(line);
        if (tok.size() != 2)
          throw ParseError(reader.line_no(), "expected 'NAME class': " + line);
        ActInfo info;
        info.name = tok[0];
        info.cls = parse_class(tok[1], info.closes_with, reader.line_no());
        try {
          inventory.add(std::move(info));
        } catch (const ValidationError& e) {
          throw ParseError(reader.line_no(), e.what());
        }
        break;
      }
      case 1: {  // [machine]
        auto tok = detail::split_ws(line);
        if (tok.size() >= 2 && tok[0] == "initial") {
          if (tok.size() != 2) throw ParseError(reader.line_no(), "initial takes one state");
          builder.set_initial(tok[1]);
          saw_initial = true;
        } else if (tok.size() >= 2 && tok[0] == "final") {
          for (std::size_t i = 1; i < tok.size(); ++i) builder.add_final(tok[i]);
          saw_final = true;
        } else if (tok.size() == 3) {
          builder.add_transition(tok[0], tok[1], tok[2], reader.line_no());
        } else {
          throw ParseError(reader.line_no(), "expected 'FROM ACT TO': " + line);
        }
        break;
      }
      case 2: {  // [anywhere]
        auto tok = detail::split_ws(line);
        if (tok.size() != 1) throw ParseError(reader.line_no(), "one act per line: " + line);
        builder.add_anywhere(tok[0]);
        break;
      }
      case 3: {  // [keywords]
        auto colon = line.find(':');
        if (colon == std::string::npos)
          throw ParseError(reader.line_no(), "expected 'ACT: word, word': " + line);
        std::string act = detail::trim(line.substr(0, colon));
        std::vector<std::string> words;
        for (const std::string& w : detail::split(line.substr(colon + 1), ',')) {
          std::string t = detail::trim(w);
          if (!t.empty()) words.push_back(t);
        }
        pending_keywords.emplace_back(act, std::move(words));
        break;
      }
      default:
        throw ParseError(reader.line_no(), "content before first section: " + line);
    }
  }

  if (inventory.size() == 0) throw ValidationError("inventory empty");
  if (section >= 1 && (!saw_initial || !saw_final))
    throw ValidationError("machine needs 'initial' and 'final' lines");

  for (auto& [act, words] : pending_keywords) {
    if (!inventory.contains(act)) throw UnknownActError(act);
    inventory.set_keywords(act, std::move(words));
  }

  DialogueModel model{std::move(inventory), builder.take()};
  validate_model(model);
  return model;
}

DialogueModel load_model_file(const std::string& path) {
  return load_model(detail::read_file(path));
}

std::string write_model(const DialogueModel& model) {
  std::ostringstream out;
  out << "[acts]\n";
  for (const ActInfo& a : model.inventory.acts()) {
    out << a.name << ' ';
    if (a.cls == ActClass::ClarificationOpen)
      out << "clarification-open:" << a.closes_with;
    else
      out << to_string(a.cls);
    out << '\n';
  }
  out << "[machine]\n";
  out << "initial " << model.machine.initial() << '\n';
  out << "final";
  for (const std::string& f : model.machine.finals()) out << ' ' << f;
  out << '\n';
  for (const Transition& t : model.machine.transitions())
    out << t.from << ' ' << t.act << ' ' << t.to << '\n';
  out << "[anywhere]\n";
  for (const std::string& a : model.machine.anywhere()) out << a << '\n';
  out << "[keywords]\n";
  for (const ActInfo& a : model.inventory.acts()) {
    const auto& words = model.inventory.keywords_for(a.name);
    if (words.empty()) continue;
    out << a.name << ": ";
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) out << ", ";
      out << words[i];
    }
    out << '\n';
  }
  return out.str();
}

bool validate_act(const ActInventory& inventory, const std::string& label) {
  return inventory.contains(label);
}

}  // namespace diatrack
