#include "mtl/automata.hpp"

#include <algorithm>
#include <set>

#include "mtl/canonical.hpp"

namespace mtl {

namespace {

using Body = std::set<Literal>;

// Bound on the bodies kept per derived atom while unfolding present atoms.
constexpr std::size_t kMaxBodies = 4096;

std::string fresh_copy(const std::string& atom, const std::set<std::string>& taken) {
  for (int n = 1;; ++n) {
    std::string name = atom + "#" + std::to_string(n);
    if (!taken.count(name)) return name;
  }
}

// A rule body after renaming: literals free of present derived atoms, plus
// the derived atoms read at the present point.
struct PreBody {
  Body literals;
  std::vector<std::string> present;
};

// Every way of reading the renamed literal: a diamond whose range contains 0
// is either the present point or the range without it.
std::vector<PreBody> expand(const std::vector<Literal>& body, const std::set<std::string>& derived_atoms) {
  std::vector<PreBody> out(1);
  for (const Literal& l : body) {
    bool derived = derived_atoms.count(l.atom) > 0;
    if (!derived) {
      for (auto& b : out) b.literals.insert(l);
      continue;
    }
    if (l.kind == LitKind::Atom) {
      for (auto& b : out) b.present.push_back(l.atom);
      continue;
    }
    const Range& r = *l.range;
    if (!r.contains_zero()) {
      for (auto& b : out) b.literals.insert(l);
      continue;
    }
    std::vector<PreBody> next;
    for (const auto& b : out) {
      PreBody now = b;
      now.present.push_back(l.atom);
      next.push_back(now);
      if (r.upper() && r.upper()->is_zero()) continue;
      PreBody later = b;
      later.literals.insert(Literal::diamond(Range(r.lower(), true, r.upper(), r.upper_open()), l.atom));
      next.push_back(later);
    }
    out = std::move(next);
  }
  return out;
}

bool subsumed(const Body& body, const std::set<Body>& bodies) {
  for (const auto& b : bodies)
    if (std::includes(body.begin(), body.end(), b.begin(), b.end())) return true;
  return false;
}

// Adds `body` unless a subset is present; drops supersets it makes redundant.
bool add_minimal(std::set<Body>& bodies, const Body& body) {
  if (subsumed(body, bodies)) return false;
  for (auto it = bodies.begin(); it != bodies.end();)
    it = std::includes(it->begin(), it->end(), body.begin(), body.end()) ? bodies.erase(it) : std::next(it);
  bodies.insert(body);
  if (bodies.size() > kMaxBodies) throw std::length_error("normal form: too many unfolded bodies");
  return true;
}

// All bodies obtained by replacing each present atom with one of its
// current unfoldings.
std::vector<Body> combine(const PreBody& pre, const std::map<std::string, std::set<Body>>& unfold) {
  std::vector<Body> out{pre.literals};
  for (const auto& atom : pre.present) {
    auto it = unfold.find(atom);
    if (it == unfold.end()) return {};
    std::vector<Body> next;
    for (const auto& b : out)
      for (const auto& u : it->second) {
        Body merged = b;
        merged.insert(u.begin(), u.end());
        next.push_back(std::move(merged));
      }
    out = std::move(next);
    if (out.size() > kMaxBodies) throw std::length_error("normal form: too many unfolded bodies");
  }
  return out;
}

Condition data_part(const Rule& r, const std::set<std::string>& heads) {
  Condition c;
  for (const auto& l : r.body)
    if (!heads.count(l.atom)) c.push_back(l);
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

std::vector<Condition> program_conditions(const Program& program) {
  std::set<std::string> heads = head_atoms(program);
  std::vector<Condition> out;
  for (const auto& r : program.rules) {
    Condition c = data_part(r, heads);
    if (!c.empty() && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

int condition_index(const std::vector<Condition>& conditions, const Condition& c) {
  if (c.empty()) return -1;
  return static_cast<int>(std::find(conditions.begin(), conditions.end(), c) - conditions.begin());
}

TimedWord word_over(const std::vector<Condition>& conditions, const DataInstance& data) {
  if (conditions.size() > 32) throw std::length_error("timed word: more than 32 conditions");
  TimedWord w;
  w.conditions = conditions;
  Windows windows(data);
  auto atom_at = [&](const std::string& a, int t) { return data.has(t, a); };
  for (int t = 0; t < data.size(); ++t) {
    Letter e = 0;
    for (std::size_t i = 0; i < conditions.size(); ++i) {
      bool holds = true;
      for (const auto& l : conditions[i]) holds = holds && literal_holds(l, t, windows, atom_at);
      if (holds) e |= Letter(1) << i;
    }
    w.letters.emplace_back(e, data.time(t));
  }
  return w;
}

}  // namespace

const std::string& NormalForm::answer_atom(const std::string& original) const {
  auto it = derived.find(original);
  return it == derived.end() ? original : it->second;
}

std::set<std::string> head_atoms(const Program& program) {
  std::set<std::string> out;
  for (const auto& r : program.rules)
    for (const auto& l : r.head) out.insert(l.atom);
  return out;
}

bool is_linear(const Program& program) {
  std::set<std::string> heads = head_atoms(program);
  for (const auto& r : program.rules) {
    int derived = 0;
    for (const auto& l : r.body) derived += heads.count(l.atom) ? 1 : 0;
    if (derived > 1) return false;
  }
  return true;
}

NormalForm normalize(const Program& program) {
  if (!is_horn(program)) throw FragmentError("normal form: program is not Horn");
  for (const auto& r : program.rules)
    for (const auto& l : r.body)
      if (l.kind == LitKind::Box) throw FragmentError("normal form: box literal " + l.str());

  NormalForm nf;
  std::set<std::string> taken = program.atoms;
  std::set<std::string> derived_atoms;
  for (const auto& a : head_atoms(program)) {
    std::string copy = fresh_copy(a, taken);
    taken.insert(copy);
    derived_atoms.insert(copy);
    nf.derived[a] = copy;
  }
  auto rename = [&](Literal l) {
    auto it = nf.derived.find(l.atom);
    if (it != nf.derived.end()) l.atom = it->second;
    return l;
  };

  // Renamed rules, with the bridges A -> A#n first.
  std::vector<std::pair<std::vector<PreBody>, std::string>> pre_rules;  // empty head: constraint
  for (const auto& [a, copy] : nf.derived) pre_rules.push_back({{PreBody{{Literal::make_atom(a)}, {}}}, copy});
  for (const auto& r : program.rules) {
    std::vector<Literal> body;
    for (const auto& l : r.body) body.push_back(rename(l));
    pre_rules.push_back({expand(body, derived_atoms), r.head.empty() ? "" : rename(r.head[0]).atom});
  }

  // Least fixpoint of the minimal present-free bodies deriving each atom at
  // the current point.
  std::map<std::string, std::set<Body>> unfold;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [pres, head] : pre_rules) {
      if (head.empty()) continue;
      for (const auto& pre : pres)
        for (const auto& b : combine(pre, unfold)) changed |= add_minimal(unfold[head], b);
    }
  }

  std::vector<Rule> rules;
  auto emit = [&](const Body& body, const std::string& head) {
    Rule r;
    r.body.assign(body.begin(), body.end());
    if (!head.empty()) r.head.push_back(Literal::make_atom(head));
    rules.push_back(std::move(r));
  };
  for (const auto& [head, bodies] : unfold)
    for (const auto& b : bodies) emit(b, head);
  std::set<Body> constraints;
  for (const auto& [pres, head] : pre_rules) {
    if (!head.empty()) continue;
    for (const auto& pre : pres)
      for (const auto& b : combine(pre, unfold)) add_minimal(constraints, b);
  }
  for (const auto& b : constraints) emit(b, "");
  nf.program = Program(rules);
  return nf;
}

Program normal_form(const Program& program) { return normalize(program).program; }

std::string to_string(const Condition& c) {
  if (c.empty()) return "true";
  std::string s;
  for (const auto& l : c) s += (s.empty() ? "" : " & ") + l.str();
  return s;
}

std::string MetricAutomaton::letter_str(Letter e) const {
  std::string s;
  for (std::size_t i = 0; i < conditions.size(); ++i)
    if ((e >> i) & 1) s += (s.empty() ? "" : ", ") + to_string(conditions[i]);
  return "{" + s + "}";
}

std::string MetricAutomaton::dump() const {
  std::string out;
  for (const auto& t : transitions)
    out += t.from + " --[" + letter_str(t.letter) + "; " + t.range.str() + "]--> " + t.to + "\n";
  return out;
}

MetricAutomaton metric_automaton(const Program& program) {
  std::set<std::string> heads = head_atoms(program);
  MetricAutomaton a;
  for (const auto& r : program.rules) {
    if (r.head.empty()) throw FragmentError("metric automaton: constraints are not supported");
    if (r.head[0].kind != LitKind::Atom) throw FragmentError("metric automaton: temporal head");
    for (const auto& l : r.body) {
      if (l.kind == LitKind::Box) throw FragmentError("metric automaton: box literal " + l.str());
      if (heads.count(l.atom) && (l.kind != LitKind::Diamond || l.range->contains_zero()))
        throw FragmentError("metric automaton: not in normal form at " + l.str());
    }
  }
  if (!is_linear(program)) throw FragmentError("metric automaton: program is not linear");
  a.conditions = program_conditions(program);
  if (static_cast<int>(a.conditions.size()) > kMaxConditions)
    throw std::length_error("metric automaton: more than " + std::to_string(kMaxConditions) + " conditions");

  for (const auto& r : program.rules) {
    const std::string& head = r.head[0].atom;
    if (std::find(a.states.begin(), a.states.end(), head) == a.states.end()) a.states.push_back(head);
  }
  for (const auto& r : program.rules) {
    int cond = condition_index(a.conditions, data_part(r, heads));
    const Literal* step = nullptr;
    for (const auto& l : r.body)
      if (heads.count(l.atom)) step = &l;
    if (!step) {
      a.initial.push_back({r.head[0].atom, cond});
      continue;
    }
    for (Letter e = 0; e < a.alphabet_size(); ++e)
      if (cond < 0 || ((e >> cond) & 1)) a.transitions.push_back({step->atom, *step->range, e, r.head[0].atom});
  }
  return a;
}

TimedWord timed_word(const Program& program, const DataInstance& data) {
  return word_over(program_conditions(program), data);
}

TimedWord timed_word(const MetricAutomaton& automaton, const DataInstance& data) {
  return word_over(automaton.conditions, data);
}

TimestampSet answer_by_runs(const MetricAutomaton& automaton, const std::string& state, const DataInstance& data,
                            RunStats* stats) {
  TimedWord w = timed_word(automaton, data);
  std::map<std::string, int> index;
  for (std::size_t s = 0; s < automaton.states.size(); ++s) index[automaton.states[s]] = static_cast<int>(s);
  std::map<Letter, std::vector<const MetricTransition*>> by_letter;
  for (const auto& t : automaton.transitions) by_letter[t.letter].push_back(&t);

  int n = data.size();
  std::vector<std::vector<char>> reach(n, std::vector<char>(automaton.states.size(), 0));
  std::uint64_t checks = 0;
  for (int i = 0; i < n; ++i) {
    Letter e = w.letters[i].first;
    for (const auto& init : automaton.initial)
      if (init.condition < 0 || ((e >> init.condition) & 1)) reach[i][index[init.state]] = 1;
    auto it = by_letter.find(e);
    if (it == by_letter.end()) continue;
    for (int j = 0; j < i; ++j) {
      Dyadic gap = data.time(i) - data.time(j);
      for (const MetricTransition* t : it->second) {
        ++checks;
        if (reach[j][index[t->from]] && t->range.contains(gap)) reach[i][index[t->to]] = 1;
      }
    }
  }
  if (stats) stats->transition_checks += checks;
  TimestampSet out;
  auto s = index.find(state);
  if (s == index.end()) return out;
  for (int i = 0; i < n; ++i)
    if (reach[i][s->second]) out.insert(i);
  return out;
}

TimestampSet answer_by_runs(const Program& program, const std::string& atom, const DataInstance& data,
                            RunStats* stats) {
  NormalForm nf = normalize(program);
  MetricAutomaton a = metric_automaton(nf.program);
  if (!nf.derived.count(atom)) {
    TimestampSet out;
    for (int t = 0; t < data.size(); ++t)
      if (data.has(t, atom)) out.insert(t);
    return out;
  }
  return answer_by_runs(a, nf.answer_atom(atom), data, stats);
}

}  // namespace mtl
