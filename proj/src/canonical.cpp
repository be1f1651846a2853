#include "mtl/canonical.hpp"

#include <algorithm>
#include <map>

namespace mtl {

const std::vector<std::vector<int>>& Windows::of(const Range& r) {
  for (const auto& [range, table] : cache_)
    if (range == r) return table;
  int n = data_->size();
  std::vector<std::vector<int>> table(n);
  for (int t = 0; t < n; ++t)
    for (int u = 0; u <= t; ++u)
      if (range_member(signed_difference(data_->time(t), data_->time(u)), r)) table[t].push_back(u);
  cache_.emplace_back(r, std::move(table));
  return cache_.back().second;
}

int CanonicalModel::index(const Literal& l) const {
  auto it = std::find(literals.begin(), literals.end(), l);
  return it == literals.end() ? -1 : static_cast<int>(it - literals.begin());
}

bool CanonicalModel::has(const Literal& l, int t) const {
  int i = index(l);
  return i >= 0 && holds[i][t];
}

TimestampSet CanonicalModel::extension(const Literal& l) const {
  TimestampSet out;
  int i = index(l);
  if (i < 0) return out;
  for (size_t t = 0; t < holds[i].size(); ++t)
    if (holds[i][t]) out.insert(static_cast<int>(t));
  return out;
}

std::vector<std::pair<Literal, int>> CanonicalModel::facts() const {
  std::vector<std::pair<Literal, int>> out;
  for (size_t i = 0; i < literals.size(); ++i)
    for (size_t t = 0; t < holds[i].size(); ++t)
      if (holds[i][t]) out.push_back({literals[i], static_cast<int>(t)});
  return out;
}

CanonicalModel closure(const Program& program, const DataInstance& data) {
  if (!is_horn(program)) throw FragmentError("closure needs a Horn program");
  CanonicalModel m;
  std::map<std::string, int> atom_index;
  auto add_literal = [&](const Literal& l) {
    if (m.index(l) < 0) m.literals.push_back(l);
  };
  std::set<std::string> atoms = program.atoms;
  for (const auto& a : data.atoms()) atoms.insert(a);
  for (const auto& a : atoms) {
    atom_index[a] = static_cast<int>(m.literals.size());
    m.literals.push_back(Literal::make_atom(a));
  }
  for (const auto& r : program.rules)
    for (const auto& l : r.body) add_literal(l);
  int n = data.size();
  m.holds.assign(m.literals.size(), std::vector<char>(n, 0));
  for (int t = 0; t < n; ++t)
    for (const auto& a : data.entries()[t].atoms) m.holds[atom_index[a]][t] = 1;

  struct CRule {
    std::vector<int> body;
    int head;  // -1 for falsehood
  };
  std::vector<CRule> rules;
  for (const auto& r : program.rules) {
    CRule c;
    for (const auto& l : r.body) c.body.push_back(m.index(l));
    c.head = r.head.empty() ? -1 : atom_index.at(r.head[0].atom);
    rules.push_back(c);
  }
  // Temporal literals grouped by the atom they read.
  std::vector<std::vector<int>> readers(m.literals.size());
  for (size_t i = 0; i < m.literals.size(); ++i)
    if (m.literals[i].kind != LitKind::Atom) readers[atom_index[m.literals[i].atom]].push_back(static_cast<int>(i));

  Windows w(data);
  auto atom_at = [&](const std::string& a, int t) { return m.holds[atom_index.at(a)][t] != 0; };
  // Semi-naive rounds: temporal literals are recomputed only for atoms that
  // changed in the previous round, then every rule fires once per timestamp.
  std::vector<char> dirty(m.literals.size(), 1);
  const int bound = static_cast<int>(m.literals.size()) * n + 1;
  for (;;) {
    ++m.rounds;
    bool changed = false;
    for (size_t a = 0; a < m.literals.size(); ++a) {
      if (!dirty[a]) continue;
      for (int li : readers[a])
        for (int t = 0; t < n; ++t) {
          bool v = literal_holds(m.literals[li], t, w, atom_at);
          if (v && !m.holds[li][t]) {
            m.holds[li][t] = 1;
            changed = true;
          }
        }
    }
    std::fill(dirty.begin(), dirty.end(), 0);
    for (const auto& r : rules)
      for (int t = 0; t < n; ++t) {
        bool fire = std::all_of(r.body.begin(), r.body.end(), [&](int i) { return m.holds[i][t] != 0; });
        if (!fire) continue;
        if (r.head < 0) {
          m.inconsistent = true;
        } else if (!m.holds[r.head][t]) {
          m.holds[r.head][t] = 1;
          dirty[r.head] = 1;
          changed = true;
        }
      }
    if (!changed) break;
    if (m.rounds > bound) throw std::logic_error("closure did not converge");
  }
  return m;
}

TimestampSet certain_answers_horn(const Program& program, const std::string& atom, const DataInstance& data) {
  CanonicalModel m = closure(program, data);
  if (m.inconsistent) return data.all();
  return m.extension(Literal::make_atom(atom));
}

bool consistent(const Program& program, const DataInstance& data) { return !closure(program, data).inconsistent; }

}  // namespace mtl
