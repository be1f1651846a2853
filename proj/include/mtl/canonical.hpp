// Least-model closure for Horn programs and certain answers derived from it.
#pragma once

#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtl/core.hpp"

namespace mtl {

class FragmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// For each range, the timestamps t' with value(t) - value(t') in the range,
// indexed by t and listed in increasing order. Returned tables stay valid
// for the lifetime of the Windows object.
class Windows {
 public:
  explicit Windows(const DataInstance& data) : data_(&data) {}
  const std::vector<std::vector<int>>& of(const Range& r);

 private:
  const DataInstance* data_;
  std::deque<std::pair<Range, std::vector<std::vector<int>>>> cache_;
};

// Truth of a literal at t given the extension of every atom.
template <class AtomAt>
bool literal_holds(const Literal& l, int t, Windows& w, const AtomAt& atom_at) {
  if (l.kind == LitKind::Atom) return atom_at(l.atom, t);
  const auto& win = w.of(*l.range)[t];
  if (l.kind == LitKind::Diamond) {
    for (int u : win)
      if (atom_at(l.atom, u)) return true;
    return false;
  }
  for (int u : win)
    if (!atom_at(l.atom, u)) return false;
  return true;
}

struct CanonicalModel {
  std::vector<Literal> literals;         // atoms first, then temporal literals of the program
  std::vector<std::vector<char>> holds;  // holds[literal][timestamp]
  bool inconsistent = false;
  int rounds = 0;

  int index(const Literal& l) const;  // -1 when absent
  bool has(const Literal& l, int t) const;
  TimestampSet extension(const Literal& l) const;
  std::vector<std::pair<Literal, int>> facts() const;
};

// Throws FragmentError unless the program is Horn.
CanonicalModel closure(const Program& program, const DataInstance& data);
TimestampSet certain_answers_horn(const Program& program, const std::string& atom, const DataInstance& data);
bool consistent(const Program& program, const DataInstance& data);

}  // namespace mtl
