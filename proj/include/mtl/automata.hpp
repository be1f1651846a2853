// Normal form for Horn diamond-only programs, metric automata over timed
// words of satisfied data conditions, and answering by automaton runs.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtl/core.hpp"

namespace mtl {

// Rewrites a Horn diamond-only program so that every rule has the shape
//   data conditions -> P            (initial rule)
//   data conditions & DIA r Q -> P  (transition rule, 0 not in r)
// where heads and derived body atoms are fresh copies "A#n" of the original
// atoms and the remaining body literals range over data atoms. Each original
// head atom A gets the bridge rule A -> A#n. Constraints keep an empty head
// with a normalized body. Throws FragmentError outside Horn diamond-only.
struct NormalForm {
  Program program;
  std::map<std::string, std::string> derived;  // original head atom -> fresh copy
  // The atom of the normal program whose certain answers are those of the
  // original atom.
  const std::string& answer_atom(const std::string& original) const;
};
NormalForm normalize(const Program& program);
Program normal_form(const Program& program);

// Atoms occurring in rule heads; in normal form these never occur in data.
std::set<std::string> head_atoms(const Program& program);
// At most one body literal over a head atom in every rule.
bool is_linear(const Program& program);

// A conjunction of literals over data atoms; the empty conjunction is truth.
using Condition = std::vector<Literal>;
std::string to_string(const Condition& c);

// Letters are subsets of the conditions, bit i standing for conditions[i].
using Letter = std::uint32_t;

struct MetricTransition {
  std::string from;
  Range range;
  Letter letter = 0;
  std::string to;
};

struct MetricInitial {
  std::string state;
  int condition = -1;  // index into conditions; -1 is the empty conjunction
};

struct MetricAutomaton {
  std::vector<std::string> states;
  std::vector<Condition> conditions;  // nonempty data conditions of the program
  std::vector<MetricInitial> initial;
  std::vector<MetricTransition> transitions;

  std::uint64_t alphabet_size() const { return std::uint64_t(1) << conditions.size(); }
  std::string letter_str(Letter e) const;
  // One line "q --[E; r]--> q'" per transition.
  std::string dump() const;
};

// Largest condition set accepted; the alphabet has 2^n letters.
constexpr int kMaxConditions = 12;

// The program must be linear, constraint-free and in normal form; throws
// FragmentError otherwise and std::length_error above kMaxConditions.
MetricAutomaton metric_automaton(const Program& program);

struct TimedWord {
  std::vector<Condition> conditions;
  std::vector<std::pair<Letter, Dyadic>> letters;
};
// Letter at each data timestamp: every condition holding there.
TimedWord timed_word(const Program& program, const DataInstance& data);
TimedWord timed_word(const MetricAutomaton& automaton, const DataInstance& data);

struct RunStats {
  std::uint64_t transition_checks = 0;
};

// Timestamps ending a run of the automaton of normal_form(program) in the
// state for `atom`, found by dynamic programming over (position, state).
// Atoms no rule derives are answered from the data.
TimestampSet answer_by_runs(const Program& program, const std::string& atom, const DataInstance& data,
                            RunStats* stats = nullptr);
// The same over an automaton and a state directly.
TimestampSet answer_by_runs(const MetricAutomaton& automaton, const std::string& state, const DataInstance& data,
                            RunStats* stats = nullptr);

}  // namespace mtl
