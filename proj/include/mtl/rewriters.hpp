// Fragment rewriters: compile an ontology-mediated query (program, atom)
// into a data-independent query in a target language whose answers over
// encode(D) are the certain answers.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtl/canonical.hpp"
#include "mtl/core.hpp"
#include "mtl/formula.hpp"
#include "mtl/generate.hpp"

namespace mtl {

// A propositional letter of a type vocabulary: an atom, or a diamond over an
// atom or its negation. Boxes are read as negated diamonds over the negation.
struct TypeLetter {
  enum Kind { Simple, Diamond } kind = Simple;
  std::string atom;
  bool negated = false;        // Diamond: over the negated atom
  std::optional<Range> range;  // Diamond
  int steps = 0;               // punctual closure: distance in multiples of the unit
  std::string str() const;
};

class TypeVocabulary {
 public:
  // Simple letters for the atoms, then one diamond letter per distinct
  // diamond or box literal of the program.
  TypeVocabulary(const Program& program, const std::vector<std::string>& extra_atoms);
  // Simple letters plus diamonds of every step count up to each literal's
  // maximal multiple of `unit`; ranges must be punctual multiples of it.
  static TypeVocabulary punctual_closure(const Program& program, const std::vector<std::string>& extra_atoms,
                                         const Dyadic& unit);

  const std::vector<TypeLetter>& letters() const { return letters_; }
  int size() const { return static_cast<int>(letters_.size()); }
  int simple(const std::string& atom) const;  // -1 when absent
  // Index of the diamond letter a body or head literal reads, and whether the
  // literal is its negation (boxes).
  std::pair<int, bool> letter_of(const Literal& l) const;
  std::vector<std::string> atoms() const;

 private:
  TypeVocabulary() = default;
  std::vector<TypeLetter> letters_;
  Dyadic unit_;
  bool punctual_ = false;
};

// A maximal literal set: letter i holds iff bit i is set.
struct PiType {
  std::uint64_t bits = 0;
  bool has(int letter) const { return (bits >> letter) & 1; }
  friend bool operator==(const PiType&, const PiType&) = default;
  friend auto operator<=>(const PiType&, const PiType&) = default;
};

// Every rule holds when literals are read as independent letters.
bool type_consistent(const Program& program, const TypeVocabulary& vocab, const PiType& t);
// All consistent types, ordered by bits.
std::vector<PiType> enumerate_types(const Program& program, const TypeVocabulary& vocab);

// Largest dyadic dividing every range endpoint; zero when there is none.
Dyadic punctual_unit(const Program& program);

// Trace bookkeeping for non-punctual ranges, per tracked simple literal
// ("P" or "!P").
struct TraceShape {
  std::optional<Range> shortest;  // intersection of the windows (0, q-r) over finite ranges
  std::optional<Range> longest;   // union of (0, q) over finite ranges
  int length = 0;                 // number of dense intervals kept
};
std::map<std::string, TraceShape> trace_shapes(const Program& program);

// Horn programs: IDB B'(x,y) says B holds on every timestamp of [x,y].
logic::DatalogQuery rewrite_horn_datalog(const Program& program, const std::string& atom);
// Core diamond-only programs: linear derivation chains as a closure over
// (timestamp, atom code) tuples.
logic::ExtQuery rewrite_core_diamond_tc(const Program& program, const std::string& atom);
// Ranges unbounded above: osteo points are first occurrences of the
// literals, every other point is checked against them.
logic::ExtQuery rewrite_infinite_fo(const Program& program, const std::string& atom);
// Punctual ranges: runs over types of the closure along each residue class.
logic::RprQuery rewrite_punctual_rpr(const Program& program, const std::string& atom);
// Non-punctual ranges: extended types with bounded traces.
logic::ExtQuery rewrite_nonpunctual_tc(const Program& program, const std::string& atom);
// Horn non-punctual ranges: the same traces with minimal types, deterministic.
logic::ExtQuery rewrite_horn_nonpunctual_dtc(const Program& program, const std::string& atom);
// The cyclic S0..S3 example over (0,d) asking for S1, in FO(<,+).
logic::ExtQuery rewrite_uniform_example(const Dyadic& d);

// Restricted normal form for the deterministic rewriter: bodies with ranges
// starting at a closed 0 are split into the present point and the open range.
Program without_closed_zero(const Program& program);

// Dispatch by fragment; throws FragmentError when the program lies outside it.
logic::ExtQuery rewrite(Fragment fragment, const Program& program, const std::string& atom);
// The fragment's target language.
logic::Language target_language(Fragment fragment);

// Certain answers of a positive query: each atom replaced by its rewriting,
// disjoined with the inconsistency witness (exists x bottom(x)). All
// rewritings must share one language; phi has the single free variable
// `free`.
logic::ExtQuery lift_positive_query(const std::map<std::string, logic::ExtQuery>& rewritings,
                                    const logic::Formula& phi, const logic::Var& free,
                                    const logic::ExtQuery& bottom);
// A fresh atom no rule derives, whose rewriting witnesses inconsistency.
std::string fresh_bottom_atom(const Program& program);

}  // namespace mtl
