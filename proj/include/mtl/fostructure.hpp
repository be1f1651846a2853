// Bit-encoded first-order view of a timed word and the arithmetic formulas
// (distance comparisons, divisibility) definable over it.
#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "mtl/core.hpp"
#include "mtl/formula.hpp"

namespace mtl {

// Domain positions 0..ell; timestamps are the initial segment 0..max_index.
// Integer bit j has weight 2^j, fractional bit j has weight 2^(j-ell-1).
class FOStructure {
 public:
  FOStructure() = default;
  explicit FOStructure(const DataInstance& data);

  int domain_size() const { return ell_ + 1; }
  int ell() const { return ell_; }
  int timestamp_count() const { return data_.size(); }
  int max_index() const { return data_.size() - 1; }
  bool is_timestamp(int p) const { return p >= 0 && p <= max_index(); }

  bool bit_in(int t, int j) const { return bits_in_[t][j]; }
  bool bit_fr(int t, int j) const { return bits_fr_[t][j]; }
  bool atom(const std::string& name, int t) const;
  const TimestampSet& relation(const std::string& name) const;

  const Dyadic& value(int t) const { return data_.time(t); }
  // Value rebuilt from the bit relations alone.
  Dyadic decode(int t) const;
  // Values scaled to a common exponent, for fast exact comparisons.
  const BigInt& scaled(int t) const { return scaled_[t]; }
  unsigned scale_exponent() const { return exp_; }
  SignedDyadic difference(int x, int y) const { return signed_difference(value(x), value(y)); }

  const DataInstance& data() const { return data_; }
  // One line per timestamp: index, value, integer bits, fractional bits, atoms.
  std::string dump() const;

 private:
  DataInstance data_;
  int ell_ = 0;
  unsigned exp_ = 0;
  std::vector<std::vector<bool>> bits_in_, bits_fr_;
  std::vector<BigInt> scaled_;
  std::map<std::string, TimestampSet> relations_;
};

FOStructure encode(const DataInstance& data);

// x, y timestamps with value(x) - value(y) <cmp> r, as a pure FO(<) formula
// over bit_in, bit_fr, < and =.
logic::Formula dist_formula(const Dyadic& r, logic::Cmp cmp, const logic::Var& x,
                            const logic::Var& y);
// Convenience with fresh free variables; returns (formula, x, y).
struct BinaryFormula {
  logic::Formula formula;
  logic::Var x, y;
};
BinaryFormula dist_formula(const Dyadic& r, logic::Cmp cmp);

struct BitAutomaton {
  int states = 0;
  int initial = 0;
  std::vector<bool> accepting;
  std::vector<std::array<int, 2>> delta;

  bool accepts(const std::vector<int>& bits) const;
};

// Total DFA reading binary numbers least significant bit first, accepting
// exactly the multiples of k.
BitAutomaton divisibility_automaton(unsigned k);

// (x, y) with value(x) - value(y) a non-negative integer multiple of d.
logic::RprQuery div_formula(const Dyadic& d);

// Replace dist, in, int, suc and last built-ins by pure FO(<) expansions.
logic::Formula expand_builtins(const logic::Formula& f);

}  // namespace mtl
