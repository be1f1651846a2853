// Evaluators for the target query languages over an FOStructure.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>

#include "mtl/fostructure.hpp"
#include "mtl/formula.hpp"

namespace mtl::logic {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalOptions {
  bool allow_plus = false;       // FO(<,+) queries only
  bool expand_builtins = false;  // evaluate built-ins through their FO expansions
};

struct EvalStats {
  std::uint64_t quantifier_evals = 0;
  std::uint64_t memo_hits = 0;
  std::uint64_t closure_edges = 0;
};

using Binding = std::map<int, int>;  // variable id to domain position

class Evaluator {
 public:
  explicit Evaluator(const FOStructure& structure, EvalOptions options = {});
  ~Evaluator();
  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  // Formula with every free variable bound.
  bool holds(const Formula& f, const Binding& binding);
  // Timestamps t with f[free := t].
  TimestampSet answers(const Formula& f, const Var& free);

  bool holds(const RprQuery& q, const std::vector<int>& args);
  TimestampSet answers(const RprQuery& q);
  // Extension of every relation variable, indexed by (params..., z) in
  // row-major order over domain positions.
  std::vector<std::vector<char>> rpr_tables(const RprQuery& q);

  TimestampSet answers(const DatalogQuery& q);
  // Extension of an IDB predicate after the fixpoint.
  std::set<std::vector<int>> datalog_relation(const DatalogQuery& q, const std::string& pred);
  // Rounds of semi-naive iteration until no new facts appeared.
  int datalog_rounds(const DatalogQuery& q);

  TimestampSet answers(const ExtQuery& q);

  const EvalStats& stats() const { return stats_; }
  const FOStructure& structure() const { return s_; }

 private:
  struct Impl;
  const FOStructure& s_;
  EvalOptions opt_;
  EvalStats stats_;
  std::unique_ptr<Impl> impl_;
};

// Straightforward recursive evaluation by full quantifier expansion; used as
// a reference in tests. Supports every construct except RPR and datalog.
bool naive_holds(const FOStructure& s, const Formula& f, const Binding& binding);

// Arithmetic truth of the built-ins, shared by both evaluators.
bool builtin_dist(const FOStructure& s, Cmp c, const Dyadic& r, int x, int y);
bool builtin_in(const FOStructure& s, const Range& rho, int x, int y);
bool builtin_int(const FOStructure& s, const Range& rho, int t, int u, int sv);
bool builtin_last(const FOStructure& s, const Dyadic& unit, int i, int m, int u);

}  // namespace mtl::logic
