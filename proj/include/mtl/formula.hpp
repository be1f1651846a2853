// Query ASTs for FO(<), FO(<,+), FO(RPR), FO(TC), FO(DTC) and datalog(FO).
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mtl/core.hpp"

namespace mtl::logic {

struct Var {
  int id = -1;
  std::string name;
  friend bool operator==(const Var& a, const Var& b) { return a.id == b.id; }
  friend auto operator<=>(const Var& a, const Var& b) { return a.id <=> b.id; }
};

// Fresh variable with a globally unique id; the name is base + id.
Var fresh_var(const std::string& base);
// Fresh id with the name kept as given (used by the query parser).
Var named_var(const std::string& name);

struct Term {
  enum Kind { Variable, Min, Max } kind = Variable;
  Var var;
  static Term of(const Var& v) { return {Variable, v}; }
  static Term min() { return {Min, {}}; }
  static Term max() { return {Max, {}}; }
  friend bool operator==(const Term& a, const Term& b) {
    return a.kind == b.kind && (a.kind != Variable || a.var == b.var);
  }
};

enum class Cmp { Eq, Lt, Le, Gt, Ge };
std::string cmp_str(Cmp c);

enum class Op {
  True, False,
  Less, Eq, Suc, BitIn, BitFr, Atom,
  Dist, In, Int, Last, Plus,
  Not, And, Or, Implies, Exists, Forall,
  Tc, Rel, RprApply, DatalogApply
};

struct Node;
using Formula = std::shared_ptr<const Node>;
struct RprQuery;
struct DatalogQuery;

struct Node {
  Op op = Op::True;
  std::vector<Term> terms;    // arguments; Tc: sources then targets
  std::vector<Formula> kids;  // subformulas
  std::vector<Var> vars;      // bound variables; Tc: source tuple then target tuple
  std::string name;           // data atom or relation name
  Cmp cmp = Cmp::Eq;          // Dist
  Dyadic value;               // Dist threshold, Last unit
  std::optional<Range> range; // In, Int
  int index = 0;              // Last multiple
  int count = 0;              // Last bound
  bool deterministic = false; // Tc
  bool previous = false;      // Rel: last argument read at z-1
  std::shared_ptr<const RprQuery> rpr;
  std::shared_ptr<const DatalogQuery> datalog;
};

// Relation variable defined by simultaneous primitive recursion over
// domain positions; params are the non-recursive arguments.
struct RelDef {
  std::string name;
  std::vector<Var> params;
  Var z;
  Formula body;
};

struct RprQuery {
  std::vector<RelDef> defs;
  Formula main;
  std::vector<Var> free;  // answer variables of main, in argument order
};

struct DlAtom {
  std::string pred;
  std::vector<Var> args;
};

struct DlRule {
  DlAtom head;
  std::vector<DlAtom> body;
  Formula side;  // over built-ins and data atoms only
};

struct DatalogQuery {
  std::vector<DlRule> rules;
  std::string goal;  // unary goal predicate
};

enum class Language { FO, FOPlus, RPR, TC, DTC, Datalog };
std::string to_string(Language l);
std::optional<Language> language_from_string(const std::string& s);

// A unary query in one target language. Formula-shaped payloads carry
// their own free variable; RPR and datalog payloads are queries proper.
struct ExtQuery {
  Language lang = Language::FO;
  std::variant<Formula, RprQuery, DatalogQuery> payload;
  Var free;  // used with the Formula payload
};

// Builders.
Formula f_true();
Formula f_false();
Formula f_less(Term a, Term b);
Formula f_leq(Term a, Term b);  // a < b or a = b
Formula f_eq(Term a, Term b);
Formula f_suc(Term a, Term b);  // a is the timestamp right after b
Formula f_bit_in(Term t, Term j);
Formula f_bit_fr(Term t, Term j);
Formula f_atom(const std::string& atom, Term t);
Formula f_dist(Cmp c, const Dyadic& r, Term x, Term y);
Formula f_in(const Range& rho, Term x, Term y);
Formula f_int(const Range& rho, Term t, Term u, Term s);
Formula f_last(const Dyadic& unit, int i, int m, Term u);
Formula f_plus(Term x, Term y, Term z);
Formula f_not(Formula a);
Formula f_and(std::vector<Formula> parts);
Formula f_or(std::vector<Formula> parts);
Formula f_and(Formula a, Formula b);
Formula f_or(Formula a, Formula b);
Formula f_implies(Formula a, Formula b);
Formula f_exists(std::vector<Var> vs, Formula body);
Formula f_forall(std::vector<Var> vs, Formula body);
Formula f_tc(bool deterministic, std::vector<Var> from, std::vector<Var> to, Formula body,
             std::vector<Term> sources, std::vector<Term> targets);
Formula f_rel(const std::string& name, std::vector<Term> args, bool previous);
Formula f_rpr_apply(std::shared_ptr<const RprQuery> q, std::vector<Term> args);
Formula f_datalog_apply(std::shared_ptr<const DatalogQuery> q, Term arg);

inline Term T(const Var& v) { return Term::of(v); }

// Substitute a term for the free occurrences of a variable.
Formula substitute(const Formula& f, const Var& v, const Term& t);
// Variables occurring free.
std::vector<Var> free_vars(const Formula& f);
size_t formula_size(const Formula& f);
bool uses_plus(const Formula& f);

}  // namespace mtl::logic
