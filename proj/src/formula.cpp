#include "mtl/formula.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <set>

namespace mtl::logic {

namespace {
std::atomic<int> next_var_id{1};

Formula make(Node n) { return std::make_shared<const Node>(std::move(n)); }

Node atomic(Op op, std::vector<Term> terms) {
  Node n;
  n.op = op;
  n.terms = std::move(terms);
  return n;
}
}  // namespace

Var fresh_var(const std::string& base) {
  int id = next_var_id.fetch_add(1);
  return {id, base + std::to_string(id)};
}

Var named_var(const std::string& name) { return {next_var_id.fetch_add(1), name}; }

std::string cmp_str(Cmp c) {
  switch (c) {
    case Cmp::Eq: return "=";
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Gt: return ">";
    case Cmp::Ge: return ">=";
  }
  return "?";
}

std::string to_string(Language l) {
  switch (l) {
    case Language::FO: return "fo";
    case Language::FOPlus: return "fo+";
    case Language::RPR: return "rpr";
    case Language::TC: return "tc";
    case Language::DTC: return "dtc";
    case Language::Datalog: return "datalog";
  }
  return "?";
}

std::optional<Language> language_from_string(const std::string& s) {
  for (auto l : {Language::FO, Language::FOPlus, Language::RPR, Language::TC, Language::DTC,
                 Language::Datalog})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

Formula f_true() {
  static const Formula t = make(atomic(Op::True, {}));
  return t;
}
Formula f_false() {
  static const Formula f = make(atomic(Op::False, {}));
  return f;
}
Formula f_less(Term a, Term b) { return make(atomic(Op::Less, {a, b})); }
Formula f_eq(Term a, Term b) {
  if (a == b) return f_true();
  return make(atomic(Op::Eq, {a, b}));
}
Formula f_leq(Term a, Term b) { return f_or(f_less(a, b), f_eq(a, b)); }
Formula f_suc(Term a, Term b) { return make(atomic(Op::Suc, {a, b})); }
Formula f_bit_in(Term t, Term j) { return make(atomic(Op::BitIn, {t, j})); }
Formula f_bit_fr(Term t, Term j) { return make(atomic(Op::BitFr, {t, j})); }
Formula f_atom(const std::string& atom, Term t) {
  Node n = atomic(Op::Atom, {t});
  n.name = atom;
  return make(std::move(n));
}
Formula f_dist(Cmp c, const Dyadic& r, Term x, Term y) {
  Node n = atomic(Op::Dist, {x, y});
  n.cmp = c;
  n.value = r;
  return make(std::move(n));
}
Formula f_in(const Range& rho, Term x, Term y) {
  Node n = atomic(Op::In, {x, y});
  n.range = rho;
  return make(std::move(n));
}
Formula f_int(const Range& rho, Term t, Term u, Term s) {
  Node n = atomic(Op::Int, {t, u, s});
  n.range = rho;
  return make(std::move(n));
}
Formula f_last(const Dyadic& unit, int i, int m, Term u) {
  Node n = atomic(Op::Last, {u});
  n.value = unit;
  n.index = i;
  n.count = m;
  return make(std::move(n));
}
Formula f_plus(Term x, Term y, Term z) { return make(atomic(Op::Plus, {x, y, z})); }

Formula f_not(Formula a) {
  if (a->op == Op::True) return f_false();
  if (a->op == Op::False) return f_true();
  if (a->op == Op::Not) return a->kids[0];
  Node n;
  n.op = Op::Not;
  n.kids = {std::move(a)};
  return make(std::move(n));
}

Formula f_and(std::vector<Formula> parts) {
  Node n;
  n.op = Op::And;
  for (auto& p : parts) {
    if (p->op == Op::True) continue;
    if (p->op == Op::False) return f_false();
    if (p->op == Op::And) {
      n.kids.insert(n.kids.end(), p->kids.begin(), p->kids.end());
    } else {
      n.kids.push_back(std::move(p));
    }
  }
  if (n.kids.empty()) return f_true();
  if (n.kids.size() == 1) return n.kids[0];
  return make(std::move(n));
}

Formula f_or(std::vector<Formula> parts) {
  Node n;
  n.op = Op::Or;
  for (auto& p : parts) {
    if (p->op == Op::False) continue;
    if (p->op == Op::True) return f_true();
    if (p->op == Op::Or) {
      n.kids.insert(n.kids.end(), p->kids.begin(), p->kids.end());
    } else {
      n.kids.push_back(std::move(p));
    }
  }
  if (n.kids.empty()) return f_false();
  if (n.kids.size() == 1) return n.kids[0];
  return make(std::move(n));
}

Formula f_and(Formula a, Formula b) { return f_and(std::vector<Formula>{std::move(a), std::move(b)}); }
Formula f_or(Formula a, Formula b) { return f_or(std::vector<Formula>{std::move(a), std::move(b)}); }

Formula f_implies(Formula a, Formula b) {
  if (a->op == Op::True) return b;
  if (a->op == Op::False || b->op == Op::True) return f_true();
  if (b->op == Op::False) return f_not(a);
  Node n;
  n.op = Op::Implies;
  n.kids = {std::move(a), std::move(b)};
  return make(std::move(n));
}

Formula f_exists(std::vector<Var> vs, Formula body) {
  if (vs.empty() || body->op == Op::True || body->op == Op::False) return body;
  Node n;
  n.op = Op::Exists;
  n.vars = std::move(vs);
  n.kids = {std::move(body)};
  return make(std::move(n));
}

Formula f_forall(std::vector<Var> vs, Formula body) {
  if (vs.empty() || body->op == Op::True || body->op == Op::False) return body;
  Node n;
  n.op = Op::Forall;
  n.vars = std::move(vs);
  n.kids = {std::move(body)};
  return make(std::move(n));
}

Formula f_tc(bool deterministic, std::vector<Var> from, std::vector<Var> to, Formula body,
             std::vector<Term> sources, std::vector<Term> targets) {
  if (from.size() != to.size() || sources.size() != from.size() || targets.size() != from.size())
    throw std::invalid_argument("closure arity mismatch");
  Node n;
  n.op = Op::Tc;
  n.deterministic = deterministic;
  n.vars = std::move(from);
  n.vars.insert(n.vars.end(), to.begin(), to.end());
  n.kids = {std::move(body)};
  n.terms = std::move(sources);
  n.terms.insert(n.terms.end(), targets.begin(), targets.end());
  return make(std::move(n));
}

Formula f_rel(const std::string& name, std::vector<Term> args, bool previous) {
  Node n = atomic(Op::Rel, std::move(args));
  n.name = name;
  n.previous = previous;
  return make(std::move(n));
}

Formula f_rpr_apply(std::shared_ptr<const RprQuery> q, std::vector<Term> args) {
  if (args.size() != q->free.size()) throw std::invalid_argument("recursion query arity mismatch");
  Node n = atomic(Op::RprApply, std::move(args));
  n.rpr = std::move(q);
  return make(std::move(n));
}

Formula f_datalog_apply(std::shared_ptr<const DatalogQuery> q, Term arg) {
  Node n = atomic(Op::DatalogApply, {arg});
  n.datalog = std::move(q);
  return make(std::move(n));
}

Formula substitute(const Formula& f, const Var& v, const Term& t) {
  bool changed = false;
  Node n = *f;
  for (auto& term : n.terms)
    if (term.kind == Term::Variable && term.var == v) {
      term = t;
      changed = true;
    }
  bool binds = std::find(f->vars.begin(), f->vars.end(), v) != f->vars.end();
  if (!binds) {
    for (auto& k : n.kids) {
      Formula nk = substitute(k, v, t);
      if (nk != k) {
        k = nk;
        changed = true;
      }
    }
  }
  return changed ? make(std::move(n)) : f;
}

namespace {
void collect_free(const Formula& f, std::set<int>& bound, std::vector<Var>& out,
                  std::set<int>& seen) {
  for (const auto& t : f->terms)
    if (t.kind == Term::Variable && !bound.count(t.var.id) && seen.insert(t.var.id).second)
      out.push_back(t.var);
  std::vector<int> added;
  for (const auto& v : f->vars)
    if (bound.insert(v.id).second) added.push_back(v.id);
  for (const auto& k : f->kids) collect_free(k, bound, out, seen);
  for (int id : added) bound.erase(id);
}
}  // namespace

std::vector<Var> free_vars(const Formula& f) {
  std::set<int> bound, seen;
  std::vector<Var> out;
  collect_free(f, bound, out, seen);
  return out;
}

size_t formula_size(const Formula& f) {
  size_t s = 1;
  for (const auto& k : f->kids) s += formula_size(k);
  if (f->rpr) {
    for (const auto& d : f->rpr->defs) s += formula_size(d.body);
    s += formula_size(f->rpr->main);
  }
  if (f->datalog)
    for (const auto& r : f->datalog->rules) s += 1 + r.body.size() + formula_size(r.side);
  return s;
}

bool uses_plus(const Formula& f) {
  if (f->op == Op::Plus) return true;
  for (const auto& k : f->kids)
    if (uses_plus(k)) return true;
  if (f->rpr) {
    for (const auto& d : f->rpr->defs)
      if (uses_plus(d.body)) return true;
    if (uses_plus(f->rpr->main)) return true;
  }
  if (f->datalog)
    for (const auto& r : f->datalog->rules)
      if (uses_plus(r.side)) return true;
  return false;
}

}  // namespace mtl::logic
