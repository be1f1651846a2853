#include <random>

#include "doctest.h"
#include "mtl/eval.hpp"
#include "mtl/fostructure.hpp"
#include "mtl/generate.hpp"
#include "mtl/query_text.hpp"
#include "mtl/textio.hpp"

using namespace mtl;
using namespace mtl::logic;

namespace {
Dyadic D(const char* s) { return parse_dyadic(s); }

// Random formulas over a fixed pool of variables; closure depth kept small so
// the naive reference stays fast.
struct FormulaGen {
  Rng& rng;
  std::vector<Var> pool;
  bool with_tc = true;

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
  Term term() {
    int k = pick(10);
    if (k == 0) return Term::min();
    if (k == 1) return Term::max();
    return T(pool[pick(static_cast<int>(pool.size()))]);
  }
  Formula leaf() {
    switch (pick(10)) {
      case 0: return f_less(term(), term());
      case 1: return f_eq(term(), term());
      case 2: return f_suc(term(), term());
      case 3: return f_bit_in(term(), term());
      case 4: return f_bit_fr(term(), term());
      case 5: return f_atom(pick(2) ? "A" : "B", term());
      case 6: return f_dist(static_cast<Cmp>(pick(5)), Dyadic(BigInt(pick(5)), 1), term(), term());
      case 7: return f_in(Range(Dyadic(BigInt(pick(3)), 1), pick(2), Dyadic(BigInt(3 + pick(4)), 1), pick(2)),
                          term(), term());
      case 8: return f_int(Range(Dyadic(BigInt(pick(3)), 0), pick(2), std::nullopt, true), term(), term(), term());
      default: return f_last(Dyadic(BigInt(1), pick(2)), 1 + pick(2), 3, term());
    }
  }
  Formula gen(int depth) {
    if (depth == 0) return leaf();
    switch (pick(with_tc ? 8 : 7)) {
      case 0: return f_not(gen(depth - 1));
      case 1: return f_and(gen(depth - 1), gen(depth - 1));
      case 2: return f_or(gen(depth - 1), gen(depth - 1));
      case 3: return f_implies(gen(depth - 1), gen(depth - 1));
      case 4: return f_exists({pool[pick(static_cast<int>(pool.size()))]}, gen(depth - 1));
      case 5: return f_forall({pool[pick(static_cast<int>(pool.size()))]}, gen(depth - 1));
      case 6: return leaf();
      default: {
        Var u = fresh_var("u"), v = fresh_var("v");
        FormulaGen inner{rng, {u, v, pool[0]}, false};
        return f_tc(pick(2), {u}, {v}, inner.gen(depth - 1), {term()}, {term()});
      }
    }
  }
};

// Relation matrix closure by iterated squaring.
std::vector<std::vector<bool>> squaring_closure(std::vector<std::vector<bool>> m) {
  size_t n = m.size();
  for (size_t i = 0; i < n; ++i) m[i][i] = true;
  for (size_t round = 1; round < 2 * n + 2; round *= 2) {
    auto next = m;
    for (size_t i = 0; i < n; ++i)
      for (size_t k = 0; k < n; ++k)
        if (m[i][k])
          for (size_t j = 0; j < n; ++j)
            if (m[k][j]) next[i][j] = true;
    m = next;
  }
  return m;
}

// Independent datalog reference: naive iteration of every rule under every
// assignment until nothing changes.
std::map<std::string, std::set<std::vector<int>>> naive_datalog(const FOStructure& s, const DatalogQuery& q) {
  std::map<std::string, std::set<std::vector<int>>> rel;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : q.rules) {
      std::vector<Var> vars;
      auto add = [&](const Var& v) {
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
      };
      for (const auto& v : r.head.args) add(v);
      for (const auto& a : r.body)
        for (const auto& v : a.args) add(v);
      for (const auto& v : free_vars(r.side)) add(v);
      int n = s.domain_size();
      std::vector<int> val(vars.size(), 0);
      for (;;) {
        Binding b;
        for (size_t i = 0; i < vars.size(); ++i) b[vars[i].id] = val[i];
        auto tuple = [&](const DlAtom& a) {
          std::vector<int> t;
          for (const auto& v : a.args) t.push_back(b[v.id]);
          return t;
        };
        bool ok = true;
        for (const auto& a : r.body) ok = ok && rel[a.pred].count(tuple(a));
        if (ok && naive_holds(s, r.side, b)) changed |= rel[r.head.pred].insert(tuple(r.head)).second;
        size_t i = 0;
        while (i < val.size() && ++val[i] == n) val[i++] = 0;
        if (i == val.size()) break;
      }
    }
  }
  return rel;
}
}  // namespace

TEST_CASE("first-order examples") {
  FOStructure s = encode(parse_data("B@0 B@1/2 C@3/2"));
  Evaluator ev(s);
  Var x = fresh_var("x"), y = fresh_var("y");
  Formula f = f_exists({y}, f_and(f_less(T(y), T(x)), f_atom("B", T(y))));
  CHECK(ev.answers(f, x) == TimestampSet{1, 2});

  EvalOptions plus;
  plus.allow_plus = true;
  Evaluator evp(s, plus);
  Formula odd = f_exists({x}, f_plus(T(x), T(x), Term::max()));
  CHECK(evp.holds(odd, {}));
  FOStructure four = encode(parse_data("@0 @1 @2 @3"));
  Evaluator ev4(four, plus);
  CHECK_FALSE(ev4.holds(odd, {}));
  CHECK_THROWS_AS(ev.holds(odd, {}), EvalError);

  Formula dist1 = f_dist(Cmp::Eq, D("1"), T(x), T(y));
  CHECK(ev.holds(dist1, {{x.id, 2}, {y.id, 1}}));
  CHECK_FALSE(ev.holds(dist1, {{x.id, 2}, {y.id, 0}}));
  CHECK_THROWS_AS(ev.holds(f_atom("B", T(x)), {}), EvalError);
}

TEST_CASE("evaluator agrees with naive expansion") {
  Rng rng(41);
  GenBounds b;
  b.timestamps = 5;
  b.atoms = 2;
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    FOStructure s = encode(random_instance(rng, atom_names(2), b));
    Var x = fresh_var("x"), y = fresh_var("y"), z = fresh_var("z");
    FormulaGen g{rng, {x, y, z}};
    Formula f = g.gen(3);
    Evaluator ev(s);
    for (int a = 0; a < s.domain_size(); ++a)
      for (int c = 0; c < s.domain_size(); ++c) {
        Binding bd{{x.id, a}, {y.id, c}, {z.id, (a + c) % s.domain_size()}};
        bool want = naive_holds(s, f, bd);
        INFO(render(f), " x=", a, " y=", c);
        CHECK(ev.holds(f, bd) == want);
        ++checked;
      }
  }
  CHECK(checked > 1000);
}

TEST_CASE("closure operators") {
  FOStructure s = encode(parse_data("A@0 @1 B@2 @5/2"));
  Evaluator ev(s);
  Var x = fresh_var("x"), y = fresh_var("y");
  CHECK(ev.holds(f_tc(false, {x}, {y}, f_suc(T(y), T(x)), {Term::min()}, {Term::max()}), {}));
  FOStructure one = encode(parse_data("A@7"));
  Evaluator ev1(one);
  CHECK(ev1.holds(f_tc(false, {x}, {y}, f_suc(T(y), T(x)), {Term::min()}, {Term::max()}), {}));

  // Position 0 has two successors, so only the deterministic edge 1 -> 2 survives.
  Formula branchy = f_or({f_and(f_eq(T(x), Term::min()), f_less(Term::min(), T(y))),
                          f_and(f_suc(T(y), T(x)), f_less(Term::min(), T(x)))});
  Var u = fresh_var("u");
  Formula reach = f_tc(true, {x}, {y}, branchy, {T(u)}, {Term::max()});
  Formula ndreach = f_tc(false, {x}, {y}, branchy, {T(u)}, {Term::max()});
  CHECK(ev.answers(ndreach, u) == TimestampSet{0, 1, 2, 3});
  CHECK(ev.answers(reach, u) == TimestampSet{1, 2, 3});

  Rng rng(43);
  GenBounds b;
  b.timestamps = 5;
  for (int i = 0; i < 150; ++i) {
    FOStructure st = encode(random_instance(rng, atom_names(2), b));
    Evaluator e(st);
    Var p = fresh_var("p"), q = fresh_var("q"), a = fresh_var("a"), c = fresh_var("c");
    FormulaGen g{rng, {p, q}, false};
    Formula edge = g.gen(2);
    int n = st.domain_size();
    std::vector<std::vector<bool>> m(n, std::vector<bool>(n));
    for (int i1 = 0; i1 < n; ++i1)
      for (int j = 0; j < n; ++j) m[i1][j] = naive_holds(st, edge, {{p.id, i1}, {q.id, j}});
    auto want = squaring_closure(m);
    Formula tc = f_tc(false, {p}, {q}, edge, {T(a)}, {T(c)});
    Formula dtc = f_tc(true, {p}, {q}, edge, {T(a)}, {T(c)});
    for (int i1 = 0; i1 < n; ++i1)
      for (int j = 0; j < n; ++j) {
        bool t = e.holds(tc, {{a.id, i1}, {c.id, j}});
        CHECK(t == want[i1][j]);
        if (e.holds(dtc, {{a.id, i1}, {c.id, j}})) CHECK(t);
      }
  }
}

TEST_CASE("pairs of positions under closure") {
  FOStructure s = encode(parse_data("@0 @1 @2"));
  Evaluator ev(s);
  Var x1 = fresh_var("x"), x2 = fresh_var("x"), y1 = fresh_var("y"), y2 = fresh_var("y");
  // (a, b) -> (a+1, b+1) along successors
  Formula step = f_and(f_suc(T(y1), T(x1)), f_suc(T(y2), T(x2)));
  Formula f = f_tc(false, {x1, x2}, {y1, y2}, step, {Term::min(), Term::min()}, {Term::max(), Term::max()});
  CHECK(ev.holds(f, {}));
  Formula g = f_tc(false, {x1, x2}, {y1, y2}, step, {Term::min(), Term::max()}, {Term::max(), Term::min()});
  CHECK_FALSE(ev.holds(g, {}));
}

TEST_CASE("relational primitive recursion") {
  FOStructure s = encode(parse_data("@0 @1 @2"));
  REQUIRE(s.domain_size() == 3);
  Evaluator ev(s);
  RprQuery parity;
  RelDef r;
  r.name = "R";
  r.z = fresh_var("z");
  r.body = f_or(f_eq(T(r.z), Term::min()), f_not(f_rel("R", {T(r.z)}, true)));
  parity.defs.push_back(r);
  Var x = fresh_var("x");
  parity.main = f_rel("R", {T(x)}, false);
  parity.free = {x};
  auto tables = ev.rpr_tables(parity);
  CHECK(tables[0] == std::vector<char>{1, 0, 1});
  CHECK(ev.answers(parity) == TimestampSet{0, 2});
  CHECK(ev.rpr_tables(parity) == tables);

  RprQuery empty = parity;
  empty.defs[0].body = f_false();
  CHECK(ev.answers(empty).empty());

  RprQuery bad = parity;
  bad.defs[0].body = f_rel("R", {T(r.z)}, false);
  CHECK_THROWS_AS(ev.answers(bad), EvalError);
  RprQuery bad_main = parity;
  bad_main.main = f_rel("R", {T(x)}, true);
  CHECK_THROWS_AS(ev.answers(bad_main), EvalError);
}

TEST_CASE("datalog evaluation") {
  FOStructure s = encode(parse_data("A@0 @1/2 B@1 @3"));
  Evaluator ev(s);
  Var x = fresh_var("x"), y = fresh_var("y"), z = fresh_var("z");
  DatalogQuery tc;
  tc.rules.push_back({{"%T", {x, y}}, {}, f_and(f_leq(T(x), Term::max()), f_eq(T(x), T(y)))});
  tc.rules.push_back({{"%T", {x, z}}, {{"%T", {x, y}}}, f_suc(T(z), T(y))});
  tc.rules.push_back({{"%G", {y}}, {{"%T", {x, y}}}, f_atom("B", T(x))});
  tc.goal = "%G";
  auto rel = ev.datalog_relation(tc, "%T");
  std::set<std::vector<int>> want;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) want.insert({i, j});
  CHECK(rel == want);
  CHECK(ev.answers(tc) == TimestampSet{2, 3});

  DatalogQuery bad = tc;
  bad.rules[1].side = f_rel("%T", {T(x), T(y)}, false);
  CHECK_THROWS_AS(ev.answers(bad), EvalError);

  Rng rng(47);
  GenBounds b;
  b.timestamps = 4;
  for (int i = 0; i < 60; ++i) {
    FOStructure st = encode(random_instance(rng, atom_names(2), b));
    Evaluator e(st);
    FormulaGen g{rng, {x, y, z}, false};
    DatalogQuery q;
    q.rules.push_back({{"%P", {x, y}}, {}, g.gen(1)});
    q.rules.push_back({{"%P", {x, z}}, {{"%P", {x, y}}, {"%P", {y, z}}}, g.gen(1)});
    q.rules.push_back({{"%Q", {x}}, {{"%P", {y, x}}}, g.gen(1)});
    q.rules.push_back({{"%Q", {y}}, {{"%Q", {x}}, {"%P", {x, y}}}, f_true()});
    q.goal = "%Q";
    auto ref = naive_datalog(st, q);
    CHECK(e.datalog_relation(q, "%P") == ref["%P"]);
    CHECK(e.datalog_relation(q, "%Q") == ref["%Q"]);
    TimestampSet ans;
    for (const auto& t : ref["%Q"])
      if (st.is_timestamp(t[0])) ans.insert(t[0]);
    CHECK(e.answers(q) == ans);
  }
}

TEST_CASE("extended query dispatch") {
  FOStructure s = encode(parse_data("@0 @1 @2"));
  Evaluator ev(s);
  Var x = fresh_var("x");
  ExtQuery q{Language::FOPlus, f_plus(T(x), T(x), Term::max()), x};
  CHECK(ev.answers(q) == TimestampSet{1});
  ExtQuery fo{Language::FO, f_plus(T(x), T(x), Term::max()), x};
  CHECK_THROWS_AS(ev.answers(fo), EvalError);
}
