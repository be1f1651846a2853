// Acceptance run: one PASS/FAIL line per criterion with its time limit.
// Exit status is the number of failing criteria.
#include <chrono>
#include <cstdio>
#include <functional>
#include <queue>
#include <sstream>

#include "mtl/automata.hpp"
#include "mtl/canonical.hpp"
#include "mtl/eval.hpp"
#include "mtl/fostructure.hpp"
#include "mtl/generate.hpp"
#include "mtl/oracle.hpp"
#include "mtl/reductions.hpp"
#include "mtl/rewriters.hpp"
#include "mtl/textio.hpp"

using namespace mtl;
using namespace mtl::logic;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

TimestampSet at(const DataInstance& d, std::initializer_list<const char*> values) {
  TimestampSet out;
  for (const char* v : values)
    for (int t = 0; t < d.size(); ++t)
      if (d.time(t) == parse_dyadic(v)) out.insert(t);
  return out;
}

std::string show(const DataInstance& d, const TimestampSet& ts) {
  std::string s;
  for (int t : ts) s += (s.empty() ? "" : ", ") + d.time(t).str();
  return "{" + s + "}";
}

bool includes(const TimestampSet& big, const TimestampSet& small) {
  for (int t : small)
    if (!big.count(t)) return false;
  return true;
}

TimestampSet run(const ExtQuery& q, const DataInstance& d) {
  FOStructure s = encode(d);
  EvalOptions o;
  o.allow_plus = q.lang == Language::FOPlus;
  Evaluator ev(s, o);
  return ev.answers(q);
}

TimestampSet certain(const Program& p, const std::string& atom, const DataInstance& d) {
  return is_horn(p) ? certain_answers_horn(p, atom, d) : certain_answers_bruteforce(p, atom, d);
}

Outcome intro_golden() {
  Outcome o;
  Program p = parse_program("BOX [0,2) B -> B1. DIA [1,1] B1 -> A.");
  DataInstance d1 = parse_data("B@0 B@1/2 C@3/2"), d2 = parse_data("B@0 C@3/2");
  ExtQuery q = rewrite(Fragment::HornDatalog, p, "A");
  for (const auto& [d, want] : {std::pair{d1, at(d1, {"3/2"})}, std::pair{d2, TimestampSet{}}}) {
    o.require(certain_answers_horn(p, "A", d) == want, "closure on " + render(d));
    o.require(certain_answers_bruteforce(p, "A", d) == want, "oracle on " + render(d));
    o.require(run(q, d) == want, "datalog rewriting on " + render(d));
  }
  if (o.ok) o.detail = "D1 -> {3/2}, D2 -> {} by closure, oracle, datalog";
  return o;
}

Outcome automaton_golden() {
  Outcome o;
  Program p = parse_program("DIA [0,1] P0x -> P0. DIA (1,2) P0 & P1x -> P1. DIA (1,3) P1 -> P0.");
  DataInstance d = parse_data("P0x@0 Qx@1 P1x@3/2 P0x@4 P1x@9/2 P1x@5 Qx@13/2");
  TimestampSet runs = answer_by_runs(metric_automaton(p), "P1", d);
  TimestampSet closed = certain_answers_horn(p, "P1", d);
  bool has_five = runs.count(at(d, {"5"}).empty() ? -1 : *at(d, {"5"}).begin()) > 0;
  o.require(runs == closed, "runs " + show(d, runs) + " differ from closure " + show(d, closed));
  o.require(has_five, "5 is not an answer: runs give " + show(d, runs) + ", equal to closure " + show(d, closed) +
                          " and oracle " + show(d, certain_answers_bruteforce(p, "P1", d)) +
                          "; DIA (1,2) P0 at 5 needs P0 in (3,4), which holds nowhere");
  if (o.ok) o.detail = "runs " + show(d, runs);
  return o;
}

Outcome punctual_golden() {
  Outcome o;
  Program p = parse_program("DIA [1,1] P -> Q. DIA [3/2,3/2] P & Q -> P.");
  DataInstance d = parse_data("P@0 P@1/4 P@3/4 P@7/8 @7/4 @15/8 @3 Q@13/4");
  for (const auto& [atom, want] : {std::pair{std::string("P"), at(d, {"7/4", "13/4"})},
                                   std::pair{std::string("Q"), at(d, {"7/4", "15/8"})}}) {
    TimestampSet closed = certain_answers_horn(p, atom, d);
    o.require(includes(closed, want), atom + " closure " + show(d, closed));
    o.require(certain_answers_bruteforce(p, atom, d) == closed, atom + " oracle differs");
    o.require(run(rewrite(Fragment::PunctualRpr, p, atom), d) == closed, atom + " RPR rewriting differs");
    if (o.ok) o.detail += atom + " = " + show(d, closed) + " ";
  }
  return o;
}

Outcome nonpunctual_golden() {
  Outcome o;
  Program p = parse_program("DIA (2,4] P -> P. DIA [1,2) P -> P. DIA [3,inf) Q -> Q.");
  DataInstance d = parse_data("P@1/2 P@5/4 Q@5/2 @15/4 @5 @25/4 @10");
  TimestampSet oracle = certain_answers_bruteforce(p, "P", d);
  o.require(includes(oracle, at(d, {"1/2", "5/4", "5/2", "25/4"})), "oracle " + show(d, oracle));
  o.require(certain_answers_horn(p, "P", d) == oracle, "closure differs");
  o.require(run(rewrite(Fragment::NonpunctualTc, p, "P"), d) == oracle, "TC rewriting differs");
  o.require(run(rewrite(Fragment::HornNonpunctualDtc, p, "P"), d) == oracle, "DTC rewriting differs");
  if (o.ok) o.detail = "P = " + show(d, oracle);
  return o;
}

Outcome random_suites() {
  Outcome o;
  const Fragment fragments[] = {Fragment::HornDatalog,   Fragment::CoreDiamondTc, Fragment::InfiniteFo,
                                Fragment::PunctualRpr,   Fragment::NonpunctualTc, Fragment::HornNonpunctualDtc};
  std::uint64_t seed = 500;
  for (Fragment f : fragments) {
    Rng rng(seed++);
    auto names = atom_names(GenBounds{}.atoms);
    int agreed = 0, redrawn = 0;
    for (int trial = 0; agreed < 500 && o.ok; ++trial) {
      Program p = random_program(rng, f, GenBounds{});
      DataInstance d = random_instance(rng, names, GenBounds{});
      const std::string& atom = names[trial % names.size()];
      TimestampSet want;
      ExtQuery q;
      try {
        q = rewrite(f, p, atom);
        want = certain(p, atom, d);
      } catch (const std::length_error&) {
        ++redrawn;
        continue;
      } catch (const BudgetExceeded&) {
        ++redrawn;
        continue;
      }
      TimestampSet got = run(q, d);
      o.require(got == want, to_string(f) + " mismatch on " + render(p) + " / " + render(d) + " atom " + atom);
      agreed += got == want;
    }
    o.detail += to_string(f) + " " + std::to_string(agreed) + "/500";
    if (redrawn) o.detail += " (" + std::to_string(redrawn) + " redrawn)";
    o.detail += "; ";
  }
  return o;
}

bool arith(Cmp c, const SignedDyadic& d, const Dyadic& r) {
  if (d.negative && !d.magnitude.is_zero()) return c == Cmp::Lt || c == Cmp::Le;
  switch (c) {
    case Cmp::Eq: return d.magnitude == r;
    case Cmp::Lt: return d.magnitude < r;
    case Cmp::Le: return d.magnitude <= r;
    case Cmp::Gt: return d.magnitude > r;
    case Cmp::Ge: return d.magnitude >= r;
  }
  return false;
}

bool divisible(const Dyadic& a, const Dyadic& b, const Dyadic& d) {
  if (a < b) return false;
  Dyadic diff = a - b;
  unsigned e = std::max(diff.exponent(), d.exponent());
  return diff.scaled(e) % d.scaled(e) == 0;
}

Outcome expanded_builtins() {
  Outcome o;
  Rng rng(600);
  const Dyadic rs[] = {parse_dyadic("1/2"), parse_dyadic("1"), parse_dyadic("3/2"), parse_dyadic("2")};
  const Dyadic ds[] = {parse_dyadic("1/2"), parse_dyadic("1"), parse_dyadic("3/2")};
  const Cmp cmps[] = {Cmp::Eq, Cmp::Lt, Cmp::Le, Cmp::Gt, Cmp::Ge};
  std::vector<std::pair<BinaryFormula, std::pair<Dyadic, Cmp>>> dists;
  for (const auto& r : rs)
    for (Cmp c : cmps) dists.push_back({dist_formula(r, c), {r, c}});
  std::vector<std::pair<RprQuery, Dyadic>> divs;
  for (const auto& dv : ds) divs.push_back({div_formula(dv), dv});
  std::uint64_t pairs = 0;
  for (int i = 0; i < 100; ++i) {
    DataInstance d = random_instance(rng, {"A"}, GenBounds{});
    FOStructure s = encode(d);
    Evaluator ev(s);
    for (int x = 0; x < d.size(); ++x)
      for (int y = 0; y < d.size(); ++y) {
        SignedDyadic diff = signed_difference(d.time(x), d.time(y));
        for (const auto& [f, rc] : dists) {
          bool got = ev.holds(f.formula, {{f.x.id, x}, {f.y.id, y}});
          o.require(got == arith(rc.second, diff, rc.first), "dist " + cmp_str(rc.second) + " " + rc.first.str() +
                                                                  " on " + render(d));
          ++pairs;
        }
        for (const auto& [q, dv] : divs) {
          o.require(ev.holds(q, {x, y}) == divisible(d.time(x), d.time(y), dv),
                    "div " + dv.str() + " on " + render(d));
          ++pairs;
        }
      }
  }
  for (unsigned k = 1; k <= 16; ++k) {
    BitAutomaton a = divisibility_automaton(k);
    for (unsigned v = 0; v < 1024; ++v) {
      std::vector<int> bits;
      for (unsigned x = v; x; x >>= 1) bits.push_back(x & 1);
      o.require(a.accepts(bits) == (v % k == 0), "automaton k=" + std::to_string(k) + " v=" + std::to_string(v));
    }
  }
  if (o.ok) o.detail = std::to_string(pairs) + " formula checks, 16 automata x 1024 values";
  return o;
}

bool satisfiable(const Circuit& c) {
  int inputs = 0;
  for (const auto& g : c.gates) inputs += g.kind == Gate::Input;
  for (int mask = 0; mask < (1 << inputs); ++mask) {
    std::vector<bool> v;
    int next = 0;
    for (const auto& g : c.gates) {
      if (g.kind == Gate::Input) v.push_back((mask >> next++) & 1);
      if (g.kind == Gate::Not) v.push_back(!v[g.inputs[0]]);
      if (g.kind == Gate::Or) v.push_back(v[g.inputs[0]] || v[g.inputs[1]]);
      if (g.kind == Gate::And) v.push_back(v[g.inputs[0]] && v[g.inputs[1]]);
    }
    if (v.back()) return true;
  }
  return false;
}

bool accessible(const Hypergraph& g, const std::set<int>& sources, int target) {
  std::set<int> reached = sources;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [m, n, o] : g.edges)
      if (reached.count(m) && reached.count(n) && !reached.count(o)) changed = reached.insert(o).second;
  }
  return reached.count(target) > 0;
}

bool reachable(const Digraph& g, int source, int target) {
  std::vector<bool> seen(g.vertices);
  std::queue<int> todo;
  todo.push(source);
  seen[source] = true;
  while (!todo.empty()) {
    int v = todo.front();
    todo.pop();
    for (const auto& [n, m] : g.edges)
      if (n == v && !seen[m]) seen[m] = true, todo.push(m);
  }
  return seen[target];
}

Outcome reductions() {
  Outcome o;
  Rng rng(700);
  int sat = 0, acc = 0, reach = 0;
  for (int i = 0; i < 100; ++i) {
    Circuit c = random_circuit(rng, 6);
    EncodedQuery q = from_circuit(c);
    bool want = satisfiable(c);
    sat += want;
    o.require(certain(q.program, q.atom, q.data).count(q.target_index()) == !want, "circuit " + render(q.data));
  }
  for (int i = 0; i < 100; ++i) {
    PsaInstance x = random_psa(rng, 5);
    EncodedQuery q = from_psa(x.graph, x.sources, x.target);
    bool want = accessible(x.graph, x.sources, x.target);
    acc += want;
    o.require(certain(q.program, q.atom, q.data).count(q.target_index()) == want, "psa " + render(q.data));
  }
  for (int i = 0; i < 100; ++i) {
    ReachInstance x = random_reach(rng, 6);
    EncodedQuery q = from_digraph(x.graph, x.source, x.target);
    bool want = reachable(x.graph, x.source, x.target);
    reach += want;
    o.require(certain(q.program, q.atom, q.data).count(q.target_index()) == want, "digraph " + render(q.data));
  }
  if (o.ok)
    o.detail = "300/300 (satisfiable " + std::to_string(sat) + ", accessible " + std::to_string(acc) + ", reachable " +
               std::to_string(reach) + ")";
  return o;
}

Outcome normal_form_preservation() {
  Outcome o;
  Rng rng(800);
  auto names = atom_names(GenBounds{}.atoms);
  for (int i = 0; i < 300; ++i) {
    Program p = random_horn_diamond_program(rng, GenBounds{}, false);
    DataInstance d = random_instance(rng, names, GenBounds{});
    NormalForm nf = normalize(p);
    for (const auto& atom : names)
      o.require(certain_answers_horn(nf.program, nf.answer_atom(atom), d) == certain_answers_horn(p, atom, d),
                "atom " + atom + " of " + render(p) + " on " + render(d));
  }
  if (o.ok) o.detail = "300 programs, all original atoms";
  return o;
}

Outcome uniform_family() {
  Outcome o;
  Rng rng(900);
  GenBounds b;
  b.timestamps = 9;
  for (const char* dv : {"1/2", "1", "2"}) {
    Dyadic d = parse_dyadic(dv);
    Program p = uniform_example_program(d);
    ExtQuery q = rewrite_uniform_example(d);
    for (int i = 0; i < 200; ++i) {
      DataInstance data = random_instance(rng, {"B"}, b);
      o.require(run(q, data) == certain_answers_horn(p, "S1", data), std::string("d=") + dv + " on " + render(data));
    }
  }
  if (o.ok) o.detail = "d in {1/2, 1, 2}, 200 instances each";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;
    std::function<Outcome()> check;
  };
  const Criterion criteria[] = {
      {1, "introductory golden", 1, intro_golden},
      {2, "automaton golden", 1, automaton_golden},
      {3, "punctual golden", 5, punctual_golden},
      {4, "non-punctual golden", 5, nonpunctual_golden},
      {5, "rewriter equivalence suites", 600, random_suites},
      {6, "expanded built-ins", 120, expanded_builtins},
      {7, "reduction suites", 300, reductions},
      {8, "normal-form preservation", 120, normal_form_preservation},
      {9, "uniform example family", 120, uniform_family},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_time = secs < c.limit;
    bool pass = o.ok && in_time;
    failed += !pass;
    std::printf("%s %d %s (%.2f s, limit %.0f s)%s: %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, c.limit,
                in_time ? "" : " over time", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
