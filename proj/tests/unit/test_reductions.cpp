#include <queue>

#include "doctest.h"
#include "mtl/canonical.hpp"
#include "mtl/generate.hpp"
#include "mtl/oracle.hpp"
#include "mtl/reductions.hpp"
#include "mtl/textio.hpp"

using namespace mtl;

namespace {

bool satisfiable(const Circuit& c) {
  int inputs = 0;
  for (const auto& g : c.gates) inputs += g.kind == Gate::Input;
  for (int mask = 0; mask < (1 << inputs); ++mask) {
    std::vector<bool> v;
    int next = 0;
    for (const auto& g : c.gates) {
      switch (g.kind) {
        case Gate::Input: v.push_back((mask >> next++) & 1); break;
        case Gate::Not: v.push_back(!v[g.inputs[0]]); break;
        case Gate::Or: v.push_back(v[g.inputs[0]] || v[g.inputs[1]]); break;
        case Gate::And: v.push_back(v[g.inputs[0]] && v[g.inputs[1]]); break;
      }
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

bool certain_at_target(const EncodedQuery& q, bool horn) {
  TimestampSet ans = horn ? certain_answers_horn(q.program, q.atom, q.data)
                          : certain_answers_bruteforce(q.program, q.atom, q.data);
  return ans.count(q.target_index()) > 0;
}

}  // namespace

TEST_CASE("column counts") {
  CHECK(column_count(1) == 1);
  CHECK(column_count(4) == 4);
  CHECK(column_count(5) == 8);
  CHECK(column_count(6) == 8);
}

TEST_CASE("circuit encoding") {
  // Inputs 0 and 1, OR(0,1), AND(2,1), NOT(3).
  Circuit c{{{Gate::Input, {}}, {Gate::Input, {}}, {Gate::Or, {0, 1}}, {Gate::And, {2, 1}}, {Gate::Not, {3}}}};
  EncodedQuery q = from_circuit(c);
  CHECK(q.target == parse_dyadic("17/2"));
  CHECK(q.data.size() == 25);
  CHECK(q.data.has(q.target_index(), "N"));
  CHECK(satisfiable(c));
  CHECK_FALSE(certain_at_target(q, false));

  Circuit contradiction{{{Gate::Input, {}}, {Gate::Not, {0}}, {Gate::And, {0, 1}}}};
  CHECK_FALSE(satisfiable(contradiction));
  CHECK(certain_at_target(from_circuit(contradiction), false));

  Circuit single{{{Gate::Input, {}}}};
  CHECK_FALSE(certain_at_target(from_circuit(single), false));

  CHECK_THROWS_AS(from_circuit(Circuit{{{Gate::Not, {0}}}}), std::invalid_argument);
  CHECK_THROWS_AS(from_circuit(Circuit{{{Gate::Input, {}}, {Gate::And, {0}}}}), std::invalid_argument);
}

TEST_CASE("path system encoding") {
  Hypergraph g{4, {{0, 1, 2}}};
  EncodedQuery three = from_psa(g, {0, 1}, 3);
  CHECK(three.target == parse_dyadic("4") + Dyadic(BigInt(3), 2));
  CHECK_FALSE(accessible(g, {0, 1}, 3));
  CHECK_FALSE(certain_at_target(three, true));
  CHECK(certain_at_target(from_psa(g, {0, 1}, 2), true));
  CHECK(certain_at_target(from_psa(g, {3}, 3), true));
  // The pure box program derives R everywhere: the first timestamps see
  // empty windows.
  CHECK(certain_answers_horn(psa_unguarded_program(), "R", three.data) == three.data.all());
  // One pass needs hyperedges ordered by target: (0,3,4) uses 3 from (1,2,3).
  Hypergraph chain{5, {{0, 3, 4}, {1, 2, 3}}};
  CHECK(accessible(chain, {0, 1, 2}, 4));
  CHECK(certain_at_target(from_psa(chain, {0, 1, 2}, 4), true));
  CHECK_THROWS_AS(from_psa(Hypergraph{3, {{0, 2, 1}}}, {0}, 1), std::invalid_argument);
}

TEST_CASE("reachability encoding") {
  Digraph g{4, {{0, 2}, {1, 3}, {2, 3}}};
  EncodedQuery q = from_digraph(g, 0, 3);
  CHECK(q.target == parse_dyadic("12") + Dyadic(BigInt(3), 2));
  CHECK(certain_at_target(q, true));
  CHECK_FALSE(certain_at_target(from_digraph(g, 0, 1), true));
  CHECK(certain_at_target(from_digraph(g, 1, 1), true));
  CHECK_THROWS_AS(from_digraph(Digraph{3, {{2, 1}}}, 0, 1), std::invalid_argument);
}

TEST_CASE("random circuits match the truth table") {
  Rng rng(51);
  for (int trial = 0; trial < 60; ++trial) {
    Circuit c = random_circuit(rng, 6);
    EncodedQuery q = from_circuit(c);
    INFO(render(q.data));
    CHECK(certain_at_target(q, false) == !satisfiable(c));
  }
}

TEST_CASE("random hypergraphs match the accessibility fixpoint") {
  Rng rng(52);
  int positive = 0;
  for (int trial = 0; trial < 100; ++trial) {
    PsaInstance x = random_psa(rng, 5);
    bool want = accessible(x.graph, x.sources, x.target);
    positive += want;
    CHECK(certain_at_target(from_psa(x.graph, x.sources, x.target), true) == want);
  }
  CHECK(positive > 10);
}

TEST_CASE("random DAGs match graph search") {
  Rng rng(53);
  int positive = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ReachInstance x = random_reach(rng, 6);
    bool want = reachable(x.graph, x.source, x.target);
    positive += want;
    EncodedQuery q = from_digraph(x.graph, x.source, x.target);
    CHECK(certain_at_target(q, true) == want);
    if (trial % 10 == 0) CHECK(certain_at_target(q, false) == want);
  }
  CHECK(positive > 10);
}

TEST_CASE("generators are deterministic") {
  Rng a(7), b(7);
  for (int i = 0; i < 20; ++i) {
    EncodedQuery x = from_circuit(random_circuit(a, 6)), y = from_circuit(random_circuit(b, 6));
    CHECK(x.data == y.data);
  }
}
