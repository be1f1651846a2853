#include <random>

#include "doctest.h"
#include "mtl/canonical.hpp"
#include "mtl/generate.hpp"
#include "mtl/oracle.hpp"
#include "mtl/textio.hpp"

using namespace mtl;

namespace {

const char* kIntro = "BOX [0,2) B -> B1. DIA [1,1] B1 -> A.";
const char* kRunsProgram = "DIA [0,1] P0x -> P0. DIA (1,2) P0 & P1x -> P1. DIA (1,3) P1 -> P0.";
const char* kRunsData = "P0x@0 Qx@1 P1x@3/2 P0x@4 P1x@9/2 P1x@5 Qx@13/2";

TimestampSet at(const DataInstance& d, std::initializer_list<const char*> values) {
  TimestampSet out;
  for (const char* v : values) {
    Dyadic x = parse_dyadic(v);
    for (int t = 0; t < d.size(); ++t)
      if (d.time(t) == x) out.insert(t);
  }
  return out;
}

Interpretation from_closure(const CanonicalModel& m) {
  Interpretation i;
  for (const auto& l : m.literals)
    if (l.kind == LitKind::Atom) i.assignment[l.atom] = m.extension(l);
  return i;
}

bool any_box_in_bodies(const Program& p) {
  for (const auto& r : p.rules)
    for (const auto& l : r.body)
      if (l.kind == LitKind::Box) return true;
  return false;
}

}  // namespace

TEST_CASE("closure on the introductory program") {
  Program p = parse_program(kIntro);
  DataInstance d1 = parse_data("B@0 B@1/2 C@3/2");
  DataInstance d2 = parse_data("B@0 C@3/2");
  CanonicalModel m1 = closure(p, d1);
  CHECK_FALSE(m1.inconsistent);
  CHECK(m1.extension(Literal::make_atom("B1")).count(0));
  CHECK(m1.extension(Literal::make_atom("B1")).count(1));
  CHECK(certain_answers_horn(p, "A", d1) == at(d1, {"3/2"}));
  CHECK(closure(p, d2).extension(Literal::make_atom("A")).empty());
  CHECK(certain_answers_horn(p, "A", d2).empty());
  CHECK(consistent(p, d1));

  Program bad = parse_program("B -> .");
  CHECK(closure(bad, parse_data("B@0")).inconsistent);
  CHECK_FALSE(consistent(bad, parse_data("B@0")));
  DataInstance d3 = parse_data("B@0 C@1");
  CHECK(certain_answers_horn(bad, "A", d3) == TimestampSet{0, 1});
  CHECK(consistent(Program{}, d3));
  CHECK_THROWS_AS(closure(parse_program("X -> T | F."), d3), FragmentError);
}

TEST_CASE("model checking") {
  Program p = parse_program(kIntro);
  DataInstance d1 = parse_data("B@0 B@1/2 C@3/2");
  Interpretation i;
  i.assignment["B1"] = {0, 1};
  i.assignment["A"] = {2};
  CHECK(is_model(p, d1, i));
  i.assignment["A"] = {};
  CHECK_FALSE(is_model(p, d1, i));
  i.assignment["B"] = {0};  // drops a data fact
  i.assignment["A"] = {2};
  CHECK_FALSE(is_model(p, d1, i));
  CHECK(is_model(Program{}, d1, Interpretation{}));
}

TEST_CASE("oracle examples") {
  DataInstance d1 = parse_data("B@0 B@1/2 C@3/2");
  for (bool par : {false, true}) {
    OracleOptions o;
    o.parallel = par;
    CHECK(certain_answers_bruteforce(parse_program(kIntro), "A", d1, o) == at(d1, {"3/2"}));
    CHECK(certain_answers_bruteforce(parse_program("X -> T | F."), "T", parse_data("X@0"), o).empty());
    DataInstance runs = parse_data(kRunsData);
    TimestampSet p1 = certain_answers_bruteforce(parse_program(kRunsProgram), "P1", runs, o);
    // The range (1,2) is open, so P0@4 cannot feed P1@5 at distance 1.
    CHECK(p1 == at(runs, {"3/2"}));
    std::string closed_step = kRunsProgram;
    closed_step.replace(closed_step.find("(1,2)"), 5, "[1,2)");
    CHECK(certain_answers_bruteforce(parse_program(closed_step), "P1", runs, o) == at(runs, {"3/2", "5"}));
    CHECK(p1 == certain_answers_horn(parse_program(kRunsProgram), "P1", runs));
    CHECK(certain_answers_bruteforce(parse_program("B -> ."), "A", parse_data("B@0 C@1"), o) == TimestampSet{0, 1});
  }
  CHECK(certain_answers_enumerate(parse_program("X -> T | F."), "T", parse_data("X@0")).empty());
  CHECK_THROWS_AS(certain_answers_enumerate(parse_program("X -> T | F."), "T", parse_data("X@0 @1 @2 @3 @4 @5"), 1000),
                  BudgetExceeded);
  OracleOptions tiny;
  tiny.budget = 3;
  CHECK_THROWS_AS(
      certain_answers_bruteforce(parse_program("A -> B | C. B -> D | E. C -> D | E."), "D", parse_data("A@0 A@1 A@2"), tiny),
      BudgetExceeded);
}

TEST_CASE("search agrees with plain enumeration") {
  Rng rng(11);
  GenBounds b;
  b.timestamps = 4;
  int compared = 0;
  for (int trial = 0; trial < 600; ++trial) {
    Fragment f = all_fragments()[trial % all_fragments().size()];
    Program p = random_program(rng, f, b);
    std::vector<std::string> names(p.atoms.begin(), p.atoms.end());
    if (names.empty()) continue;
    DataInstance d = random_instance(rng, names, b);
    const std::string& q = names[trial % names.size()];
    TimestampSet expected;
    try {
      expected = certain_answers_enumerate(p, q, d, 1 << 16);
    } catch (const BudgetExceeded&) {
      continue;
    }
    INFO(render(p), "\n", render(d), "\nquery ", q);
    OracleOptions serial;
    serial.parallel = false;
    CHECK(certain_answers_bruteforce(p, q, d, serial) == expected);
    CHECK(certain_answers_bruteforce(p, q, d) == expected);
    ++compared;
  }
  CHECK(compared > 400);
}

TEST_CASE("closure agrees with the oracle on Horn programs") {
  Rng rng(12);
  for (int trial = 0; trial < 400; ++trial) {
    Fragment f = trial % 2 ? Fragment::HornDatalog : Fragment::HornNonpunctualDtc;
    Program p = random_program(rng, f, GenBounds{});
    std::vector<std::string> names(p.atoms.begin(), p.atoms.end());
    if (names.empty()) continue;
    DataInstance d = random_instance(rng, names, GenBounds{});
    INFO(render(p), "\n", render(d));
    CanonicalModel m = closure(p, d);
    for (const auto& q : names) CHECK(certain_answers_horn(p, q, d) == certain_answers_bruteforce(p, q, d));
    if (!m.inconsistent) {
      CHECK(is_model(p, d, from_closure(m)));
      // The closure is minimal: dropping any derived fact breaks a rule.
      for (const auto& [lit, t] : m.facts()) {
        if (lit.kind != LitKind::Atom || d.entries()[t].atoms.count(lit.atom)) continue;
        Interpretation smaller = from_closure(m);
        smaller.assignment[lit.atom].erase(t);
        CHECK_FALSE(is_model(p, d, smaller));
      }
    }
    // Stability: closing again from the closure itself adds nothing.
    if (!m.inconsistent) {
      std::vector<DataEntry> es = d.entries();
      for (const auto& [lit, t] : m.facts())
        if (lit.kind == LitKind::Atom) es[t].atoms.insert(lit.atom);
      CanonicalModel again = closure(p, DataInstance(es));
      for (const auto& l : m.literals)
        if (l.kind == LitKind::Atom) CHECK(again.extension(l) == m.extension(l));
    }
  }
}

TEST_CASE("closure is monotone without box bodies") {
  Rng rng(13);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Program p = random_program(rng, Fragment::HornDatalog, GenBounds{});
    if (any_box_in_bodies(p) || p.atoms.empty()) continue;
    std::vector<std::string> names(p.atoms.begin(), p.atoms.end());
    DataInstance d = random_instance(rng, names, GenBounds{});
    std::vector<DataEntry> es = d.entries();
    es[rng() % es.size()].atoms.insert(names[rng() % names.size()]);
    CanonicalModel small = closure(p, d), big = closure(p, DataInstance(es));
    if (big.inconsistent) continue;
    for (const auto& [lit, t] : small.facts()) CHECK(big.has(lit, t));
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("weakening a head never adds certain answers") {
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    Program p = random_program(rng, Fragment::HornDatalog, GenBounds{});
    std::vector<std::string> names(p.atoms.begin(), p.atoms.end());
    if (names.empty()) continue;
    std::vector<Rule> rules = p.rules;
    size_t i = rng() % rules.size();
    if (rules[i].head.empty()) continue;
    std::string head = rules[i].head[0].atom;
    rules[i].head.push_back(Literal::make_atom("Fresh"));
    Program weak(rules);
    DataInstance d = random_instance(rng, names, GenBounds{});
    TimestampSet strong = certain_answers_horn(p, head, d), weakened = certain_answers_bruteforce(weak, head, d);
    if (!consistent(p, d)) continue;
    for (int t : weakened) CHECK(strong.count(t));
  }
}

TEST_CASE("oracle with many distinct ranges") {
  // Window tables are cached per range; earlier tables must survive later ones.
  std::string text;
  for (int k = 1; k <= 40; ++k) text += "DIA [0," + std::to_string(k) + "] B -> A | C. ";
  Program p = parse_program(text);
  DataInstance d = parse_data("B@0 @1 @2 @50");
  CHECK(certain_answers_bruteforce(p, "A", d).empty());
  CHECK(certain_answers_bruteforce(parse_program(text + "C -> ."), "A", d) == TimestampSet{0, 1, 2});
}
