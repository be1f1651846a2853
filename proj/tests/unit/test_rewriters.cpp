#include <random>

#include "doctest.h"
#include "mtl/canonical.hpp"
#include "mtl/eval.hpp"
#include "mtl/generate.hpp"
#include "mtl/oracle.hpp"
#include "mtl/query_text.hpp"
#include "mtl/rewriters.hpp"
#include "mtl/textio.hpp"

using namespace mtl;
using namespace mtl::logic;

namespace {

TimestampSet at(const DataInstance& d, std::initializer_list<const char*> values) {
  TimestampSet out;
  for (const char* v : values) {
    Dyadic x = parse_dyadic(v);
    for (int t = 0; t < d.size(); ++t)
      if (d.time(t) == x) out.insert(t);
  }
  return out;
}

TimestampSet run(const ExtQuery& q, const DataInstance& d) {
  FOStructure s = encode(d);
  EvalOptions o;
  o.allow_plus = q.lang == Language::FOPlus;
  Evaluator ev(s, o);
  return ev.answers(q);
}

TimestampSet expected(const Program& p, const std::string& atom, const DataInstance& d) {
  return is_horn(p) ? certain_answers_horn(p, atom, d) : certain_answers_bruteforce(p, atom, d);
}

// Random programs of the fragment against the closure or the model search.
void agree_on_random(Fragment f, std::uint64_t seed, int trials, GenBounds b = {}) {
  Rng rng(seed);
  int compared = 0;
  for (int trial = 0; trial < trials; ++trial) {
    Program p = random_program(rng, f, b);
    auto names = atom_names(b.atoms);
    std::string atom = f == Fragment::UniformExample ? "S1" : names[trial % names.size()];
    ExtQuery q;
    try {
      q = rewrite(f, p, atom);
    } catch (const std::length_error&) {
      continue;
    }
    std::vector<std::string> data_atoms = f == Fragment::UniformExample ? std::vector<std::string>{"B"} : names;
    for (int i = 0; i < 3; ++i) {
      DataInstance d = random_instance(rng, data_atoms, b);
      TimestampSet want;
      try {
        want = expected(p, atom, d);
      } catch (const BudgetExceeded&) {
        continue;
      }
      INFO(to_string(f), "\n", render(p), "\n", render(d), "\nquery ", atom);
      CHECK(run(q, d) == want);
      ++compared;
    }
  }
  CHECK(compared > trials);
}

}  // namespace

TEST_CASE("datalog rewriting of the introductory program") {
  Program p = parse_program("BOX [0,2) B -> B1. DIA [1,1] B1 -> A.");
  DataInstance d1 = parse_data("B@0 B@1/2 C@3/2");
  DataInstance d2 = parse_data("B@0 C@3/2");
  DatalogQuery q = rewrite_horn_datalog(p, "A");
  FOStructure s1 = encode(d1), s2 = encode(d2);
  Evaluator e1(s1), e2(s2);
  CHECK(e1.answers(q) == at(d1, {"3/2"}));
  CHECK(e2.answers(q).empty());
  // Intervals of B1 are maximal runs of consecutive timestamps.
  auto runs = e1.datalog_relation(q, "%B1'");
  CHECK(runs.count({0, 1}));
  CHECK(runs.count({0, 0}));
  CHECK_FALSE(runs.count({0, 2}));
  CHECK_THROWS_AS(rewrite_horn_datalog(parse_program("A -> B | C."), "A"), FragmentError);
}

TEST_CASE("core diamond rewriting on the digraph example") {
  Program p = parse_program("DIA [1,inf) B -> A.");
  DataInstance d = parse_data("B@0 C@3/2");
  ExtQuery q = rewrite_core_diamond_tc(p, "A");
  CHECK(q.lang == Language::TC);
  CHECK(run(q, d) == at(d, {"3/2"}));
  // Chains through several atoms, and a disjointness constraint.
  Program chain = parse_program("DIA (0,1] B -> C. DIA (0,1] C -> A. C & D -> .");
  DataInstance d2 = parse_data("B@0 @1/2 @1 @3");
  CHECK(run(rewrite_core_diamond_tc(chain, "A"), d2) == at(d2, {"1"}));
  DataInstance d3 = parse_data("B@0 @1/2 D@1 @3");
  CHECK(run(rewrite_core_diamond_tc(chain, "A"), d3).size() == 4);
}

TEST_CASE("single-timestamp structures") {
  DataInstance one = parse_data("B@0");
  Program p = parse_program("DIA [0,1] B -> A. B -> C | D. C -> A. D -> A.");
  CHECK(run(rewrite(Fragment::NonpunctualTc, p, "A"), one) == TimestampSet{0});
  CHECK(run(rewrite_core_diamond_tc(parse_program("DIA [0,1] B -> A."), "A"), one) == TimestampSet{0});
  CHECK(run(rewrite_core_diamond_tc(parse_program("DIA (0,1] B -> A."), "A"), one).empty());
  CHECK(run(rewrite_infinite_fo(parse_program("DIA [0,inf) B -> A."), "A"), one) == TimestampSet{0});
  ExtQuery punct{Language::RPR, rewrite_punctual_rpr(parse_program("DIA [1,1] B -> A. B -> A."), "A"), {}};
  CHECK(run(punct, one) == TimestampSet{0});
  CHECK(run(rewrite_horn_nonpunctual_dtc(parse_program("DIA [0,1] B -> A."), "A"), one) == TimestampSet{0});
}

TEST_CASE("punctual rewriting") {
  Program p = parse_program("DIA [1,1] P -> Q. DIA [3/2,3/2] P & Q -> P.");
  DataInstance d = parse_data("P@0 P@1/4 P@3/4 P@7/8 @7/4 @15/8 @3 Q@13/4");
  CHECK(punctual_unit(p) == parse_dyadic("1/2"));
  ExtQuery qp = rewrite(Fragment::PunctualRpr, p, "P"), qq = rewrite(Fragment::PunctualRpr, p, "Q");
  TimestampSet want_p = at(d, {"0", "1/4", "3/4", "7/8", "7/4", "13/4"}), want_q = at(d, {"7/4", "15/8", "13/4"});
  CHECK(certain_answers_horn(p, "P", d) == want_p);
  CHECK(certain_answers_bruteforce(p, "P", d) == want_p);
  CHECK(run(qp, d) == want_p);
  CHECK(certain_answers_horn(p, "Q", d) == want_q);
  CHECK(certain_answers_bruteforce(p, "Q", d) == want_q);
  CHECK(run(qq, d) == want_q);
  CHECK_THROWS_AS(rewrite_punctual_rpr(parse_program("DIA [0,1] P -> Q."), "Q"), FragmentError);
}

TEST_CASE("non-punctual rewritings") {
  Program p = parse_program("DIA (2,4] P -> P. DIA [1,2) P -> P. DIA [3,inf) Q -> Q.");
  DataInstance d = parse_data("P@1/2 P@5/4 Q@5/2 @15/4 @5 @25/4 @10");
  TimestampSet oracle = certain_answers_bruteforce(p, "P", d);
  for (int t : at(d, {"1/2", "5/4", "5/2", "25/4"})) CHECK(oracle.count(t));
  CHECK(certain_answers_horn(p, "P", d) == oracle);
  CHECK(run(rewrite(Fragment::NonpunctualTc, p, "P"), d) == oracle);
  CHECK(run(rewrite(Fragment::HornNonpunctualDtc, p, "P"), d) == oracle);
  CHECK(run(rewrite(Fragment::NonpunctualTc, p, "Q"), d) == certain_answers_bruteforce(p, "Q", d));
}

TEST_CASE("trace shapes") {
  Program p = parse_program("DIA (1,2) P -> Q. DIA [0,4] P -> R. BOX [2,inf) Q -> R.");
  auto shapes = trace_shapes(p);
  CHECK(shapes.at("P").length == 4);
  CHECK(shapes.at("P").shortest->str() == "(0,1)");
  CHECK(shapes.at("P").longest->str() == "[0,4]");
  CHECK(shapes.at("!Q").length == 0);
  CHECK_FALSE(shapes.at("!Q").shortest);
}

TEST_CASE("restricted normal form") {
  Program p = parse_program("DIA [0,1] B & BOX [0,2) C -> A.");
  Program n = without_closed_zero(p);
  CHECK(n.rules.size() == 2);
  for (const auto& r : n.rules)
    for (const auto& l : r.body)
      if (l.range) CHECK_FALSE(l.range->contains_zero());
  DataInstance d = parse_data("B,C@0 C@1/2 B,C@1 C@3");
  CHECK(certain_answers_horn(n, "A", d) == certain_answers_horn(p, "A", d));
}

TEST_CASE("rewritings agree with the oracle: datalog") { agree_on_random(Fragment::HornDatalog, 21, 120); }
TEST_CASE("rewritings agree with the oracle: core transitive closure") {
  agree_on_random(Fragment::CoreDiamondTc, 22, 120);
}
TEST_CASE("rewritings agree with the oracle: unbounded ranges") { agree_on_random(Fragment::InfiniteFo, 23, 80); }
TEST_CASE("rewritings agree with the oracle: punctual") { agree_on_random(Fragment::PunctualRpr, 24, 60); }
TEST_CASE("rewritings agree with the oracle: non-punctual") { agree_on_random(Fragment::NonpunctualTc, 25, 40); }
TEST_CASE("rewritings agree with the oracle: deterministic closure") {
  agree_on_random(Fragment::HornNonpunctualDtc, 26, 60);
}
TEST_CASE("rewritings agree with the oracle: cyclic example") {
  GenBounds b;
  b.timestamps = 9;
  agree_on_random(Fragment::UniformExample, 27, 60, b);
}

TEST_CASE("fragment checks and languages") {
  Program box = parse_program("BOX [0,1] B -> A.");
  CHECK_THROWS_AS(rewrite(Fragment::CoreDiamondTc, box, "A"), FragmentError);
  CHECK_THROWS_AS(rewrite(Fragment::InfiniteFo, box, "A"), FragmentError);
  CHECK_THROWS_AS(rewrite(Fragment::UniformExample, uniform_example_program(Dyadic::integer(1)), "S2"),
                  FragmentError);
  for (Fragment f : all_fragments()) {
    Rng rng(5);
    Program p = random_program(rng, f, GenBounds{});
    std::string atom = f == Fragment::UniformExample ? "S1" : "A";
    ExtQuery q = rewrite(f, p, atom);
    CHECK(q.lang == target_language(f));
    // The text form reads back to the same answers.
    DataInstance d = random_instance(rng, {"A", "B", "C"}, GenBounds{});
    CHECK(run(parse_query(render(q)), d) == run(q, d));
  }
}

TEST_CASE("positive queries over rewritings") {
  Program p = parse_program("DIA [1,inf) B -> A. C -> D. A & D -> .");
  DataInstance d = parse_data("B@0 C@1/2 @1 @3");
  Var x = named_var("x"), y = named_var("y");
  // A at x and D somewhere earlier.
  Formula phi = f_and(f_atom("A", T(x)), f_exists({y}, f_and(f_less(T(y), T(x)), f_atom("D", T(y)))));
  std::string bottom = fresh_bottom_atom(p);
  CHECK_FALSE(p.atoms.count(bottom));
  for (Fragment f : {Fragment::HornDatalog, Fragment::InfiniteFo}) {
    std::map<std::string, ExtQuery> qs{{"A", rewrite(f, p, "A")}, {"D", rewrite(f, p, "D")}};
    ExtQuery lifted = lift_positive_query(qs, phi, x, rewrite(f, p, bottom));
    CHECK(lifted.lang == target_language(f));
    CHECK(run(lifted, d) == at(d, {"1", "3"}));
    CHECK(run(parse_query(render(lifted)), d) == at(d, {"1", "3"}));
    // Inconsistent data makes every timestamp an answer.
    DataInstance bad = parse_data("B@0 C@1");
    CHECK(run(lifted, bad).size() == 2);
  }
  Program punct = parse_program("DIA [1,1] B -> A. C -> D.");
  std::map<std::string, ExtQuery> qs{{"A", rewrite(Fragment::PunctualRpr, punct, "A")},
                                     {"D", rewrite(Fragment::PunctualRpr, punct, "D")}};
  ExtQuery lifted = lift_positive_query(qs, phi, x, rewrite(Fragment::PunctualRpr, punct, fresh_bottom_atom(punct)));
  CHECK(run(lifted, d) == at(d, {"1"}));
  CHECK_THROWS_AS(lift_positive_query(qs, f_not(f_atom("A", T(x))), x, qs.at("A")), std::invalid_argument);
  std::map<std::string, ExtQuery> mixed{{"A", rewrite(Fragment::InfiniteFo, p, "A")}};
  CHECK_THROWS_AS(lift_positive_query(mixed, f_atom("A", T(x)), x, qs.at("A")), std::invalid_argument);
}
