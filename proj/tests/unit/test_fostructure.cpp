#include <random>

#include "doctest.h"
#include "mtl/eval.hpp"
#include "mtl/fostructure.hpp"
#include "mtl/generate.hpp"
#include "mtl/textio.hpp"

using namespace mtl;
using namespace mtl::logic;

namespace {
Dyadic D(const char* s) { return parse_dyadic(s); }

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

// Non-negative integer multiple check by exact scaling.
bool divisible(const Dyadic& a, const Dyadic& b, const Dyadic& d) {
  if (a < b) return false;
  Dyadic diff = a - b;
  unsigned e = std::max(diff.exponent(), d.exponent());
  return diff.scaled(e) % d.scaled(e) == 0;
}
}  // namespace

TEST_CASE("encode examples") {
  FOStructure s = encode(parse_data("B@0 B@1/2 C@3/2"));
  CHECK(s.bit_fr(1, s.ell()));
  CHECK(s.bit_in(2, 0));
  CHECK(s.bit_fr(2, s.ell()));
  CHECK_FALSE(s.bit_in(1, 0));
  CHECK(s.ell() >= 2);
  CHECK(s.atom("B", 0));
  CHECK_FALSE(s.atom("B", 2));

  FOStructure one = encode(parse_data("A@13/4"));
  CHECK(one.decode(0) == D("13/4"));
  CHECK(one.bit_in(0, 0));
  CHECK(one.bit_in(0, 1));
  CHECK_FALSE(one.bit_fr(0, one.ell()));
  CHECK(one.bit_fr(0, one.ell() - 1));
}

TEST_CASE("decode inverts encode") {
  Rng rng(3);
  GenBounds b;
  b.timestamps = 8;
  b.max_exponent = 5;
  b.max_endpoint = 40;
  for (int i = 0; i < 200; ++i) {
    DataInstance d = random_instance(rng, atom_names(3), b);
    FOStructure s = encode(d);
    CHECK(s.ell() >= s.max_index());
    for (int t = 0; t <= s.max_index(); ++t) {
      CHECK(s.decode(t) == d.time(t));
      if (t > 0) CHECK(s.decode(t - 1) < s.decode(t));
      for (const auto& a : atom_names(3)) CHECK(s.atom(a, t) == d.has(t, a));
    }
  }
}

TEST_CASE("dist formula examples") {
  FOStructure s = encode(parse_data("A@1/2 A@3/2"));
  Evaluator ev(s);
  auto eq1 = dist_formula(D("1"), Cmp::Eq);
  CHECK(ev.holds(eq1.formula, {{eq1.x.id, 1}, {eq1.y.id, 0}}));
  CHECK_FALSE(ev.holds(eq1.formula, {{eq1.x.id, 0}, {eq1.y.id, 1}}));
  auto eq0 = dist_formula(D("0"), Cmp::Eq);
  FOStructure s3 = encode(parse_data("A@0 @1/4 @3"));
  Evaluator ev3(s3);
  for (int x = 0; x < s3.domain_size(); ++x)
    for (int y = 0; y < s3.domain_size(); ++y)
      CHECK(ev3.holds(eq0.formula, {{eq0.x.id, x}, {eq0.y.id, y}}) ==
            (x == y && s3.is_timestamp(x)));
}

TEST_CASE("dist formula agrees with arithmetic") {
  Rng rng(17);
  GenBounds b;
  const Dyadic rs[] = {D("1/2"), D("1"), D("3/2"), D("2")};
  const Cmp cmps[] = {Cmp::Eq, Cmp::Lt, Cmp::Le, Cmp::Gt, Cmp::Ge};
  std::vector<BinaryFormula> fs;
  for (const auto& r : rs)
    for (Cmp c : cmps) fs.push_back(dist_formula(r, c));
  for (int i = 0; i < 40; ++i) {
    DataInstance d = random_instance(rng, {"A"}, b);
    FOStructure s = encode(d);
    Evaluator ev(s);
    size_t k = 0;
    for (const auto& r : rs)
      for (Cmp c : cmps) {
        const auto& f = fs[k++];
        for (int x = 0; x < s.domain_size(); ++x)
          for (int y = 0; y < s.domain_size(); ++y) {
            bool want = s.is_timestamp(x) && s.is_timestamp(y) &&
                        arith(c, signed_difference(d.time(x), d.time(y)), r);
            bool got = ev.holds(f.formula, {{f.x.id, x}, {f.y.id, y}});
            if (got != want) {
              INFO(render(d), " r=", r.str(), " cmp=", cmp_str(c), " x=", x, " y=", y);
              CHECK(got == want);
            }
            CHECK(builtin_dist(s, c, r, x, y) == want);
          }
      }
  }
}

TEST_CASE("divisibility automaton") {
  BitAutomaton a3 = divisibility_automaton(3);
  CHECK(a3.states == 3);
  CHECK(a3.accepts({0, 1, 1}));
  CHECK_FALSE(a3.accepts({1, 0, 1}));
  BitAutomaton a1 = divisibility_automaton(1);
  CHECK(a1.accepts({1, 0, 1}));
  CHECK(a1.accepts({}));
  for (unsigned k = 1; k <= 16; ++k) {
    BitAutomaton a = divisibility_automaton(k);
    unsigned odd = k;
    int twos = 0;
    while (odd % 2 == 0) odd /= 2, ++twos;
    // residues of the odd part, one check state per factor of two, one dead state
    int minimal = twos == 0 ? static_cast<int>(k) : static_cast<int>(odd) + twos + 1;
    CHECK(a.states == minimal);
    REQUIRE(a.delta.size() == static_cast<size_t>(a.states));
    for (const auto& row : a.delta)
      for (int to : row) CHECK((to >= 0 && to < a.states));
    for (unsigned v = 0; v < 1024; ++v) {
      std::vector<int> bits;
      for (unsigned x = v; x; x >>= 1) bits.push_back(x & 1);
      CHECK(a.accepts(bits) == (v % k == 0));
      bits.push_back(0);
      bits.push_back(0);
      CHECK(a.accepts(bits) == (v % k == 0));
    }
  }
}

TEST_CASE("div formula examples") {
  FOStructure s = encode(parse_data("A@1/4 A@3/4 A@7/8"));
  Evaluator ev(s);
  RprQuery q = div_formula(D("1/2"));
  CHECK(ev.holds(q, {1, 0}));
  CHECK_FALSE(ev.holds(q, {2, 0}));
  CHECK_FALSE(ev.holds(q, {0, 1}));
  for (int x = 0; x < 3; ++x) CHECK(ev.holds(q, {x, x}));

  FOStructure ints = encode(parse_data("@0 @1 @3 @6"));
  Evaluator ev2(ints);
  RprQuery one = div_formula(D("1"));
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) CHECK(ev2.holds(one, {x, y}) == (x >= y));
}

TEST_CASE("div formula agrees with arithmetic") {
  Rng rng(23);
  GenBounds b;
  const Dyadic ds[] = {D("1/2"), D("1"), D("3/2")};
  for (const auto& dv : ds) {
    RprQuery q = div_formula(dv);
    for (int i = 0; i < 34; ++i) {
      DataInstance d = random_instance(rng, {"A"}, b);
      FOStructure s = encode(d);
      Evaluator ev(s);
      for (int x = 0; x <= s.max_index(); ++x)
        for (int y = 0; y <= s.max_index(); ++y) {
          INFO(render(d), " d=", dv.str(), " x=", x, " y=", y);
          CHECK(ev.holds(q, {x, y}) == divisible(d.time(x), d.time(y), dv));
        }
    }
  }
}

TEST_CASE("expanded built-ins agree with arithmetic built-ins") {
  Rng rng(29);
  GenBounds b;
  b.timestamps = 4;
  Var x = fresh_var("x"), y = fresh_var("y"), z = fresh_var("z");
  std::vector<Formula> fs = {
      f_in(parse_range("[1,2)"), T(x), T(y)),
      f_in(parse_range("(1/2,inf)"), T(x), T(y)),
      f_int(parse_range("(1,3]"), T(x), T(y), T(z)),
      f_int(parse_range("[0,inf)"), T(x), T(y), T(z)),
      f_last(D("1/2"), 2, 3, T(x)),
      f_last(D("1"), 1, 2, T(y)),
      f_suc(T(x), T(y)),
  };
  for (int i = 0; i < 25; ++i) {
    FOStructure s = encode(random_instance(rng, {"A"}, b));
    Evaluator fast(s);
    EvalOptions o;
    o.expand_builtins = true;
    Evaluator slow(s, o);
    for (const auto& f : fs) {
      Formula e = expand_builtins(f);
      for (int a = 0; a < s.domain_size(); ++a)
        for (int c = 0; c < s.domain_size(); ++c)
          for (int t = 0; t < s.domain_size(); ++t) {
            Binding bd{{x.id, a}, {y.id, c}, {z.id, t}};
            bool want = fast.holds(f, bd);
            CHECK(slow.holds(f, bd) == want);
            CHECK(fast.holds(e, bd) == want);
          }
    }
  }
}
