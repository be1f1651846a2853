#include "mtl/generate.hpp"

#include <algorithm>
#include <stdexcept>

namespace mtl {

namespace {
const std::vector<std::pair<Fragment, std::string>>& fragment_names() {
  static const std::vector<std::pair<Fragment, std::string>> names = {
      {Fragment::HornDatalog, "horn-datalog"},
      {Fragment::CoreDiamondTc, "core-diamond-tc"},
      {Fragment::InfiniteFo, "infinite-fo"},
      {Fragment::PunctualRpr, "punctual-rpr"},
      {Fragment::NonpunctualTc, "nonpunctual-tc"},
      {Fragment::HornNonpunctualDtc, "horn-nonpunctual-dtc"},
      {Fragment::UniformExample, "uniform-example"},
  };
  return names;
}

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

bool fail(std::string* why, const std::string& msg) {
  if (why) *why = msg;
  return false;
}
}  // namespace

std::string to_string(Fragment f) {
  for (const auto& [k, n] : fragment_names())
    if (k == f) return n;
  return "?";
}

std::optional<Fragment> fragment_from_string(const std::string& s) {
  for (const auto& [k, n] : fragment_names())
    if (n == s) return k;
  return std::nullopt;
}

const std::vector<Fragment>& all_fragments() {
  static const std::vector<Fragment> all = {Fragment::HornDatalog,  Fragment::CoreDiamondTc,
                                            Fragment::InfiniteFo,   Fragment::PunctualRpr,
                                            Fragment::NonpunctualTc, Fragment::HornNonpunctualDtc,
                                            Fragment::UniformExample};
  return all;
}

Program uniform_example_program(const Dyadic& d) {
  Range r(Dyadic(), true, d, true);
  auto rule = [&](const std::string& from, const std::string& to) {
    return Rule{{Literal::diamond(r, from)}, {Literal::make_atom(to)}};
  };
  return Program({Rule{{Literal::make_atom("B")}, {Literal::make_atom("S0")}}, rule("S0", "S1"),
                  rule("S1", "S2"), rule("S2", "S3"), rule("S3", "S1")});
}

bool fits(const Program& p, Fragment f, std::string* why) {
  FragmentDescriptor d = classify(p);
  bool horn = d.hornity != Hornity::Full;
  auto heads_atomic = [&] {
    for (const auto& r : p.rules)
      for (const auto& l : r.head)
        if (l.kind != LitKind::Atom) return false;
    return true;
  };
  switch (f) {
    case Fragment::HornDatalog:
      if (!horn) return fail(why, "program is not Horn");
      if (!heads_atomic()) return fail(why, "temporal head literal");
      return true;
    case Fragment::CoreDiamondTc:
      if (d.hornity != Hornity::Core) return fail(why, "program is not core");
      if (d.operator_use != OperatorUse::DiamondOnly) return fail(why, "box operator present");
      if (!heads_atomic()) return fail(why, "temporal head literal");
      for (const auto& r : p.rules)
        if (r.is_constraint())
          for (const auto& l : r.body)
            if (l.kind != LitKind::Atom) return fail(why, "non-atomic disjointness constraint");
      return true;
    case Fragment::InfiniteFo:
      if (d.range_class != RangeClass::InfiniteOnly) return fail(why, "bounded range present");
      return true;
    case Fragment::PunctualRpr:
      if (d.range_class != RangeClass::PunctualOnly && d.range_class != RangeClass::InfiniteOnly)
        return fail(why, "non-punctual range present");
      for (const auto& r : program_ranges(p))
        if (!r.is_punctual()) return fail(why, "non-punctual range present");
      return true;
    case Fragment::NonpunctualTc:
      for (const auto& r : program_ranges(p))
        if (r.is_punctual()) return fail(why, "punctual range present");
      return true;
    case Fragment::HornNonpunctualDtc:
      if (!horn) return fail(why, "program is not Horn");
      if (!heads_atomic()) return fail(why, "temporal head literal");
      for (const auto& r : program_ranges(p))
        if (r.is_punctual()) return fail(why, "punctual range present");
      return true;
    case Fragment::UniformExample: {
      auto ranges = program_ranges(p);
      if (ranges.empty() || !ranges[0].upper() || ranges[0].lower() != Dyadic())
        return fail(why, "not the uniform example family");
      if (p == uniform_example_program(*ranges[0].upper())) return true;
      return fail(why, "not the uniform example family");
    }
  }
  return false;
}

std::vector<std::string> atom_names(int n) {
  static const char* names[] = {"A", "B", "C", "D", "E", "F", "G", "H"};
  if (n < 0 || n > 8) throw std::invalid_argument("atom count out of range");
  return std::vector<std::string>(names, names + n);
}

Dyadic random_dyadic(Rng& rng, unsigned max_exponent, int below) {
  unsigned e = uniform(rng, 0, static_cast<int>(max_exponent));
  int steps = below << e;
  return Dyadic(BigInt(uniform(rng, 0, steps - 1)), e);
}

Range random_range(Rng& rng, RangeClass cls, const GenBounds& b) {
  auto positive = [&] {
    Dyadic r;
    while (r.is_zero()) r = random_dyadic(rng, b.max_exponent, b.max_endpoint);
    return r;
  };
  switch (cls) {
    case RangeClass::PunctualOnly:
      return Range::punctual(coin(rng, 0.05) ? Dyadic() : positive());
    case RangeClass::InfiniteOnly:
      return Range(random_dyadic(rng, b.max_exponent, b.max_endpoint), coin(rng, 0.5), std::nullopt, true);
    case RangeClass::NonPunctualOnly: {
      if (coin(rng, 0.2)) return random_range(rng, RangeClass::InfiniteOnly, b);
      Dyadic lo = random_dyadic(rng, b.max_exponent, b.max_endpoint);
      Dyadic hi = lo;
      while (!(lo < hi)) hi = random_dyadic(rng, b.max_exponent, b.max_endpoint + 1);
      return Range(lo, coin(rng, 0.5), hi, coin(rng, 0.5));
    }
    case RangeClass::Arbitrary:
      break;
  }
  int k = uniform(rng, 0, 2);
  return random_range(rng, k == 0 ? RangeClass::PunctualOnly
                           : k == 1 ? RangeClass::InfiniteOnly
                                    : RangeClass::NonPunctualOnly, b);
}

DataInstance random_instance(Rng& rng, const std::vector<std::string>& atoms, const GenBounds& b) {
  unsigned e = uniform(rng, 0, static_cast<int>(b.max_exponent));
  int slots = b.max_endpoint << e;
  int n = uniform(rng, 1, std::min(b.timestamps, slots));
  std::vector<int> picks(slots);
  for (int i = 0; i < slots; ++i) picks[i] = i;
  std::shuffle(picks.begin(), picks.end(), rng);
  picks.resize(n);
  std::sort(picks.begin(), picks.end());
  std::vector<DataEntry> entries;
  for (int v : picks) {
    DataEntry entry{Dyadic(BigInt(v), e), {}};
    for (const auto& a : atoms)
      if (coin(rng, 0.35)) entry.atoms.insert(a);
    entries.push_back(entry);
  }
  return DataInstance(entries);
}

Program random_program(Rng& rng, Fragment f, const GenBounds& b) {
  if (f == Fragment::UniformExample) {
    static const Dyadic ds[] = {Dyadic(BigInt(1), 1), Dyadic(BigInt(1), 0), Dyadic(BigInt(2), 0)};
    return uniform_example_program(ds[uniform(rng, 0, 2)]);
  }
  auto atoms = atom_names(b.atoms);
  auto atom = [&] { return atoms[uniform(rng, 0, static_cast<int>(atoms.size()) - 1)]; };
  RangeClass cls = RangeClass::Arbitrary;
  if (f == Fragment::InfiniteFo) cls = RangeClass::InfiniteOnly;
  if (f == Fragment::PunctualRpr) cls = RangeClass::PunctualOnly;
  if (f == Fragment::NonpunctualTc || f == Fragment::HornNonpunctualDtc) cls = RangeClass::NonPunctualOnly;
  bool diamond_only = f == Fragment::CoreDiamondTc;
  bool horn = f == Fragment::HornDatalog || f == Fragment::CoreDiamondTc || f == Fragment::HornNonpunctualDtc;
  bool temporal_heads = !horn;

  // Punctual and non-punctual programs use multiples of one unit: at most
  // three punctual steps, and no finite range longer than four shortest ones.
  int unit_exp = uniform(rng, -std::min(3, static_cast<int>(b.max_exponent)), 1);
  Dyadic unit = unit_exp >= 0 ? Dyadic::integer(1 << unit_exp) : Dyadic(BigInt(1), static_cast<unsigned>(-unit_exp));
  auto units = [&](int k) { return unit * Dyadic::integer(k); };
  auto range = [&]() -> Range {
    if (cls == RangeClass::PunctualOnly) return Range::punctual(units(coin(rng, 0.05) ? 0 : uniform(rng, 1, 3)));
    if (cls == RangeClass::NonPunctualOnly) {
      if (coin(rng, 0.2)) return Range(units(uniform(rng, 0, 3)), coin(rng, 0.5), std::nullopt, true);
      int lo = uniform(rng, 0, 2);
      return Range(units(lo), coin(rng, 0.5), units(lo + uniform(rng, 1, 4 - lo)), coin(rng, 0.5));
    }
    return random_range(rng, cls, b);
  };

  auto literal = [&](bool allow_temporal) {
    int k = allow_temporal ? uniform(rng, 0, 2) : 0;
    if (k == 0) return Literal::make_atom(atom());
    Range r = range();
    if (k == 1 || diamond_only) return Literal::diamond(r, atom());
    return Literal::box(r, atom());
  };

  std::vector<Rule> rules;
  int n = uniform(rng, 1, b.rules);
  for (int i = 0; i < n; ++i) {
    Rule r;
    if (f == Fragment::CoreDiamondTc) {
      if (coin(rng, 0.15)) {
        r.body = {Literal::make_atom(atom()), Literal::make_atom(atom())};
      } else {
        if (coin(rng, 0.9)) r.body.push_back(literal(true));
        r.head.push_back(Literal::make_atom(atom()));
      }
      rules.push_back(r);
      continue;
    }
    int nb = uniform(rng, coin(rng, 0.9) ? 1 : 0, b.body);
    for (int j = 0; j < nb; ++j) r.body.push_back(literal(true));
    if (horn) {
      if (!coin(rng, 0.12)) r.head.push_back(Literal::make_atom(atom()));
    } else {
      int nh = coin(rng, 0.1) ? 0 : uniform(rng, 1, 2);
      for (int j = 0; j < nh; ++j) r.head.push_back(literal(temporal_heads && coin(rng, 0.3)));
    }
    rules.push_back(r);
  }
  return Program(rules);
}

Program random_horn_diamond_program(Rng& rng, const GenBounds& b, bool linear) {
  auto atoms = atom_names(b.atoms);
  auto pick = [&](const std::vector<std::string>& from) {
    return from[uniform(rng, 0, static_cast<int>(from.size()) - 1)];
  };
  int n = uniform(rng, 1, b.rules);
  std::vector<std::string> heads(n);
  for (auto& h : heads) h = linear || !coin(rng, 0.12) ? pick(atoms) : "";
  std::vector<std::string> derived, data;
  for (const auto& a : atoms)
    (std::find(heads.begin(), heads.end(), a) != heads.end() ? derived : data).push_back(a);

  std::vector<Rule> rules;
  for (const auto& h : heads) {
    Rule r;
    int nb = uniform(rng, coin(rng, 0.9) ? 1 : 0, b.body);
    bool used_derived = false;
    for (int j = 0; j < nb; ++j) {
      bool can_derive = !(linear && used_derived) && !derived.empty();
      bool want_derived = data.empty() || coin(rng, 0.5);
      if (!can_derive && data.empty()) break;
      std::string a = can_derive && want_derived ? pick(derived) : data.empty() ? pick(derived) : pick(data);
      used_derived |= std::find(derived.begin(), derived.end(), a) != derived.end();
      if (coin(rng, 0.25))
        r.body.push_back(Literal::make_atom(a));
      else
        r.body.push_back(Literal::diamond(random_range(rng, RangeClass::Arbitrary, b), a));
    }
    if (!h.empty()) r.head.push_back(Literal::make_atom(h));
    rules.push_back(r);
  }
  return Program(rules);
}

}  // namespace mtl
