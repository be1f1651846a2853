#include "mtl/rewriters.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "mtl/fostructure.hpp"

namespace mtl {

using namespace logic;

namespace {

Formula ts(const Term& t) { return f_leq(t, Term::max()); }
Formula neq(const Term& a, const Term& b) { return f_not(f_eq(a, b)); }

void require(Fragment f, const Program& p) {
  std::string why;
  if (!fits(p, f, &why)) throw FragmentError(to_string(f) + ": " + why);
}

std::vector<std::string> atoms_with(const Program& p, const std::string& atom) {
  std::set<std::string> s = p.atoms;
  s.insert(atom);
  return {s.begin(), s.end()};
}

// r / unit for an exact multiple.
int multiple_of(const Dyadic& r, const Dyadic& unit) {
  unsigned e = std::max(r.exponent(), unit.exponent());
  BigInt a = r.scaled(e), b = unit.scaled(e);
  if (b == 0 || a % b != 0) throw FragmentError("range " + r.str() + " is not a multiple of " + unit.str());
  return static_cast<int>(a / b);
}

int ceil_ratio(const Dyadic& a, const Dyadic& b) {
  unsigned e = std::max(a.exponent(), b.exponent());
  BigInt x = a.scaled(e), y = b.scaled(e);
  return static_cast<int>((x + y - 1) / y);
}

// Whether the simple literal (atom, negated) holds in the type.
bool sigma_holds(const TypeVocabulary& v, const PiType& t, const std::string& atom, bool negated) {
  return t.has(v.simple(atom)) != negated;
}

// Data compatibility: atoms missing from the type are absent from the data.
Formula delta(const TypeVocabulary& v, const PiType& t, const Term& at) {
  std::vector<Formula> parts;
  for (int i = 0; i < v.size(); ++i)
    if (v.letters()[i].kind == TypeLetter::Simple && !t.has(i)) parts.push_back(f_not(f_atom(v.letters()[i].atom, at)));
  return f_and(parts);
}

std::uint64_t simple_mask(const TypeVocabulary& v) {
  std::uint64_t m = 0;
  for (int i = 0; i < v.size(); ++i)
    if (v.letters()[i].kind == TypeLetter::Simple) m |= std::uint64_t(1) << i;
  return m;
}

// A lone timestamp sees only itself through a diamond.
bool realizable_alone(const TypeVocabulary& v, const PiType& t) {
  for (int i = 0; i < v.size(); ++i) {
    const auto& l = v.letters()[i];
    if (l.kind != TypeLetter::Diamond) continue;
    bool sees = (l.steps == 0 && l.range && l.range->contains_zero()) && sigma_holds(v, t, l.atom, l.negated);
    if (t.has(i) != sees) return false;
  }
  return true;
}

// Certain answers on a single-timestamp structure, decided pointwise.
Formula single_point_query(const Program& program, const std::string& atom, const Term& x) {
  TypeVocabulary v(program, {atom});
  std::vector<Formula> countermodels;
  for (const auto& t : enumerate_types(program, v))
    if (realizable_alone(v, t) && !t.has(v.simple(atom))) countermodels.push_back(delta(v, t, x));
  return f_not(f_or(countermodels));
}

struct Sigma {
  std::string atom;
  bool negated = false;
  std::string key() const { return (negated ? "!" : "") + atom; }
  friend auto operator<=>(const Sigma&, const Sigma&) = default;
};

std::vector<Sigma> tracked_sigmas(const TypeVocabulary& v) {
  std::set<Sigma> s;
  for (const auto& l : v.letters())
    if (l.kind == TypeLetter::Diamond) s.insert({l.atom, l.negated});
  return {s.begin(), s.end()};
}

}  // namespace

// ---- types -------------------------------------------------------------

std::string TypeLetter::str() const {
  if (kind == Simple) return atom;
  std::string sigma = (negated ? "!" : "") + atom;
  if (steps > 0) return "DIA_" + std::to_string(steps) + " " + sigma;
  return "DIA " + range->str() + " " + sigma;
}

TypeVocabulary::TypeVocabulary(const Program& p, const std::vector<std::string>& extra) {
  std::set<std::string> atoms = p.atoms;
  atoms.insert(extra.begin(), extra.end());
  for (const auto& a : atoms) letters_.push_back({TypeLetter::Simple, a, false, std::nullopt, 0});
  for (const auto& r : p.rules)
    for (const auto* side : {&r.body, &r.head})
      for (const auto& l : *side) {
        if (l.kind == LitKind::Atom) continue;
        TypeLetter d{TypeLetter::Diamond, l.atom, l.kind == LitKind::Box, l.range, 0};
        bool seen = std::any_of(letters_.begin(), letters_.end(), [&](const TypeLetter& o) {
          return o.kind == TypeLetter::Diamond && o.atom == d.atom && o.negated == d.negated && o.range == d.range;
        });
        if (!seen) letters_.push_back(d);
      }
}

TypeVocabulary TypeVocabulary::punctual_closure(const Program& p, const std::vector<std::string>& extra,
                                                const Dyadic& unit) {
  TypeVocabulary v;
  v.punctual_ = true;
  v.unit_ = unit;
  std::set<std::string> atoms = p.atoms;
  atoms.insert(extra.begin(), extra.end());
  for (const auto& a : atoms) v.letters_.push_back({TypeLetter::Simple, a, false, std::nullopt, 0});
  std::map<Sigma, int> depth;
  for (const auto& r : p.rules)
    for (const auto* side : {&r.body, &r.head})
      for (const auto& l : *side) {
        if (l.kind == LitKind::Atom) continue;
        if (!l.range->is_punctual()) throw FragmentError("non-punctual range " + l.range->str());
        if (l.range->lower().is_zero()) continue;
        int k = multiple_of(l.range->lower(), unit);
        int& d = depth[{l.atom, l.kind == LitKind::Box}];
        d = std::max(d, k);
      }
  for (const auto& [sigma, n] : depth)
    for (int i = 1; i <= n; ++i) v.letters_.push_back({TypeLetter::Diamond, sigma.atom, sigma.negated, std::nullopt, i});
  return v;
}

int TypeVocabulary::simple(const std::string& atom) const {
  for (int i = 0; i < size(); ++i)
    if (letters_[i].kind == TypeLetter::Simple && letters_[i].atom == atom) return i;
  return -1;
}

std::pair<int, bool> TypeVocabulary::letter_of(const Literal& l) const {
  if (l.kind == LitKind::Atom) return {simple(l.atom), false};
  bool box = l.kind == LitKind::Box;
  if (punctual_) {
    // A zero-distance diamond or box is the atom itself.
    if (l.range->lower().is_zero()) return {simple(l.atom), false};
    int k = multiple_of(l.range->lower(), unit_);
    for (int i = 0; i < size(); ++i) {
      const auto& d = letters_[i];
      if (d.kind == TypeLetter::Diamond && d.atom == l.atom && d.negated == box && d.steps == k) return {i, box};
    }
  } else {
    for (int i = 0; i < size(); ++i) {
      const auto& d = letters_[i];
      if (d.kind == TypeLetter::Diamond && d.atom == l.atom && d.negated == box && d.range == l.range) return {i, box};
    }
  }
  throw std::invalid_argument("literal " + l.str() + " outside the vocabulary");
}

std::vector<std::string> TypeVocabulary::atoms() const {
  std::vector<std::string> out;
  for (const auto& l : letters_)
    if (l.kind == TypeLetter::Simple) out.push_back(l.atom);
  return out;
}

bool type_consistent(const Program& program, const TypeVocabulary& vocab, const PiType& t) {
  auto holds = [&](const Literal& l) {
    auto [i, neg] = vocab.letter_of(l);
    return t.has(i) != neg;
  };
  for (const auto& r : program.rules) {
    if (!std::all_of(r.body.begin(), r.body.end(), holds)) continue;
    if (!std::any_of(r.head.begin(), r.head.end(), holds)) return false;
  }
  return true;
}

std::vector<PiType> enumerate_types(const Program& program, const TypeVocabulary& vocab) {
  if (vocab.size() > 24) throw std::length_error("type vocabulary of " + std::to_string(vocab.size()) + " letters");
  std::vector<PiType> out;
  for (std::uint64_t b = 0; b < (std::uint64_t(1) << vocab.size()); ++b)
    if (type_consistent(program, vocab, PiType{b})) out.push_back(PiType{b});
  return out;
}

Dyadic punctual_unit(const Program& program) {
  std::vector<Dyadic> ends;
  for (const auto& r : program_ranges(program)) {
    ends.push_back(r.lower());
    if (r.upper()) ends.push_back(*r.upper());
  }
  return dyadic_gcd(ends);
}

std::map<std::string, TraceShape> trace_shapes(const Program& program) {
  std::map<std::string, TraceShape> out;
  for (const auto& r : program.rules)
    for (const auto* side : {&r.body, &r.head})
      for (const auto& l : *side) {
        if (l.kind == LitKind::Atom) continue;
        TraceShape& sh = out[Sigma{l.atom, l.kind == LitKind::Box}.key()];
        const Range& rho = *l.range;
        if (rho.infinite()) continue;
        Dyadic width = *rho.upper() - rho.lower();
        Range minus(Dyadic(), rho.lower_open(), width, rho.upper_open());
        Range plus(Dyadic(), rho.lower_open(), *rho.upper(), rho.upper_open());
        if (!sh.shortest) {
          sh.shortest = minus;
        } else {
          const Range& s = *sh.shortest;
          bool lo_open = s.lower_open() || minus.lower_open();
          Dyadic up = std::min(*s.upper(), width);
          bool up_open = (*s.upper() == up && s.upper_open()) || (width == up && minus.upper_open());
          sh.shortest = Range(Dyadic(), lo_open, up, up_open);
        }
        if (!sh.longest) {
          sh.longest = plus;
        } else {
          const Range& s = *sh.longest;
          bool lo_open = s.lower_open() && plus.lower_open();
          Dyadic up = std::max(*s.upper(), *rho.upper());
          bool up_open = !((*s.upper() == up && !s.upper_open()) || (*rho.upper() == up && !plus.upper_open()));
          sh.longest = Range(Dyadic(), lo_open, up, up_open);
        }
      }
  for (auto& [k, sh] : out)
    sh.length = sh.shortest ? ceil_ratio(*sh.longest->upper(), *sh.shortest->upper()) : 0;
  return out;
}

// ---- datalog(FO) for Horn programs ----------------------------------------

DatalogQuery rewrite_horn_datalog(const Program& program, const std::string& atom) {
  require(Fragment::HornDatalog, program);
  auto iv = [](const std::string& a) { return "%" + a + "'"; };
  DatalogQuery q;
  q.goal = "%G";
  for (const auto& a : atoms_with(program, atom)) {
    Var x = fresh_var("x");
    q.rules.push_back({{iv(a), {x, x}}, {}, f_atom(a, T(x))});
    Var x2 = fresh_var("x"), y = fresh_var("y"), z = fresh_var("z");
    q.rules.push_back({{iv(a), {x2, z}}, {{iv(a), {x2, y}}, {iv(a), {z, z}}}, f_suc(T(z), T(y))});
  }
  for (const auto& r : program.rules) {
    Var x = fresh_var("x");
    // A box either has an empty window or its window lies inside an interval.
    std::vector<DlRule> variants{DlRule{{}, {}, ts(T(x))}};
    for (const auto& l : r.body) {
      std::vector<DlRule> next;
      for (const auto& v : variants) {
        if (l.kind == LitKind::Atom) {
          next.push_back(v);
          next.back().body.push_back({iv(l.atom), {x, x}});
        } else if (l.kind == LitKind::Diamond) {
          Var w = fresh_var("w");
          next.push_back(v);
          next.back().body.push_back({iv(l.atom), {w, w}});
          next.back().side = f_and(v.side, f_in(*l.range, T(x), T(w)));
        } else {
          Var w = fresh_var("w"), z = fresh_var("z"), u = fresh_var("u");
          Formula covered = f_forall({u}, f_implies(f_in(*l.range, T(x), T(u)), f_and(f_leq(T(w), T(u)), f_leq(T(u), T(z)))));
          next.push_back(v);
          next.back().body.push_back({iv(l.atom), {w, z}});
          next.back().side = f_and(v.side, covered);
          Var u2 = fresh_var("u");
          next.push_back(v);
          next.back().side = f_and(v.side, f_not(f_exists({u2}, f_in(*l.range, T(x), T(u2)))));
        }
      }
      variants = std::move(next);
    }
    for (auto& v : variants) {
      v.head = r.head.empty() ? DlAtom{"%Bot", {x}} : DlAtom{iv(r.head[0].atom), {x, x}};
      q.rules.push_back(std::move(v));
    }
  }
  Var x = fresh_var("x"), y = fresh_var("y"), z = fresh_var("z");
  q.rules.push_back({{"%G", {x}}, {{iv(atom), {y, z}}}, f_and(f_leq(T(y), T(x)), f_leq(T(x), T(z)))});
  Var x2 = fresh_var("x"), b = fresh_var("b");
  q.rules.push_back({{"%G", {x2}}, {{"%Bot", {b}}}, ts(T(x2))});
  return q;
}

// ---- FO(TC) for core diamond-only programs ---------------------------------

ExtQuery rewrite_core_diamond_tc(const Program& program, const std::string& atom) {
  require(Fragment::CoreDiamondTc, program);
  auto atoms = atoms_with(program, atom);
  std::map<std::string, int> code;
  for (size_t i = 0; i < atoms.size(); ++i) code[atoms[i]] = static_cast<int>(i);
  int bits = 1;
  while ((size_t(1) << bits) < atoms.size()) ++bits;
  // Atom codes are bit tuples over the first two timestamps.
  Var one = fresh_var("one");
  auto code_terms = [&](const std::string& a) {
    std::vector<Term> out;
    for (int j = 0; j < bits; ++j) out.push_back((code[a] >> j) & 1 ? T(one) : Term::min());
    return out;
  };
  auto code_is = [&](const std::string& a, const std::vector<Var>& c) {
    auto want = code_terms(a);
    std::vector<Formula> parts;
    for (int j = 0; j < bits; ++j) parts.push_back(f_eq(T(c[j]), want[j]));
    return f_and(parts);
  };

  Var u = fresh_var("u"), v = fresh_var("v");
  std::vector<Var> c, d;
  for (int j = 0; j < bits; ++j) c.push_back(fresh_var("c")), d.push_back(fresh_var("d"));
  std::vector<Formula> steps;
  std::set<std::string> axioms;
  for (const auto& r : program.rules) {
    if (r.is_constraint()) continue;
    const std::string& head = r.head[0].atom;
    if (r.body.empty()) {
      axioms.insert(head);
      continue;
    }
    const Literal& b = r.body[0];
    Formula move = b.kind == LitKind::Atom ? f_eq(T(v), T(u)) : f_in(*b.range, T(v), T(u));
    steps.push_back(f_and({code_is(b.atom, c), code_is(head, d), move}));
  }
  std::vector<Var> from{u}, to{v};
  from.insert(from.end(), c.begin(), c.end());
  to.insert(to.end(), d.begin(), d.end());
  Formula step = f_or(steps);

  // Derivation chains from a data fact or an axiom to (at, target).
  auto derived = [&](const std::string& target, const Term& at) {
    std::vector<Formula> starts;
    for (const auto& a : atoms) {
      Var y = fresh_var("y");
      Formula seed = axioms.count(a) ? ts(T(y)) : f_atom(a, T(y));
      std::vector<Term> src{T(y)}, dst{at};
      for (const auto& t : code_terms(a)) src.push_back(t);
      for (const auto& t : code_terms(target)) dst.push_back(t);
      starts.push_back(f_exists({y}, f_and(seed, f_tc(false, from, to, step, src, dst))));
    }
    return f_or(starts);
  };

  Var x = fresh_var("x");
  std::vector<Formula> answer{derived(atom, T(x))};
  for (const auto& r : program.rules) {
    if (!r.is_constraint()) continue;
    Var z = fresh_var("z");
    std::vector<Formula> parts{ts(T(z))};
    for (const auto& l : r.body) parts.push_back(derived(l.atom, T(z)));
    answer.push_back(f_exists({z}, f_and(parts)));
  }
  Formula general = f_exists({one}, f_and(f_suc(T(one), Term::min()), f_or(answer)));
  Formula q = f_and(ts(T(x)), f_or(f_and(f_eq(Term::max(), Term::min()), single_point_query(program, atom, T(x))),
                                   f_and(f_less(Term::min(), Term::max()), general)));
  return ExtQuery{Language::TC, q, x};
}

// ---- FO(<) for ranges unbounded above --------------------------------------

ExtQuery rewrite_infinite_fo(const Program& program, const std::string& atom) {
  require(Fragment::InfiniteFo, program);
  TypeVocabulary v(program, {atom});
  auto types = enumerate_types(program, v);
  auto sigmas = tracked_sigmas(v);
  std::map<Sigma, int> sigma_index;
  for (size_t i = 0; i < sigmas.size(); ++i) sigma_index[sigmas[i]] = static_cast<int>(i);
  Var x = fresh_var("x");

  // Osteo points: where each tracked literal first holds. For an atom tracked
  // with both polarities one of them holds first at min.
  enum class First { Absent, AtMin, At };
  std::vector<std::vector<First>> patterns{{}};
  for (size_t i = 0; i < sigmas.size(); ++i) {
    std::vector<std::vector<First>> next;
    const Sigma& s = sigmas[i];
    bool paired = sigma_index.count({s.atom, !s.negated});
    for (const auto& p : patterns) {
      if (!paired) {
        for (First f : {First::Absent, First::At}) {
          next.push_back(p);
          next.back().push_back(f);
        }
      } else if (!s.negated) {
        for (First f : {First::AtMin, First::Absent, First::At}) {
          next.push_back(p);
          next.back().push_back(f);
        }
      } else {
        // The negative literal follows its positive partner.
        First pos = p.back();
        std::vector<First> opts = pos == First::AtMin ? std::vector<First>{First::Absent, First::At}
                                                      : std::vector<First>{First::AtMin};
        for (First f : opts) {
          next.push_back(p);
          next.back().push_back(f);
        }
      }
    }
    patterns = std::move(next);
  }

  std::vector<Formula> witnesses;
  for (const auto& p : patterns) {
    std::vector<Var> firsts;
    std::vector<Term> first_term(sigmas.size(), Term::min());
    for (size_t i = 0; i < sigmas.size(); ++i)
      if (p[i] == First::At) {
        firsts.push_back(fresh_var("f"));
        first_term[i] = T(firsts.back());
      }
    Var y = fresh_var("y");
    std::vector<Formula> fluff;
    for (const auto& t : types) {
      std::vector<Formula> parts{delta(v, t, T(y))};
      if (t.has(v.simple(atom))) parts.push_back(neq(T(y), T(x)));
      bool ok = true;
      for (size_t i = 0; i < sigmas.size() && ok; ++i) {
        bool holds = sigma_holds(v, t, sigmas[i].atom, sigmas[i].negated);
        if (p[i] == First::Absent) {
          ok = !holds;
        } else if (p[i] == First::AtMin) {
          if (!holds) parts.push_back(neq(T(y), Term::min()));
        } else {
          parts.push_back(holds ? f_leq(first_term[i], T(y)) : neq(T(y), first_term[i]));
        }
      }
      for (int i = 0; i < v.size() && ok; ++i) {
        const auto& l = v.letters()[i];
        if (l.kind != TypeLetter::Diamond) continue;
        int si = sigma_index.at({l.atom, l.negated});
        if (p[si] == First::Absent) {
          ok = !t.has(i);
          continue;
        }
        Formula within = f_in(*l.range, T(y), first_term[si]);
        parts.push_back(t.has(i) ? within : f_not(within));
      }
      if (ok) fluff.push_back(f_and(parts));
    }
    std::vector<Formula> body;
    for (const auto& f : firsts) body.push_back(ts(T(f)));
    body.push_back(f_forall({y}, f_implies(ts(T(y)), f_or(fluff))));
    witnesses.push_back(f_exists(firsts, f_and(body)));
  }
  return ExtQuery{Language::FO, f_and(ts(T(x)), f_not(f_or(witnesses))), x};
}

// ---- FO(RPR) for punctual ranges --------------------------------------------

RprQuery rewrite_punctual_rpr(const Program& program, const std::string& atom) {
  require(Fragment::PunctualRpr, program);
  Dyadic unit = punctual_unit(program);
  TypeVocabulary v = TypeVocabulary::punctual_closure(program, {atom}, unit);
  int m = 0;
  std::map<std::tuple<std::string, bool, int>, int> letter_at;
  for (int i = 0; i < v.size(); ++i) {
    const auto& l = v.letters()[i];
    if (l.kind != TypeLetter::Diamond) continue;
    m = std::max(m, l.steps);
    letter_at[{l.atom, l.negated, l.steps}] = i;
  }
  const std::uint64_t smask = simple_mask(v);
  auto types = enumerate_types(program, v);
  std::map<std::uint64_t, std::vector<PiType>> by_history;
  for (const auto& t : types) by_history[t.bits & ~smask].push_back(t);

  // History letters of a successor i units later.
  auto shifted = [&](const PiType& s, int i) {
    std::uint64_t out = 0;
    for (const auto& [key, idx] : letter_at) {
      const auto& [a, neg, j] = key;
      bool on = j == i ? sigma_holds(v, s, a, neg) : j > i && s.has(letter_at.at({a, neg, j - i}));
      if (on) out |= std::uint64_t(1) << idx;
    }
    return out;
  };

  // Types reachable from the initial ones along class steps.
  std::set<std::uint64_t> seen;
  std::vector<PiType> reach;
  std::set<std::uint64_t> expanded;
  std::deque<PiType> work;
  auto visit = [&](const PiType& t) {
    if (seen.insert(t.bits).second) reach.push_back(t), work.push_back(t);
  };
  for (const auto& t : types)
    if ((t.bits & ~smask) == 0) visit(t);
  while (!work.empty()) {
    PiType k = work.front();
    work.pop_front();
    for (int i = 1; i <= m; ++i) {
      std::uint64_t h = shifted(k, i);
      if (!expanded.insert(h).second) continue;
      auto it = by_history.find(h);
      if (it != by_history.end())
        for (const auto& t : it->second) visit(t);
    }
  }

  // One relation per (gap i, history h): a run from y reaches z in a type
  // whose shift by i units is h. A step into a type with history h' reads
  // the relation for (gap, h') at z-1, so no type pair is listed.
  std::map<std::pair<int, std::uint64_t>, std::vector<PiType>> groups;
  for (const auto& t : reach)
    for (int i = 1; i <= m; ++i) groups[{i, shifted(t, i)}].push_back(t);
  std::map<std::uint64_t, int> history_id;
  for (const auto& t : reach) history_id.emplace(t.bits & ~smask, static_cast<int>(history_id.size()));
  for (const auto& [key, g] : groups) history_id.emplace(key.second, static_cast<int>(history_id.size()));
  auto group_name = [&](const std::string& base, int i, std::uint64_t h) {
    return base + std::to_string(i) + "_" + std::to_string(history_id.at(h));
  };
  // Relation read at z-1 for a step of i units into history h, if any type fits.
  auto prior = [&](const std::string& base, int i, std::uint64_t h, std::vector<Term> args) {
    if (!groups.count({i, h})) return f_false();
    return f_rel(group_name(base, i, h), std::move(args), true);
  };

  auto div_query = m > 0 ? std::make_shared<RprQuery>(div_formula(unit)) : nullptr;
  auto divides = [&](const Term& a, const Term& b) { return m > 0 ? f_rpr_apply(div_query, {a, b}) : f_eq(a, b); };
  auto last = [&](int i, const Term& u) { return f_last(unit, i, m, u); };
  auto initial = [&](const Term& y) {
    std::vector<Formula> parts{ts(y)};
    for (int i = 1; i <= m; ++i) parts.push_back(f_not(last(i, y)));
    return f_and(parts);
  };
  Dyadic span = m > 0 ? unit * Dyadic::integer(m) : Dyadic();
  // z is off the class of y but the class continues within reach.
  auto carried = [&](const Term& z, const Term& y) {
    Var w = fresh_var("w");
    return f_and(f_not(divides(z, y)),
                 f_exists({w}, f_and({f_leq(T(w), z), divides(T(w), y), f_dist(Cmp::Lt, span, z, T(w))})));
  };
  auto chain_end = [&](const Term& z, const Term& y) {
    if (m == 0) return f_eq(z, y);
    Var w = fresh_var("w");
    return f_and(divides(z, y), f_not(f_exists({w}, f_and({f_less(z, T(w)), ts(T(w)), divides(T(w), y),
                                                          f_dist(Cmp::Le, span, T(w), z)}))));
  };
  const int a_letter = v.simple(atom);
  auto is_initial = [&](const PiType& t) { return (t.bits & ~smask) == 0; };
  // Disjunction of data checks over the simple parts of the given types.
  auto data_of = [&](const std::vector<PiType>& ts_, const Term& z) {
    std::set<std::uint64_t> parts;
    std::vector<Formula> out;
    for (const auto& t : ts_)
      if (parts.insert(t.bits & smask).second) out.push_back(delta(v, t, z));
    return f_or(out);
  };

  RprQuery q;
  if (m == 0) {
    // No temporal letters: every point is its own class.
    Var y = fresh_var("y"), z = fresh_var("z");
    std::vector<PiType> open;
    for (const auto& t : reach)
      if (!t.has(a_letter)) open.push_back(t);
    q.defs.push_back({"%R0_0", {y}, z, f_and({ts(T(z)), f_eq(T(z), T(y)), data_of(reach, T(z))})});
    Var y2 = fresh_var("y"), x2 = fresh_var("x"), z2 = fresh_var("z");
    q.defs.push_back({"%M0_0", {y2, x2}, z2,
                      f_and({ts(T(z2)), f_eq(T(z2), T(y2)), f_eq(T(z2), T(x2)), data_of(open, T(z2))})});
  }
  for (const auto& [key, group] : groups) {
    const auto& [gap, hist] = key;
    // Group members by their own history, which decides the incoming step.
    std::map<std::uint64_t, std::vector<PiType>> by_own;
    std::vector<PiType> starts;
    for (const auto& t : group) {
      by_own[t.bits & ~smask].push_back(t);
      if (is_initial(t)) starts.push_back(t);
    }
    {
      Var y = fresh_var("y"), z = fresh_var("z");
      std::vector<Formula> ways;
      if (!starts.empty()) ways.push_back(f_and(f_eq(T(z), T(y)), data_of(starts, T(z))));
      ways.push_back(f_and(carried(T(z), T(y)), f_rel(group_name("%R", gap, hist), {T(y), T(z)}, true)));
      std::vector<Formula> steps;
      for (const auto& [own, members] : by_own) {
        std::vector<Formula> from;
        for (int i = 1; i <= m; ++i) from.push_back(f_and(last(i, T(z)), prior("%R", i, own, {T(y), T(z)})));
        steps.push_back(f_and(data_of(members, T(z)), f_or(from)));
      }
      ways.push_back(f_and({f_less(T(y), T(z)), divides(T(z), T(y)), f_or(steps)}));
      q.defs.push_back({group_name("%R", gap, hist), {y}, z, f_and({ts(T(z)), f_leq(T(y), T(z)), f_or(ways)})});
    }
    {
      // Runs from y that pass x with the query atom false there.
      Var y = fresh_var("y"), x = fresh_var("x"), z = fresh_var("z");
      std::vector<PiType> open_starts;
      for (const auto& t : starts)
        if (!t.has(a_letter)) open_starts.push_back(t);
      std::vector<Formula> ways;
      if (!open_starts.empty())
        ways.push_back(f_and({f_eq(T(z), T(y)), f_eq(T(z), T(x)), data_of(open_starts, T(z))}));
      ways.push_back(f_and(carried(T(z), T(y)), f_rel(group_name("%M", gap, hist), {T(y), T(x), T(z)}, true)));
      std::vector<Formula> steps;
      for (const auto& [own, members] : by_own) {
        std::vector<PiType> open;
        for (const auto& t : members)
          if (!t.has(a_letter)) open.push_back(t);
        std::vector<Formula> after, into;
        for (int i = 1; i <= m; ++i) {
          after.push_back(f_and(last(i, T(z)), prior("%M", i, own, {T(y), T(x), T(z)})));
          into.push_back(f_and(last(i, T(z)), prior("%R", i, own, {T(y), T(z)})));
        }
        steps.push_back(f_and(data_of(members, T(z)), f_and(f_less(T(x), T(z)), f_or(after))));
        if (!open.empty()) steps.push_back(f_and({data_of(open, T(z)), f_eq(T(x), T(z)), f_or(into)}));
      }
      ways.push_back(f_and({f_less(T(y), T(z)), divides(T(z), T(y)), f_or(steps)}));
      q.defs.push_back({group_name("%M", gap, hist), {y, x}, z,
                        f_and({ts(T(z)), f_leq(T(y), T(x)), f_leq(T(x), T(z)), f_or(ways)})});
    }
  }

  // Every type lies in exactly one group for the gap of one unit (or the
  // single group when there are no steps).
  const int top = m > 0 ? 1 : 0;
  auto any_run = [&](const std::string& base, std::vector<Term> args) {
    std::vector<Formula> out;
    if (m == 0) return f_rel(base + "0_0", std::move(args), false);
    for (const auto& [key, g] : groups)
      if (key.first == top) out.push_back(f_rel(group_name(base, top, key.second), args, false));
    return f_or(out);
  };
  Var x = fresh_var("x");
  Var w = fresh_var("w"), y1 = fresh_var("y");
  Formula consistent = f_forall(
      {w}, f_implies(ts(T(w)), f_exists({y1}, f_and({f_leq(T(y1), T(w)), initial(T(y1)), divides(T(w), T(y1)),
                                                     any_run("%R", {T(y1), T(w)})}))));
  Var y2 = fresh_var("y"), z2 = fresh_var("z");
  Formula refuted = f_exists(
      {y2}, f_and({f_leq(T(y2), T(x)), initial(T(y2)), divides(T(x), T(y2)),
                   f_exists({z2}, f_and({f_leq(T(x), T(z2)), ts(T(z2)), chain_end(T(z2), T(y2)),
                                         any_run("%M", {T(y2), T(x), T(z2)})}))}));
  q.main = f_and(ts(T(x)), f_or(f_not(consistent), f_not(refuted)));
  q.free = {x};
  return q;
}

// ---- traces for non-punctual ranges ----------------------------------------

namespace {

struct TrackedSigma {
  Sigma sigma;
  int length = 0;
  std::optional<Range> shortest;
};

// Tuple terms: the timestamp, then per tracked literal the first point and
// `length` dense intervals as (u, s) pairs. Undefined intervals are (max, min).
struct TraceTuple {
  Term t;
  std::vector<std::vector<std::pair<Term, Term>>> iv;

  std::vector<Term> flat() const {
    std::vector<Term> out{t};
    for (const auto& s : iv)
      for (const auto& [u, e] : s) out.push_back(u), out.push_back(e);
    return out;
  }
};

class TraceCompiler {
 public:
  TraceCompiler(const Program& program, const std::string& atom)
      : vocab_(program, {atom}), atom_(atom) {
    auto shapes = trace_shapes(program);
    for (const auto& s : tracked_sigmas(vocab_)) {
      const TraceShape& sh = shapes.at(s.key());
      index_[s] = static_cast<int>(tracked_.size());
      tracked_.push_back({s, sh.length, sh.shortest});
    }
  }

  const TypeVocabulary& vocab() const { return vocab_; }

  TraceTuple fresh_tuple(const std::string& base) const {
    TraceTuple out{T(fresh_var(base + "t")), {}};
    for (const auto& tr : tracked_) {
      out.iv.emplace_back();
      for (int i = 0; i <= tr.length; ++i) out.iv.back().push_back({T(fresh_var(base + "u")), T(fresh_var(base + "s"))});
    }
    return out;
  }

  static std::vector<Var> vars(const TraceTuple& tt) {
    std::vector<Var> out;
    for (const auto& t : tt.flat()) out.push_back(t.var);
    return out;
  }

  // Traces after the first timestamp, given which tracked literals hold there.
  TraceTuple initial(const PiType& t) const {
    TraceTuple out{Term::min(), {}};
    for (const auto& tr : tracked_) {
      bool holds = sigma_holds(vocab_, t, tr.sigma.atom, tr.sigma.negated);
      out.iv.emplace_back(tr.length + 1, std::make_pair(Term::max(), Term::min()));
      if (holds) {
        out.iv.back()[0] = {Term::min(), Term::min()};
        out.iv.back()[tr.length] = {Term::min(), Term::min()};
      }
    }
    return out;
  }

  std::uint64_t tracked_mask(const PiType& t) const {
    std::uint64_t m = 0;
    for (size_t i = 0; i < tracked_.size(); ++i)
      if (sigma_holds(vocab_, t, tracked_[i].sigma.atom, tracked_[i].sigma.negated)) m |= std::uint64_t(1) << i;
    return m;
  }

  // Trace of one literal after a timestamp `now` where it holds or not.
  Formula update(size_t k, bool holds, const TraceTuple& from, const TraceTuple& to) const {
    const auto& a = from.iv[k];
    const auto& b = to.iv[k];
    const int len = tracked_[k].length;
    auto same = [&](int i, int j) { return f_and(f_eq(b[i].first, a[j].first), f_eq(b[i].second, a[j].second)); };
    auto point = [&](int i) { return f_and(f_eq(b[i].first, to.t), f_eq(b[i].second, to.t)); };
    auto defined = [&](int j) { return f_leq(a[j].first, a[j].second); };
    std::vector<Formula> parts;
    if (!holds) {
      for (int i = 0; i <= len; ++i) parts.push_back(same(i, i));
      return f_and(parts);
    }
    parts.push_back(f_or(f_and(defined(0), same(0, 0)), f_and(f_less(a[0].second, a[0].first), point(0))));
    if (len == 0) return f_and(parts);
    // Extend the latest dense interval or shift in a new one.
    Formula dense = f_and(defined(len), f_in(*tracked_[k].shortest, to.t, a[len].second));
    std::vector<Formula> extend{dense}, shift{f_not(dense)};
    for (int i = 1; i < len; ++i) {
      extend.push_back(same(i, i));
      shift.push_back(same(i, i + 1));
    }
    extend.push_back(f_and(f_eq(b[len].first, a[len].first), f_eq(b[len].second, to.t)));
    shift.push_back(point(len));
    parts.push_back(f_or(f_and(extend), f_and(shift)));
    return f_and(parts);
  }

  Formula updates(const PiType& t, const TraceTuple& from, const TraceTuple& to) const {
    std::vector<Formula> parts;
    for (size_t k = 0; k < tracked_.size(); ++k)
      parts.push_back(update(k, sigma_holds(vocab_, t, tracked_[k].sigma.atom, tracked_[k].sigma.negated), from, to));
    return f_and(parts);
  }

  // Diamond letters of a type agree with the stored intervals at `now`.
  Formula witnessed(std::uint64_t diamonds, const Term& now, const TraceTuple& tr) const {
    std::vector<Formula> parts;
    for (int i = 0; i < vocab_.size(); ++i) {
      const auto& l = vocab_.letters()[i];
      if (l.kind != TypeLetter::Diamond) continue;
      const auto& ivs = tr.iv[index_.at({l.atom, l.negated})];
      std::vector<Formula> hits;
      for (const auto& [u, s] : ivs) hits.push_back(f_int(*l.range, now, u, s));
      Formula any = f_or(hits);
      parts.push_back((diamonds >> i) & 1 ? any : f_not(any));
    }
    return f_and(parts);
  }

 protected:
  TypeVocabulary vocab_;
  std::string atom_;
  std::vector<TrackedSigma> tracked_;
  std::map<Sigma, int> index_;
};

}  // namespace


namespace {

std::vector<Var> tuple_vars(const TraceTuple& tt) {
  std::vector<Var> out;
  for (const auto& t : tt.flat())
    if (t.kind == Term::Variable) out.push_back(t.var);
  return out;
}

// Interval variables only, for tuples whose timestamp is bound elsewhere.
std::vector<Var> interval_vars(const TraceTuple& tt) {
  std::vector<Var> out = tuple_vars(tt);
  if (tt.t.kind == Term::Variable) out.erase(std::find(out.begin(), out.end(), tt.t.var));
  return out;
}

TraceTuple at_time(TraceTuple tt, const Term& t) {
  tt.t = t;
  return tt;
}

std::vector<Var> joined(std::initializer_list<std::vector<Var>> parts) {
  std::vector<Var> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

ExtQuery rewrite_nonpunctual_tc(const Program& program, const std::string& atom) {
  require(Fragment::NonpunctualTc, program);
  TraceCompiler tc(program, atom);
  const TypeVocabulary& v = tc.vocab();
  const int a_letter = v.simple(atom);
  const std::uint64_t smask = simple_mask(v);
  auto types = enumerate_types(program, v);
  std::map<std::uint64_t, std::vector<PiType>> by_simple;
  for (const auto& t : types) by_simple[t.bits & smask].push_back(t);

  // One step to the next timestamp with a guessed type.
  auto step = [&](const TraceTuple& from, const TraceTuple& to, bool atom_false) {
    std::vector<Formula> choices;
    for (const auto& [simple, group] : by_simple) {
      if (atom_false && group[0].has(a_letter)) continue;
      std::vector<Formula> letters;
      for (const auto& t : group) letters.push_back(tc.witnessed(t.bits & ~smask, to.t, to));
      choices.push_back(f_and({delta(v, group[0], to.t), tc.updates(group[0], from, to), f_or(letters)}));
    }
    return f_and(f_suc(to.t, from.t), f_or(choices));
  };
  TraceTuple src = tc.fresh_tuple("a"), dst = tc.fresh_tuple("b");
  Formula xi = step(src, dst, false);
  auto reach = [&](const TraceTuple& from, const TraceTuple& to) {
    return f_tc(false, tuple_vars(src), tuple_vars(dst), xi, from.flat(), to.flat());
  };

  // Types at the first timestamp, grouped by the traces they start.
  struct Start {
    std::vector<Formula> any, atom_false;
    PiType sample;
  };
  std::map<std::uint64_t, Start> starts;
  for (const auto& t : types) {
    if (!realizable_alone(v, t)) continue;
    Start& s = starts[tc.tracked_mask(t)];
    s.sample = t;
    s.any.push_back(delta(v, t, Term::min()));
    if (!t.has(a_letter)) s.atom_false.push_back(delta(v, t, Term::min()));
  }

  // A model run from min to max with the atom false at x.
  Var x = fresh_var("x");
  std::vector<Formula> countermodels;
  for (const auto& [mask, s] : starts) {
    TraceTuple init = tc.initial(s.sample);
    std::vector<Formula> alts;
    if (!s.atom_false.empty()) {
      TraceTuple end = at_time(tc.fresh_tuple("e"), Term::max());
      alts.push_back(f_and({f_or(s.atom_false), f_eq(T(x), Term::min()), f_exists(tuple_vars(end), reach(init, end))}));
    }
    TraceTuple before = tc.fresh_tuple("p"), here = at_time(tc.fresh_tuple("h"), T(x));
    TraceTuple end = at_time(tc.fresh_tuple("e"), Term::max());
    alts.push_back(f_and(f_or(s.any), f_exists(joined({tuple_vars(before), interval_vars(here), tuple_vars(end)}),
                                               f_and({reach(init, before), step(before, here, true), reach(here, end)}))));
    countermodels.push_back(f_or(alts));
  }
  return ExtQuery{Language::TC, f_and(ts(T(x)), f_not(f_or(countermodels))), x};
}

Program without_closed_zero(const Program& program) {
  std::vector<Rule> rules;
  for (const auto& r : program.rules) {
    std::vector<std::vector<Literal>> bodies{{}};
    for (const auto& l : r.body) {
      std::vector<std::vector<Literal>> options;
      if (l.kind == LitKind::Atom || !l.range->contains_zero()) {
        options.push_back({l});
      } else {
        Literal here = Literal::make_atom(l.atom);
        std::optional<Literal> past;
        if (!l.range->upper() || !l.range->upper()->is_zero())
          past = Literal{l.kind, l.atom, Range(Dyadic(), true, l.range->upper(), l.range->upper_open())};
        if (l.kind == LitKind::Diamond) {
          options.push_back({here});
          if (past) options.push_back({*past});
        } else {
          options.push_back({here});
          if (past) options.back().push_back(*past);
        }
      }
      std::vector<std::vector<Literal>> next;
      for (const auto& b : bodies)
        for (const auto& o : options) {
          next.push_back(b);
          next.back().insert(next.back().end(), o.begin(), o.end());
        }
      bodies = std::move(next);
    }
    for (auto& b : bodies) rules.push_back(Rule{std::move(b), r.head});
  }
  return Program(std::move(rules));
}

ExtQuery rewrite_horn_nonpunctual_dtc(const Program& program, const std::string& atom) {
  require(Fragment::HornNonpunctualDtc, program);
  Program normal = without_closed_zero(program);
  TraceCompiler tc(normal, atom);
  const TypeVocabulary& v = tc.vocab();
  const int a_letter = v.simple(atom);
  const std::uint64_t smask = simple_mask(v);
  const std::uint64_t dmask = (v.size() >= 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << v.size()) - 1) & ~smask;
  if (v.size() > 20) throw std::length_error("type vocabulary of " + std::to_string(v.size()) + " letters");

  // Least type over fixed diamond letters and data atoms; none when a
  // constraint fires.
  auto least = [&](std::uint64_t seed) -> std::optional<PiType> {
    PiType t{seed};
    auto holds = [&](const Literal& l) {
      auto [i, neg] = v.letter_of(l);
      return t.has(i) != neg;
    };
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& r : normal.rules) {
        if (!std::all_of(r.body.begin(), r.body.end(), holds)) continue;
        if (r.head.empty()) return std::nullopt;
        int h = v.simple(r.head[0].atom);
        if (!t.has(h)) t.bits |= std::uint64_t(1) << h, changed = true;
      }
    }
    return t;
  };
  auto subsets = [](std::uint64_t mask) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t s = mask;; s = (s - 1) & mask) {
      out.push_back(s);
      if (s == 0) break;
    }
    return out;
  };
  auto data_is = [&](std::uint64_t bits, const Term& at) {
    std::vector<Formula> parts;
    for (int i = 0; i < v.size(); ++i)
      if ((smask >> i) & 1) parts.push_back((bits >> i) & 1 ? f_atom(v.letters()[i].atom, at) : f_not(f_atom(v.letters()[i].atom, at)));
    return f_and(parts);
  };

  // The history fixes the diamond letters and the data fixes the atoms, so
  // exactly one least type applies at each step.
  auto step = [&](const TraceTuple& from, const TraceTuple& to, bool atom_true) {
    std::vector<Formula> choices;
    for (std::uint64_t lam : subsets(dmask)) {
      std::vector<Formula> inner;
      for (std::uint64_t data : subsets(smask)) {
        auto t = least(lam | data);
        if (!t || (atom_true && !t->has(a_letter))) continue;
        inner.push_back(f_and(data_is(data, to.t), tc.updates(*t, from, to)));
      }
      if (!inner.empty()) choices.push_back(f_and(tc.witnessed(lam, to.t, from), f_or(inner)));
    }
    return f_and(f_suc(to.t, from.t), f_or(choices));
  };
  TraceTuple src = tc.fresh_tuple("a"), dst = tc.fresh_tuple("b");
  Formula xi = step(src, dst, false);
  auto run = [&](const TraceTuple& from, const TraceTuple& to) {
    return f_tc(true, tuple_vars(src), tuple_vars(dst), xi, from.flat(), to.flat());
  };

  Var x = fresh_var("x");
  std::vector<Formula> consistent, derived;
  for (std::uint64_t data : subsets(smask)) {
    auto t0 = least(data);
    if (!t0) continue;
    TraceTuple init = tc.initial(*t0);
    Formula first = data_is(data, Term::min());
    TraceTuple end = at_time(tc.fresh_tuple("e"), Term::max());
    consistent.push_back(f_and(first, f_exists(tuple_vars(end), run(init, end))));
    TraceTuple before = tc.fresh_tuple("p"), here = at_time(tc.fresh_tuple("h"), T(x));
    Formula later = f_exists(joined({tuple_vars(before), interval_vars(here)}),
                             f_and(run(init, before), step(before, here, true)));
    Formula now = t0->has(a_letter) ? f_eq(T(x), Term::min()) : f_false();
    derived.push_back(f_and(first, f_or(now, later)));
  }
  return ExtQuery{Language::DTC, f_and(ts(T(x)), f_or(f_not(f_or(consistent)), f_or(derived))), x};
}

// ---- FO(<,+) for the cyclic example ----------------------------------------

namespace {

// a is the k-th timestamp after b.
Formula steps_after(const Term& a, const Term& b, int k) {
  if (k == 0) return f_eq(a, b);
  std::vector<Var> mids;
  std::vector<Formula> parts;
  Term prev = b;
  for (int i = 1; i < k; ++i) {
    mids.push_back(fresh_var("n"));
    parts.push_back(f_suc(T(mids.back()), prev));
    prev = T(mids.back());
  }
  parts.push_back(f_suc(a, prev));
  return f_exists(mids, f_and(parts));
}

}  // namespace

ExtQuery rewrite_uniform_example(const Dyadic& d) {
  Var x = fresh_var("x"), start = fresh_var("b");
  // x is j + 3n positions after the B point.
  auto phase = [&](int j) {
    Var z = fresh_var("z"), z2 = fresh_var("z"), z3 = fresh_var("z"), y = fresh_var("y");
    return f_exists({z, z2, z3, y}, f_and({f_plus(T(z), T(z), T(z2)), f_plus(T(z2), T(z), T(z3)),
                                           f_plus(T(start), T(z3), T(y)), steps_after(T(x), T(y), j)}));
  };
  // A jump from k+1 positions back to `at` fits within d, after the B point.
  auto skips = [&](const Term& at, int k) {
    Var w = fresh_var("w");
    return f_exists({w}, f_and({steps_after(at, T(w), k + 1), f_dist(Cmp::Lt, d, at, T(w)), f_leq(T(start), T(w))}));
  };
  auto within = [&](const Var& z) { return f_and(f_less(T(start), T(z)), f_leq(T(z), T(x))); };
  Var x1 = fresh_var("x"), x2 = fresh_var("x"), x3 = fresh_var("x"), x4 = fresh_var("x"), mid = fresh_var("m");
  Formula one_skip = f_exists({x1}, f_and(within(x1), skips(T(x1), 1)));
  Formula double_skip = f_exists({x2}, f_and(within(x2), skips(T(x2), 2)));
  Formula two_skips = f_exists(
      {x3, x4}, f_and({within(x3), within(x4), f_less(T(x3), T(x4)), skips(T(x3), 1), skips(T(x4), 1),
                       f_exists({mid}, f_and(f_less(T(x3), T(mid)), f_less(T(mid), T(x4))))}));
  Formula count = f_or({phase(1), f_and(phase(2), one_skip), f_and(phase(3), f_or(double_skip, two_skips))});
  // No gap of length d or more between the B point and x.
  Var y = fresh_var("y"), prev = fresh_var("y");
  Formula dense = f_forall({y}, f_implies(within(y), f_exists({prev}, f_and(f_suc(T(y), T(prev)),
                                                                          f_dist(Cmp::Lt, d, T(y), T(prev))))));
  Formula q = f_and(ts(T(x)), f_exists({start}, f_and({f_atom("B", T(start)), f_leq(T(start), T(x)), dense, count})));
  return ExtQuery{Language::FOPlus, q, x};
}

// ---- dispatch and lifting ---------------------------------------------------

ExtQuery rewrite(Fragment fragment, const Program& program, const std::string& atom) {
  switch (fragment) {
    case Fragment::HornDatalog:
      return ExtQuery{Language::Datalog, rewrite_horn_datalog(program, atom), {}};
    case Fragment::CoreDiamondTc: return rewrite_core_diamond_tc(program, atom);
    case Fragment::InfiniteFo: return rewrite_infinite_fo(program, atom);
    case Fragment::PunctualRpr:
      return ExtQuery{Language::RPR, rewrite_punctual_rpr(program, atom), {}};
    case Fragment::NonpunctualTc: return rewrite_nonpunctual_tc(program, atom);
    case Fragment::HornNonpunctualDtc: return rewrite_horn_nonpunctual_dtc(program, atom);
    case Fragment::UniformExample: {
      require(Fragment::UniformExample, program);
      if (atom != "S1") throw FragmentError(to_string(fragment) + ": the example rewriting answers S1 only");
      return rewrite_uniform_example(*program_ranges(program)[0].upper());
    }
  }
  throw std::logic_error("unknown fragment");
}

Language target_language(Fragment fragment) {
  switch (fragment) {
    case Fragment::HornDatalog: return Language::Datalog;
    case Fragment::CoreDiamondTc: return Language::TC;
    case Fragment::InfiniteFo: return Language::FO;
    case Fragment::PunctualRpr: return Language::RPR;
    case Fragment::NonpunctualTc: return Language::TC;
    case Fragment::HornNonpunctualDtc: return Language::DTC;
    case Fragment::UniformExample: return Language::FOPlus;
  }
  throw std::logic_error("unknown fragment");
}

ExtQuery lift_positive_query(const std::map<std::string, ExtQuery>& rewritings, const Formula& phi, const Var& free,
                             const ExtQuery& bottom) {
  for (const auto& [name, q] : rewritings)
    if (q.lang != bottom.lang) throw std::invalid_argument("rewritings of " + name + " and bottom differ in language");
  auto apply = [](const ExtQuery& q, const Term& at) -> Formula {
    if (const auto* f = std::get_if<Formula>(&q.payload)) return substitute(*f, q.free, at);
    if (const auto* r = std::get_if<RprQuery>(&q.payload)) return f_rpr_apply(std::make_shared<RprQuery>(*r), {at});
    return f_datalog_apply(std::make_shared<DatalogQuery>(std::get<DatalogQuery>(q.payload)), at);
  };
  std::function<Formula(const Formula&)> lift = [&](const Formula& f) -> Formula {
    switch (f->op) {
      case Op::True:
      case Op::False:
      case Op::Less:
      case Op::Eq:
        return f;
      case Op::Atom: {
        auto it = rewritings.find(f->name);
        if (it == rewritings.end()) throw std::invalid_argument("no rewriting for atom " + f->name);
        return apply(it->second, f->terms[0]);
      }
      case Op::And:
      case Op::Or:
      case Op::Exists:
      case Op::Forall: {
        auto n = std::make_shared<Node>(*f);
        for (auto& k : n->kids) k = lift(k);
        return n;
      }
      default:
        throw std::invalid_argument("query is not positive");
    }
  };
  Var z = fresh_var("z");
  Formula lifted = f_or(lift(phi), f_exists({z}, f_and(ts(T(z)), apply(bottom, T(z)))));
  if (bottom.lang == Language::RPR) return ExtQuery{Language::RPR, RprQuery{{}, lifted, {free}}, {}};
  return ExtQuery{bottom.lang, lifted, free};
}

std::string fresh_bottom_atom(const Program& program) {
  std::string name = "Bottom";
  for (int i = 1; program.atoms.count(name); ++i) name = "Bottom" + std::to_string(i);
  return name;
}

}  // namespace mtl
