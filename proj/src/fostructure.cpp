#include "mtl/fostructure.hpp"

#include <algorithm>
#include <sstream>

namespace mtl {

using namespace logic;

FOStructure::FOStructure(const DataInstance& data) : data_(data) {
  int int_bits = 0, frac_bits = 0;
  for (const auto& e : data.entries()) {
    BigInt ip = e.time.numerator() >> e.time.exponent();
    if (ip > 0) int_bits = std::max(int_bits, static_cast<int>(boost::multiprecision::msb(ip)) + 1);
    frac_bits = std::max(frac_bits, static_cast<int>(e.time.exponent()));
  }
  ell_ = std::max({int_bits, frac_bits, data.size() - 1});
  for (const auto& e : data.entries()) exp_ = std::max(exp_, e.time.exponent());

  int n = data.size();
  bits_in_.assign(n, std::vector<bool>(ell_ + 1, false));
  bits_fr_.assign(n, std::vector<bool>(ell_ + 1, false));
  for (int t = 0; t < n; ++t) {
    const Dyadic& v = data.time(t);
    BigInt ip = v.numerator() >> v.exponent();
    // Fractional part scaled by 2^(ell+1) is an integer.
    BigInt fp = (v.numerator() - (ip << v.exponent())) << (ell_ + 1 - v.exponent());
    for (int j = 0; j <= ell_; ++j) {
      bits_in_[t][j] = boost::multiprecision::bit_test(ip, j);
      bits_fr_[t][j] = boost::multiprecision::bit_test(fp, j);
    }
    scaled_.push_back(v.scaled(exp_));
    for (const auto& a : data.entries()[t].atoms) relations_[a].insert(t);
  }
}

FOStructure encode(const DataInstance& data) { return FOStructure(data); }

bool FOStructure::atom(const std::string& name, int t) const {
  auto it = relations_.find(name);
  return it != relations_.end() && it->second.count(t) > 0;
}

const TimestampSet& FOStructure::relation(const std::string& name) const {
  static const TimestampSet empty;
  auto it = relations_.find(name);
  return it == relations_.end() ? empty : it->second;
}

Dyadic FOStructure::decode(int t) const {
  BigInt ip = 0, fp = 0;
  for (int j = ell_; j >= 0; --j) {
    ip = ip * 2 + (bits_in_[t][j] ? 1 : 0);
    fp = fp * 2 + (bits_fr_[t][j] ? 1 : 0);
  }
  return Dyadic((ip << (ell_ + 1)) + fp, static_cast<unsigned>(ell_ + 1));
}

std::string FOStructure::dump() const {
  std::ostringstream os;
  for (int t = 0; t < timestamp_count(); ++t) {
    os << t << " " << value(t).str() << " ";
    for (int j = ell_; j >= 0; --j) os << (bits_in_[t][j] ? '1' : '0');
    os << ".";
    for (int j = ell_; j >= 0; --j) os << (bits_fr_[t][j] ? '1' : '0');
    for (const auto& a : data_.entries()[t].atoms) os << " " << a;
    os << "\n";
  }
  return os.str();
}

namespace {

Formula iff(const Formula& a, const Formula& b) {
  return f_or(f_and(a, b), f_and(f_not(a), f_not(b)));
}

Formula in_theta(const Term& t) { return f_leq(t, Term::max()); }

// At least p domain elements strictly below (or above) position j.
Formula at_least(const Term& j, int p, bool below) {
  if (p == 0) return f_true();
  Var w = fresh_var("w");
  Formula order = below ? f_less(T(w), j) : f_less(j, T(w));
  return f_exists({w}, f_and(order, at_least(T(w), p - 1, below)));
}

Formula exactly(const Term& j, int p, bool below) {
  return f_and(at_least(j, p, below), f_not(at_least(j, p + 1, below)));
}

// Column subtraction of y from x over the bit relations.
struct Subtraction {
  Term x, y;

  Formula in(const Term& t, const Term& j) const { return f_bit_in(t, j); }
  Formula fr(const Term& t, const Term& j) const { return f_bit_fr(t, j); }

  // Some position below `limit` (or anywhere when limit is empty) generates a
  // borrow that propagates up to limit.
  Formula borrow_chain(bool integral, const std::optional<Term>& limit) const {
    auto bit = [&](const Term& t, const Term& j) { return integral ? in(t, j) : fr(t, j); };
    Var i = fresh_var("i"), k = fresh_var("k");
    Formula gen = f_and(f_not(bit(x, T(i))), bit(y, T(i)));
    Formula between = limit ? f_and(f_less(T(i), T(k)), f_less(T(k), *limit)) : f_less(T(i), T(k));
    Formula prop = f_forall({k}, f_implies(between, f_or(f_not(bit(x, T(k))), bit(y, T(k)))));
    Formula below = limit ? f_less(T(i), *limit) : f_true();
    return f_exists({i}, f_and({below, gen, prop}));
  }

  // Borrow out of the fractional part into integer position 0.
  Formula borrow_out_fr() const { return borrow_chain(false, std::nullopt); }

  Formula propagates_in(const std::optional<Term>& limit) const {
    Var k = fresh_var("k");
    Formula range = limit ? f_less(T(k), *limit) : f_true();
    return f_forall({k}, f_implies(range, f_or(f_not(in(x, T(k))), in(y, T(k)))));
  }

  Formula borrow_fr(const Term& j) const { return borrow_chain(false, j); }
  Formula borrow_in(const Term& j) const {
    return f_or(borrow_chain(true, j), f_and(borrow_out_fr(), propagates_in(j)));
  }
  // x < y: a borrow leaves the top integer position.
  Formula negative() const {
    return f_or(borrow_chain(true, std::nullopt), f_and(borrow_out_fr(), propagates_in(std::nullopt)));
  }

  Formula dif_in(const Term& j) const { return iff(iff(in(x, j), in(y, j)), borrow_in(j)); }
  Formula dif_fr(const Term& j) const { return iff(iff(fr(x, j), fr(y, j)), borrow_fr(j)); }
};

struct ConstantBits {
  std::vector<int> integral;    // set bit positions of floor(r)
  std::vector<int> fractional;  // m with bit of weight 2^-m set
};

ConstantBits bits_of(const Dyadic& r) {
  ConstantBits b;
  BigInt ip = r.numerator() >> r.exponent();
  BigInt fp = r.numerator() - (ip << r.exponent());
  for (unsigned p = 0; ip > 0 && p <= boost::multiprecision::msb(ip); ++p)
    if (boost::multiprecision::bit_test(ip, p)) b.integral.push_back(static_cast<int>(p));
  for (unsigned m = 1; m <= r.exponent(); ++m)
    if (boost::multiprecision::bit_test(fp, r.exponent() - m)) b.fractional.push_back(static_cast<int>(m));
  return b;
}

Formula dist_terms(const Dyadic& r, Cmp cmp, const Term& x, const Term& y) {
  Subtraction sub{x, y};
  ConstantBits rb = bits_of(r);

  auto r_in = [&](const Term& j) {
    std::vector<Formula> d;
    for (int p : rb.integral) d.push_back(exactly(j, p, true));
    return f_or(d);
  };
  auto r_fr = [&](const Term& j) {
    std::vector<Formula> d;
    for (int m : rb.fractional) d.push_back(exactly(j, m - 1, false));
    return f_or(d);
  };
  std::vector<Formula> high, low;
  for (int p : rb.integral) {
    Var j = fresh_var("j");
    high.push_back(f_not(f_exists({j}, exactly(T(j), p, true))));
  }
  for (int m : rb.fractional) {
    Var j = fresh_var("j");
    low.push_back(f_not(f_exists({j}, exactly(T(j), m - 1, false))));
  }
  Formula out_high = f_or(high), out_low = f_or(low);

  auto eq_in = [&](const Term& j) { return iff(sub.dif_in(j), r_in(j)); };
  auto eq_fr = [&](const Term& j) { return iff(sub.dif_fr(j), r_fr(j)); };
  auto all_eq = [&](bool integral) {
    Var k = fresh_var("k");
    return f_forall({k}, integral ? eq_in(T(k)) : eq_fr(T(k)));
  };
  // First differing position from the top has a 0 in the difference and a 1 in r.
  auto first_below = [&](bool integral) {
    Var j = fresh_var("j"), k = fresh_var("k");
    Formula here = integral ? f_and(f_not(sub.dif_in(T(j))), r_in(T(j)))
                            : f_and(f_not(sub.dif_fr(T(j))), r_fr(T(j)));
    Formula above = f_forall({k}, f_implies(f_less(T(j), T(k)), integral ? eq_in(T(k)) : eq_fr(T(k))));
    return f_exists({j}, f_and(here, above));
  };

  Formula integral_eq = all_eq(true);
  Formula fractional_eq = all_eq(false);
  Formula lt = f_or({out_high, first_below(true),
                     f_and(integral_eq, f_or(first_below(false), f_and(fractional_eq, out_low)))});
  Formula eq = f_and({f_not(out_high), f_not(out_low), integral_eq, fractional_eq});
  Formula neg = sub.negative();

  Formula body;
  switch (cmp) {
    case Cmp::Lt: body = f_or(neg, lt); break;
    case Cmp::Le: body = f_or({neg, lt, eq}); break;
    case Cmp::Eq: body = f_and(f_not(neg), eq); break;
    case Cmp::Gt: body = f_and({f_not(neg), f_not(lt), f_not(eq)}); break;
    case Cmp::Ge: body = f_and(f_not(neg), f_not(lt)); break;
  }
  return f_and({in_theta(x), in_theta(y), body});
}

}  // namespace

Formula dist_formula(const Dyadic& r, Cmp cmp, const Var& x, const Var& y) {
  return dist_terms(r, cmp, T(x), T(y));
}

BinaryFormula dist_formula(const Dyadic& r, Cmp cmp) {
  Var x = fresh_var("x"), y = fresh_var("y");
  return {dist_formula(r, cmp, x, y), x, y};
}

bool BitAutomaton::accepts(const std::vector<int>& bits) const {
  int s = initial;
  for (int b : bits) s = delta[s][b ? 1 : 0];
  return accepting[s];
}

BitAutomaton divisibility_automaton(unsigned k) {
  if (k == 0) throw std::invalid_argument("divisibility by zero");
  unsigned a = 0, odd = k;
  while (odd % 2 == 0) {
    odd /= 2;
    ++a;
  }
  BitAutomaton m;
  // States 0..a-1 check the low zero bits; a..a+odd-1 track v * 2^-n mod odd;
  // the last state is a dead sink when a > 0.
  int residues = static_cast<int>(odd);
  int dead = a > 0 ? static_cast<int>(a) + residues : -1;
  m.states = static_cast<int>(a) + residues + (a > 0 ? 1 : 0);
  m.accepting.assign(m.states, false);
  m.delta.assign(m.states, {0, 0});
  m.initial = 0;
  unsigned half = (odd + 1) / 2;  // inverse of 2 modulo an odd number
  for (unsigned c = 0; c < a; ++c) {
    m.accepting[c] = true;  // only zeros read so far
    m.delta[c] = {static_cast<int>(c + 1), dead};
  }
  for (int r = 0; r < residues; ++r) {
    int s = static_cast<int>(a) + r;
    m.accepting[s] = r == 0;
    for (int b = 0; b < 2; ++b) {
      unsigned next = static_cast<unsigned>(((r + b) % residues) * half % odd);
      m.delta[s][b] = static_cast<int>(a + next);
    }
  }
  if (dead >= 0) m.delta[dead] = {dead, dead};
  return m;
}

RprQuery div_formula(const Dyadic& d) {
  if (d.is_zero()) throw std::invalid_argument("divisibility by zero");
  int fd = static_cast<int>(d.exponent());
  BigInt big_d = d.numerator();
  if (big_d > 1u << 20) throw std::invalid_argument("divisor too large");
  BitAutomaton aut = divisibility_automaton(big_d.convert_to<unsigned>());

  Var x = fresh_var("x"), y = fresh_var("y");
  Subtraction sub{T(x), T(y)};

  // Fractional difference bits of weight 2^-m for m <= fd match b, lower ones are 0.
  auto frac_matches = [&](const std::vector<int>& b) {
    std::vector<Formula> parts;
    for (int m = 1; m <= fd; ++m) {
      Var j = fresh_var("j");
      Formula set = f_exists({j}, f_and(exactly(T(j), m - 1, false), sub.dif_fr(T(j))));
      parts.push_back(b[fd - m] ? set : f_not(set));
    }
    Var j = fresh_var("j");
    parts.push_back(f_forall({j}, f_implies(at_least(T(j), fd, false), f_not(sub.dif_fr(T(j))))));
    return f_and(parts);
  };
  // reach[q]: reading the fd significant fractional bits, least significant first, ends in q.
  std::vector<std::vector<Formula>> reach(aut.states);
  for (int code = 0; code < (1 << fd); ++code) {
    std::vector<int> b(fd);
    for (int i = 0; i < fd; ++i) b[i] = (code >> i) & 1;
    int q = aut.initial;
    for (int bit : b) q = aut.delta[q][bit];
    reach[q].push_back(frac_matches(b));
  }

  RprQuery out;
  auto rel_name = [](int q) { return "R" + std::to_string(q); };
  for (int q = 0; q < aut.states; ++q) {
    RelDef def;
    def.name = rel_name(q);
    def.params = {fresh_var("x"), fresh_var("y")};
    def.z = fresh_var("i");
    Term px = T(def.params[0]), py = T(def.params[1]), iz = T(def.z);
    Subtraction local{px, py};
    Formula bit = local.dif_in(iz);
    std::vector<Formula> first, later;
    for (int qp = 0; qp < aut.states; ++qp)
      for (int b = 0; b < 2; ++b) {
        if (aut.delta[qp][b] != q) continue;
        Formula bit_is = b ? bit : f_not(bit);
        Formula r = f_or(reach[qp]);
        r = substitute(substitute(r, x, px), y, py);
        first.push_back(f_and(bit_is, r));
        later.push_back(f_and(bit_is, f_rel(rel_name(qp), {px, py, iz}, true)));
      }
    Formula at_min = f_eq(iz, Term::min());
    def.body = f_or(f_and(at_min, f_or(first)), f_and(f_not(at_min), f_or(later)));
    out.defs.push_back(std::move(def));
  }
  Var last = fresh_var("i"), w = fresh_var("w");
  std::vector<Formula> accept;
  for (int q = 0; q < aut.states; ++q)
    if (aut.accepting[q]) accept.push_back(f_rel(rel_name(q), {T(x), T(y), T(last)}, false));
  Formula is_last = f_not(f_exists({w}, f_less(T(last), T(w))));
  out.main = f_and({in_theta(T(x)), f_leq(T(y), T(x)), f_exists({last}, f_and(is_last, f_or(accept)))});
  out.free = {x, y};
  return out;
}

namespace {

Formula expand(const Formula& f);

std::shared_ptr<const RprQuery> expand_rpr(const RprQuery& q) {
  auto out = std::make_shared<RprQuery>(q);
  for (auto& d : out->defs) d.body = expand(d.body);
  out->main = expand(out->main);
  return out;
}

std::shared_ptr<const DatalogQuery> expand_datalog(const DatalogQuery& q) {
  auto out = std::make_shared<DatalogQuery>(q);
  for (auto& r : out->rules) r.side = expand(r.side);
  return out;
}

Cmp lower_cmp(const Range& r) { return r.lower_open() ? Cmp::Gt : Cmp::Ge; }
Cmp upper_cmp(const Range& r) { return r.upper_open() ? Cmp::Lt : Cmp::Le; }

Formula expand(const Formula& f) {
  const auto& t = f->terms;
  switch (f->op) {
    case Op::Dist: return dist_terms(f->value, f->cmp, t[0], t[1]);
    case Op::In: {
      const Range& r = *f->range;
      Formula lo = dist_terms(r.lower(), lower_cmp(r), t[0], t[1]);
      if (r.infinite()) return lo;
      return f_and(lo, dist_terms(*r.upper(), upper_cmp(r), t[0], t[1]));
    }
    case Op::Int: {
      const Range& r = *f->range;
      Formula s = f_and({in_theta(t[2]), f_leq(t[1], t[2]), dist_terms(r.lower(), lower_cmp(r), t[0], t[1])});
      if (r.infinite()) return f_and(s, in_theta(t[0]));
      return f_and(s, dist_terms(*r.upper(), upper_cmp(r), t[0], t[2]));
    }
    case Op::Suc: {
      Var w = fresh_var("w");
      return f_and({f_less(t[1], t[0]), in_theta(t[0]),
                    f_not(f_exists({w}, f_and(f_less(t[1], T(w)), f_less(T(w), t[0]))))});
    }
    case Op::Last: {
      auto hit = [&](int j) {
        Var v = fresh_var("v");
        return f_exists({v}, dist_terms(f->value * Dyadic::integer(j), Cmp::Eq, t[0], T(v)));
      };
      std::vector<Formula> parts{in_theta(t[0]), hit(f->index)};
      for (int j = 1; j < f->index; ++j) parts.push_back(f_not(hit(j)));
      return f_and(parts);
    }
    case Op::RprApply: {
      Node n = *f;
      n.rpr = expand_rpr(*f->rpr);
      return std::make_shared<const Node>(std::move(n));
    }
    case Op::DatalogApply: {
      Node n = *f;
      n.datalog = expand_datalog(*f->datalog);
      return std::make_shared<const Node>(std::move(n));
    }
    default: break;
  }
  if (f->kids.empty()) return f;
  Node n = *f;
  bool changed = false;
  for (auto& k : n.kids) {
    Formula e = expand(k);
    changed |= e != k;
    k = e;
  }
  return changed ? std::make_shared<const Node>(std::move(n)) : f;
}

}  // namespace

Formula expand_builtins(const Formula& f) { return expand(f); }

}  // namespace mtl
