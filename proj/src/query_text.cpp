#include "mtl/query_text.hpp"

#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace mtl::logic {

namespace {

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {
      "true", "false", "min",  "max",  "exists", "forall", "tc",   "dtc",  "suc",  "bit_in",
      "bit_fr", "dist", "in",  "int",  "last",   "plus",   "rpr",  "datalog", "lang", "free",
      "def",  "main",  "rule", "goal", "with",   "inf"};
  return k;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '%'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '%';
}
bool plain_ident(const std::string& s) {
  if (s.empty() || !ident_start(s[0])) return false;
  for (size_t i = 1; i < s.size(); ++i) {
    if (ident_char(s[i])) continue;
    if (s[i] == '#' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1]))) continue;
    return false;
  }
  return true;
}

// ---------------------------------------------------------------- rendering

struct Renderer {
  std::map<int, std::string> names;

  void collect_var(const Var& v, std::map<std::string, std::set<int>>& by_name) { by_name[v.name].insert(v.id); }

  void collect(const Formula& f, std::map<std::string, std::set<int>>& by_name) {
    for (const auto& t : f->terms)
      if (t.kind == Term::Variable) collect_var(t.var, by_name);
    for (const auto& v : f->vars) collect_var(v, by_name);
    for (const auto& k : f->kids) collect(k, by_name);
    if (f->rpr) collect(*f->rpr, by_name);
    if (f->datalog) collect(*f->datalog, by_name);
  }
  void collect(const RprQuery& q, std::map<std::string, std::set<int>>& by_name) {
    for (const auto& d : q.defs) {
      for (const auto& p : d.params) collect_var(p, by_name);
      collect_var(d.z, by_name);
      collect(d.body, by_name);
    }
    for (const auto& v : q.free) collect_var(v, by_name);
    collect(q.main, by_name);
  }
  void collect(const DatalogQuery& q, std::map<std::string, std::set<int>>& by_name) {
    for (const auto& r : q.rules) {
      for (const auto& v : r.head.args) collect_var(v, by_name);
      for (const auto& a : r.body)
        for (const auto& v : a.args) collect_var(v, by_name);
      if (r.side) collect(r.side, by_name);
    }
  }
  void assign(const std::map<std::string, std::set<int>>& by_name) {
    for (const auto& [name, ids] : by_name) {
      bool clean = plain_ident(name) && !keywords().count(name) && name[0] != '%';
      for (int id : ids)
        names[id] = clean && ids.size() == 1 ? name
                                             : (plain_ident(name) && name[0] != '%' ? name : "v") + "_" +
                                                   std::to_string(id);
    }
  }

  std::string var(const Var& v) const { return names.at(v.id); }
  std::string term(const Term& t) const {
    if (t.kind == Term::Min) return "min";
    if (t.kind == Term::Max) return "max";
    return var(t.var);
  }
  static std::string atom_name(const std::string& a) {
    if (plain_ident(a) && !keywords().count(a)) return a;
    return "`" + a + "`";
  }
  std::string args(const std::vector<Term>& ts, size_t from, size_t to, const char* sep = ", ") const {
    std::string out;
    for (size_t i = from; i < to; ++i) out += (i > from ? sep : "") + term(ts[i]);
    return out;
  }
  std::string vars(const std::vector<Var>& vs, size_t from, size_t to, const char* sep = " ") const {
    std::string out;
    for (size_t i = from; i < to; ++i) out += (i > from ? sep : "") + var(vs[i]);
    return out;
  }

  static int prec(const Formula& f) {
    switch (f->op) {
      case Op::Exists:
      case Op::Forall: return 0;
      case Op::Implies: return 1;
      case Op::Or: return 2;
      case Op::And: return 3;
      case Op::Not: return 4;
      default: return 5;
    }
  }
  std::string wrap(const Formula& f, int need) const {
    std::string s = formula(f);
    return prec(f) < need ? "(" + s + ")" : s;
  }

  std::string formula(const Formula& f) const {
    switch (f->op) {
      case Op::True: return "true";
      case Op::False: return "false";
      case Op::Less: return term(f->terms[0]) + " < " + term(f->terms[1]);
      case Op::Eq: return term(f->terms[0]) + " = " + term(f->terms[1]);
      case Op::Suc: return "suc(" + args(f->terms, 0, 2) + ")";
      case Op::BitIn: return "bit_in(" + args(f->terms, 0, 2) + ")";
      case Op::BitFr: return "bit_fr(" + args(f->terms, 0, 2) + ")";
      case Op::Atom: return atom_name(f->name) + "(" + term(f->terms[0]) + ")";
      case Op::Dist: return "dist{" + cmp_str(f->cmp) + "," + f->value.str() + "}(" + args(f->terms, 0, 2) + ")";
      case Op::In: return "in{" + f->range->str() + "}(" + args(f->terms, 0, 2) + ")";
      case Op::Int: return "int{" + f->range->str() + "}(" + args(f->terms, 0, 3) + ")";
      case Op::Last:
        return "last{" + f->value.str() + "," + std::to_string(f->index) + "," + std::to_string(f->count) +
               "}(" + term(f->terms[0]) + ")";
      case Op::Plus: return "plus(" + args(f->terms, 0, 3) + ")";
      case Op::Not: return "!" + wrap(f->kids[0], 5);
      case Op::And:
      case Op::Or: {
        std::string out;
        const char* sep = f->op == Op::And ? " & " : " | ";
        int need = prec(f) + 1;
        for (size_t i = 0; i < f->kids.size(); ++i) out += (i ? sep : "") + wrap(f->kids[i], need);
        return out;
      }
      case Op::Implies: return wrap(f->kids[0], 2) + " -> " + wrap(f->kids[1], 1);
      case Op::Exists:
      case Op::Forall:
        return std::string(f->op == Op::Exists ? "exists " : "forall ") + vars(f->vars, 0, f->vars.size()) +
               " . " + formula(f->kids[0]);
      case Op::Tc: {
        size_t k = f->vars.size() / 2;
        return std::string(f->deterministic ? "dtc[" : "tc[") + vars(f->vars, 0, k) + "; " +
               vars(f->vars, k, 2 * k) + "](" + formula(f->kids[0]) + ")(" + args(f->terms, 0, k, " ") + "; " +
               args(f->terms, k, 2 * k, " ") + ")";
      }
      case Op::Rel: {
        std::string out = f->name + "[" + args(f->terms, 0, f->terms.size());
        return out + (f->previous ? "-1]" : "]");
      }
      case Op::RprApply:
        return "rpr{ " + block(*f->rpr, " ") + "}(" + args(f->terms, 0, f->terms.size()) + ")";
      case Op::DatalogApply:
        return "datalog{ " + block(*f->datalog, " ") + "}(" + term(f->terms[0]) + ")";
    }
    return "?";
  }

  std::string block(const RprQuery& q, const std::string& nl) const {
    std::string out = "free " + vars(q.free, 0, q.free.size(), ", ") + ";" + nl;
    for (const auto& d : q.defs)
      out += "def " + d.name + "(" + vars(d.params, 0, d.params.size(), ", ") + "; " + var(d.z) +
             ") := " + formula(d.body) + ";" + nl;
    return out + "main := " + formula(q.main) + ";" + nl;
  }
  std::string block(const DatalogQuery& q, const std::string& nl) const {
    std::string out = "goal " + q.goal + ";" + nl;
    auto atom = [&](const DlAtom& a) { return a.pred + "(" + vars(a.args, 0, a.args.size(), ", ") + ")"; };
    for (const auto& r : q.rules) {
      out += "rule " + atom(r.head);
      for (size_t i = 0; i < r.body.size(); ++i) out += (i ? ", " : " :- ") + atom(r.body[i]);
      if (r.side && r.side->op != Op::True) out += " with " + formula(r.side);
      out += ";" + nl;
    }
    return out;
  }
};

// ---------------------------------------------------------------- parsing

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  ExtQuery query() {
    keyword("lang");
    std::string l = ident("language");
    auto lang = language_from_string(l == "fo" && peek_char() == '+' ? (advance(), "fo+") : l);
    if (!lang) error("unknown language " + l);
    expect(';');
    ExtQuery out;
    out.lang = *lang;
    // Lifted positive queries keep the free/main form with embedded blocks.
    if (*lang == Language::Datalog && peek_ident() != "free") {
      out.payload = datalog_block([&] { return at_end(); });
      return out;
    }
    if (*lang == Language::RPR) {
      out.payload = rpr_block([&] { return at_end(); });
      return out;
    }
    Scope sc;
    bool have_free = false, have_main = false;
    Formula main;
    while (!at_end()) {
      std::string kw = ident("statement");
      if (kw == "free") {
        Var v = named_var(ident("variable"));
        sc.push_back({v.name, v});
        out.free = v;
        have_free = true;
        expect(';');
      } else if (kw == "main") {
        expect_str(":=");
        main = formula(sc);
        have_main = true;
        expect(';');
      } else {
        error("unexpected statement " + kw);
      }
    }
    if (!have_free || !have_main) error("query needs free and main statements");
    out.payload = main;
    return out;
  }

  Formula standalone(std::vector<Var>* free) {
    implicit_ = true;
    Scope sc;
    Formula f = formula(sc);
    skip_ws();
    if (!at_end()) error("trailing input");
    if (free) *free = implicit_vars_;
    return f;
  }

 private:
  using Scope = std::vector<std::pair<std::string, Var>>;

  const std::string& s_;
  size_t i_ = 0;
  bool implicit_ = false;
  std::vector<Var> implicit_vars_;

  [[noreturn]] void error(const std::string& msg) const {
    SourceSpan sp;
    for (size_t k = 0; k < i_ && k < s_.size(); ++k) {
      if (s_[k] == '\n') {
        ++sp.line;
        sp.column = 1;
      } else {
        ++sp.column;
      }
    }
    throw ParseError(msg, sp);
  }

  void skip_ws() {
    for (;;) {
      while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
      if (i_ + 1 < s_.size() && s_[i_] == '/' && s_[i_ + 1] == '/') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
        continue;
      }
      return;
    }
  }
  bool at_end() {
    skip_ws();
    return i_ >= s_.size();
  }
  char peek_char() {
    skip_ws();
    return i_ < s_.size() ? s_[i_] : '\0';
  }
  void advance() { ++i_; }
  bool accept(char c) {
    if (peek_char() != c) return false;
    ++i_;
    return true;
  }
  bool accept_str(const std::string& t) {
    skip_ws();
    if (s_.compare(i_, t.size(), t) != 0) return false;
    i_ += t.size();
    return true;
  }
  void expect(char c) {
    if (!accept(c)) error(std::string("expected '") + c + "'");
  }
  void expect_str(const std::string& t) {
    if (!accept_str(t)) error("expected '" + t + "'");
  }

  std::string ident(const char* what) {
    skip_ws();
    if (i_ < s_.size() && s_[i_] == '`') {
      size_t j = s_.find('`', i_ + 1);
      if (j == std::string::npos || j == i_ + 1) error("unterminated quoted name");
      std::string out = s_.substr(i_ + 1, j - i_ - 1);
      i_ = j + 1;
      quoted_ = true;
      return out;
    }
    quoted_ = false;
    if (i_ >= s_.size() || !ident_start(s_[i_])) error(std::string("expected ") + what);
    size_t j = i_;
    while (j < s_.size() &&
           (ident_char(s_[j]) ||
            (s_[j] == '#' && j + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j + 1])))))
      ++j;
    std::string out = s_.substr(i_, j - i_);
    i_ = j;
    return out;
  }
  bool quoted_ = false;

  std::string peek_ident() {
    size_t save = i_;
    std::string out;
    skip_ws();
    if (i_ < s_.size() && ident_start(s_[i_])) out = ident("name");
    i_ = save;
    return out;
  }
  void keyword(const std::string& k) {
    if (ident("keyword") != k) error("expected '" + k + "'");
  }

  Var lookup(const Scope& sc, const std::string& name) {
    for (auto it = sc.rbegin(); it != sc.rend(); ++it)
      if (it->first == name) return it->second;
    if (implicit_) {
      for (const auto& v : implicit_vars_)
        if (v.name == name) return v;
      implicit_vars_.push_back(named_var(name));
      return implicit_vars_.back();
    }
    error("unbound variable " + name);
  }

  Term term(Scope& sc) {
    std::string name = ident("term");
    if (quoted_) error("quoted name used as a term");
    if (name == "min") return Term::min();
    if (name == "max") return Term::max();
    if (keywords().count(name)) error("keyword " + name + " used as a term");
    return T(lookup(sc, name));
  }
  std::vector<Term> term_list(Scope& sc, char close, size_t n) {
    std::vector<Term> out;
    for (size_t k = 0; k < n; ++k) {
      if (k) expect(',');
      out.push_back(term(sc));
    }
    expect(close);
    return out;
  }

  std::string until(const std::string& stops) {
    skip_ws();
    size_t j = i_;
    while (j < s_.size() && stops.find(s_[j]) == std::string::npos) ++j;
    std::string out = s_.substr(i_, j - i_);
    i_ = j;
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
    return out;
  }
  Dyadic dyadic(const std::string& stops) {
    size_t at = i_;
    std::string text = until(stops);
    try {
      return parse_dyadic(text);
    } catch (const ParseError&) {
      i_ = at;
      error("bad number '" + text + "'");
    }
  }
  Range range() {
    skip_ws();
    size_t at = i_;
    if (i_ >= s_.size() || (s_[i_] != '[' && s_[i_] != '(')) error("expected range");
    size_t j = s_.find_first_of("])", i_ + 1);
    if (j == std::string::npos) error("unterminated range");
    std::string text = s_.substr(i_, j + 1 - i_);
    i_ = j + 1;
    try {
      return parse_range(text);
    } catch (const ParseError& e) {
      i_ = at;
      error(std::string("bad range: ") + e.what());
    }
  }

  Formula formula(Scope& sc) {
    Formula left = disjunction(sc);
    if (accept_str("->")) return f_implies(left, formula(sc));
    return left;
  }
  Formula disjunction(Scope& sc) {
    std::vector<Formula> parts{conjunction(sc)};
    while (accept('|')) parts.push_back(conjunction(sc));
    return parts.size() == 1 ? parts[0] : f_or(parts);
  }
  Formula conjunction(Scope& sc) {
    std::vector<Formula> parts{unary(sc)};
    while (accept('&')) parts.push_back(unary(sc));
    return parts.size() == 1 ? parts[0] : f_and(parts);
  }
  Formula unary(Scope& sc) {
    if (peek_char() == '!' && !(i_ + 1 < s_.size() && s_[i_ + 1] == '=')) {
      advance();
      return f_not(unary(sc));
    }
    std::string kw = peek_ident();
    if (kw == "exists" || kw == "forall") {
      ident("quantifier");
      std::vector<Var> vs;
      size_t mark = sc.size();
      while (peek_char() != '.') {
        std::string n = ident("variable");
        if (keywords().count(n)) error("keyword " + n + " used as a variable");
        vs.push_back(named_var(n));
        sc.push_back({n, vs.back()});
      }
      if (vs.empty()) error("quantifier without variables");
      expect('.');
      Formula body = formula(sc);
      sc.resize(mark);
      return kw == "exists" ? f_exists(vs, body) : f_forall(vs, body);
    }
    return primary(sc);
  }

  Formula primary(Scope& sc) {
    if (accept('(')) {
      Formula f = formula(sc);
      expect(')');
      return f;
    }
    size_t at = i_;
    skip_ws();
    bool quoted = i_ < s_.size() && s_[i_] == '`';
    std::string name = peek_ident();
    if (!quoted && name.empty()) error("expected formula");
    if (!quoted) {
      if (name == "true") return ident(""), f_true();
      if (name == "false") return ident(""), f_false();
      if (name == "suc" || name == "bit_in" || name == "bit_fr" || name == "plus") {
        ident("");
        expect('(');
        auto ts = term_list(sc, ')', name == "plus" ? 3 : 2);
        if (name == "suc") return f_suc(ts[0], ts[1]);
        if (name == "bit_in") return f_bit_in(ts[0], ts[1]);
        if (name == "bit_fr") return f_bit_fr(ts[0], ts[1]);
        return f_plus(ts[0], ts[1], ts[2]);
      }
      if (name == "dist") {
        ident("");
        expect('{');
        Cmp c;
        if (accept_str("<=")) c = Cmp::Le;
        else if (accept_str(">=")) c = Cmp::Ge;
        else if (accept('<')) c = Cmp::Lt;
        else if (accept('>')) c = Cmp::Gt;
        else if (accept('=')) c = Cmp::Eq;
        else error("expected comparison");
        expect(',');
        Dyadic r = dyadic("}");
        expect('}');
        expect('(');
        auto ts = term_list(sc, ')', 2);
        return f_dist(c, r, ts[0], ts[1]);
      }
      if (name == "in" || name == "int") {
        ident("");
        expect('{');
        Range r = range();
        expect('}');
        expect('(');
        auto ts = term_list(sc, ')', name == "in" ? 2 : 3);
        return name == "in" ? f_in(r, ts[0], ts[1]) : f_int(r, ts[0], ts[1], ts[2]);
      }
      if (name == "last") {
        ident("");
        expect('{');
        Dyadic unit = dyadic(",");
        expect(',');
        int idx = integer();
        expect(',');
        int cnt = integer();
        expect('}');
        expect('(');
        auto ts = term_list(sc, ')', 1);
        if (unit.is_zero() || idx < 1 || idx > cnt) error("bad last parameters");
        return f_last(unit, idx, cnt, ts[0]);
      }
      if (name == "tc" || name == "dtc") {
        ident("");
        expect('[');
        size_t mark = sc.size();
        std::vector<Var> from, to;
        while (peek_char() != ';') from.push_back(bind(sc));
        expect(';');
        while (peek_char() != ']') to.push_back(bind(sc));
        expect(']');
        if (from.empty() || from.size() != to.size()) error("closure tuples differ in length");
        expect('(');
        Formula body = formula(sc);
        expect(')');
        sc.resize(mark);
        expect('(');
        std::vector<Term> src, dst;
        while (peek_char() != ';') src.push_back(term(sc));
        expect(';');
        while (peek_char() != ')') dst.push_back(term(sc));
        expect(')');
        if (src.size() != from.size() || dst.size() != from.size()) error("closure arity mismatch");
        return f_tc(name == "dtc", from, to, body, src, dst);
      }
      if (name == "rpr") {
        ident("");
        expect('{');
        auto q = std::make_shared<RprQuery>(rpr_block([&] { return peek_char() == '}'; }));
        expect('}');
        expect('(');
        auto ts = term_list(sc, ')', q->free.size());
        return f_rpr_apply(q, ts);
      }
      if (name == "datalog") {
        ident("");
        expect('{');
        auto q = std::make_shared<DatalogQuery>(datalog_block([&] { return peek_char() == '}'; }));
        expect('}');
        expect('(');
        auto ts = term_list(sc, ')', 1);
        return f_datalog_apply(q, ts[0]);
      }
    }
    // Data atom, relation variable, or comparison of terms.
    size_t after_name = i_;
    std::string n = ident("name");
    bool q = quoted_;
    char next = peek_char();
    if (next == '(' ) {
      advance();
      Term t = term(sc);
      expect(')');
      return f_atom(n, t);
    }
    if (next == '[' && !q) {
      advance();
      std::vector<Term> ts;
      bool previous = false;
      while (true) {
        ts.push_back(term(sc));
        if (accept_str("-1")) {
          previous = true;
          expect(']');
          break;
        }
        if (accept(']')) break;
        expect(',');
      }
      return f_rel(n, ts, previous);
    }
    if (q) error("quoted name must be applied to a term");
    i_ = after_name;
    (void)at;
    Term a = term(sc);
    if (accept_str("<=")) return f_leq(a, term(sc));
    if (accept_str("!=")) return f_not(f_eq(a, term(sc)));
    if (accept('<')) return f_less(a, term(sc));
    if (accept('=')) return f_eq(a, term(sc));
    error("expected comparison after term");
  }

  Var bind(Scope& sc) {
    std::string n = ident("variable");
    if (keywords().count(n)) error("keyword " + n + " used as a variable");
    Var v = named_var(n);
    sc.push_back({n, v});
    return v;
  }

  int integer() {
    skip_ws();
    size_t j = i_;
    while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
    if (j == i_ || j - i_ > 6) error("expected small integer");
    int v = std::stoi(s_.substr(i_, j - i_));
    i_ = j;
    return v;
  }

  RprQuery rpr_block(const std::function<bool()>& done) {
    RprQuery q;
    Scope free_scope;
    bool have_main = false;
    while (!done()) {
      std::string kw = ident("statement");
      if (kw == "free") {
        do {
          q.free.push_back(bind(free_scope));
        } while (accept(','));
        expect(';');
      } else if (kw == "def") {
        RelDef d;
        d.name = ident("relation name");
        expect('(');
        Scope sc;
        while (peek_char() != ';') {
          d.params.push_back(bind(sc));
          if (peek_char() != ';') expect(',');
        }
        expect(';');
        d.z = bind(sc);
        expect(')');
        expect_str(":=");
        d.body = formula(sc);
        expect(';');
        q.defs.push_back(std::move(d));
      } else if (kw == "main") {
        expect_str(":=");
        q.main = formula(free_scope);
        have_main = true;
        expect(';');
      } else {
        error("unexpected statement " + kw);
      }
    }
    if (!have_main) error("recursion block without main");
    return q;
  }

  DatalogQuery datalog_block(const std::function<bool()>& done) {
    DatalogQuery q;
    while (!done()) {
      std::string kw = ident("statement");
      if (kw == "goal") {
        q.goal = ident("predicate");
        expect(';');
      } else if (kw == "rule") {
        Scope sc;
        bool saved = implicit_;
        auto saved_vars = implicit_vars_;
        implicit_ = true;
        implicit_vars_.clear();
        DlRule r;
        r.head = dl_atom(sc);
        if (accept_str(":-")) {
          do {
            r.body.push_back(dl_atom(sc));
          } while (accept(','));
        }
        r.side = f_true();
        if (peek_ident() == "with") {
          ident("");
          r.side = formula(sc);
        }
        expect(';');
        implicit_ = saved;
        implicit_vars_ = saved_vars;
        q.rules.push_back(std::move(r));
      } else {
        error("unexpected statement " + kw);
      }
    }
    if (q.goal.empty()) error("datalog block without goal");
    return q;
  }

  DlAtom dl_atom(Scope& sc) {
    DlAtom a;
    a.pred = ident("predicate");
    expect('(');
    if (!accept(')')) {
      do {
        Term t = term(sc);
        if (t.kind != Term::Variable) error("datalog arguments must be variables");
        a.args.push_back(t.var);
      } while (accept(','));
      expect(')');
    }
    return a;
  }
};

}  // namespace

std::string render(const Formula& f) {
  Renderer r;
  std::map<std::string, std::set<int>> by_name;
  r.collect(f, by_name);
  r.assign(by_name);
  return r.formula(f);
}

std::string render(const RprQuery& q) {
  Renderer r;
  std::map<std::string, std::set<int>> by_name;
  r.collect(q, by_name);
  r.assign(by_name);
  return r.block(q, "\n");
}

std::string render(const DatalogQuery& q) {
  Renderer r;
  std::map<std::string, std::set<int>> by_name;
  r.collect(q, by_name);
  r.assign(by_name);
  return r.block(q, "\n");
}

std::string render(const ExtQuery& q) {
  std::string head = "lang " + to_string(q.lang) + ";\n";
  if (const auto* r = std::get_if<RprQuery>(&q.payload)) return head + render(*r);
  if (const auto* d = std::get_if<DatalogQuery>(&q.payload)) return head + render(*d);
  const Formula& f = std::get<Formula>(q.payload);
  Renderer r;
  std::map<std::string, std::set<int>> by_name;
  r.collect_var(q.free, by_name);
  r.collect(f, by_name);
  r.assign(by_name);
  return head + "free " + r.var(q.free) + ";\nmain := " + r.formula(f) + ";\n";
}

ExtQuery parse_query(const std::string& text) {
  Parser p(text);
  return p.query();
}

Formula parse_formula(const std::string& text, std::vector<Var>* free) {
  Parser p(text);
  return p.standalone(free);
}

}  // namespace mtl::logic
