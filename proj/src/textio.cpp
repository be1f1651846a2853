#include "mtl/textio.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <vector>

namespace mtl {

namespace {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  SourceSpan span;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') advance(1);
      continue;
    }
    SourceSpan sp{line, col, 1};
    size_t j = i;
    if (ident_start(c)) {
      // '#' continues a name only before a digit, so "P#2" is one atom.
      while (j < s.size() &&
             (ident_char(s[j]) || (s[j] == '#' && j + 1 < s.size() && digit(s[j + 1]))))
        ++j;
      sp.length = static_cast<int>(j - i);
      out.push_back({Tok::Ident, s.substr(i, j - i), sp});
      advance(j - i);
      continue;
    }
    if (digit(c)) {
      while (j < s.size() && digit(s[j])) ++j;
      if (j + 1 < s.size() && s[j] == '.' && digit(s[j + 1])) {
        ++j;
        while (j < s.size() && digit(s[j])) ++j;
        if (j < s.size() && s[j] == 'b') ++j;
      } else if (j < s.size() && s[j] == '/') {
        ++j;
        while (j < s.size() && digit(s[j])) ++j;
        if (j < s.size() && s[j] == '^') {
          ++j;
          while (j < s.size() && digit(s[j])) ++j;
        }
      } else if (j < s.size() && s[j] == 'b') {
        ++j;
      }
      sp.length = static_cast<int>(j - i);
      out.push_back({Tok::Number, s.substr(i, j - i), sp});
      advance(j - i);
      continue;
    }
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      sp.length = 2;
      out.push_back({Tok::Punct, "->", sp});
      advance(2);
      continue;
    }
    if (std::string("[]().,&|@").find(c) != std::string::npos) {
      out.push_back({Tok::Punct, std::string(1, c), sp});
      advance(1);
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", sp);
  }
  out.push_back({Tok::End, "", {line, col, 1}});
  return out;
}

Dyadic dyadic_from_digits(const std::string& t, const SourceSpan& sp) {
  auto bad = [&](const std::string& why) -> Dyadic {
    throw ParseError("malformed dyadic literal '" + t + "': " + why, sp);
  };
  if (t.empty() || !digit(t[0])) return bad("expected digits");
  size_t slash = t.find('/');
  size_t dot = t.find('.');
  if (slash != std::string::npos) {
    BigInt num(t.substr(0, slash));
    std::string den = t.substr(slash + 1);
    if (den.empty()) return bad("missing denominator");
    size_t caret = den.find('^');
    if (caret != std::string::npos) {
      if (den.substr(0, caret) != "2" || caret + 1 >= den.size()) return bad("expected 2^k");
      if (den.size() - caret - 1 > 4) return bad("exponent too large");
      unsigned long k = std::stoul(den.substr(caret + 1));
      if (k > 4096) return bad("exponent too large");
      return Dyadic(num, static_cast<unsigned>(k));
    }
    BigInt d(den);
    if (den.size() > 1300) return bad("denominator too large");
    if (d == 0) return bad("zero denominator");
    unsigned k = static_cast<unsigned>(boost::multiprecision::msb(d));
    if (d != (BigInt(1) << k)) throw ParseError("non-dyadic denominator in '" + t + "'", sp);
    return Dyadic(num, k);
  }
  if (dot != std::string::npos) {
    std::string ip = t.substr(0, dot), fp = t.substr(dot + 1);
    if (!fp.empty() && fp.back() == 'b') {
      fp.pop_back();
      BigInt v = 0;
      for (char c : ip + fp) {
        if (c != '0' && c != '1') return bad("binary digits only");
        v = v * 2 + (c - '0');
      }
      return Dyadic(v, static_cast<unsigned>(fp.size()));
    }
    // Finite decimal: value = n / 10^f = n / (5^f 2^f), dyadic iff 5^f | n.
    BigInt n(ip + fp);
    BigInt five = 1;
    for (size_t k = 0; k < fp.size(); ++k) five *= 5;
    if (n % five != 0) throw ParseError("non-dyadic decimal '" + t + "'", sp);
    return Dyadic(n / five, static_cast<unsigned>(fp.size()));
  }
  if (t.back() == 'b') {
    BigInt v = 0;
    for (size_t k = 0; k + 1 < t.size(); ++k) {
      if (t[k] != '0' && t[k] != '1') return bad("binary digits only");
      v = v * 2 + (t[k] - '0');
    }
    return Dyadic(v, 0);
  }
  for (char c : t)
    if (!digit(c)) return bad("unexpected character");
  return Dyadic(BigInt(t), 0);
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at_punct(const char* p) const { return peek().kind == Tok::Punct && peek().text == p; }
  bool at_end() const { return peek().kind == Tok::End; }

  Token expect_punct(const char* p) {
    if (!at_punct(p)) fail(std::string("expected '") + p + "'");
    return next();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(msg + (t.kind == Tok::End ? " at end of input" : ", found '" + t.text + "'"),
                     t.span);
  }

  Dyadic dyadic() {
    if (peek().kind != Tok::Number) fail("expected a dyadic number");
    Token t = next();
    return dyadic_from_digits(t.text, t.span);
  }

  Range range() {
    SourceSpan start = peek().span;
    bool lo_open;
    if (at_punct("[")) lo_open = false;
    else if (at_punct("(")) lo_open = true;
    else fail("expected '[' or '('");
    next();
    Dyadic lo = dyadic();
    expect_punct(",");
    std::optional<Dyadic> hi;
    if (peek().kind == Tok::Ident && peek().text == "inf") {
      next();
    } else {
      hi = dyadic();
    }
    bool hi_open;
    if (at_punct("]")) hi_open = false;
    else if (at_punct(")")) hi_open = true;
    else fail("expected ']' or ')'");
    next();
    try {
      return Range(lo, lo_open, hi, hi_open);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), start);
    }
  }

  std::string atom_name() {
    if (peek().kind != Tok::Ident) fail("expected an atom name");
    const std::string& t = peek().text;
    if (t == "DIA" || t == "BOX" || t == "inf") fail("reserved word used as atom");
    return next().text;
  }

  Literal literal() {
    if (peek().kind == Tok::Ident && (peek().text == "DIA" || peek().text == "BOX")) {
      bool dia = next().text == "DIA";
      Range r = range();
      std::string a = atom_name();
      return dia ? Literal::diamond(r, a) : Literal::box(r, a);
    }
    return Literal::make_atom(atom_name());
  }

  Rule rule() {
    Rule r;
    if (!at_punct("->")) {
      r.body.push_back(literal());
      while (at_punct("&")) {
        next();
        r.body.push_back(literal());
      }
    }
    expect_punct("->");
    if (!at_punct(".")) {
      r.head.push_back(literal());
      while (at_punct("|")) {
        next();
        r.head.push_back(literal());
      }
    }
    expect_punct(".");
    return r;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace

Program parse_program(const std::string& text) {
  Parser p(text);
  std::vector<Rule> rules;
  while (!p.at_end()) rules.push_back(p.rule());
  return Program(std::move(rules));
}

DataInstance parse_data(const std::string& text) {
  Parser p(text);
  std::vector<DataEntry> entries;
  while (!p.at_end()) {
    std::set<std::string> atoms;
    SourceSpan sp = p.peek().span;
    if (!p.at_punct("@")) {
      atoms.insert(p.atom_name());
      while (p.at_punct(",")) {
        p.next();
        atoms.insert(p.atom_name());
      }
    }
    p.expect_punct("@");
    Dyadic t = p.dyadic();
    if (!entries.empty() && !(entries.back().time < t))
      throw ParseError("non-increasing timestamp " + t.str(), sp);
    entries.push_back({t, std::move(atoms)});
  }
  if (entries.empty()) throw ParseError("data instance needs at least one timestamp", p.peek().span);
  return DataInstance(std::move(entries));
}

Dyadic parse_dyadic(const std::string& text) {
  Parser p(text);
  Dyadic d = p.dyadic();
  if (!p.at_end()) p.fail("trailing input after number");
  return d;
}

Range parse_range(const std::string& text) {
  Parser p(text);
  Range r = p.range();
  if (!p.at_end()) p.fail("trailing input after range");
  return r;
}

std::string render(const Rule& rule) {
  std::string s;
  for (size_t i = 0; i < rule.body.size(); ++i) s += (i ? " & " : "") + rule.body[i].str();
  s += rule.body.empty() ? "-> " : " -> ";
  for (size_t i = 0; i < rule.head.size(); ++i) s += (i ? " | " : "") + rule.head[i].str();
  s += ".";
  return s;
}

std::string render(const Program& program) {
  std::string s;
  for (const auto& r : program.rules) s += render(r) + "\n";
  return s;
}

std::string render(const DataInstance& data) {
  std::string s;
  for (const auto& e : data.entries()) {
    std::string names;
    for (const auto& a : e.atoms) names += (names.empty() ? "" : ",") + a;
    s += names + "@" + e.time.str() + "\n";
  }
  return s;
}

}  // namespace mtl
