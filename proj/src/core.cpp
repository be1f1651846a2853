#include "mtl/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mtl {

Dyadic::Dyadic(BigInt numerator, unsigned exponent)
    : num_(std::move(numerator)), exp_(exponent) {
  if (num_ < 0) throw std::invalid_argument("negative dyadic");
  if (num_ == 0) {
    exp_ = 0;
    return;
  }
  unsigned tz = static_cast<unsigned>(boost::multiprecision::lsb(num_));
  unsigned shift = std::min(tz, exp_);
  num_ >>= shift;
  exp_ -= shift;
}

Dyadic dyadic_normalize(const BigInt& numerator, unsigned exponent) {
  return Dyadic(numerator, exponent);
}

BigInt Dyadic::scaled(unsigned e) const {
  if (e < exp_) throw std::logic_error("scaled: exponent too small");
  return num_ << (e - exp_);
}

double Dyadic::to_double() const {
  return std::ldexp(num_.convert_to<double>(), -static_cast<int>(exp_));
}

std::string Dyadic::str() const {
  std::string s = num_.str();
  if (exp_ == 0) return s;
  BigInt den = BigInt(1) << exp_;
  return s + "/" + den.str();
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
  unsigned e = std::max(a.exp_, b.exp_);
  BigInt x = a.scaled(e), y = b.scaled(e);
  if (x < y) return std::strong_ordering::less;
  if (x > y) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
  unsigned e = std::max(a.exp_, b.exp_);
  return Dyadic(a.scaled(e) + b.scaled(e), e);
}

Dyadic operator*(const Dyadic& a, const Dyadic& b) {
  return Dyadic(a.num_ * b.num_, a.exp_ + b.exp_);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) {
  unsigned e = std::max(a.exp_, b.exp_);
  BigInt d = a.scaled(e) - b.scaled(e);
  if (d < 0) throw std::logic_error("dyadic subtraction below zero");
  return Dyadic(d, e);
}

Dyadic dyadic_gcd(const std::vector<Dyadic>& values) {
  unsigned e = 0;
  for (const auto& v : values) e = std::max(e, v.exponent());
  BigInt g = 0;
  for (const auto& v : values) g = boost::multiprecision::gcd(g, v.scaled(e));
  return Dyadic(g, e);
}

SignedDyadic signed_difference(const Dyadic& a, const Dyadic& b) {
  if (a >= b) return {false, a - b};
  return {true, b - a};
}

Range::Range(Dyadic lower, bool lower_open, std::optional<Dyadic> upper, bool upper_open)
    : lower_(std::move(lower)), lower_open_(lower_open), upper_(std::move(upper)),
      upper_open_(upper_open) {
  if (!upper_) {
    upper_open_ = true;
    return;
  }
  if (*upper_ < lower_) throw std::invalid_argument("empty range " + str());
  if (*upper_ == lower_ && (lower_open_ || upper_open_))
    throw std::invalid_argument("empty range " + str());
}

bool Range::contains(const Dyadic& v) const {
  if (lower_open_ ? v <= lower_ : v < lower_) return false;
  if (!upper_) return true;
  return upper_open_ ? v < *upper_ : v <= *upper_;
}

std::string Range::str() const {
  std::string s = lower_open_ ? "(" : "[";
  s += lower_.str() + ",";
  if (upper_) {
    s += upper_->str();
    s += upper_open_ ? ")" : "]";
  } else {
    s += "inf)";
  }
  return s;
}

std::strong_ordering operator<=>(const Range& a, const Range& b) {
  if (auto c = a.lower_ <=> b.lower_; c != 0) return c;
  if (auto c = a.lower_open_ <=> b.lower_open_; c != 0) return c;
  if (a.upper_.has_value() != b.upper_.has_value())
    return a.upper_ ? std::strong_ordering::less : std::strong_ordering::greater;
  if (a.upper_) {
    if (auto c = *a.upper_ <=> *b.upper_; c != 0) return c;
  }
  return a.upper_open_ <=> b.upper_open_;
}

bool range_member(const SignedDyadic& delta, const Range& rho) {
  if (delta.negative && !delta.magnitude.is_zero()) return false;
  return rho.contains(delta.magnitude);
}

std::string Literal::str() const {
  switch (kind) {
    case LitKind::Atom: return atom;
    case LitKind::Diamond: return "DIA " + range->str() + " " + atom;
    case LitKind::Box: return "BOX " + range->str() + " " + atom;
  }
  return atom;
}

std::strong_ordering operator<=>(const Literal& a, const Literal& b) {
  if (auto c = a.kind <=> b.kind; c != 0) return c;
  if (auto c = a.atom <=> b.atom; c != 0) return c;
  if (a.range.has_value() != b.range.has_value())
    return a.range ? std::strong_ordering::greater : std::strong_ordering::less;
  if (a.range) return *a.range <=> *b.range;
  return std::strong_ordering::equal;
}

Program::Program(std::vector<Rule> rs) : rules(std::move(rs)) {
  for (const auto& r : rules) {
    for (const auto& l : r.body) atoms.insert(l.atom);
    for (const auto& l : r.head) atoms.insert(l.atom);
  }
}

bool is_horn(const Program& program) {
  for (const auto& r : program.rules) {
    if (r.head.size() > 1) return false;
    if (r.head.size() == 1 && r.head[0].kind != LitKind::Atom) return false;
  }
  return true;
}

std::vector<Range> program_ranges(const Program& program) {
  std::vector<Range> out;
  for (const auto& r : program.rules) {
    for (const auto& l : r.body)
      if (l.range) out.push_back(*l.range);
    for (const auto& l : r.head)
      if (l.range) out.push_back(*l.range);
  }
  return out;
}

FragmentDescriptor classify(const Program& program) {
  FragmentDescriptor d;
  bool horn = is_horn(program);
  bool core = horn;
  bool dia = false, box = false;
  for (const auto& r : program.rules) {
    if (r.body.size() + r.head.size() > 2) core = false;
    for (const auto* side : {&r.body, &r.head})
      for (const auto& l : *side) {
        dia |= l.kind == LitKind::Diamond;
        box |= l.kind == LitKind::Box;
      }
  }
  d.hornity = core && horn ? Hornity::Core : horn ? Hornity::Horn : Hornity::Full;
  d.operator_use = dia && box ? OperatorUse::Mixed : box ? OperatorUse::BoxOnly : OperatorUse::DiamondOnly;

  auto ranges = program_ranges(program);
  bool all_inf = true, all_punct = true, no_punct = true;
  for (const auto& r : ranges) {
    all_inf &= r.infinite();
    all_punct &= r.is_punctual();
    no_punct &= !r.is_punctual();
  }
  if (all_inf) d.range_class = RangeClass::InfiniteOnly;
  else if (all_punct) d.range_class = RangeClass::PunctualOnly;
  else if (no_punct) d.range_class = RangeClass::NonPunctualOnly;
  else d.range_class = RangeClass::Arbitrary;
  d.range_uniform = std::all_of(ranges.begin(), ranges.end(),
                                [&](const Range& r) { return r == ranges.front(); });
  return d;
}

DataInstance::DataInstance(std::vector<DataEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("data instance needs at least one timestamp");
  for (size_t i = 1; i < entries_.size(); ++i)
    if (!(entries_[i - 1].time < entries_[i].time))
      throw std::invalid_argument("non-increasing timestamp " + entries_[i].time.str());
}

std::set<std::string> DataInstance::atoms() const {
  std::set<std::string> out;
  for (const auto& e : entries_) out.insert(e.atoms.begin(), e.atoms.end());
  return out;
}

TimestampSet DataInstance::all() const {
  TimestampSet s;
  for (int i = 0; i < size(); ++i) s.insert(i);
  return s;
}

std::string to_string(Hornity h) {
  switch (h) {
    case Hornity::Full: return "full";
    case Hornity::Horn: return "horn";
    case Hornity::Core: return "core";
  }
  return "?";
}

std::string to_string(OperatorUse u) {
  switch (u) {
    case OperatorUse::Mixed: return "mixed";
    case OperatorUse::DiamondOnly: return "diamondOnly";
    case OperatorUse::BoxOnly: return "boxOnly";
  }
  return "?";
}

std::string to_string(RangeClass c) {
  switch (c) {
    case RangeClass::InfiniteOnly: return "infiniteOnly";
    case RangeClass::PunctualOnly: return "punctualOnly";
    case RangeClass::NonPunctualOnly: return "nonPunctualOnly";
    case RangeClass::Arbitrary: return "arbitrary";
  }
  return "?";
}

}  // namespace mtl
