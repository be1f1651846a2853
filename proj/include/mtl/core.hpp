// Exact dyadic arithmetic, ranges, MTL syntax, data instances, fragments.
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace mtl {

using BigInt = boost::multiprecision::cpp_int;

// Non-negative m / 2^k kept in lowest terms.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(BigInt numerator, unsigned exponent);
  static Dyadic integer(std::int64_t v) { return Dyadic(BigInt(v), 0); }

  const BigInt& numerator() const { return num_; }
  unsigned exponent() const { return exp_; }
  bool is_zero() const { return num_ == 0; }

  // numerator scaled to exponent e (e >= exponent()).
  BigInt scaled(unsigned e) const;
  double to_double() const;
  // "m" for integers, "m/d" with d = 2^k otherwise.
  std::string str() const;

  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.exp_ == b.exp_ && a.num_ == b.num_;
  }
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b);
  // Requires a >= b.
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b);

 private:
  BigInt num_ = 0;
  unsigned exp_ = 0;
};

Dyadic dyadic_normalize(const BigInt& numerator, unsigned exponent);
// Largest d with every argument an integer multiple of d; all zero gives 0.
Dyadic dyadic_gcd(const std::vector<Dyadic>& values);

struct SignedDyadic {
  bool negative = false;
  Dyadic magnitude;
  friend bool operator==(const SignedDyadic&, const SignedDyadic&) = default;
};
SignedDyadic signed_difference(const Dyadic& a, const Dyadic& b);

class Range {
 public:
  // Throws std::invalid_argument when the interval is empty.
  Range(Dyadic lower, bool lower_open, std::optional<Dyadic> upper, bool upper_open);
  static Range punctual(const Dyadic& r) { return Range(r, false, r, false); }

  const Dyadic& lower() const { return lower_; }
  bool lower_open() const { return lower_open_; }
  const std::optional<Dyadic>& upper() const { return upper_; }
  bool upper_open() const { return upper_open_; }
  bool infinite() const { return !upper_; }
  bool is_punctual() const { return upper_ && *upper_ == lower_ && !lower_open_; }
  bool contains_zero() const { return lower_.is_zero() && !lower_open_; }
  bool contains(const Dyadic& v) const;
  std::string str() const;

  friend bool operator==(const Range&, const Range&) = default;
  friend std::strong_ordering operator<=>(const Range& a, const Range& b);

 private:
  Dyadic lower_;
  bool lower_open_ = false;
  std::optional<Dyadic> upper_;
  bool upper_open_ = true;
};

bool range_member(const SignedDyadic& delta, const Range& rho);

enum class LitKind { Atom, Diamond, Box };

struct Literal {
  LitKind kind = LitKind::Atom;
  std::string atom;
  std::optional<Range> range;

  static Literal make_atom(std::string a) { return {LitKind::Atom, std::move(a), std::nullopt}; }
  static Literal diamond(const Range& r, std::string a) { return {LitKind::Diamond, std::move(a), r}; }
  static Literal box(const Range& r, std::string a) { return {LitKind::Box, std::move(a), r}; }
  std::string str() const;

  friend bool operator==(const Literal&, const Literal&) = default;
  friend std::strong_ordering operator<=>(const Literal& a, const Literal& b);
};

struct Rule {
  std::vector<Literal> body;  // empty body is truth
  std::vector<Literal> head;  // empty head is falsehood
  bool is_constraint() const { return head.empty(); }
  friend bool operator==(const Rule&, const Rule&) = default;
};

struct Program {
  std::vector<Rule> rules;
  std::set<std::string> atoms;

  Program() = default;
  explicit Program(std::vector<Rule> rs);
  friend bool operator==(const Program&, const Program&) = default;
};

enum class Hornity { Full, Horn, Core };
enum class OperatorUse { Mixed, DiamondOnly, BoxOnly };
enum class RangeClass { InfiniteOnly, PunctualOnly, NonPunctualOnly, Arbitrary };

struct FragmentDescriptor {
  Hornity hornity = Hornity::Core;
  OperatorUse operator_use = OperatorUse::DiamondOnly;
  RangeClass range_class = RangeClass::InfiniteOnly;
  bool range_uniform = true;
  friend bool operator==(const FragmentDescriptor&, const FragmentDescriptor&) = default;
};

FragmentDescriptor classify(const Program& program);
bool is_horn(const Program& program);
// Every range occurring in body or head literals, in order of occurrence.
std::vector<Range> program_ranges(const Program& program);

using TimestampSet = std::set<int>;

struct DataEntry {
  Dyadic time;
  std::set<std::string> atoms;
  friend bool operator==(const DataEntry&, const DataEntry&) = default;
};

class DataInstance {
 public:
  DataInstance() = default;
  // Throws std::invalid_argument on empty input or non-increasing times.
  explicit DataInstance(std::vector<DataEntry> entries);

  const std::vector<DataEntry>& entries() const { return entries_; }
  int size() const { return static_cast<int>(entries_.size()); }
  const Dyadic& time(int i) const { return entries_[i].time; }
  bool has(int i, const std::string& atom) const { return entries_[i].atoms.count(atom) > 0; }
  std::set<std::string> atoms() const;
  TimestampSet all() const;

  friend bool operator==(const DataInstance&, const DataInstance&) = default;

 private:
  std::vector<DataEntry> entries_;
};

std::string to_string(Hornity h);
std::string to_string(OperatorUse u);
std::string to_string(RangeClass c);

}  // namespace mtl
