// Concrete syntax for programs (.mtl) and timed words (.tw).
//
// Program:  BOX [0,2) B -> B1.   DIA [1,1] B1 -> A.   X -> T | F.   A & B -> .
// Data:     B@0 B@1/2 C@3/2   (P,Q@1 groups atoms, @3 is a fact-free point)
#pragma once

#include <stdexcept>
#include <string>

#include "mtl/core.hpp"

namespace mtl {

struct SourceSpan {
  int line = 1;
  int column = 1;
  int length = 1;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, SourceSpan span)
      : std::runtime_error(format(msg, span)), span_(span) {}
  const SourceSpan& span() const { return span_; }

 private:
  static std::string format(const std::string& msg, const SourceSpan& s) {
    return std::to_string(s.line) + ":" + std::to_string(s.column) + ": " + msg;
  }
  SourceSpan span_;
};

Program parse_program(const std::string& text);
DataInstance parse_data(const std::string& text);
// Accepts "m", "m/d", "m/2^k", "1.101b" and finite decimals such as "1.5".
Dyadic parse_dyadic(const std::string& text);
Range parse_range(const std::string& text);

std::string render(const Program& program);
std::string render(const Rule& rule);
std::string render(const DataInstance& data);

}  // namespace mtl
