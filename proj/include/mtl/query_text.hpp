// Concrete syntax for target-language queries (.q files).
//
//   lang fo;            free x;   main := exists y . y < x & B(y);
//   lang rpr;           free x, y;
//                       def R(x, y; z) := z = min | !R[x, y, z-1];
//                       main := R[x, y, max];
//   lang datalog;       goal %G;
//                       rule %P(x, y) :- %P(x, z) with suc(y, z);
//
// Formulas: true false  t < u  t = u  suc(t, u)  bit_in(t, j)  bit_fr(t, j)
// A(t)  dist{<,3/2}(x, y)  in{[1,2)}(x, y)  int{(2,4]}(t, u, s)
// last{1/2,1,3}(u)  plus(x, y, z)  ! & | ->  exists x y . f  forall x . f
// tc[u1 u2; v1 v2](f)(a1 a2; b1 b2)  dtc[...](f)(...)  R[x, z-1]
// rpr{...}(x, y)  datalog{...}(x).  Terms are variables, min and max.
// Data atoms named like a keyword are written in backquotes.
#pragma once

#include <string>

#include "mtl/formula.hpp"
#include "mtl/textio.hpp"

namespace mtl::logic {

std::string render(const Formula& f);
std::string render(const RprQuery& q);
std::string render(const DatalogQuery& q);
std::string render(const ExtQuery& q);

// Throws ParseError with the offending position.
ExtQuery parse_query(const std::string& text);
// A single formula; free variables are created on first use and returned.
Formula parse_formula(const std::string& text, std::vector<Var>* free = nullptr);

}  // namespace mtl::logic
