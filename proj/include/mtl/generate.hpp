// Rewriter fragments and seeded random instance generators.
#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mtl/core.hpp"

namespace mtl {

enum class Fragment {
  HornDatalog,         // Horn, arbitrary ranges
  CoreDiamondTc,       // core, diamond only, atomic disjointness constraints
  InfiniteFo,          // every range unbounded above
  PunctualRpr,         // every range punctual
  NonpunctualTc,       // no punctual range
  HornNonpunctualDtc,  // Horn and no punctual range
  UniformExample,      // the four-state cyclic family over one range (0,d)
};

std::string to_string(Fragment f);
std::optional<Fragment> fragment_from_string(const std::string& s);
const std::vector<Fragment>& all_fragments();
// Whether the program lies in the fragment's input class; on failure the
// reason is stored in `why` when given.
bool fits(const Program& program, Fragment f, std::string* why = nullptr);

using Rng = std::mt19937_64;

struct GenBounds {
  int atoms = 3;
  int timestamps = 6;
  unsigned max_exponent = 3;  // denominators up to 2^max_exponent
  int max_endpoint = 8;       // range endpoints and timestamp values below this
  int rules = 4;
  int body = 2;
};

std::vector<std::string> atom_names(int n);
Dyadic random_dyadic(Rng& rng, unsigned max_exponent, int below);
Range random_range(Rng& rng, RangeClass cls, const GenBounds& b);
DataInstance random_instance(Rng& rng, const std::vector<std::string>& atoms, const GenBounds& b);
// A random program inside the fragment over atom_names(b.atoms).
Program random_program(Rng& rng, Fragment f, const GenBounds& b);
// A random Horn diamond-only program with atomic heads and arbitrary ranges.
// Linear programs have at most one body literal over a head atom per rule
// and no constraints.
Program random_horn_diamond_program(Rng& rng, const GenBounds& b, bool linear);
// The cyclic S0..S3 program over (0,d) used by the uniform example.
Program uniform_example_program(const Dyadic& d);

}  // namespace mtl
