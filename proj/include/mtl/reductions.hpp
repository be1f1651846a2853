// Encodings of circuit satisfiability, path system accessibility and DAG
// reachability as ontology-mediated queries over timed words.
#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "mtl/core.hpp"
#include "mtl/generate.hpp"

namespace mtl {

struct Gate {
  enum Kind { Input, Not, Or, And } kind = Input;
  std::vector<int> inputs;  // earlier gate numbers: 0, 1 or 2 by kind
};

// Gates numbered so that inputs precede their consumers; the last gate is
// the output.
struct Circuit {
  std::vector<Gate> gates;
  void validate() const;  // throws std::invalid_argument
};

struct Hypergraph {
  int vertices = 0;
  std::vector<std::array<int, 3>> edges;  // (m, n, o) with m < n < o
  void validate() const;
};

struct Digraph {
  int vertices = 0;
  std::vector<std::pair<int, int>> edges;  // (n, m) with n < m
  void validate() const;
};

struct EncodedQuery {
  Program program;
  DataInstance data;
  std::string atom;
  Dyadic target;
  int target_index() const;  // position of `target` in the data
};

// Smallest power of two at least n (and at least 1).
int column_count(int n);

// Satisfiable iff the target is not a certain answer for F.
EncodedQuery from_circuit(const Circuit& circuit);
// The target vertex is accessible from the sources iff the target timestamp
// is a certain answer for R. Hyperedges are processed in order of their
// target vertex, so one pass over the blocks reaches every accessible vertex.
EncodedQuery from_psa(const Hypergraph& graph, const std::set<int>& sources, int target);
// Reachable iff the target timestamp is a certain answer for R.
EncodedQuery from_digraph(const Digraph& graph, int source, int target);

// Seeded random instances: at least one input gate first; hyperedges and
// edges kept with probability 1/3; sources likewise.
Circuit random_circuit(Rng& rng, int max_gates);
struct PsaInstance {
  Hypergraph graph;
  std::set<int> sources;
  int target = 0;
};
PsaInstance random_psa(Rng& rng, int max_vertices);
struct ReachInstance {
  Digraph graph;
  int source = 0;
  int target = 0;
};
ReachInstance random_reach(Rng& rng, int max_vertices);

// The box program exactly as a pure box program; every box there is
// vacuously true before the first block, so R holds at every timestamp.
// Kept for comparison with from_psa's guarded program.
Program psa_unguarded_program();

}  // namespace mtl
