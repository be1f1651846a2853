#include "mtl/reductions.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "mtl/textio.hpp"

namespace mtl {

namespace {

// Timestamps with their atoms, emitted in increasing order.
class Builder {
 public:
  explicit Builder(int columns) : columns_(columns) {}
  // base + column / columns
  Dyadic at(int base, int column) const {
    unsigned k = 0;
    while ((1 << k) < columns_) ++k;
    return Dyadic(BigInt(base) * columns_ + column, k);
  }
  void add(const std::string& atom, int base, int column) { facts_[at(base, column)].insert(atom); }
  DataInstance data() const {
    std::vector<DataEntry> es;
    for (const auto& [t, atoms] : facts_) es.push_back({t, atoms});
    return DataInstance(es);
  }

 private:
  int columns_;
  std::map<Dyadic, std::set<std::string>> facts_;
};

}  // namespace

void Circuit::validate() const {
  if (gates.empty()) throw std::invalid_argument("circuit: no gates");
  for (std::size_t n = 0; n < gates.size(); ++n) {
    const Gate& g = gates[n];
    std::size_t want = g.kind == Gate::Input ? 0 : g.kind == Gate::Not ? 1 : 2;
    if (g.inputs.size() != want) throw std::invalid_argument("circuit: fan-in of gate " + std::to_string(n));
    for (int m : g.inputs)
      if (m < 0 || m >= static_cast<int>(n)) throw std::invalid_argument("circuit: gate order at " + std::to_string(n));
  }
}

void Hypergraph::validate() const {
  for (const auto& [m, n, o] : edges)
    if (!(0 <= m && m < n && n < o && o < vertices)) throw std::invalid_argument("hypergraph: edge order");
}

void Digraph::validate() const {
  for (const auto& [n, m] : edges)
    if (!(0 <= n && n < m && m < vertices)) throw std::invalid_argument("digraph: edge order");
}

int EncodedQuery::target_index() const {
  for (int t = 0; t < data.size(); ++t)
    if (data.time(t) == target) return t;
  return -1;
}

int column_count(int n) {
  int c = 1;
  while (c < n) c *= 2;
  return c;
}

EncodedQuery from_circuit(const Circuit& circuit) {
  circuit.validate();
  int gates = static_cast<int>(circuit.gates.size());
  Builder b(column_count(gates));
  for (int n = 0; n < gates; ++n) {
    const Gate& g = circuit.gates[n];
    for (int i = 0; i < gates; ++i) b.add("A", 2 * n, i);
    static const char* kind_atom[] = {"X", "N", "D", "C"};
    b.add(kind_atom[g.kind], 2 * n, n);
    if (g.kind == Gate::Not) b.add("I0", 2 * n, g.inputs[0]);
    if (g.kind == Gate::Or || g.kind == Gate::And) {
      b.add("I1", 2 * n, g.inputs[0]);
      b.add("I2", 2 * n, g.inputs[1]);
    }
  }
  // Diamonds over conjunctions read fresh atoms defined by their conjunction.
  EncodedQuery q{parse_program(
                     "X -> T | F. DIA [2,2] T -> T. DIA [2,2] F -> F."
                     " I0 & T -> I0T. I0 & F -> I0F. I1 & T -> I1T. I1 & F -> I1F. I2 & T -> I2T. I2 & F -> I2F."
                     " N & DIA [0,1] I0T -> F. N & DIA [0,1] I0F -> T."
                     " D & DIA [0,1] I1T -> T. D & DIA [0,1] I2T -> T."
                     " C & DIA [0,1] I1F -> F. C & DIA [0,1] I2F -> F."
                     " D & DIA [0,1] I1F & DIA [0,1] I2F -> F."
                     " C & DIA [0,1] I1T & DIA [0,1] I2T -> T."),
                 b.data(), "F", Dyadic()};
  q.target = q.data.time(q.data.size() - 1);
  return q;
}

Program psa_unguarded_program() {
  return parse_program("BOX [2,2] R -> R1. BOX (0,1] R1 -> R2. BOX [2,2] R2 -> R. BOX [4,4] R -> R.");
}

EncodedQuery from_psa(const Hypergraph& graph, const std::set<int>& sources, int target) {
  graph.validate();
  auto edges = graph.edges;
  std::sort(edges.begin(), edges.end(), [](const auto& x, const auto& y) {
    return std::tie(x[2], x[0], x[1]) < std::tie(y[2], y[0], y[1]);
  });
  int k = static_cast<int>(edges.size());
  Builder b(column_count(graph.vertices));
  for (int i = 0; i <= k; ++i)
    for (int n = 0; n < graph.vertices; ++n) b.add("A", 4 * i, n);
  for (int i = 0; i < k; ++i) {
    const auto& [m, n, o] = edges[i];
    b.add("A", 2 + 4 * i, m);
    b.add("A", 2 + 4 * i, n);
    b.add("A", 2 + 4 * i, o);
    b.add("A", 1 + 4 * i, n);
  }
  for (int i = 0; i <= k; ++i)
    for (int n : sources) b.add("R", 4 * i, n);
  // Each box also asks for a timestamp in its window (A marks every one), so
  // an empty window derives nothing.
  Program p = parse_program(
      "BOX [2,2] R & DIA [2,2] A -> R1. BOX (0,1] R1 & DIA (0,1] A -> R2."
      " BOX [2,2] R2 & DIA [2,2] A -> R. BOX [4,4] R & DIA [4,4] A -> R.");
  return {p, b.data(), "R", b.at(4 * k, target)};
}

EncodedQuery from_digraph(const Digraph& graph, int source, int target) {
  graph.validate();
  auto edges = graph.edges;
  std::sort(edges.begin(), edges.end());
  int k = static_cast<int>(edges.size());
  Builder b(column_count(graph.vertices));
  for (int i = 0; i <= k; ++i)
    for (int n = 0; n < graph.vertices; ++n) b.add("A", 4 * i, n);
  for (int i = 0; i < k; ++i) {
    b.add("A", 2 + 4 * i, edges[i].first);
    b.add("A", 2 + 4 * i, edges[i].second);
  }
  for (int i = 0; i <= k; ++i) b.add("R", 4 * i, source);
  Program p = parse_program("DIA [2,2] R -> R1. DIA (0,1] R1 -> R2. DIA [2,2] R2 -> R. DIA [4,4] R -> R.");
  return {p, b.data(), "R", b.at(4 * k, target)};
}

namespace {
int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
}  // namespace

Circuit random_circuit(Rng& rng, int max_gates) {
  Circuit c;
  int n = pick(rng, 1, max_gates);
  for (int i = 0; i < n; ++i) {
    Gate g;
    g.kind = i == 0 ? Gate::Input : static_cast<Gate::Kind>(pick(rng, 0, 3));
    int fan = g.kind == Gate::Input ? 0 : g.kind == Gate::Not ? 1 : 2;
    for (int j = 0; j < fan; ++j) g.inputs.push_back(pick(rng, 0, i - 1));
    c.gates.push_back(g);
  }
  return c;
}

PsaInstance random_psa(Rng& rng, int max_vertices) {
  PsaInstance out;
  out.graph.vertices = pick(rng, std::min(3, max_vertices), max_vertices);
  int v = out.graph.vertices;
  for (int m = 0; m < v; ++m)
    for (int n = m + 1; n < v; ++n)
      for (int o = n + 1; o < v; ++o)
        if (pick(rng, 0, 2) == 0) out.graph.edges.push_back({m, n, o});
  for (int x = 0; x < v; ++x)
    if (pick(rng, 0, 2) == 0) out.sources.insert(x);
  out.target = pick(rng, 0, v - 1);
  return out;
}

ReachInstance random_reach(Rng& rng, int max_vertices) {
  ReachInstance out;
  out.graph.vertices = pick(rng, std::min(2, max_vertices), max_vertices);
  int v = out.graph.vertices;
  for (int n = 0; n < v; ++n)
    for (int m = n + 1; m < v; ++m)
      if (pick(rng, 0, 2) == 0) out.graph.edges.push_back({n, m});
  out.source = pick(rng, 0, v - 1);
  out.target = pick(rng, 0, v - 1);
  return out;
}

}  // namespace mtl
