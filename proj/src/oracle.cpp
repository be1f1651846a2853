#include "mtl/oracle.hpp"

#include <atomic>
#include <deque>
#include <map>

#include "mtl/canonical.hpp"

namespace mtl {

namespace {

struct CLit {
  LitKind kind;
  int atom;
  const std::vector<std::vector<int>>* window = nullptr;
};

struct CRule {
  std::vector<CLit> body, head;
};

// Atoms of program and data, facts as a flat atom-major table.
struct Setup {
  int n = 0;
  std::vector<std::string> atoms;
  std::map<std::string, int> index;
  std::vector<CRule> rules;
  std::vector<char> base;  // data facts
  Windows windows;

  Setup(const Program& p, const DataInstance& d) : n(d.size()), windows(d) {
    std::set<std::string> all = p.atoms;
    for (const auto& a : d.atoms()) all.insert(a);
    for (const auto& a : all) {
      index[a] = static_cast<int>(atoms.size());
      atoms.push_back(a);
    }
    auto lit = [&](const Literal& l) {
      CLit c{l.kind, index.at(l.atom)};
      if (l.range) c.window = &windows.of(*l.range);
      return c;
    };
    for (const auto& r : p.rules) {
      CRule c;
      for (const auto& l : r.body) c.body.push_back(lit(l));
      for (const auto& l : r.head) c.head.push_back(lit(l));
      rules.push_back(std::move(c));
    }
    base.assign(atoms.size() * n, 0);
    for (int t = 0; t < n; ++t)
      for (const auto& a : d.entries()[t].atoms) base[index[a] * n + t] = 1;
  }

  bool holds(const std::vector<char>& f, const CLit& l, int t) const {
    const char* row = &f[l.atom * n];
    if (l.kind == LitKind::Atom) return row[t];
    const auto& win = (*l.window)[t];
    if (l.kind == LitKind::Diamond) {
      for (int u : win)
        if (row[u]) return true;
      return false;
    }
    for (int u : win)
      if (!row[u]) return false;
    return true;
  }
  bool body_holds(const std::vector<char>& f, const CRule& r, int t) const {
    for (const auto& l : r.body)
      if (!holds(f, l, t)) return false;
    return true;
  }
  bool rule_holds(const std::vector<char>& f, const CRule& r, int t) const {
    if (!body_holds(f, r, t)) return true;
    for (const auto& l : r.head)
      if (holds(f, l, t)) return true;
    return false;
  }
};

using Repair = std::vector<int>;  // flat fact indices to add

class ChaseSearch {
 public:
  ChaseSearch(const Setup& s, int target, const OracleOptions& o)
      : s_(s), target_(target), opt_(o), cand_(s.n) {
    for (auto& c : cand_) c.store(1);
  }

  TimestampSet run(OracleStats* stats) {
    std::vector<char> root = s_.base;
    std::vector<std::vector<char>> frontier;
    // Breadth-first split of the tree so the parallel phase has enough work.
    std::deque<std::vector<char>> work{root};
    const size_t want = opt_.parallel ? 64 : 1;
    while (!work.empty() && work.size() + frontier.size() < want) {
      auto st = std::move(work.front());
      work.pop_front();
      auto kids = expand(st);
      for (auto& k : kids) work.push_back(std::move(k));
      if (aborted_) break;
    }
    for (auto& w : work) frontier.push_back(std::move(w));

    if (opt_.parallel) {
#pragma omp parallel for schedule(dynamic, 1)
      for (size_t i = 0; i < frontier.size(); ++i) dfs(frontier[i]);
    } else {
      for (auto& f : frontier) dfs(f);
    }
    if (aborted_) throw BudgetExceeded("oracle search exceeded " + std::to_string(opt_.budget) + " nodes");
    if (stats) {
      stats->nodes = nodes_.load();
      stats->leaves = leaves_.load();
    }
    TimestampSet out;
    for (int t = 0; t < s_.n; ++t)
      if (!found_.load() || cand_[t].load()) out.insert(t);
    return out;
  }

 private:
  const Setup& s_;
  int target_;
  OracleOptions opt_;
  std::vector<std::atomic<char>> cand_;
  std::atomic<bool> found_{false}, aborted_{false};
  std::atomic<std::uint64_t> nodes_{0}, leaves_{0};

  bool count_node() {
    if (nodes_.fetch_add(1) + 1 > opt_.budget) aborted_ = true;
    return !aborted_;
  }

  // Nothing left to learn below this state: every candidate already holds.
  bool useless(const std::vector<char>& st) const {
    if (!found_.load()) return false;
    if (target_ < 0) return true;
    for (int t = 0; t < s_.n; ++t)
      if (cand_[t].load(std::memory_order_relaxed) && !st[target_ * s_.n + t]) return false;
    return true;
  }

  void leaf(const std::vector<char>& st) {
    ++leaves_;
    found_ = true;
    for (int t = 0; t < s_.n; ++t)
      if (target_ < 0 || !st[target_ * s_.n + t]) cand_[t].store(0, std::memory_order_relaxed);
  }

  // Repairs for the violated rule instance with the fewest options; returns
  // false when the state is a model.
  bool violation(const std::vector<char>& st, std::vector<Repair>& best) const {
    bool any = false;
    std::vector<Repair> opts;
    for (int t = 0; t < s_.n; ++t)
      for (const auto& r : s_.rules) {
        if (!s_.body_holds(st, r, t)) continue;
        bool sat = false;
        opts.clear();
        for (const auto& h : r.head) {
          if (s_.holds(st, h, t)) {
            sat = true;
            break;
          }
          int row = h.atom * s_.n;
          if (h.kind == LitKind::Atom) {
            opts.push_back({row + t});
          } else if (h.kind == LitKind::Diamond) {
            for (int u : (*h.window)[t]) opts.push_back({row + u});
          } else {
            Repair all;
            for (int u : (*h.window)[t])
              if (!st[row + u]) all.push_back(row + u);
            opts.push_back(all);
          }
        }
        if (sat) continue;
        std::sort(opts.begin(), opts.end());
        opts.erase(std::unique(opts.begin(), opts.end()), opts.end());
        if (!any || opts.size() < best.size()) {
          best = opts;
          any = true;
          if (best.size() <= 1) return true;
        }
      }
    return any;
  }

  // Applies forced repairs in place; returns the children of a branching
  // state, or none for a leaf or a dead end.
  std::vector<std::vector<char>> expand(std::vector<char>& st) {
    std::vector<Repair> opts;
    for (;;) {
      if (!count_node() || useless(st)) return {};
      if (!violation(st, opts)) {
        leaf(st);
        return {};
      }
      if (opts.empty()) return {};
      if (opts.size() > 1) break;
      for (int f : opts[0]) st[f] = 1;
    }
    std::vector<std::vector<char>> kids;
    for (const auto& o : opts) {
      kids.push_back(st);
      for (int f : o) kids.back()[f] = 1;
    }
    return kids;
  }

  void dfs(std::vector<char>& st) {
    if (aborted_) return;
    auto kids = expand(st);
    for (auto& k : kids) dfs(k);
  }
};

}  // namespace

bool is_model(const Program& program, const DataInstance& data, const Interpretation& interp) {
  Setup s(program, data);
  std::vector<char> f = s.base;
  for (const auto& [a, ts] : interp.assignment) {
    auto it = s.index.find(a);
    if (it == s.index.end()) continue;
    for (int t = 0; t < s.n; ++t) f[it->second * s.n + t] = ts.count(t) ? 1 : 0;
  }
  for (size_t i = 0; i < f.size(); ++i)
    if (s.base[i] && !f[i]) return false;  // must extend the data
  for (const auto& r : s.rules)
    for (int t = 0; t < s.n; ++t)
      if (!s.rule_holds(f, r, t)) return false;
  return true;
}

TimestampSet certain_answers_bruteforce(const Program& program, const std::string& atom, const DataInstance& data,
                                        OracleOptions options, OracleStats* stats) {
  Setup s(program, data);
  auto it = s.index.find(atom);
  ChaseSearch search(s, it == s.index.end() ? -1 : it->second, options);
  return search.run(stats);
}

TimestampSet certain_answers_enumerate(const Program& program, const std::string& atom, const DataInstance& data,
                                       std::uint64_t budget) {
  Setup s(program, data);
  std::vector<int> prog_atoms;
  for (const auto& a : program.atoms) prog_atoms.push_back(s.index.at(a));
  // Free pairs per column.
  std::vector<std::vector<int>> free(s.n);
  size_t total = 0;
  for (int t = 0; t < s.n; ++t)
    for (int a : prog_atoms)
      if (!s.base[a * s.n + t]) {
        free[t].push_back(a * s.n + t);
        ++total;
      }
  if (total >= 63 || (std::uint64_t(1) << total) > budget)
    throw BudgetExceeded("enumeration needs 2^" + std::to_string(total) + " candidates");
  auto it = s.index.find(atom);
  int target = it == s.index.end() ? -1 : it->second;

  std::vector<char> f = s.base;
  std::vector<char> cand(s.n, 1);
  bool found = false;
  std::function<void(int)> column = [&](int t) {
    if (t == s.n) {
      found = true;
      for (int u = 0; u < s.n; ++u)
        if (target < 0 || !f[target * s.n + u]) cand[u] = 0;
      return;
    }
    const auto& fr = free[t];
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << fr.size()); ++mask) {
      for (size_t i = 0; i < fr.size(); ++i) f[fr[i]] = (mask >> i) & 1;
      bool ok = true;
      for (const auto& r : s.rules)
        if (!s.rule_holds(f, r, t)) {
          ok = false;
          break;
        }
      if (ok) column(t + 1);
    }
    for (int i : fr) f[i] = 0;
  };
  column(0);
  TimestampSet out;
  for (int t = 0; t < s.n; ++t)
    if (!found || cand[t]) out.insert(t);
  return out;
}

}  // namespace mtl
