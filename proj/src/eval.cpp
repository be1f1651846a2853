#include "mtl/eval.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <queue>
#include <set>
#include <unordered_map>

namespace mtl::logic {

bool builtin_dist(const FOStructure& s, Cmp c, const Dyadic& r, int x, int y) {
  if (!s.is_timestamp(x) || !s.is_timestamp(y)) return false;
  unsigned e = std::max(s.scale_exponent(), r.exponent());
  BigInt d = (s.scaled(x) - s.scaled(y)) << (e - s.scale_exponent());
  BigInt rv = r.scaled(e);
  switch (c) {
    case Cmp::Eq: return d == rv;
    case Cmp::Lt: return d < rv;
    case Cmp::Le: return d <= rv;
    case Cmp::Gt: return d > rv;
    case Cmp::Ge: return d >= rv;
  }
  return false;
}

bool builtin_in(const FOStructure& s, const Range& rho, int x, int y) {
  if (!s.is_timestamp(x) || !s.is_timestamp(y)) return false;
  return range_member(s.difference(x, y), rho);
}

bool builtin_int(const FOStructure& s, const Range& rho, int t, int u, int sv) {
  if (!s.is_timestamp(t) || !s.is_timestamp(u) || !s.is_timestamp(sv) || u > sv) return false;
  if (!builtin_dist(s, rho.lower_open() ? Cmp::Gt : Cmp::Ge, rho.lower(), t, u)) return false;
  if (rho.infinite()) return true;
  return builtin_dist(s, rho.upper_open() ? Cmp::Lt : Cmp::Le, *rho.upper(), t, sv);
}

bool builtin_last(const FOStructure& s, const Dyadic& unit, int i, int m, int u) {
  if (!s.is_timestamp(u) || i < 1 || i > m) return false;
  auto hit = [&](int j) {
    Dyadic off = unit * Dyadic::integer(j);
    for (int v = 0; v <= u; ++v)
      if (builtin_dist(s, Cmp::Eq, off, u, v)) return true;
    return false;
  };
  if (!hit(i)) return false;
  for (int j = 1; j < i; ++j)
    if (hit(j)) return false;
  return true;
}

namespace {

// Negation pushed through connectives and quantifiers.
Formula negate(const Formula& f) {
  switch (f->op) {
    case Op::True: return f_false();
    case Op::False: return f_true();
    case Op::Not: return f->kids[0];
    case Op::And: {
      std::vector<Formula> parts;
      for (const auto& k : f->kids) parts.push_back(negate(k));
      return f_or(parts);
    }
    case Op::Or: {
      std::vector<Formula> parts;
      for (const auto& k : f->kids) parts.push_back(negate(k));
      return f_and(parts);
    }
    case Op::Implies: return f_and(f->kids[0], negate(f->kids[1]));
    case Op::Exists: return f_forall(f->vars, negate(f->kids[0]));
    case Op::Forall: return f_exists(f->vars, negate(f->kids[0]));
    default: return f_not(f);
  }
}

struct VecHash {
  size_t operator()(const std::vector<int>& v) const {
    size_t h = 1469598103934665603ull;
    for (int x : v) h = (h ^ static_cast<size_t>(x + 7)) * 1099511628211ull;
    return h;
  }
};

using Tuple = std::vector<int>;
constexpr int kMin = -2;
constexpr int kMax = -3;
constexpr int kUnbound = -1;

}  // namespace

struct RprInstance;
struct DatalogInstance;

struct CNode {
  Op op = Op::True;
  const Node* src = nullptr;
  std::vector<int> args;
  std::vector<CNode*> kids;
  std::vector<int> bound;
  std::vector<int> free;
  CNode* neg = nullptr;
  const std::vector<char>* mask = nullptr;    // Atom, Last: per position
  const std::vector<char>* matrix = nullptr;  // Dist, In: n x n
  const std::vector<char>* matrix2 = nullptr; // Int upper part
  int def = -1;
  RprInstance* rpr = nullptr;
  DatalogInstance* datalog = nullptr;
  std::unordered_map<Tuple, char, VecHash> memo;
  std::unordered_map<Tuple, std::shared_ptr<std::set<Tuple>>, VecHash> reach;
  std::unordered_map<Tuple, std::vector<Tuple>, VecHash> succ;
};

struct Unit {
  std::vector<int> env;
  std::deque<CNode> nodes;
};

struct RprInstance {
  std::shared_ptr<const RprQuery> query;
  Unit unit;
  std::vector<CNode*> bodies;
  std::vector<std::vector<int>> param_slots;
  std::vector<int> z_slot;
  std::vector<std::vector<char>> tables;
  std::map<std::string, int> index;
  CNode* main = nullptr;
  std::vector<int> main_free;
  bool computed = false;
};

struct DatalogInstance {
  std::shared_ptr<const DatalogQuery> query;
  struct CRule {
    Unit unit;
    std::string head_pred;
    std::vector<int> head_slots;
    std::vector<std::pair<std::string, std::vector<int>>> body;
    CNode* side = nullptr;
  };
  std::vector<std::unique_ptr<CRule>> rules;
  std::map<std::string, std::set<Tuple>> rel;
  TimestampSet answers;
  int rounds = 0;
  bool computed = false;
};

struct Evaluator::Impl {
  Evaluator& ev;
  const FOStructure& s;
  int n;  // domain size
  std::map<std::tuple<int, std::string, int>, std::vector<char>> dist_cache;  // (cmp, r, 0)
  std::map<std::string, std::vector<char>> atom_cache;
  std::map<std::tuple<std::string, int, int>, std::vector<char>> last_cache;
  // Keyed by the embedded query, so every application of one query shares
  // its tables.
  std::map<const RprQuery*, std::unique_ptr<RprInstance>> rpr_nodes;
  std::map<const DatalogQuery*, std::unique_ptr<DatalogInstance>> datalog_nodes;
  struct Root {
    Formula f;
    Unit unit;
    CNode* node = nullptr;
    std::map<int, int> slot_of;
  };
  std::map<std::pair<const Node*, std::vector<int>>, std::unique_ptr<Root>> roots;

  Impl(Evaluator& e, const FOStructure& st) : ev(e), s(st), n(st.domain_size()) {}

  // ---- constant tables ------------------------------------------------

  const std::vector<char>* dist_matrix(Cmp c, const Dyadic& r) {
    auto key = std::make_tuple(static_cast<int>(c), r.str(), 0);
    auto it = dist_cache.find(key);
    if (it != dist_cache.end()) return &it->second;
    std::vector<char> m(n * n, 0);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) m[x * n + y] = builtin_dist(s, c, r, x, y);
    return &dist_cache.emplace(key, std::move(m)).first->second;
  }

  const std::vector<char>* atom_mask(const std::string& a) {
    auto it = atom_cache.find(a);
    if (it != atom_cache.end()) return &it->second;
    std::vector<char> m(n, 0);
    for (int t : s.relation(a)) m[t] = 1;
    return &atom_cache.emplace(a, std::move(m)).first->second;
  }

  const std::vector<char>* last_mask(const Dyadic& unit, int i, int cnt) {
    auto key = std::make_tuple(unit.str(), i, cnt);
    auto it = last_cache.find(key);
    if (it != last_cache.end()) return &it->second;
    std::vector<char> m(n, 0);
    for (int u = 0; u < n; ++u) m[u] = builtin_last(s, unit, i, cnt, u);
    return &last_cache.emplace(key, std::move(m)).first->second;
  }

  // ---- compilation ----------------------------------------------------

  struct Scope {
    std::map<int, int> slot;  // var id -> slot
    int next = 0;
  };

  int term_slot(const Term& t, const Scope& sc) {
    if (t.kind == Term::Min) return kMin;
    if (t.kind == Term::Max) return kMax;
    auto it = sc.slot.find(t.var.id);
    if (it == sc.slot.end()) throw EvalError("unbound variable " + t.var.name);
    return it->second;
  }

  static void add_free(CNode* c, const std::vector<int>& slots) {
    for (int sl : slots)
      if (sl >= 0 && std::find(c->bound.begin(), c->bound.end(), sl) == c->bound.end() &&
          std::find(c->free.begin(), c->free.end(), sl) == c->free.end())
        c->free.push_back(sl);
  }

  CNode* compile(Unit& u, const Formula& f, Scope& sc, RprInstance* owner) {
    u.nodes.emplace_back();
    CNode* c = &u.nodes.back();
    c->op = f->op;
    c->src = f.get();
    switch (f->op) {
      case Op::Plus:
        if (!ev.opt_.allow_plus) throw EvalError("PLUS used without the FO(<,+) flag");
        break;
      case Op::Atom: c->mask = atom_mask(f->name); break;
      case Op::Last: c->mask = last_mask(f->value, f->index, f->count); break;
      case Op::Dist: c->matrix = dist_matrix(f->cmp, f->value); break;
      case Op::In: {
        const Range& r = *f->range;
        c->matrix = dist_matrix(r.lower_open() ? Cmp::Gt : Cmp::Ge, r.lower());
        if (!r.infinite()) c->matrix2 = dist_matrix(r.upper_open() ? Cmp::Lt : Cmp::Le, *r.upper());
        break;
      }
      case Op::Int: {
        const Range& r = *f->range;
        c->matrix = dist_matrix(r.lower_open() ? Cmp::Gt : Cmp::Ge, r.lower());
        if (!r.infinite()) c->matrix2 = dist_matrix(r.upper_open() ? Cmp::Lt : Cmp::Le, *r.upper());
        break;
      }
      case Op::Rel: {
        if (!owner) throw EvalError("relation variable " + f->name + " outside a recursion block");
        auto it = owner->index.find(f->name);
        if (it == owner->index.end()) throw EvalError("unknown relation variable " + f->name);
        c->def = it->second;
        c->rpr = owner;
        size_t want = owner->param_slots[c->def].size() + 1;
        if (f->terms.size() != want) throw EvalError("arity mismatch for " + f->name);
        break;
      }
      case Op::RprApply: c->rpr = rpr_instance(f); break;
      case Op::DatalogApply: c->datalog = datalog_instance(f); break;
      default: break;
    }
    // Terms are outside the scope of the node's own bound variables.
    for (const auto& t : f->terms) c->args.push_back(term_slot(t, sc));
    if (f->op == Op::Rel && f->previous && !owner) throw EvalError("malformed recursion reference");

    std::vector<std::pair<int, std::optional<int>>> saved;
    for (const auto& v : f->vars) {
      auto it = sc.slot.find(v.id);
      saved.push_back({v.id, it == sc.slot.end() ? std::nullopt : std::optional<int>(it->second)});
      int sl = sc.next++;
      sc.slot[v.id] = sl;
      c->bound.push_back(sl);
    }
    if (static_cast<int>(u.env.size()) < sc.next) u.env.resize(sc.next, kUnbound);
    for (const auto& k : f->kids) c->kids.push_back(compile(u, k, sc, owner));
    if (f->op == Op::Forall) c->neg = compile(u, negate(f->kids[0]), sc, owner);
    for (auto& [id, old] : saved) {
      if (old) sc.slot[id] = *old;
      else sc.slot.erase(id);
    }
    if (static_cast<int>(u.env.size()) < sc.next) u.env.resize(sc.next, kUnbound);

    add_free(c, c->args);
    for (auto* k : c->kids) add_free(c, k->free);
    if (c->neg) add_free(c, c->neg->free);
    std::sort(c->free.begin(), c->free.end());
    return c;
  }

  RprInstance* rpr_instance(const Formula& f) {
    auto it = rpr_nodes.find(f->rpr.get());
    if (it != rpr_nodes.end()) return it->second.get();
    auto inst = build_rpr(f->rpr);
    RprInstance* p = inst.get();
    rpr_nodes.emplace(f->rpr.get(), std::move(inst));
    return p;
  }

  std::unique_ptr<RprInstance> build_rpr(std::shared_ptr<const RprQuery> q) {
    auto inst = std::make_unique<RprInstance>();
    inst->query = q;
    for (size_t d = 0; d < q->defs.size(); ++d) {
      if (inst->index.count(q->defs[d].name)) throw EvalError("duplicate relation " + q->defs[d].name);
      inst->index[q->defs[d].name] = static_cast<int>(d);
    }
    Scope sc;
    inst->param_slots.resize(q->defs.size());
    inst->z_slot.resize(q->defs.size());
    // Slots for every definition first, so bodies may refer to later relations.
    std::vector<Scope> locals;
    for (size_t d = 0; d < q->defs.size(); ++d) {
      Scope local = sc;
      for (const auto& p : q->defs[d].params) {
        local.slot[p.id] = local.next;
        inst->param_slots[d].push_back(local.next++);
      }
      local.slot[q->defs[d].z.id] = local.next;
      inst->z_slot[d] = local.next++;
      sc.next = local.next;
      locals.push_back(std::move(local));
    }
    for (size_t d = 0; d < q->defs.size(); ++d) {
      locals[d].next = sc.next;
      inst->unit.env.resize(std::max<int>(inst->unit.env.size(), sc.next), kUnbound);
      check_recursion_refs(q->defs[d].body, true);
      inst->bodies.push_back(compile(inst->unit, q->defs[d].body, locals[d], inst.get()));
      sc.next = std::max(sc.next, locals[d].next);
    }
    Scope ms = sc;
    for (const auto& v : q->free) {
      ms.slot[v.id] = ms.next;
      inst->main_free.push_back(ms.next++);
    }
    inst->unit.env.resize(std::max<int>(inst->unit.env.size(), ms.next), kUnbound);
    check_recursion_refs(q->main, false);
    inst->main = compile(inst->unit, q->main, ms, inst.get());
    inst->tables.resize(q->defs.size());
    return inst;
  }

  // Bodies may only read relations at z-1; the main formula only at full arguments.
  void check_recursion_refs(const Formula& f, bool in_body) {
    if (f->op == Op::Rel && f->previous != in_body) throw EvalError("malformed recursion reference to " + f->name);
    for (const auto& k : f->kids) check_recursion_refs(k, in_body);
  }

  DatalogInstance* datalog_instance(const Formula& f) {
    auto it = datalog_nodes.find(f->datalog.get());
    if (it != datalog_nodes.end()) return it->second.get();
    auto inst = build_datalog(f->datalog);
    DatalogInstance* p = inst.get();
    datalog_nodes.emplace(f->datalog.get(), std::move(inst));
    return p;
  }

  static void collect_atoms(const Formula& f, std::set<std::string>& out) {
    if (f->op == Op::Atom) out.insert(f->name);
    for (const auto& k : f->kids) collect_atoms(k, out);
  }

  std::unique_ptr<DatalogInstance> build_datalog(std::shared_ptr<const DatalogQuery> q) {
    auto inst = std::make_unique<DatalogInstance>();
    inst->query = q;
    std::set<std::string> idb;
    for (const auto& r : q->rules) idb.insert(r.head.pred);
    for (const auto& r : q->rules) {
      std::set<std::string> used;
      collect_atoms(r.side, used);
      for (const auto& a : used)
        if (idb.count(a)) throw EvalError("IDB predicate " + a + " in a side condition");
      auto cr = std::make_unique<DatalogInstance::CRule>();
      cr->head_pred = r.head.pred;
      Scope sc;
      auto slot = [&](const Var& v) {
        auto it = sc.slot.find(v.id);
        if (it != sc.slot.end()) return it->second;
        sc.slot[v.id] = sc.next;
        return sc.next++;
      };
      for (const auto& v : r.head.args) cr->head_slots.push_back(slot(v));
      for (const auto& a : r.body) {
        std::vector<int> sl;
        for (const auto& v : a.args) sl.push_back(slot(v));
        cr->body.push_back({a.pred, sl});
      }
      for (const auto& v : free_vars(r.side)) slot(v);
      cr->unit.env.resize(sc.next, kUnbound);
      cr->side = compile(cr->unit, r.side, sc, nullptr);
      inst->rules.push_back(std::move(cr));
    }
    return inst;
  }

  // ---- evaluation -----------------------------------------------------

  int val(const Unit& u, int slot) const {
    if (slot == kMin) return 0;
    if (slot == kMax) return s.max_index();
    return u.env[slot];
  }

  bool all_bound(const Unit& u, const CNode* c) const {
    for (int sl : c->free)
      if (u.env[sl] == kUnbound) return false;
    return true;
  }

  Tuple key_of(const Unit& u, const CNode* c) const {
    Tuple k;
    k.reserve(c->free.size());
    for (int sl : c->free) k.push_back(u.env[sl]);
    return k;
  }

  bool eval(Unit& u, CNode* c) {
    const auto& a = c->args;
    switch (c->op) {
      case Op::True: return true;
      case Op::False: return false;
      case Op::Less: return val(u, a[0]) < val(u, a[1]);
      case Op::Eq: return val(u, a[0]) == val(u, a[1]);
      case Op::Suc: {
        int x = val(u, a[0]), y = val(u, a[1]);
        return s.is_timestamp(x) && s.is_timestamp(y) && x == y + 1;
      }
      case Op::BitIn: {
        int t = val(u, a[0]), j = val(u, a[1]);
        return s.is_timestamp(t) && s.bit_in(t, j);
      }
      case Op::BitFr: {
        int t = val(u, a[0]), j = val(u, a[1]);
        return s.is_timestamp(t) && s.bit_fr(t, j);
      }
      case Op::Atom:
      case Op::Last: return (*c->mask)[val(u, a[0])];
      case Op::Dist: return (*c->matrix)[val(u, a[0]) * n + val(u, a[1])];
      case Op::In: {
        int x = val(u, a[0]), y = val(u, a[1]);
        return (*c->matrix)[x * n + y] && (!c->matrix2 || (*c->matrix2)[x * n + y]);
      }
      case Op::Int: {
        int t = val(u, a[0]), lo = val(u, a[1]), hi = val(u, a[2]);
        if (!s.is_timestamp(lo) || !s.is_timestamp(hi) || lo > hi) return false;
        return (*c->matrix)[t * n + lo] && (!c->matrix2 || (*c->matrix2)[t * n + hi]);
      }
      case Op::Plus: return val(u, a[0]) + val(u, a[1]) == val(u, a[2]);
      case Op::Not: return !eval(u, c->kids[0]);
      case Op::And:
        for (auto* k : c->kids)
          if (!eval(u, k)) return false;
        return true;
      case Op::Or:
        for (auto* k : c->kids)
          if (eval(u, k)) return true;
        return false;
      case Op::Implies: return !eval(u, c->kids[0]) || eval(u, c->kids[1]);
      case Op::Exists:
      case Op::Forall: {
        Tuple key = key_of(u, c);
        auto it = c->memo.find(key);
        if (it != c->memo.end()) {
          ++ev.stats_.memo_hits;
          return it->second;
        }
        ++ev.stats_.quantifier_evals;
        bool r;
        if (c->op == Op::Exists) {
          std::vector<CNode*> agenda{c->kids[0]};
          r = solve(u, agenda, [] { return true; });
        } else {
          std::vector<CNode*> agenda{c->neg};
          r = !solve(u, agenda, [] { return true; });
        }
        c->memo.emplace(std::move(key), r);
        return r;
      }
      case Op::Tc: {
        size_t k = a.size() / 2;
        Tuple target(k);
        for (size_t i = 0; i < k; ++i) target[i] = val(u, a[k + i]);
        return reachable(u, c)->count(target) > 0;
      }
      case Op::Rel: return rel_lookup(u, c);
      case Op::RprApply: {
        Tuple key;
        for (int sl : a) key.push_back(val(u, sl));
        auto it = c->memo.find(key);
        if (it != c->memo.end()) return it->second;
        bool r = rpr_main(*c->rpr, key);
        c->memo.emplace(std::move(key), r);
        return r;
      }
      case Op::DatalogApply: {
        run_datalog(*c->datalog);
        return c->datalog->answers.count(val(u, a[0])) > 0;
      }
    }
    return false;
  }

  bool rel_lookup(Unit& u, CNode* c) {
    RprInstance& inst = *c->rpr;
    const auto& a = c->args;
    size_t idx = 0;
    for (size_t i = 0; i + 1 < a.size(); ++i) idx = idx * n + val(u, a[i]);
    int z = val(u, a.back());
    if (c->src->previous) {
      if (z == 0) return false;
      --z;
    }
    idx = idx * n + z;
    return inst.tables[c->def][idx];
  }

  void compute_rpr(RprInstance& inst) {
    if (inst.computed) return;
    const auto& defs = inst.query->defs;
    for (size_t d = 0; d < defs.size(); ++d) {
      size_t sz = 1;
      for (size_t i = 0; i <= inst.param_slots[d].size(); ++i) sz *= n;
      inst.tables[d].assign(sz, 0);
    }
    // Simultaneous recursion: all relations at z read only position z-1.
    for (int z = 0; z < n; ++z) {
      for (size_t d = 0; d < defs.size(); ++d) {
        auto& env = inst.unit.env;
        const auto& ps = inst.param_slots[d];
        size_t combos = 1;
        for (size_t i = 0; i < ps.size(); ++i) combos *= n;
        for (size_t code = 0; code < combos; ++code) {
          size_t rest = code;
          for (size_t i = ps.size(); i-- > 0;) {
            env[ps[i]] = static_cast<int>(rest % n);
            rest /= n;
          }
          env[inst.z_slot[d]] = z;
          inst.tables[d][code * n + z] = eval(inst.unit, inst.bodies[d]);
        }
        for (int sl : ps) env[sl] = kUnbound;
        env[inst.z_slot[d]] = kUnbound;
      }
    }
    inst.computed = true;
  }

  bool rpr_main(RprInstance& inst, const Tuple& args) {
    compute_rpr(inst);
    auto& env = inst.unit.env;
    for (size_t i = 0; i < args.size(); ++i) env[inst.main_free[i]] = args[i];
    bool r = eval(inst.unit, inst.main);
    for (int sl : inst.main_free) env[sl] = kUnbound;
    return r;
  }

  void run_datalog(DatalogInstance& inst) {
    if (inst.computed) return;
    std::map<std::string, std::set<Tuple>> delta;
    auto fire = [&](DatalogInstance::CRule& r, int delta_pos,
                    std::map<std::string, std::set<Tuple>>& out) {
      auto& env = r.unit.env;
      std::function<void(size_t)> join = [&](size_t i) {
        if (i == r.body.size()) {
          std::vector<CNode*> agenda{r.side};
          solve(r.unit, agenda, [&] {
            std::vector<int> unbound;
            for (int sl : r.head_slots)
              if (env[sl] == kUnbound) unbound.push_back(sl);
            // Head variables left open range over the whole domain.
            std::function<void(size_t)> fill = [&](size_t k) {
              if (k == unbound.size()) {
                Tuple t;
                for (int sl : r.head_slots) t.push_back(env[sl]);
                out[r.head_pred].insert(t);
                return;
              }
              for (int v = 0; v < n; ++v) {
                env[unbound[k]] = v;
                fill(k + 1);
              }
              env[unbound[k]] = kUnbound;
            };
            fill(0);
            return false;
          });
          return;
        }
        const auto& [pred, slots] = r.body[i];
        const auto& src = static_cast<int>(i) == delta_pos ? delta[pred] : inst.rel[pred];
        for (const auto& tup : src) {
          std::vector<int> set_here;
          bool ok = true;
          for (size_t j = 0; j < slots.size(); ++j) {
            int sl = slots[j];
            if (env[sl] == kUnbound) {
              env[sl] = tup[j];
              set_here.push_back(sl);
            } else if (env[sl] != tup[j]) {
              ok = false;
              break;
            }
          }
          if (ok) join(i + 1);
          for (int sl : set_here) env[sl] = kUnbound;
        }
      };
      join(0);
    };
    // Round 0: rules without IDB atoms.
    std::map<std::string, std::set<Tuple>> fresh;
    for (auto& r : inst.rules)
      if (r->body.empty()) fire(*r, -1, fresh);
    inst.rounds = 0;
    while (true) {
      delta.clear();
      for (auto& [p, ts] : fresh)
        for (const auto& t : ts)
          if (inst.rel[p].insert(t).second) delta[p].insert(t);
      bool any = false;
      for (auto& [p, ts] : delta) any |= !ts.empty();
      if (!any) break;
      ++inst.rounds;
      fresh.clear();
      for (auto& r : inst.rules)
        for (size_t i = 0; i < r->body.size(); ++i)
          if (delta.count(r->body[i].first) && !delta[r->body[i].first].empty())
            fire(*r, static_cast<int>(i), fresh);
    }
    for (const auto& t : inst.rel[inst.query->goal])
      if (!t.empty() && s.is_timestamp(t[0])) inst.answers.insert(t[0]);
    inst.computed = true;
  }

  std::shared_ptr<std::set<Tuple>> reachable(Unit& u, CNode* c) {
    size_t k = c->args.size() / 2;
    Tuple key;
    for (size_t i = 0; i < k; ++i) key.push_back(val(u, c->args[i]));
    std::vector<int> params;
    for (int sl : c->kids[0]->free)
      if (std::find(c->bound.begin(), c->bound.end(), sl) == c->bound.end()) params.push_back(sl);
    for (int sl : params) key.push_back(u.env[sl]);
    auto it = c->reach.find(key);
    if (it != c->reach.end()) {
      ++ev.stats_.memo_hits;
      return it->second;
    }
    auto seen = std::make_shared<std::set<Tuple>>();
    Tuple start(key.begin(), key.begin() + k);
    Tuple pvals(key.begin() + k, key.end());
    seen->insert(start);
    std::deque<Tuple> work{start};
    while (!work.empty()) {
      Tuple cur = work.front();
      work.pop_front();
      for (const auto& nx : successors(u, c, cur, pvals)) {
        ++ev.stats_.closure_edges;
        if (seen->insert(nx).second) work.push_back(nx);
      }
    }
    c->reach.emplace(key, seen);
    return seen;
  }

  const std::vector<Tuple>& successors(Unit& u, CNode* c, const Tuple& from, const Tuple& pvals) {
    Tuple key = from;
    key.insert(key.end(), pvals.begin(), pvals.end());
    auto it = c->succ.find(key);
    if (it != c->succ.end()) return it->second;
    size_t k = c->bound.size() / 2;
    for (size_t i = 0; i < k; ++i) u.env[c->bound[i]] = from[i];
    std::set<Tuple> out;
    std::vector<CNode*> agenda{c->kids[0]};
    bool det = c->src->deterministic;
    solve(u, agenda, [&] {
      // Target positions the body does not mention range over the domain.
      Tuple t(k);
      std::vector<size_t> open;
      for (size_t i = 0; i < k; ++i) {
        t[i] = u.env[c->bound[k + i]];
        if (t[i] == kUnbound) {
          open.push_back(i);
          t[i] = 0;
        }
      }
      for (;;) {
        out.insert(t);
        if (det && out.size() > 1) return true;
        size_t j = 0;
        while (j < open.size() && ++t[open[j]] == n) t[open[j++]] = 0;
        if (j == open.size()) return false;
      }
    });
    for (size_t i = 0; i < k; ++i) u.env[c->bound[i]] = kUnbound;
    std::vector<Tuple> res;
    if (!det || out.size() == 1) res.assign(out.begin(), out.end());
    return c->succ.emplace(std::move(key), std::move(res)).first->second;
  }

  // ---- constraint-directed search ---------------------------------------
  //
  // Finds assignments of the unbound slots occurring in the agenda making
  // every item true; cb returns true to stop the search.

  template <class Cb>
  bool solve(Unit& u, std::vector<CNode*> agenda, const Cb& cb) {
    auto& env = u.env;
    for (size_t i = 0; i < agenda.size();) {
      CNode* c = agenda[i];
      if (c->op == Op::And || c->op == Op::Exists) {
        agenda.erase(agenda.begin() + i);
        agenda.insert(agenda.end(), c->kids.begin(), c->kids.end());
        continue;
      }
      if (c->op == Op::True) {
        agenda.erase(agenda.begin() + i);
        continue;
      }
      if (c->op == Op::False) return false;
      if (all_bound(u, c)) {
        if (!eval(u, c)) return false;
        agenda.erase(agenda.begin() + i);
        continue;
      }
      ++i;
    }
    if (agenda.empty()) return cb();

    // Direct binders: equality, successor, data atoms, closure targets.
    CNode* best = nullptr;
    size_t best_cost = SIZE_MAX;
    int best_slot = -1;
    std::vector<int> best_values;
    for (CNode* c : agenda) {
      const auto& a = c->args;
      auto open = [&](int sl) { return sl >= 0 && env[sl] == kUnbound; };
      if (c->op == Op::Eq) {
        if (open(a[0]) && !open(a[1])) {
          best = c, best_slot = a[0], best_values = {val(u, a[1])}, best_cost = 1;
        } else if (open(a[1]) && !open(a[0])) {
          best = c, best_slot = a[1], best_values = {val(u, a[0])}, best_cost = 1;
        }
      } else if (c->op == Op::Suc) {
        if (open(a[0]) && !open(a[1])) {
          int y = val(u, a[1]);
          best = c, best_slot = a[0], best_cost = 1;
          best_values.clear();
          if (s.is_timestamp(y + 1)) best_values.push_back(y + 1);
        } else if (open(a[1]) && !open(a[0])) {
          int x = val(u, a[0]);
          best = c, best_slot = a[1], best_cost = 1;
          best_values.clear();
          if (x >= 1 && s.is_timestamp(x)) best_values.push_back(x - 1);
        }
      } else if (c->op == Op::Plus && open(a[0]) + open(a[1]) + open(a[2]) == 1) {
        best = c, best_cost = 1;
        best_values.clear();
        int v = 0;
        if (open(a[2])) {
          best_slot = a[2], v = val(u, a[0]) + val(u, a[1]);
        } else if (open(a[0])) {
          best_slot = a[0], v = val(u, a[2]) - val(u, a[1]);
        } else {
          best_slot = a[1], v = val(u, a[2]) - val(u, a[0]);
        }
        if (v >= 0 && v < n) best_values.push_back(v);
      } else if (c->op == Op::Atom && open(a[0])) {
        const auto& rel = s.relation(c->src->name);
        if (rel.size() < best_cost) {
          best = c, best_slot = a[0], best_cost = rel.size();
          best_values.assign(rel.begin(), rel.end());
        }
      }
      if (best_cost <= 1) break;
    }
    if (best) {
      for (int v : best_values) {
        env[best_slot] = v;
        bool r = solve(u, agenda, cb);
        env[best_slot] = kUnbound;
        if (r) return true;
      }
      return false;
    }
    for (CNode* c : agenda) {
      if (c->op != Op::Tc) continue;
      size_t k = c->args.size() / 2;
      bool src_bound = true;
      for (size_t i = 0; i < k; ++i) src_bound &= c->args[i] < 0 || env[c->args[i]] != kUnbound;
      bool params_bound = true;
      for (int sl : c->kids[0]->free)
        if (std::find(c->bound.begin(), c->bound.end(), sl) == c->bound.end())
          params_bound &= env[sl] != kUnbound;
      if (!src_bound || !params_bound) continue;
      auto reach = reachable(u, c);
      for (const auto& t : *reach) {
        std::vector<int> set_here;
        bool ok = true;
        for (size_t i = 0; i < k; ++i) {
          int sl = c->args[k + i];
          int cur = sl < 0 ? val(u, sl) : env[sl];
          if (cur == kUnbound) {
            env[sl] = t[i];
            set_here.push_back(sl);
          } else if (cur != t[i]) {
            ok = false;
            break;
          }
        }
        bool r = ok && solve(u, agenda, cb);
        for (int sl : set_here) env[sl] = kUnbound;
        if (r) return true;
      }
      return false;
    }
    // Implications with a decided antecedent.
    for (size_t i = 0; i < agenda.size(); ++i) {
      CNode* c = agenda[i];
      if (c->op == Op::Implies && all_bound(u, c->kids[0])) {
        if (eval(u, c->kids[0])) {
          agenda[i] = c->kids[1];
        } else {
          agenda.erase(agenda.begin() + i);
        }
        return solve(u, agenda, cb);
      }
    }
    // Branch on a disjunction whose branches all bind something directly.
    for (size_t i = 0; i < agenda.size(); ++i) {
      CNode* c = agenda[i];
      if (c->op != Op::Or) continue;
      // Branching beats enumeration unless the disjunction is wide and
      // only one slot is open.
      int open_slots = 0;
      for (int sl : c->free) open_slots += env[sl] == kUnbound;
      if (c->kids.size() > static_cast<size_t>(n) && open_slots < 2) continue;
      bool binding = std::all_of(c->kids.begin(), c->kids.end(), [&](CNode* k) { return binds(u, k); });
      if (!binding) continue;
      for (CNode* k : c->kids) {
        std::vector<CNode*> next = agenda;
        next[i] = k;
        if (solve(u, next, cb)) return true;
      }
      return false;
    }
    // Enumerate the open slot shared by the most items.
    std::map<int, int> freq;
    for (CNode* c : agenda)
      for (int sl : c->free)
        if (env[sl] == kUnbound) ++freq[sl];
    int slot = -1, best_f = -1;
    for (auto [sl, f] : freq)
      if (f > best_f) slot = sl, best_f = f;
    if (slot < 0) throw EvalError("internal: no open variable to enumerate");
    for (int v = 0; v < n; ++v) {
      env[slot] = v;
      bool r = solve(u, agenda, cb);
      env[slot] = kUnbound;
      if (r) return true;
    }
    return false;
  }

  // Whether a conjunct can bind an open slot without enumeration.
  bool binds(const Unit& u, const CNode* c) const {
    auto open = [&](int sl) { return sl >= 0 && u.env[sl] == kUnbound; };
    switch (c->op) {
      case Op::Eq: return open(c->args[0]) != open(c->args[1]);
      case Op::Suc: return open(c->args[0]) != open(c->args[1]);
      case Op::Atom: return open(c->args[0]);
      case Op::Plus: return open(c->args[0]) + open(c->args[1]) + open(c->args[2]) == 1;
      case Op::And:
      case Op::Exists:
        return std::any_of(c->kids.begin(), c->kids.end(), [&](const CNode* k) { return binds(u, k); });
      case Op::Or:
        return std::all_of(c->kids.begin(), c->kids.end(), [&](const CNode* k) { return binds(u, k); });
      case Op::Tc: return true;
      default: return false;
    }
  }

  Root& root(const Formula& f, const std::vector<Var>& given) {
    std::vector<int> ids;
    for (const auto& v : given) ids.push_back(v.id);
    std::pair<const Node*, std::vector<int>> key{f.get(), ids};
    auto it = roots.find(key);
    if (it != roots.end()) return *it->second;
    auto r = std::make_unique<Root>();
    r->f = ev.opt_.expand_builtins ? expand_builtins(f) : f;
    Scope sc;
    for (const auto& v : given) {
      if (sc.slot.count(v.id)) continue;
      sc.slot[v.id] = sc.next;
      r->slot_of[v.id] = sc.next++;
    }
    r->unit.env.assign(sc.next, kUnbound);
    r->node = compile(r->unit, r->f, sc, nullptr);
    Root& ref = *r;
    roots.emplace(std::move(key), std::move(r));
    return ref;
  }
};

Evaluator::Evaluator(const FOStructure& structure, EvalOptions options)
    : s_(structure), opt_(options), impl_(std::make_unique<Impl>(*this, structure)) {}

Evaluator::~Evaluator() = default;

bool Evaluator::holds(const Formula& f, const Binding& binding) {
  std::vector<Var> given;
  for (const auto& [id, v] : binding) given.push_back(Var{id, "v"});
  auto& r = impl_->root(f, given);
  for (const auto& [id, v] : binding) {
    auto it = r.slot_of.find(id);
    if (it != r.slot_of.end()) r.unit.env[it->second] = v;
  }
  bool res = impl_->eval(r.unit, r.node);
  for (const auto& [id, sl] : r.slot_of) r.unit.env[sl] = -1;
  return res;
}

TimestampSet Evaluator::answers(const Formula& f, const Var& free) {
  auto& r = impl_->root(f, {free});
  int sl = r.slot_of.at(free.id);
  TimestampSet out;
  for (int t = 0; t <= s_.max_index(); ++t) {
    r.unit.env[sl] = t;
    if (impl_->eval(r.unit, r.node)) out.insert(t);
  }
  r.unit.env[sl] = -1;
  return out;
}

namespace {
std::shared_ptr<const RprQuery> prepared(const RprQuery& q, bool expand) {
  auto p = std::make_shared<const RprQuery>(q);
  if (!expand) return p;
  std::vector<Term> args;
  for (const auto& v : q.free) args.push_back(T(v));
  return expand_builtins(f_rpr_apply(p, args))->rpr;
}
std::shared_ptr<const DatalogQuery> prepared(const DatalogQuery& q, bool expand) {
  auto p = std::make_shared<const DatalogQuery>(q);
  if (!expand) return p;
  return expand_builtins(f_datalog_apply(p, Term::min()))->datalog;
}
}  // namespace

bool Evaluator::holds(const RprQuery& q, const std::vector<int>& args) {
  if (args.size() != q.free.size()) throw EvalError("arity mismatch");
  auto inst = impl_->build_rpr(prepared(q, opt_.expand_builtins));
  return impl_->rpr_main(*inst, args);
}

TimestampSet Evaluator::answers(const RprQuery& q) {
  if (q.free.size() != 1) throw EvalError("answer sets need exactly one free variable");
  auto inst = impl_->build_rpr(prepared(q, opt_.expand_builtins));
  TimestampSet out;
  for (int t = 0; t <= s_.max_index(); ++t)
    if (impl_->rpr_main(*inst, {t})) out.insert(t);
  return out;
}

std::vector<std::vector<char>> Evaluator::rpr_tables(const RprQuery& q) {
  auto inst = impl_->build_rpr(prepared(q, opt_.expand_builtins));
  impl_->compute_rpr(*inst);
  return inst->tables;
}

TimestampSet Evaluator::answers(const DatalogQuery& q) {
  auto inst = impl_->build_datalog(prepared(q, opt_.expand_builtins));
  impl_->run_datalog(*inst);
  return inst->answers;
}

std::set<std::vector<int>> Evaluator::datalog_relation(const DatalogQuery& q, const std::string& pred) {
  auto inst = impl_->build_datalog(prepared(q, opt_.expand_builtins));
  impl_->run_datalog(*inst);
  return inst->rel[pred];
}

int Evaluator::datalog_rounds(const DatalogQuery& q) {
  auto inst = impl_->build_datalog(prepared(q, opt_.expand_builtins));
  impl_->run_datalog(*inst);
  return inst->rounds;
}

TimestampSet Evaluator::answers(const ExtQuery& q) {
  bool saved = opt_.allow_plus;
  opt_.allow_plus = q.lang == Language::FOPlus;
  struct Restore {
    bool& flag;
    bool value;
    ~Restore() { flag = value; }
  } restore{opt_.allow_plus, saved};
  if (const auto* f = std::get_if<Formula>(&q.payload)) return answers(*f, q.free);
  if (const auto* r = std::get_if<RprQuery>(&q.payload)) return answers(*r);
  return answers(std::get<DatalogQuery>(q.payload));
}

namespace {

struct Naive {
  const FOStructure& s;
  int n;

  int val(const Term& t, const Binding& env) const {
    if (t.kind == Term::Min) return 0;
    if (t.kind == Term::Max) return s.max_index();
    auto it = env.find(t.var.id);
    if (it == env.end()) throw EvalError("unbound variable " + t.var.name);
    return it->second;
  }

  // Some assignment of vars[i..] gives the body the truth value `target`.
  bool some(const Formula& f, Binding& env, size_t i, bool target) {
    if (i == f->vars.size()) return holds(f->kids[0], env) == target;
    int id = f->vars[i].id;
    auto old = env.find(id) == env.end() ? std::optional<int>() : std::optional<int>(env[id]);
    bool found = false;
    for (int v = 0; v < n && !found; ++v) {
      env[id] = v;
      found = some(f, env, i + 1, target);
    }
    if (old) env[id] = *old;
    else env.erase(id);
    return found;
  }

  bool holds(const Formula& f, Binding& env) {
    const auto& t = f->terms;
    switch (f->op) {
      case Op::True: return true;
      case Op::False: return false;
      case Op::Less: return val(t[0], env) < val(t[1], env);
      case Op::Eq: return val(t[0], env) == val(t[1], env);
      case Op::Suc: {
        int x = val(t[0], env), y = val(t[1], env);
        return s.is_timestamp(x) && s.is_timestamp(y) && x == y + 1;
      }
      case Op::BitIn: {
        int x = val(t[0], env);
        return s.is_timestamp(x) && s.bit_in(x, val(t[1], env));
      }
      case Op::BitFr: {
        int x = val(t[0], env);
        return s.is_timestamp(x) && s.bit_fr(x, val(t[1], env));
      }
      case Op::Atom: return s.atom(f->name, val(t[0], env));
      case Op::Dist: return builtin_dist(s, f->cmp, f->value, val(t[0], env), val(t[1], env));
      case Op::In: return builtin_in(s, *f->range, val(t[0], env), val(t[1], env));
      case Op::Int: return builtin_int(s, *f->range, val(t[0], env), val(t[1], env), val(t[2], env));
      case Op::Last: return builtin_last(s, f->value, f->index, f->count, val(t[0], env));
      case Op::Plus: return val(t[0], env) + val(t[1], env) == val(t[2], env);
      case Op::Not: return !holds(f->kids[0], env);
      case Op::And:
        for (const auto& k : f->kids)
          if (!holds(k, env)) return false;
        return true;
      case Op::Or:
        for (const auto& k : f->kids)
          if (holds(k, env)) return true;
        return false;
      case Op::Implies: return !holds(f->kids[0], env) || holds(f->kids[1], env);
      case Op::Exists: return some(f, env, 0, true);
      case Op::Forall: return !some(f, env, 0, false);
      case Op::Tc: return closure(f, env);
      default: throw EvalError("reference evaluator does not handle this construct");
    }
  }

  // Full edge relation over k-tuples, then breadth-first search.
  bool closure(const Formula& f, Binding& env) {
    size_t k = f->vars.size() / 2;
    std::vector<int> src(k), dst(k);
    for (size_t i = 0; i < k; ++i) {
      src[i] = val(f->terms[i], env);
      dst[i] = val(f->terms[k + i], env);
    }
    size_t count = 1;
    for (size_t i = 0; i < k; ++i) count *= n;
    auto decode = [&](size_t code) {
      std::vector<int> v(k);
      for (size_t i = k; i-- > 0;) {
        v[i] = static_cast<int>(code % n);
        code /= n;
      }
      return v;
    };
    Binding local = env;
    std::vector<std::vector<size_t>> edges(count);
    for (size_t a = 0; a < count; ++a) {
      auto av = decode(a);
      for (size_t i = 0; i < k; ++i) local[f->vars[i].id] = av[i];
      for (size_t b = 0; b < count; ++b) {
        auto bv = decode(b);
        for (size_t i = 0; i < k; ++i) local[f->vars[k + i].id] = bv[i];
        if (holds(f->kids[0], local)) edges[a].push_back(b);
      }
      if (f->deterministic && edges[a].size() != 1) edges[a].clear();
    }
    auto encode_t = [&](const std::vector<int>& v) {
      size_t c = 0;
      for (int x : v) c = c * n + x;
      return c;
    };
    std::vector<char> seen(count, 0);
    std::vector<size_t> stack{encode_t(src)};
    seen[stack[0]] = 1;
    while (!stack.empty()) {
      size_t a = stack.back();
      stack.pop_back();
      for (size_t b : edges[a])
        if (!seen[b]) {
          seen[b] = 1;
          stack.push_back(b);
        }
    }
    return seen[encode_t(dst)];
  }
};

}  // namespace

bool naive_holds(const FOStructure& s, const Formula& f, const Binding& binding) {
  Naive nv{s, s.domain_size()};
  Binding env = binding;
  return nv.holds(f, env);
}

}  // namespace mtl::logic
