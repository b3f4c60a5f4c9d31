#pragma once
// Finite oracle-functional universes: axiom tables with two backends, oracle
// evaluation, least e-split detection, partial comparison functions, staged
// c.e. sets, and the pairwise split search that drives tree growth.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lowspeed/base_tree.hpp"
#include "lowspeed/labeled_tree.hpp"

namespace lowspeed {

// Work meter shared by construction and simulation.  Node inspections and
// axiom lookups each cost one unit; stage budgets are checked against total().
struct CostCounter {
  std::int64_t node_inspections = 0;
  std::int64_t axiom_lookups = 0;

  std::int64_t total() const { return node_inspections + axiom_lookups; }
  void add(const CostCounter& o) {
    node_inspections += o.node_inspections;
    axiom_lookups += o.axiom_lookups;
  }
};

// One axiom <use, input, output, step>: any oracle extending `use` maps
// `input` to `output` once the evaluation stage reaches `step`.
struct Axiom {
  std::string use;
  std::int64_t input = 0;
  std::int64_t output = 0;
  std::int64_t step = 1;
};

// Generated table: for each level k in [1, max_level] there is one axiom per
// perfect-tree member with exactly k blocks, sending input k-1 to that
// member's k-th block bit at step |use| + delay(k).  Comparable uses never
// share an input, so the table is consistent by construction; incomparable
// members disagree on the block where they first differ, so every pair of
// incomparable members e-splits.
struct BlockEncode {
  int max_level = 0;
  std::map<int, std::int64_t> step_delays;  // level -> extra step beyond |use|

  std::int64_t step_of_level(int level) const {
    auto it = step_delays.find(level);
    return boundary_length(level) + (it == step_delays.end() ? 0 : it->second);
  }
};

class FunctionalTable {
 public:
  std::string id;

  static FunctionalTable from_axioms(std::string id, std::vector<Axiom> axioms) {
    FunctionalTable t;
    t.id = std::move(id);
    t.axioms_ = std::move(axioms);
    return t;
  }

  static FunctionalTable from_block_encode(std::string id, BlockEncode gen) {
    FunctionalTable t;
    t.id = std::move(id);
    t.gen_ = std::move(gen);
    return t;
  }

  bool generated() const { return gen_.has_value(); }

  const BlockEncode& generator() const {
    if (!gen_) throw std::logic_error("FunctionalTable: not generator-backed");
    return *gen_;
  }

  const std::vector<Axiom>& explicit_axioms() const {
    if (gen_) throw std::logic_error("FunctionalTable: generator-backed");
    return axioms_;
  }

  // Throws with the offending axioms when two comparable uses give the same
  // input different outputs, or when a field is out of range.
  void validate() const {
    if (gen_) {
      if (gen_->max_level < 1)
        throw std::invalid_argument(id + ": generator max_level must be >= 1");
      for (auto& [lvl, d] : gen_->step_delays) {
        if (lvl < 1 || lvl > gen_->max_level)
          throw std::invalid_argument(id + ": step delay names level out of range");
        if (d < 0) throw std::invalid_argument(id + ": step delay must be >= 0");
      }
      return;
    }
    for (auto& a : axioms_) {
      if (a.step < 1) throw std::invalid_argument(id + ": axiom step must be >= 1");
      if (a.input < 0) throw std::invalid_argument(id + ": axiom input must be >= 0");
    }
    for (std::size_t i = 0; i < axioms_.size(); ++i)
      for (std::size_t j = i + 1; j < axioms_.size(); ++j) {
        const Axiom& a = axioms_[i];
        const Axiom& b = axioms_[j];
        if (a.input != b.input || a.output == b.output) continue;
        const std::string& s = a.use.size() <= b.use.size() ? a.use : b.use;
        const std::string& l = a.use.size() <= b.use.size() ? b.use : a.use;
        if (l.compare(0, s.size(), s) == 0)
          throw std::invalid_argument(
              id + ": inconsistent axioms on input " + std::to_string(a.input) +
              " with comparable uses \"" + a.use + "\" and \"" + b.use + "\"");
      }
  }

  // Convergence of input under `oracle` by `stage`; divergent = nullopt.
  std::optional<std::int64_t> eval(const std::string& oracle, std::int64_t input,
                                   std::int64_t stage, CostCounter* cost = nullptr) const {
    if (gen_) {
      if (cost) ++cost->axiom_lookups;
      int level = static_cast<int>(input) + 1;
      if (input < 0 || level > gen_->max_level) return std::nullopt;
      std::int64_t ulen = boundary_length(level);
      if (static_cast<std::int64_t>(oracle.size()) < ulen) return std::nullopt;
      if (gen_->step_of_level(level) > stage) return std::nullopt;
      // An axiom applies only when the length-ulen prefix really is a member.
      if (!base_contains(oracle.substr(0, static_cast<std::size_t>(ulen))))
        return std::nullopt;
      return oracle[static_cast<std::size_t>(boundary_length(level - 1))] - '0';
    }
    for (auto& a : axioms_) {
      if (cost) ++cost->axiom_lookups;
      if (a.input != input || a.step > stage) continue;
      if (a.use.size() > oracle.size()) continue;
      if (oracle.compare(0, a.use.size(), a.use) == 0) return a.output;
    }
    return std::nullopt;
  }

  // Least input where both oracles converge by `stage` with different
  // outputs.  The generator backend walks blocks in order, carrying the
  // member check forward so each probed block is scanned once.
  std::optional<std::int64_t> least_esplit(const std::string& t1, const std::string& t2,
                                           std::int64_t stage, CostCounter* cost = nullptr) const {
    if (gen_) {
      bool dead1 = false, dead2 = false;
      for (int level = 1; level <= gen_->max_level; ++level) {
        if (cost) ++cost->axiom_lookups;
        std::int64_t lo = boundary_length(level - 1), hi = boundary_length(level);
        bool fit1 = static_cast<std::int64_t>(t1.size()) >= hi;
        bool fit2 = static_cast<std::int64_t>(t2.size()) >= hi;
        if (!fit1 && !fit2) break;
        if (fit1 && !dead1) dead1 = !constant_range(t1, lo, hi);
        if (fit2 && !dead2) dead2 = !constant_range(t2, lo, hi);
        if (dead1 && dead2) break;
        if (gen_->step_of_level(level) > stage) continue;
        if (fit1 && fit2 && !dead1 && !dead2 &&
            t1[static_cast<std::size_t>(lo)] != t2[static_cast<std::size_t>(lo)])
          return level - 1;
      }
      return std::nullopt;
    }
    for (std::int64_t x : declared_inputs()) {
      auto v1 = eval(t1, x, stage, cost);
      if (!v1) continue;
      auto v2 = eval(t2, x, stage, cost);
      if (v2 && *v1 != *v2) return x;
    }
    return std::nullopt;
  }

  // Latest step any axiom can wait for.
  std::int64_t max_step() const {
    if (gen_) {
      std::int64_t m = 0;
      for (int level = 1; level <= gen_->max_level; ++level)
        m = std::max(m, gen_->step_of_level(level));
      return m;
    }
    std::int64_t m = 0;
    for (auto& a : axioms_) m = std::max(m, a.step);
    return m;
  }

  std::int64_t max_use_length() const {
    if (gen_) return boundary_length(gen_->max_level);
    std::int64_t m = 0;
    for (auto& a : axioms_) m = std::max<std::int64_t>(m, a.use.size());
    return m;
  }

  std::vector<std::int64_t> declared_inputs() const {
    std::vector<std::int64_t> xs;
    if (gen_) {
      for (int level = 1; level <= gen_->max_level; ++level) xs.push_back(level - 1);
      return xs;
    }
    for (auto& a : axioms_) xs.push_back(a.input);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
  }

  // Materialized axioms with |use| <= len_limit, for brute-force cross-checks.
  // Generator tables can have exponentially many axioms; keep the limit small.
  std::vector<Axiom> axioms_upto(std::int64_t len_limit) const {
    std::vector<Axiom> out;
    if (!gen_) {
      for (auto& a : axioms_)
        if (static_cast<std::int64_t>(a.use.size()) <= len_limit) out.push_back(a);
      return out;
    }
    for (int level = 1; level <= gen_->max_level; ++level) {
      std::int64_t ulen = boundary_length(level);
      if (ulen > len_limit) break;
      for (auto& u : members_of_length(ulen))
        out.push_back(Axiom{u, level - 1,
                            u[static_cast<std::size_t>(boundary_length(level - 1))] - '0',
                            gen_->step_of_level(level)});
    }
    return out;
  }

 private:
  std::vector<Axiom> axioms_;
  std::optional<BlockEncode> gen_;

  static bool constant_range(const std::string& s, std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo + 1; i < hi; ++i)
      if (s[static_cast<std::size_t>(i)] != s[static_cast<std::size_t>(lo)]) return false;
    return true;
  }
};

// Stage-free partial function, the comparison target of an L-requirement.
// Absent inputs are divergent.
struct PartialFunctionTable {
  std::string id;
  std::map<std::int64_t, std::int64_t> values;

  std::optional<std::int64_t> eval(std::int64_t input) const {
    auto it = values.find(input);
    if (it == values.end()) return std::nullopt;
    return it->second;
  }
};

// C.e. set given by its enumeration schedule: element and the stage it
// appears.  Membership queries are always stage-relative.
struct StagedCeSet {
  std::string id;
  std::vector<std::pair<std::int64_t, std::int64_t>> enumerations;  // (element, stage)

  bool contains_by(std::int64_t element, std::int64_t stage) const {
    for (auto& [e, s] : enumerations)
      if (e == element && s <= stage) return true;
    return false;
  }

  // tau matches the characteristic function on its whole length.
  bool is_characteristic_prefix(const std::string& tau, std::int64_t stage) const {
    for (std::size_t i = 0; i < tau.size(); ++i) {
      char want = contains_by(static_cast<std::int64_t>(i), stage) ? '1' : '0';
      if (tau[i] != want) return false;
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// Pairwise split search.
//
// For each leaf the searcher wants two extensions of a common length that all
// (across every leaf) pairwise e-split by the current stage.  Each extension
// must sit in the >f view rooted at some certifying node: top-labeled,
// reached from the leaf through main children only, with every node strictly
// past it labeled above f.  Both members of a pair must share one certifier.

struct SplitChoice {
  NodeId leaf;
  NodeId via;     // shared certifying node for the pair
  NodeId first;   // lexicographically smaller extension
  NodeId second;
};

struct SplitAssignment {
  std::int64_t length = 0;  // common value length of every chosen extension
  std::vector<SplitChoice> choices;
};

namespace detail {

struct SplitCandidate {
  NodeId id;
  const std::string* value = nullptr;
  std::uint64_t via_mask = 0;  // bit p: path node p below the leaf certifies
  int path_len = 0;            // positions on the leaf..candidate path
  int group = -1;              // projection-group id within one search call
};

// Certifier positions for the leaf..tau path: position p qualifies when the
// walk to p uses main children only, p is top-labeled, and everything past p
// is labeled above f.
inline std::uint64_t via_mask_of(const LabeledTree& t, NodeId leaf, NodeId tau) {
  std::vector<NodeId> path;
  for (NodeId cur = tau;; cur = t.parent_of(cur)) {
    path.push_back(cur);
    if (cur == leaf) break;
    if (cur.level == 0) throw std::logic_error("via_mask_of: tau not below leaf");
  }
  std::reverse(path.begin(), path.end());
  if (path.size() > 63) throw std::logic_error("via_mask_of: path too deep");
  int d = static_cast<int>(path.size()) - 1;
  const Label gate = Label::Word(std::string(1, kFin));  // strictly above f
  std::uint64_t mask = 0;
  bool mains = true;
  for (int p = 0; p <= d; ++p) {
    if (p > 0 && t.node(path[static_cast<std::size_t>(p)]).kind != NodeKind::Main)
      mains = false;
    if (!mains) break;
    if (!t.node(path[static_cast<std::size_t>(p)]).label.top) continue;
    bool above_f = true;
    for (int q = p + 1; q <= d; ++q)
      if (!label_lt(gate, t.node(path[static_cast<std::size_t>(q)]).label)) {
        above_f = false;
        break;
      }
    if (above_f) mask |= std::uint64_t{1} << p;
  }
  return mask;
}

inline NodeId ancestor_at_level(const LabeledTree& t, NodeId id, int level) {
  while (id.level > level) id = t.parent_of(id);
  return id;
}

inline NodeId lca(const LabeledTree& t, NodeId a, NodeId b) {
  a = ancestor_at_level(t, a, std::min(a.level, b.level));
  b = ancestor_at_level(t, b, a.level);
  while (!(a == b)) {
    a = t.parent_of(a);
    b = t.parent_of(b);
  }
  return a;
}

}  // namespace detail

// Greedy deterministic search at one stage.  Candidates per leaf are the
// certified proper descendants on the stage cut with value length <= stage,
// in (length, lex) order, truncated to the first `stage` of them.  Lengths
// are tried in increasing order; within a length, leaves are served in the
// given order and each takes the (certifier, first, second) triple that is
// least under (length, lex) on the certifier then lex on the pair, among
// those whose pair e-splits and also splits every node already chosen.  No
// backtracking: a leaf with no viable triple fails the whole length.
//
// A functional reads the oracle only through its prefix of length at most
// the longest use, so candidates sharing that prefix split identically;
// split queries collapse onto projection groups and are memoized per call.
inline std::optional<SplitAssignment> find_pairwise_splits(
    const FunctionalTable& f, LabeledTree& host, const std::vector<NodeId>& leaves,
    std::int64_t stage, CostCounter* cost = nullptr) {
  if (leaves.empty()) return std::nullopt;
  if (host.base_extendable) ensure_base_depth(host, boundary_level_covering(stage));
  int max_level = host.depth_at_stage(stage);

  // Collect candidates per leaf, deriving certification masks along the way:
  // descending one node keeps prior bits only while labels stay above f, and
  // adds a bit where an all-main path reaches a top label.
  const Label gate = Label::Word(std::string(1, kFin));
  std::vector<std::vector<detail::SplitCandidate>> cands(leaves.size());
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    struct Frame {
      NodeId id;
      std::uint64_t mask;
      bool mains;
      int depth;
    };
    std::vector<Frame> stack{
        {leaves[li], host.node(leaves[li]).label.top ? std::uint64_t{1} : 0, true, 0}};
    std::vector<detail::SplitCandidate> found;
    while (!stack.empty()) {
      Frame fr = stack.back();
      stack.pop_back();
      if (cost) ++cost->node_inspections;
      const LabeledNode& n = host.node(fr.id);
      if (static_cast<std::int64_t>(n.value.size()) > stage) continue;  // children longer
      if (fr.depth > 0 && fr.mask != 0) found.push_back({fr.id, &n.value, fr.mask, fr.depth, -1});
      if (fr.id.level >= max_level) continue;
      if (fr.depth + 1 > 63) throw std::logic_error("find_pairwise_splits: path too deep");
      for (int ci : n.children) {
        NodeId cid{fr.id.level + 1, ci};
        const LabeledNode& c = host.node(cid);
        bool mains = fr.mains && c.kind == NodeKind::Main;
        std::uint64_t mask = label_lt(gate, c.label) ? fr.mask : 0;
        if (mains && c.label.top) mask |= std::uint64_t{1} << (fr.depth + 1);
        stack.push_back({cid, mask, mains, fr.depth + 1});
      }
    }
    std::sort(found.begin(), found.end(),
              [](const detail::SplitCandidate& a, const detail::SplitCandidate& b) {
                if (a.value->size() != b.value->size())
                  return a.value->size() < b.value->size();
                return *a.value < *b.value;
              });
    if (static_cast<std::int64_t>(found.size()) > stage)
      found.resize(static_cast<std::size_t>(stage));
    if (found.empty()) return std::nullopt;
    cands[li] = std::move(found);
  }

  std::size_t keylen = static_cast<std::size_t>(f.max_use_length());
  std::unordered_map<std::string_view, int> group_of;
  std::vector<const std::string*> rep;
  for (auto& cs : cands)
    for (auto& c : cs) {
      std::string_view key{*c.value};
      if (key.size() > keylen) key = key.substr(0, keylen);
      auto [it, fresh] = group_of.try_emplace(key, static_cast<int>(rep.size()));
      if (fresh) rep.push_back(c.value);
      c.group = it->second;
    }
  std::unordered_map<std::uint64_t, bool> split_memo;
  auto splits = [&](int ga, int gb) -> bool {
    if (ga == gb) return false;  // identical restrictions never split
    if (ga > gb) std::swap(ga, gb);
    std::uint64_t k = (static_cast<std::uint64_t>(ga) << 32) | static_cast<std::uint64_t>(gb);
    auto it = split_memo.find(k);
    if (it != split_memo.end()) return it->second;
    bool s = f.least_esplit(*rep[static_cast<std::size_t>(ga)],
                            *rep[static_cast<std::size_t>(gb)], stage, cost)
                 .has_value();
    split_memo.emplace(k, s);
    return s;
  };

  std::vector<std::int64_t> lengths;
  for (auto& c : cands[0]) {
    std::int64_t l = static_cast<std::int64_t>(c.value->size());
    if (lengths.empty() || lengths.back() != l) lengths.push_back(l);
  }

  for (std::int64_t l : lengths) {
    bool all_have = true;
    for (auto& cs : cands) {
      bool has = false;
      for (auto& c : cs)
        if (static_cast<std::int64_t>(c.value->size()) == l) {
          has = true;
          break;
        }
      if (!has) {
        all_have = false;
        break;
      }
    }
    if (!all_have) continue;

    SplitAssignment asg;
    asg.length = l;
    std::vector<int> taken;  // groups of every chosen node, in choice order
    auto ok_taken = [&](int g) {
      for (int t : taken)
        if (!splits(g, t)) return false;
      return true;
    };
    bool ok = true;
    for (std::size_t li = 0; li < leaves.size() && ok; ++li) {
      std::vector<const detail::SplitCandidate*> pool;
      for (auto& c : cands[li])
        if (static_cast<std::int64_t>(c.value->size()) == l) pool.push_back(&c);

      auto viable = [&](const detail::SplitCandidate* a, const detail::SplitCandidate* b) {
        return splits(a->group, b->group) && ok_taken(a->group) && ok_taken(b->group);
      };
      auto take = [&](const detail::SplitCandidate* a, const detail::SplitCandidate* b,
                      int via_pos) {
        asg.choices.push_back({leaves[li],
                               detail::ancestor_at_level(host, a->id,
                                                         leaves[li].level + via_pos),
                               a->id, b->id});
        taken.push_back(a->group);
        taken.push_back(b->group);
      };

      // A viable pair with its shallowest shared certifier.  When the leaf
      // itself certifies every candidate (always on the structural base),
      // every pair's best certifier is the leaf, so pair order alone decides;
      // otherwise the few combos are materialized and ordered certifier-first.
      bool leaf_certifies_all = true;
      for (auto* c : pool)
        if (!(c->via_mask & 1)) {
          leaf_certifies_all = false;
          break;
        }

      bool picked = false;
      if (leaf_certifies_all) {
        std::unordered_map<int, std::vector<std::size_t>> by_group;
        for (std::size_t i = 0; i < pool.size(); ++i)
          by_group[pool[i]->group].push_back(i);
        for (std::size_t i = 0; i < pool.size() && !picked; ++i) {
          if (!ok_taken(pool[i]->group)) continue;
          std::size_t best = pool.size();
          for (auto& [g, idxs] : by_group) {
            if (!splits(pool[i]->group, g) || !ok_taken(g)) continue;
            auto it = std::upper_bound(idxs.begin(), idxs.end(), i);
            if (it != idxs.end()) best = std::min(best, *it);
          }
          if (best < pool.size()) {
            take(pool[i], pool[best], 0);
            picked = true;
          }
        }
      } else {
        struct Combo {
          const detail::SplitCandidate* a;
          const detail::SplitCandidate* b;
          int via_pos;
        };
        auto shared_via = [&](const detail::SplitCandidate* a,
                              const detail::SplitCandidate* b) -> int {
          NodeId meet = detail::lca(host, a->id, b->id);
          int m = meet.level - leaves[li].level;
          if (m < 0) return -1;
          std::uint64_t common = a->via_mask & b->via_mask;
          if (m + 1 < 64) common &= (std::uint64_t{1} << (m + 1)) - 1;
          if (common == 0) return -1;
          int p = 0;
          while (!(common & (std::uint64_t{1} << p))) ++p;
          return p;
        };
        std::vector<Combo> combos;
        for (std::size_t i = 0; i < pool.size(); ++i)
          for (std::size_t j = i + 1; j < pool.size(); ++j) {
            int p = shared_via(pool[i], pool[j]);
            if (p >= 0) combos.push_back({pool[i], pool[j], p});
          }
        std::stable_sort(combos.begin(), combos.end(), [&](const Combo& x, const Combo& y) {
          const std::string& vx =
              host.node(detail::ancestor_at_level(host, x.a->id,
                                                  leaves[li].level + x.via_pos)).value;
          const std::string& vy =
              host.node(detail::ancestor_at_level(host, y.a->id,
                                                  leaves[li].level + y.via_pos)).value;
          if (vx.size() != vy.size()) return vx.size() < vy.size();
          if (vx != vy) return vx < vy;
          if (*x.a->value != *y.a->value) return *x.a->value < *y.a->value;
          return *x.b->value < *y.b->value;
        });
        for (auto& cb : combos) {
          if (viable(cb.a, cb.b)) {
            take(cb.a, cb.b, cb.via_pos);
            picked = true;
            break;
          }
        }
      }
      if (!picked) ok = false;
    }
    if (ok) return asg;
  }
  return std::nullopt;
}

}  // namespace lowspeed
