#pragma once

// Tree family over outcome strings, true-path resolution, and the finite
// prefix of A.
//
// Requirements come in slot order M_0, L_0, P_0, M_1, ...  Each M slot runs
// the splitting procedure over the current tree for the whole stage budget:
// if it grew and never got stuck the outcome is infinitary and its output
// tree becomes the next tree; if it got stuck, an exhaustive scan over the
// built host cone above A looks for a top-labeled node certifying one of the
// two failure cases (some declared input diverging everywhere in its >f view,
// or all defined values agreeing), and the relabeled restriction at that
// witness becomes the next tree.  L slots scan the current tree for a node
// whose comparison functional provably disagrees with the reference partial
// function; P slots step A to whichever main child is not an initial segment
// of the staged c.e. set.  Resolution is sequential; budget exhaustion is an
// explicit unresolved status, never a guess.

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lowspeed/base_tree.hpp"
#include "lowspeed/functionals.hpp"
#include "lowspeed/labeled_tree.hpp"
#include "lowspeed/labels.hpp"
#include "lowspeed/procedure.hpp"

namespace lowspeed {

// ---------------------------------------------------------------------------
// Relabeled restriction: the subtree above sigma keeping, level by level,
// children labeled above f.  The new root gets scope 1 and top; every other
// admitted node drops one scope and loses the leading f of its label (top
// stays top).  Emission stages carry over, so historical cuts of the view
// agree with the host's.

inline LabeledTree relabel_finitary(const LabeledTree& parent, const std::string& sigma) {
  auto rid = parent.find(sigma);
  if (!rid)
    throw std::invalid_argument("relabel_finitary: invalid root: \"" + sigma +
                                "\" is not on the tree");
  if (!parent.node(*rid).label.top)
    throw std::invalid_argument("relabel_finitary: invalid root: \"" + sigma +
                                "\" is not labeled top");
  LabeledTree out;
  out.provenance = "view";
  out.status = parent.status;
  out.status_stage = parent.status_stage;
  out.set_root(sigma, 1, Label::Top(), parent.level_stage[static_cast<std::size_t>(rid->level)]);
  const Label gate = Label::Word(std::string(1, kFin));
  std::vector<NodeId> frontier{*rid};
  for (int hl = rid->level; hl < parent.depth(); ++hl) {
    std::vector<LabeledTree::ChildSpec> children;
    std::vector<NodeId> next;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      for (int ci : parent.node(frontier[i]).children) {
        NodeId cid{hl + 1, ci};
        const LabeledNode& cn = parent.node(cid);
        if (label_cmp(cn.label, gate) <= 0) continue;
        // Admitted word labels begin with f and have length >= 2, so the
        // tail is nonempty and fits the reduced scope.
        LabeledTree::ChildSpec c;
        c.parent = static_cast<int>(i);
        c.value = cn.value;
        c.scope = cn.scope - 1;
        c.label = cn.label.top ? Label::Top() : Label::Word(cn.label.word.substr(1));
        c.kind = cn.kind;
        children.push_back(std::move(c));
        next.push_back(cid);
      }
    }
    if (children.empty()) break;
    out.emit_level(std::move(children), parent.level_stage[static_cast<std::size_t>(hl) + 1]);
    frontier = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Requirement list.  One entry per slot; the slot index mod 3 dictates the
// kind and which tables must be present.

struct Requirement {
  ReqKind kind = ReqKind::M;
  const FunctionalTable* phi = nullptr;      // M: the functional to split
  const FunctionalTable* psi = nullptr;      // L: the comparison functional
  const PartialFunctionTable* r = nullptr;   // L: the reference function
  const StagedCeSet* w = nullptr;            // P: the set to avoid

  static Requirement M(const FunctionalTable& phi) {
    Requirement rq;
    rq.kind = ReqKind::M;
    rq.phi = &phi;
    return rq;
  }
  static Requirement L(const FunctionalTable& psi, const PartialFunctionTable& r) {
    Requirement rq;
    rq.kind = ReqKind::L;
    rq.psi = &psi;
    rq.r = &r;
    return rq;
  }
  static Requirement P(const StagedCeSet& w) {
    Requirement rq;
    rq.kind = ReqKind::P;
    rq.w = &w;
    return rq;
  }
};

inline void validate_requirements(const std::vector<Requirement>& reqs) {
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const Requirement& rq = reqs[i];
    ReqKind want = OutcomeString::kind_at(i);
    auto bad = [&](const char* what) {
      throw std::invalid_argument("requirement slot " + std::to_string(i) + ": " + what);
    };
    if (rq.kind != want) bad("kind out of M,L,P rotation");
    switch (rq.kind) {
      case ReqKind::M:
        if (!rq.phi || rq.psi || rq.r || rq.w) bad("M takes exactly a functional");
        break;
      case ReqKind::L:
        if (!rq.psi || !rq.r || rq.phi || rq.w)
          bad("L takes exactly a functional and a partial function");
        break;
      case ReqKind::P:
        if (!rq.w || rq.phi || rq.psi || rq.r) bad("P takes exactly a staged set");
        break;
    }
  }
}

// ---------------------------------------------------------------------------
// Family of trees, keyed by the outcome tokens that created them.  The base
// tree sits at the empty key; every other entry is created on demand, either
// by running the procedure over its host for the whole budget or by
// materializing a relabeled restriction.

inline std::string outcome_token(ReqKind kind, const Outcome& o) {
  switch (kind) {
    case ReqKind::M: return o.infinitary ? "Mi" : "Mf:" + o.node;
    case ReqKind::L: return o.infinitary ? "Li" : "Lf:" + o.node;
    default: return "P:" + o.node;
  }
}

inline std::string path_key(const OutcomeString& pi) {
  std::string key;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (i) key += '|';
    key += outcome_token(OutcomeString::kind_at(i), pi.entries[i]);
  }
  return key;
}

struct FamilyEntry {
  std::string key;
  int e = -1;               // index of the M requirement that created the tree
  std::string host_key;
  std::string root_value;
  std::shared_ptr<LabeledTree> tree;
  std::shared_ptr<ProcedureState> proc;  // set only for procedure-built trees
};

class TreeFamily {
 public:
  TreeFamily(Schedule schedule, StripConvention strip, std::int64_t stage_budget)
      : schedule_(std::move(schedule)), strip_(strip), budget_(stage_budget) {
    auto base = std::make_shared<LabeledTree>(as_admissible_root(0));
    order_.push_back(FamilyEntry{"", -1, "", base->node(base->root_id()).value, base, nullptr});
    index_[""] = 0;
  }

  const Schedule& schedule() const { return schedule_; }
  StripConvention strip() const { return strip_; }
  std::int64_t stage_budget() const { return budget_; }

  const std::vector<FamilyEntry>& entries() const { return order_; }

  FamilyEntry* find_entry(const std::string& key) {
    auto it = index_.find(key);
    return it == index_.end() ? nullptr : &order_[it->second];
  }

  FamilyEntry& entry(const std::string& key) {
    auto* e = find_entry(key);
    if (!e) throw std::out_of_range("TreeFamily: no entry for key \"" + key + "\"");
    return *e;
  }

  // Procedure-built tree: replays the whole budget on the shared clock.  The
  // host is read only through its historical cuts, so building hosts first
  // and children afterwards equals running them in lockstep.
  FamilyEntry& ensure_procedure(const std::string& key, int e, const FunctionalTable& phi,
                                const std::string& host_key, const std::string& root_value) {
    if (auto* f = find_entry(key)) return *f;
    auto& host = entry(host_key);
    auto proc = std::make_shared<ProcedureState>(e, &phi, host.tree.get(), root_value,
                                                 schedule_, strip_);
    for (std::int64_t s = 1; s <= budget_; ++s) proc->step(s);
    proc->seal_at_budget(budget_);
    std::shared_ptr<LabeledTree> tree(proc, &proc->out);
    return insert(FamilyEntry{key, e, host_key, root_value, std::move(tree), std::move(proc)});
  }

  // Restriction view at a finitary witness; materialized over the host's
  // built portion.
  FamilyEntry& ensure_view(const std::string& key, int e, const std::string& host_key,
                           const std::string& sigma) {
    if (auto* f = find_entry(key)) return *f;
    auto& host = entry(host_key);
    auto tree = std::make_shared<LabeledTree>(relabel_finitary(*host.tree, sigma));
    return insert(FamilyEntry{key, e, host_key, sigma, std::move(tree), nullptr});
  }

 private:
  Schedule schedule_;
  StripConvention strip_;
  std::int64_t budget_;
  std::vector<FamilyEntry> order_;
  std::map<std::string, std::size_t> index_;

  FamilyEntry& insert(FamilyEntry fe) {
    index_[fe.key] = order_.size();
    order_.push_back(std::move(fe));
    return order_.back();
  }
};

// ---------------------------------------------------------------------------
// Single-slot resolutions.  Every scan is exhaustive over the built portion
// and any claim that depends on unbuilt levels is refused as unresolved.

struct Resolution {
  bool resolved = false;
  Outcome outcome;
  std::string detail;

  static Resolution Resolved(Outcome o, std::string d) {
    return Resolution{true, std::move(o), std::move(d)};
  }
  static Resolution Unresolved(std::string d) {
    return Resolution{false, {}, std::move(d)};
  }
};

namespace detail {

// Nodes of the >f view above sigma, root included, over built levels.
inline std::vector<NodeId> view_nodes_above(const LabeledTree& host, NodeId sigma,
                                            CostCounter* cost) {
  TreeView view = restrict(host, sigma, ViewPred::label_gt(Label::Word(std::string(1, kFin))));
  std::vector<NodeId> out{sigma};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (NodeId c : view.children_of(out[i])) {
      if (cost) ++cost->node_inspections;
      out.push_back(c);
    }
  }
  return out;
}

// Top-labeled candidates in the >empty-word view above a, ordered by level
// then value.  The root counts if it is top-labeled.
inline std::vector<NodeId> top_candidates_above(const LabeledTree& host, NodeId a,
                                                CostCounter* cost) {
  TreeView view = restrict(host, a, ViewPred::label_gt(Label::Empty()));
  std::vector<NodeId> reach{a};
  for (std::size_t i = 0; i < reach.size(); ++i) {
    for (NodeId c : view.children_of(reach[i])) {
      if (cost) ++cost->node_inspections;
      reach.push_back(c);
    }
  }
  std::vector<NodeId> tops;
  for (NodeId id : reach)
    if (host.node(id).label.top) tops.push_back(id);
  std::sort(tops.begin(), tops.end(), [&](NodeId x, NodeId y) {
    if (x.level != y.level) return x.level < y.level;
    return host.node(x).value < host.node(y).value;
  });
  return tops;
}

// Does sigma certify a failure case for phi over its >f view?  Case 1: some
// declared input diverges at every view node.  Case 2: for every input, all
// defined values across view nodes agree.  Both checks are evaluated at the
// final stage, so for a table whose steps the budget covers they are exact.
inline std::optional<std::string> finitary_case_of(const LabeledTree& host, NodeId sigma,
                                                   const FunctionalTable& phi,
                                                   std::int64_t budget, CostCounter* cost) {
  std::vector<NodeId> taus = view_nodes_above(host, sigma, cost);
  const std::vector<std::int64_t> inputs = phi.declared_inputs();
  for (std::int64_t n : inputs) {
    bool converges = false;
    for (NodeId tau : taus)
      if (phi.eval(host.node(tau).value, n, budget, cost)) {
        converges = true;
        break;
      }
    if (!converges)
      return "input " + std::to_string(n) + " diverges everywhere in the view";
  }
  for (std::int64_t n : inputs) {
    std::optional<std::int64_t> seen;
    for (NodeId tau : taus) {
      auto v = phi.eval(host.node(tau).value, n, budget, cost);
      if (!v) continue;
      if (!seen) {
        seen = v;
      } else if (*seen != *v) {
        return std::nullopt;  // a genuine disagreement: neither case holds
      }
    }
  }
  return "all defined values agree across the view";
}

}  // namespace detail

// M slot: infinitary iff the budgeted procedure run grew and never got
// stuck.  On a stuck run, scan top-labeled nodes of the built host cone
// above a for a certified failure case; the least certifier (level, then
// value) is the witness.
inline Resolution resolve_M(const ProcedureState& proc, const LabeledTree& host,
                            const std::string& a, const FunctionalTable& phi,
                            std::int64_t budget, CostCounter* cost = nullptr) {
  if (!proc.stuck()) {
    if (proc.out.depth() >= 1)
      return Resolution::Resolved(
          Outcome::Infty(),
          "procedure reached depth " + std::to_string(proc.out.depth()) + " within budget");
    return Resolution::Unresolved("no level found and not provably stuck at budget " +
                                  std::to_string(budget));
  }
  auto arid = host.find(a);
  if (!arid) throw std::logic_error("resolve_M: A is not on the host tree");
  for (NodeId sigma : detail::top_candidates_above(host, *arid, cost)) {
    auto cert = detail::finitary_case_of(host, sigma, phi, budget, cost);
    if (cert)
      return Resolution::Resolved(Outcome::Node(host.node(sigma).value),
                                  "witness \"" + host.node(sigma).value + "\": " + *cert);
  }
  return Resolution::Unresolved("procedure stuck but no failure case certified at budget " +
                                std::to_string(budget));
}

// L slot: least node of the tree where the comparison functional and the
// reference function both converge and differ; top-labeled nodes are
// preferred, then any node, each pass ordered by level then value.
inline Resolution resolve_L(const LabeledTree& t, const FunctionalTable& psi,
                            const PartialFunctionTable& r, std::int64_t budget,
                            CostCounter* cost = nullptr) {
  const std::vector<std::int64_t> inputs = psi.declared_inputs();
  auto disagrees = [&](const LabeledNode& n) -> std::optional<std::string> {
    for (std::int64_t x : inputs) {
      auto v = psi.eval(n.value, x, budget, cost);
      if (!v) continue;
      auto w = r.eval(x);
      if (w && *v != *w)
        return "input " + std::to_string(x) + ": functional gives " + std::to_string(*v) +
               ", reference gives " + std::to_string(*w);
    }
    return std::nullopt;
  };
  for (bool top_pass : {true, false}) {
    for (int lv = 0; lv <= t.depth(); ++lv) {
      std::vector<const LabeledNode*> row;
      for (const auto& n : t.levels[static_cast<std::size_t>(lv)]) {
        if (cost) ++cost->node_inspections;
        if (n.label.top == top_pass || !top_pass) row.push_back(&n);
      }
      std::sort(row.begin(), row.end(),
                [](const LabeledNode* x, const LabeledNode* y) { return x->value < y->value; });
      for (const LabeledNode* n : row)
        if (auto d = disagrees(*n))
          return Resolution::Resolved(Outcome::Node(n->value),
                                      "disagreement at \"" + n->value + "\" (" + *d + ")");
    }
  }
  return Resolution::Resolved(Outcome::Infty(), "no disagreement on the built portion");
}

// P slot: of the two main children of A's node, pick the least one that is
// not an initial segment of the set's characteristic string at the final
// enumeration stage.  Main children are incompatible, so they cannot both be
// initial segments.
inline Resolution resolve_P(const LabeledTree& t, const StagedCeSet& w, const std::string& a,
                            std::int64_t budget, CostCounter* cost = nullptr) {
  auto arid = t.find(a);
  if (!arid) throw std::logic_error("resolve_P: A is not on the tree");
  std::vector<const LabeledNode*> mains;
  for (int ci : t.node(*arid).children) {
    if (cost) ++cost->node_inspections;
    const LabeledNode& c = t.levels[static_cast<std::size_t>(arid->level) + 1]
                                   [static_cast<std::size_t>(ci)];
    if (c.kind == NodeKind::Main) mains.push_back(&c);
  }
  if (mains.size() != 2)
    return Resolution::Unresolved("A has " + std::to_string(mains.size()) +
                                  " main children on the built portion; need 2");
  std::sort(mains.begin(), mains.end(),
            [](const LabeledNode* x, const LabeledNode* y) { return x->value < y->value; });
  bool fail0 = !w.is_characteristic_prefix(mains[0]->value, budget);
  bool fail1 = !w.is_characteristic_prefix(mains[1]->value, budget);
  if (!fail0 && !fail1)
    throw std::logic_error("resolve_P: incompatible strings cannot both match the set");
  const LabeledNode* pick = fail0 ? mains[0] : mains[1];
  return Resolution::Resolved(Outcome::Node(pick->value),
                              "child \"" + pick->value + "\" differs from the set");
}

// ---------------------------------------------------------------------------
// True-path construction.

struct StepRecord {
  std::size_t slot = 0;
  ReqKind kind = ReqKind::M;
  int e = 0;
  bool resolved = false;
  Outcome outcome;
  std::string detail;
  std::string tree_key;  // family key of the tree in play at this slot
  std::string a_before, a_after;
  std::int64_t cost = 0;
};

struct TruePathState {
  OutcomeString pi;
  std::string a;
  std::vector<StepRecord> steps;
  bool complete = false;  // every listed requirement resolved
};

struct Orchestration {
  TreeFamily family;
  TruePathState path;
};

struct BuildOptions {
  Schedule schedule = Schedule::paper();
  StripConvention strip = StripConvention::Literal;
  std::int64_t stage_budget = 0;
};

// Resolves requirements in slot order, materializing along the resolved
// outcomes: the procedure tree or witness view per M slot, nothing per L and
// P (they only move A).  A prefix that cannot be certified stops the walk
// with an unresolved step; everything before it stands.
inline Orchestration build_A(const std::vector<Requirement>& reqs, const BuildOptions& opt) {
  validate_requirements(reqs);
  Orchestration orc{TreeFamily(opt.schedule, opt.strip, opt.stage_budget), {}};
  std::string cur_key;  // family key of the tree L and P act on; host of the next M
  orc.path.a = orc.family.entry("").root_value;
  for (std::size_t slot = 0; slot < reqs.size(); ++slot) {
    const Requirement& rq = reqs[slot];
    int e = static_cast<int>(slot / 3);
    StepRecord rec;
    rec.slot = slot;
    rec.kind = rq.kind;
    rec.e = e;
    rec.a_before = orc.path.a;
    CostCounter cost;
    Resolution res;
    switch (rq.kind) {
      case ReqKind::M: {
        // Entry references go stale when the family grows; hold the trees.
        std::shared_ptr<LabeledTree> host = orc.family.entry(cur_key).tree;
        auto arid = host->find(orc.path.a);
        if (arid && host->node(*arid).label.top) {
          std::string xi = path_key(orc.path.pi);
          std::string ikey = (xi.empty() ? "" : xi + "|") + "Mi";
          std::shared_ptr<ProcedureState> inst =
              orc.family.ensure_procedure(ikey, e, *rq.phi, cur_key, orc.path.a).proc;
          cost.add(inst->total_cost());
          res = resolve_M(*inst, *host, orc.path.a, *rq.phi, opt.stage_budget, &cost);
          if (res.resolved) {
            if (res.outcome.infinitary) {
              rec.tree_key = ikey;
            } else {
              std::string vkey = (xi.empty() ? "" : xi + "|") + "Mf:" + res.outcome.node;
              orc.family.ensure_view(vkey, e, cur_key, res.outcome.node);
              rec.tree_key = vkey;
              orc.path.a = res.outcome.node;
            }
            cur_key = rec.tree_key;
          }
        } else {
          res = Resolution::Unresolved("A is not a top-labeled node of the host tree");
        }
        break;
      }
      case ReqKind::L: {
        FamilyEntry& fe = orc.family.entry(cur_key);
        res = resolve_L(*fe.tree, *rq.psi, *rq.r, opt.stage_budget, &cost);
        rec.tree_key = cur_key;
        if (res.resolved && !res.outcome.infinitary) orc.path.a = res.outcome.node;
        break;
      }
      case ReqKind::P: {
        FamilyEntry& fe = orc.family.entry(cur_key);
        res = resolve_P(*fe.tree, *rq.w, orc.path.a, opt.stage_budget, &cost);
        rec.tree_key = cur_key;
        if (res.resolved) orc.path.a = res.outcome.node;
        break;
      }
    }
    rec.resolved = res.resolved;
    rec.outcome = res.outcome;
    rec.detail = res.detail;
    rec.a_after = orc.path.a;
    rec.cost = cost.total();
    // A only ever extends.
    if (orc.path.a.compare(0, rec.a_before.size(), rec.a_before) != 0)
      throw std::logic_error("build_A: A prefix shrank at slot " + std::to_string(slot));
    bool stop = !res.resolved;
    if (res.resolved) orc.path.pi.push(res.outcome);
    orc.path.steps.push_back(std::move(rec));
    if (stop) return orc;
  }
  orc.path.complete = true;
  return orc;
}

// The family alone, for callers that only care about the trees.
inline Orchestration build_family(const std::vector<Requirement>& reqs,
                                  const BuildOptions& opt) {
  return build_A(reqs, opt);
}

// ---------------------------------------------------------------------------
// Post-resolution verification: A sits on every tree along the path, roots
// line up with the A-prefix at creation, trees are admissible over their
// built portion, finitary witnesses still certify, and infinitary trees
// still pairwise split at their deepest level below A.

struct CaseCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CaseReport {
  std::vector<CaseCheck> checks;
  bool ok() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

inline CaseReport check_minimality_cases(Orchestration& orc,
                                         const std::vector<Requirement>& reqs,
                                         std::int64_t budget) {
  CaseReport rep;
  auto add = [&](std::string name, bool pass, std::string detail) {
    rep.checks.push_back(CaseCheck{std::move(name), pass, std::move(detail)});
  };
  const std::string& a = orc.path.a;
  std::string prev;
  for (const StepRecord& st : orc.path.steps) {
    if (!st.resolved) continue;
    std::string tag = std::string(1, "MLP"[static_cast<int>(st.kind)]) + std::to_string(st.e);
    // Monotone A.
    bool mono = st.a_after.compare(0, st.a_before.size(), st.a_before) == 0 &&
                st.a_before.compare(0, prev.size(), prev) == 0;
    add("a-monotone[" + tag + "]", mono, "A " + st.a_before + " -> " + st.a_after);
    prev = st.a_after;
    if (st.kind != ReqKind::M) continue;
    FamilyEntry& fe = orc.family.entry(st.tree_key);
    const LabeledTree& t = *fe.tree;
    // The final A-prefix lies on the tree.
    auto aid = t.find(a);
    add("a-on-tree[" + tag + "]", aid.has_value(),
        aid ? "A = \"" + a + "\" found at level " + std::to_string(aid->level)
            : "A = \"" + a + "\" is not a node");
    // The tree's root is the A-prefix at its creation.
    std::string want_root = st.outcome.infinitary ? st.a_before : st.outcome.node;
    const std::string& got_root = t.node(t.root_id()).value;
    add("root-is-a[" + tag + "]", got_root == want_root,
        "root \"" + got_root + "\", expected \"" + want_root + "\"");
    // Admissibility over the built portion.
    auto adm = check_admissible(t, t.depth(), 1);
    add("admissible[" + tag + "]", adm.ok(),
        adm.ok() ? "through depth " + std::to_string(t.depth())
                 : adm.violations.front());
    const FunctionalTable& phi = *reqs[st.slot].phi;
    if (st.outcome.infinitary) {
      // Deepest-level main nodes extending A must still pairwise split.
      const auto& deepest = t.levels[static_cast<std::size_t>(t.depth())];
      std::vector<const std::string*> vals;
      for (const auto& n : deepest)
        if (n.kind != NodeKind::Secondary && n.value.size() >= a.size() &&
            n.value.compare(0, a.size(), a) == 0)
          vals.push_back(&n.value);
      bool all = true;
      std::string why;
      for (std::size_t i = 0; i < vals.size() && all; ++i)
        for (std::size_t j = i + 1; j < vals.size() && all; ++j)
          if (!phi.least_esplit(*vals[i], *vals[j], budget)) {
            all = false;
            why = "\"" + *vals[i] + "\" and \"" + *vals[j] + "\" do not split";
          }
      add("splitting[" + tag + "]", all,
          all ? (vals.size() < 2 ? "vacuous: fewer than two nodes below A"
                                 : std::to_string(vals.size()) + " nodes pairwise split")
              : why);
    } else {
      // The recorded witness must still certify a failure case on its host.
      const LabeledTree& host = *orc.family.entry(fe.host_key).tree;
      auto sid = host.find(st.outcome.node);
      std::optional<std::string> cert;
      if (sid) cert = detail::finitary_case_of(host, *sid, phi, budget, nullptr);
      add("finitary-case[" + tag + "]", cert.has_value(),
          cert ? *cert : "witness no longer certifies");
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Structured text reports.

inline std::string format_true_path(const TruePathState& st) {
  std::ostringstream os;
  for (const StepRecord& rec : st.steps) {
    os << "MLP"[static_cast<int>(rec.kind)] << "_" << rec.e << ": ";
    if (!rec.resolved)
      os << "unresolved";
    else if (rec.outcome.infinitary)
      os << "infty";
    else
      os << "\"" << rec.outcome.node << "\"";
    os << " — " << rec.detail << " [A=\"" << rec.a_after << "\", cost " << rec.cost << "]\n";
  }
  os << (st.complete ? "complete" : "stopped") << "; A = \"" << st.a << "\"\n";
  return os.str();
}

inline std::string format_case_report(const CaseReport& rep) {
  std::ostringstream os;
  for (const CaseCheck& c : rep.checks)
    os << (c.pass ? "pass" : "FAIL") << "  " << c.name << ": " << c.detail << "\n";
  return os.str();
}

}  // namespace lowspeed
