#pragma once

// Oracle-free simulation of a comparison functional along guessed outcomes.
//
// For a comparison requirement with index e, the guess word eta holds one
// symbol per splitting requirement 0..e (i for infinitary, f for a witness
// node).  A cover node rho is a top-labeled node of tree e whose scope on
// every tree e' <= e is at least e - e'; the instance simulates only oracle
// strings extending rho.  At stage s it enumerates base members sigma with
// |sigma| < s extending rho in (length, lex) order and admits sigma if for
// every e' <= e, against the portion of tree e' built by stage s, either
// sigma is a node of the portion lying in the view above rho through labels
// above eta's suffix past e', or sigma properly extends a frontier leaf of
// the portion that lies in that view -- gated, on procedure-built trees
// whose leaf's label predecessor equals that suffix while the leaf is
// designated waiting, by compatibility with one of the two prospective main
// children.  Each admitted sigma contributes every convergent value on
// inputs below s to the single-assignment map Xi.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lowspeed/base_tree.hpp"
#include "lowspeed/functionals.hpp"
#include "lowspeed/labeled_tree.hpp"
#include "lowspeed/labels.hpp"
#include "lowspeed/orchestrator.hpp"

namespace lowspeed {

// The splitting trees a simulation reads: trees 0..e along the resolved
// path, with a flag telling which were procedure-built (the waiting gate
// only applies to those).
struct SimTrees {
  std::vector<const LabeledTree*> trees;
  std::vector<bool> procedure_built;
};

inline SimTrees sim_trees_for(Orchestration& orc, int e) {
  SimTrees st;
  for (const StepRecord& rec : orc.path.steps) {
    if (rec.kind != ReqKind::M || !rec.resolved) continue;
    if (rec.e > e) break;
    FamilyEntry& fe = orc.family.entry(rec.tree_key);
    st.trees.push_back(fe.tree.get());
    st.procedure_built.push_back(fe.proc != nullptr);
  }
  if (static_cast<int>(st.trees.size()) != e + 1)
    throw std::invalid_argument("sim_trees_for: path does not resolve trees 0.." +
                                std::to_string(e));
  return st;
}

// Guesses at the outcomes of splitting requirements 0..e along the path.
inline Label sim_guesses_for(const TruePathState& path, int e) {
  std::string w;
  for (int i = 0; i <= e; ++i)
    w.push_back(path.pi.m(static_cast<std::size_t>(i)).infinitary ? kInf : kFin);
  return Label::Word(std::move(w));
}

// Shallowest antichain of cover nodes: walk tree e from the root, keeping a
// node when it is top-labeled and its scope on every tree e' <= e is at
// least e - e', descending otherwise.  Hitting the frontier without
// qualifying means the built portion cannot certify a cover.
inline std::vector<std::string> choose_cover(const SimTrees& st, int e) {
  if (static_cast<int>(st.trees.size()) != e + 1)
    throw std::invalid_argument("choose_cover: need trees 0.." + std::to_string(e));
  const LabeledTree& te = *st.trees[static_cast<std::size_t>(e)];
  auto qualifies = [&](NodeId id) {
    const LabeledNode& n = te.node(id);
    if (!n.label.top) return false;
    for (int ep = 0; ep <= e; ++ep) {
      auto nid = st.trees[static_cast<std::size_t>(ep)]->find(n.value);
      if (!nid) return false;
      if (st.trees[static_cast<std::size_t>(ep)]->node(*nid).scope < e - ep) return false;
    }
    return true;
  };
  std::vector<std::string> cover;
  std::vector<NodeId> frontier{te.root_id()};
  while (!frontier.empty()) {
    std::vector<NodeId> next;
    for (NodeId id : frontier) {
      if (qualifies(id)) {
        cover.push_back(te.node(id).value);
        continue;
      }
      if (id.level >= te.depth())
        throw std::runtime_error(
            "choose_cover: insufficient depth: node \"" + te.node(id).value +
            "\" reaches the frontier without qualifying");
      for (int ci : te.node(id).children) next.push_back(NodeId{id.level + 1, ci});
    }
    frontier = std::move(next);
  }
  return cover;
}

struct SimEntry {
  std::int64_t value = 0;
  std::int64_t stage = 0;    // stage the value was defined
  std::string witness;       // the admitted oracle string that supplied it
};

struct SimulationLedger {
  int e = 0;
  Label eta;          // outcome guesses for splitting requirements 0..e
  std::string rho;    // cover node; simulated strings extend it
  std::map<std::int64_t, SimEntry> xi;
  std::vector<std::int64_t> stage_cost;  // [s-1] = inspections+lookups at stage s

  std::int64_t total_cost() const {
    std::int64_t t = 0;
    for (std::int64_t c : stage_cost) t += c;
    return t;
  }
};

namespace detail {

inline bool strings_compatible(const std::string& a, const std::string& b) {
  const std::string& s = a.size() <= b.size() ? a : b;
  const std::string& l = a.size() <= b.size() ? b : a;
  return l.compare(0, s.size(), s) == 0;
}

// Per-tree state fixed for one simulation stage.
struct StagePortion {
  const LabeledTree* t = nullptr;
  bool proc = false;
  Label eta_above;            // guess suffix past this tree's index
  std::optional<NodeId> rho_id;
  int portion = -1;           // deepest level built by the stage
};

// sigma passes for one tree when it is a portion node inside the view above
// rho, or properly extends a view frontier leaf (waiting gate applying on
// procedure-built trees).
inline bool admits_sigma(const StagePortion& sp, const std::string& sigma, std::int64_t s,
                         CostCounter* cost) {
  if (!sp.rho_id || sp.portion < 0) return false;
  TreeView view = restrict(*sp.t, *sp.rho_id, ViewPred::label_gt(sp.eta_above));
  auto hit = sp.t->deepest_prefix_node(sigma, sp.portion);
  if (cost) cost->node_inspections += hit ? hit->level + 1 : 1;
  if (!hit) return false;
  const LabeledNode& hn = sp.t->node(*hit);
  if (hn.value == sigma) return view.contains(*hit);
  if (hit->level != sp.portion) return false;  // mid-tree strings are not admitted
  if (!view.contains(*hit)) return false;
  if (sp.proc && label_cmp(label_pred(hn.label, static_cast<std::size_t>(hn.scope)),
                           sp.eta_above) == 0 &&
      hn.waiting_active_at(s)) {
    return strings_compatible(sigma, hn.wait_first) ||
           strings_compatible(sigma, hn.wait_second);
  }
  return true;
}

}  // namespace detail

// One simulation stage: enumerate candidate strings, admit against every
// tree, and harvest convergent values for still-undefined inputs.
inline void sim_step(SimulationLedger& led, const SimTrees& st, const FunctionalTable& psi,
                     std::int64_t s) {
  CostCounter cost;
  std::vector<detail::StagePortion> per;
  for (std::size_t ep = 0; ep < st.trees.size(); ++ep) {
    detail::StagePortion sp;
    sp.t = st.trees[ep];
    sp.proc = st.procedure_built[ep];
    sp.eta_above = guess_word_above(led.eta, ep);
    sp.rho_id = sp.t->find(led.rho);
    sp.portion = sp.t->depth_at_stage(s);
    per.push_back(std::move(sp));
  }
  const std::vector<std::int64_t> inputs = psi.declared_inputs();
  for (std::int64_t len = static_cast<std::int64_t>(led.rho.size()); len < s; ++len) {
    std::vector<std::string> members = members_of_length(len);
    std::sort(members.begin(), members.end());
    for (const std::string& sigma : members) {
      if (sigma.compare(0, led.rho.size(), led.rho) != 0) continue;
      ++cost.node_inspections;
      bool pass = true;
      for (const auto& sp : per)
        if (!detail::admits_sigma(sp, sigma, s, &cost)) {
          pass = false;
          break;
        }
      if (!pass) continue;
      for (std::int64_t k : inputs) {
        if (k >= s || led.xi.count(k)) continue;
        auto v = psi.eval(sigma, k, s, &cost);
        if (v) led.xi[k] = SimEntry{*v, s, sigma};
      }
    }
  }
  led.stage_cost.push_back(cost.total());
}

inline SimulationLedger sim_run(const SimTrees& st, const FunctionalTable& psi, int e,
                                Label eta, std::string rho, std::int64_t stages) {
  SimulationLedger led;
  led.e = e;
  led.eta = std::move(eta);
  led.rho = std::move(rho);
  for (std::int64_t s = 1; s <= stages; ++s) sim_step(led, st, psi, s);
  return led;
}

// ---------------------------------------------------------------------------
// Post-run checks.  Each returns a row-per-claim report; vacuous passes say
// so in their detail.

struct SimCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SimReport {
  std::vector<SimCheck> checks;
  bool ok() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

// Convergences along the A-prefix are simulated without too much delay: for
// every input whose computation over A converges by some stage s, Xi holds a
// value by stage c*s^q.  Also checks the label claim that A's built prefix
// chain stays inside every view above rho.  Meaningful when the comparison
// requirement resolved infinitary; the caller asserts that.
inline SimReport verify_result_watched(const SimulationLedger& led, const SimTrees& st,
                                       const FunctionalTable& psi, const std::string& a,
                                       std::int64_t stages, std::int64_t c, int q) {
  SimReport rep;
  auto add = [&](std::string name, bool pass, std::string detail) {
    rep.checks.push_back(SimCheck{std::move(name), pass, std::move(detail)});
  };
  if (a.compare(0, led.rho.size(), led.rho) != 0) {
    add("cover", false, "A does not extend the cover node \"" + led.rho + "\"");
    return rep;
  }
  for (std::int64_t r : psi.declared_inputs()) {
    std::optional<std::int64_t> first;
    for (std::int64_t s = 1; s <= stages && !first; ++s)
      if (psi.eval(a, r, s)) first = s;
    if (!first) {
      add("watched[" + std::to_string(r) + "]", true,
          "vacuous: no convergence along A within the stage budget");
      continue;
    }
    std::int64_t deadline = c;
    for (int i = 0; i < q; ++i) deadline *= *first;
    auto it = led.xi.find(r);
    if (it == led.xi.end())
      add("watched[" + std::to_string(r) + "]", false,
          "A converges by stage " + std::to_string(*first) + " but the simulation never did");
    else
      add("watched[" + std::to_string(r) + "]", it->second.stage <= deadline,
          "A converges by stage " + std::to_string(*first) + ", simulated at stage " +
              std::to_string(it->second.stage) + ", deadline " + std::to_string(deadline));
  }
  // Built prefixes of A above rho must carry labels above the guess suffix.
  for (std::size_t ep = 0; ep < st.trees.size(); ++ep) {
    const LabeledTree& t = *st.trees[ep];
    Label gate = guess_word_above(led.eta, ep);
    auto rid = t.find(led.rho);
    std::string bad;
    if (rid) {
      auto deepest = t.deepest_prefix_node(a, t.depth());
      NodeId cur = *deepest;
      while (cur.level > rid->level && bad.empty()) {
        if (label_cmp(t.node(cur).label, gate) <= 0) bad = t.node(cur).value;
        cur = t.parent_of(cur);
      }
      if (bad.empty() && cur != *rid) bad = "(A leaves the cone above rho)";
    } else {
      bad = "(rho not on the built tree)";
    }
    add("a-labeled[" + std::to_string(ep) + "]", bad.empty(),
        bad.empty() ? "A's built prefix chain stays above the guess suffix"
                    : "violation at " + bad);
  }
  return rep;
}

// Every simulated value is witnessed by a node of tree e extending rho.
inline SimReport verify_on_tree(const SimulationLedger& led, const LabeledTree& te,
                                const FunctionalTable& psi, std::int64_t stages) {
  SimReport rep;
  if (led.xi.empty()) {
    rep.checks.push_back(SimCheck{"on-tree", true, "vacuous: no simulated values"});
    return rep;
  }
  for (const auto& [r, entry] : led.xi) {
    bool found = false;
    std::string where;
    for (int lv = 0; lv <= te.depth() && !found; ++lv)
      for (const auto& n : te.levels[static_cast<std::size_t>(lv)]) {
        if (n.value.compare(0, led.rho.size(), led.rho) != 0) continue;
        auto v = psi.eval(n.value, r, stages);
        if (v && *v == entry.value) {
          found = true;
          where = n.value;
          break;
        }
      }
    rep.checks.push_back(SimCheck{
        "on-tree[" + std::to_string(r) + "]", found,
        found ? "value " + std::to_string(entry.value) + " witnessed at \"" + where + "\""
              : "value " + std::to_string(entry.value) + " has no witness on the tree"});
  }
  return rep;
}

// When the comparison requirement resolved infinitary, simulated values
// agree with the reference wherever both are defined.
inline SimReport verify_low_for_speed(const SimulationLedger& led,
                                      const PartialFunctionTable& r_table) {
  SimReport rep;
  bool any = false;
  for (const auto& [r, entry] : led.xi) {
    auto w = r_table.eval(r);
    if (!w) continue;
    any = true;
    rep.checks.push_back(SimCheck{
        "agrees[" + std::to_string(r) + "]", entry.value == *w,
        "simulated " + std::to_string(entry.value) + ", reference " + std::to_string(*w)});
  }
  if (!any)
    rep.checks.push_back(SimCheck{"agrees", true, "vacuous: no common defined inputs"});
  return rep;
}

// Per-stage work stays within C*s^3.
inline SimReport verify_cost_bound(const SimulationLedger& led, std::int64_t C) {
  SimReport rep;
  std::int64_t worst = 0, at = 0;
  bool ok = true;
  for (std::size_t i = 0; i < led.stage_cost.size(); ++i) {
    std::int64_t s = static_cast<std::int64_t>(i) + 1;
    std::int64_t bound = C * s * s * s;
    if (led.stage_cost[i] > bound) ok = false;
    if (led.stage_cost[i] > worst) {
      worst = led.stage_cost[i];
      at = s;
    }
  }
  rep.checks.push_back(SimCheck{
      "cost-bound", ok,
      "worst stage " + std::to_string(at) + " cost " + std::to_string(worst) +
          (ok ? " within " : " exceeds ") + std::to_string(C) + "*s^3"});
  return rep;
}

inline std::string format_simulation(const SimulationLedger& led) {
  std::ostringstream os;
  os << "simulation e=" << led.e << " eta=" << format_label(led.eta) << " rho=\"" << led.rho
     << "\"\n";
  for (const auto& [r, entry] : led.xi)
    os << "  " << r << " -> " << entry.value << " at stage " << entry.stage << " via \""
       << entry.witness << "\"\n";
  os << "  total cost " << led.total_cost() << " over " << led.stage_cost.size()
     << " stages\n";
  return os.str();
}

}  // namespace lowspeed
