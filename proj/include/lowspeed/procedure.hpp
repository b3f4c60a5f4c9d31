#pragma once
// Stage-driven construction of one e-splitting labeled tree over a host.
//
// One action per shared-clock stage.  A searching stage runs the pairwise
// split search over the current host cut; success designates every leaf
// waiting with its two prospective main children and stores the assignment.
// A waiting stage checks whether the host cut the wait targets has been
// sealed and, once it has, emits the next level: main children under the
// expansionary rule, secondary children drawn from the host cut with labels
// computed from the host path.  On the static base host a failed search can
// be certified permanent (stuck) once the window provably covers the table.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lowspeed/base_tree.hpp"
#include "lowspeed/functionals.hpp"
#include "lowspeed/labeled_tree.hpp"
#include "lowspeed/labels.hpp"

namespace lowspeed {

enum class Phase { Searching, Waiting };

inline const char* phase_name(Phase p) {
  return p == Phase::Searching ? "searching" : "waiting";
}

// Which strip bounds the expansionary test while emitting level n+1: the
// strip of the last built level n (default), or of the level being built.
// They differ only when n+1 lands exactly on a threshold.
enum class StripConvention { Literal, Next };

inline StripConvention parse_strip_convention(const std::string& s) {
  if (s == "literal") return StripConvention::Literal;
  if (s == "next") return StripConvention::Next;
  throw std::invalid_argument("strip convention must be \"literal\" or \"next\": " + s);
}

struct StageRecord {
  std::int64_t stage = 0;
  Phase phase = Phase::Searching;  // the action taken this stage
  int leaves = 0;
  bool declared = false;           // split assignment found; leaves now waiting
  bool emitted = false;            // a level was sealed this stage
  bool went_stuck = false;
  std::int64_t assignment_length = -1;
  int depth_after = 0;
  CostCounter cost;
};

class ProcedureState {
 public:
  LabeledTree out;
  std::vector<StageRecord> ledger;

  ProcedureState(int e, const FunctionalTable* table, LabeledTree* host,
                 const std::string& root_value, Schedule schedule,
                 StripConvention strip = StripConvention::Literal)
      : e_(e), table_(table), host_(host), schedule_(std::move(schedule)), strip_(strip) {
    auto rid = host->find(root_value);
    if (!rid)
      throw std::invalid_argument("ProcedureState: root not on host: \"" + root_value + "\"");
    if (!host->node(*rid).label.top)
      throw std::invalid_argument("ProcedureState: host root not top-labeled: \"" +
                                  root_value + "\"");
    out.set_root(root_value, 1, Label::Top(), 0);
    out.provenance = "procedure";
    host_ids_.push_back({*rid});
  }

  int index() const { return e_; }
  const FunctionalTable& table() const { return *table_; }
  LabeledTree& host() { return *host_; }
  const Schedule& schedule() const { return schedule_; }
  Phase phase() const { return phase_; }
  bool stuck() const { return out.status == TreeStatus::Stuck; }
  std::int64_t declared_stage() const { return declared_stage_; }
  const CostCounter& total_cost() const { return total_cost_; }

  // One action on the shared clock; stages must strictly increase.
  void step(std::int64_t stage) {
    if (stage <= last_stage_)
      throw std::logic_error("ProcedureState::step: stages must increase");
    last_stage_ = stage;
    StageRecord rec;
    rec.stage = stage;
    rec.phase = phase_;
    rec.leaves = static_cast<int>(out.levels[static_cast<std::size_t>(out.depth())].size());
    if (out.status != TreeStatus::Stuck) {
      if (phase_ == Phase::Searching)
        do_search(stage, rec);
      else
        do_wait(stage, rec);
    }
    rec.depth_after = out.depth();
    total_cost_.add(rec.cost);
    ledger.push_back(std::move(rec));
  }

  void seal_at_budget(std::int64_t stage_budget) {
    if (out.status == TreeStatus::Growing) {
      out.status = TreeStatus::SealedAtBudget;
      out.status_stage = stage_budget;
    }
  }

  std::int64_t per_stage_cost(std::size_t i) const { return ledger.at(i).cost.total(); }

 private:
  int e_;
  const FunctionalTable* table_;
  LabeledTree* host_;
  Schedule schedule_;
  StripConvention strip_;
  Phase phase_ = Phase::Searching;
  std::optional<SplitAssignment> pending_;
  std::int64_t declared_stage_ = -1;
  std::int64_t last_stage_ = 0;
  CostCounter total_cost_;
  std::vector<std::vector<NodeId>> host_ids_;  // out node -> host node, per level

  const std::vector<NodeId>& host_leaves(CostCounter* cost) const {
    const auto& ids = host_ids_[static_cast<std::size_t>(out.depth())];
    if (cost) cost->node_inspections += static_cast<std::int64_t>(ids.size());
    return ids;
  }

  void do_search(std::int64_t stage, StageRecord& rec) {
    const auto& leaves = host_leaves(&rec.cost);
    auto asg = find_pairwise_splits(*table_, *host_, leaves, stage, &rec.cost);
    if (!asg) {
      if (host_->base_extendable && saturated(stage, leaves, &rec.cost)) {
        out.status = TreeStatus::Stuck;
        out.status_stage = stage;
        rec.went_stuck = true;
      }
      return;
    }
    pending_ = std::move(asg);
    declared_stage_ = stage;
    phase_ = Phase::Waiting;
    rec.declared = true;
    rec.assignment_length = pending_->length;
    auto& lvl = out.levels[static_cast<std::size_t>(out.depth())];
    for (std::size_t i = 0; i < lvl.size(); ++i) {
      lvl[i].ever_waiting = true;
      lvl[i].declared_at = stage;
      lvl[i].wait_first = host_->node(pending_->choices[i].first).value;
      lvl[i].wait_second = host_->node(pending_->choices[i].second).value;
    }
  }

  void do_wait(std::int64_t stage, StageRecord& rec) {
    auto cut = cut_level_for(stage, &rec.cost);
    if (!cut) {
      ++rec.cost.node_inspections;
      // The cut can never be reached once the host is stuck; on a replayed
      // host the stuck event only counts from its own stage onward.
      if (host_->status == TreeStatus::Stuck && host_->status_stage <= stage) {
        out.status = TreeStatus::Stuck;
        out.status_stage = stage;
        rec.went_stuck = true;
      }
      return;
    }
    emit(stage, *cut, rec);
  }

  // The host cut a wait declared at stage t targets: the shallowest host
  // level all of whose values have length >= t.  On the static base this is
  // the boundary level covering t and always exists; on a growing host it
  // must appear among the levels sealed by the current stage.  Minimum value
  // length is strictly increasing level to level, so the first hit is it.
  std::optional<int> cut_level_for(std::int64_t stage, CostCounter* cost) {
    std::int64_t t = declared_stage_;
    if (host_->base_extendable) {
      int lv = boundary_level_covering(t);
      ensure_base_depth(*host_, lv);
      return lv;
    }
    int deepest = host_->depth_at_stage(stage);
    for (int lv = 0; lv <= deepest; ++lv) {
      if (cost) ++cost->node_inspections;
      std::size_t mn = std::string::npos;
      for (const auto& n : host_->levels[static_cast<std::size_t>(lv)])
        mn = std::min(mn, n.value.size());
      if (static_cast<std::int64_t>(mn) >= t) return lv;
    }
    return std::nullopt;
  }

  void emit(std::int64_t stage, int cut_level, StageRecord& rec) {
    int n = out.depth();
    int t_strip = schedule_.strip_of_level(strip_ == StripConvention::Literal ? n : n + 1);
    std::vector<LabeledTree::ChildSpec> children;
    std::vector<NodeId> child_hosts;
    auto& lvl = out.levels[static_cast<std::size_t>(n)];
    for (std::size_t li = 0; li < lvl.size(); ++li) {
      LabeledNode& leaf = lvl[li];
      const SplitChoice& ch = pending_->choices[li];
      // Scopes climb by one exactly at expansionary nodes, so some weak
      // ancestor is t-expansionary iff the leaf's scope has reached t.
      bool expand = leaf.scope < t_strip;
      const std::string& v1 = host_->node(ch.first).value;
      const std::string& v2 = host_->node(ch.second).value;
      for (NodeId hid : {ch.first, ch.second}) {
        ++rec.cost.node_inspections;
        LabeledTree::ChildSpec c;
        c.parent = static_cast<int>(li);
        c.value = host_->node(hid).value;
        c.scope = expand ? leaf.scope + 1 : leaf.scope;
        c.label = expand ? Label::Top() : leaf.label;
        c.kind = NodeKind::Main;
        children.push_back(std::move(c));
        child_hosts.push_back(hid);
      }
      if (label_cmp(leaf.label, Label::Empty()) > 0)
        append_secondaries(leaf, host_ids_[static_cast<std::size_t>(n)][li], v1, v2,
                           cut_level, static_cast<int>(li), children, child_hosts, rec);
      leaf.emitted_at = stage;
    }
    out.emit_level(std::move(children), stage);
    host_ids_.push_back(std::move(child_hosts));
    rec.emitted = true;
    pending_.reset();
    declared_stage_ = -1;
    phase_ = Phase::Searching;
  }

  // Secondary children of one leaf: the host-cut nodes reachable from the
  // leaf through labels above the least word, incompatible with both mains.
  // Each gets the leaf's scope and a label computed from eta, the greatest
  // label in Labels_scope below everything on the connecting host path.
  void append_secondaries(const LabeledNode& leaf, NodeId leaf_host, const std::string& v1,
                          const std::string& v2, int cut_level, int parent_index,
                          std::vector<LabeledTree::ChildSpec>& children,
                          std::vector<NodeId>& child_hosts, StageRecord& rec) {
    struct Hit {
      NodeId id;
      const std::string* value;
      Label path_min;
    };
    std::vector<Hit> hits;
    std::vector<std::pair<NodeId, Label>> stack;
    for (int ci : host_->node(leaf_host).children) {
      NodeId cid{leaf_host.level + 1, ci};
      ++rec.cost.node_inspections;
      const Label& cl = host_->node(cid).label;
      if (label_cmp(cl, Label::Empty()) > 0) stack.emplace_back(cid, cl);
    }
    while (!stack.empty()) {
      auto [cur, mn] = stack.back();
      stack.pop_back();
      if (cur.level == cut_level) {
        hits.push_back({cur, &host_->node(cur).value, mn});
        continue;
      }
      if (cur.level > cut_level) continue;
      for (int ci : host_->node(cur).children) {
        NodeId cid{cur.level + 1, ci};
        ++rec.cost.node_inspections;
        const Label& cl = host_->node(cid).label;
        if (label_cmp(cl, Label::Empty()) > 0)
          stack.emplace_back(cid, label_min(mn, cl));
      }
    }
    std::sort(hits.begin(), hits.end(),
              [](const Hit& a, const Hit& b) { return *a.value < *b.value; });
    auto compatible = [](const std::string& a, const std::string& b) {
      const std::string& s = a.size() <= b.size() ? a : b;
      const std::string& l = a.size() <= b.size() ? b : a;
      return l.compare(0, s.size(), s) == 0;
    };
    std::size_t scope = static_cast<std::size_t>(leaf.scope);
    for (const Hit& h : hits) {
      if (compatible(*h.value, v1) || compatible(*h.value, v2)) continue;
      Label eta = label_cap(h.path_min, scope);
      Label lab;
      if (eta.top || eta.word.front() == kFin) {
        lab = label_pred(leaf.label, scope);
      } else {
        Label rest = Label::Word(eta.word.substr(1));
        lab = label_min(label_pred(leaf.label, scope), rest);
      }
      LabeledTree::ChildSpec c;
      c.parent = parent_index;
      c.value = *h.value;
      c.scope = leaf.scope;
      c.label = std::move(lab);
      c.kind = NodeKind::Secondary;
      children.push_back(std::move(c));
      child_hosts.push_back(h.id);
    }
  }

  // A failed search on the static base is permanent once (a) every axiom
  // step is active, (b) the length window covers the boundary level holding
  // the longest use (any deeper split projects to one at that length), and
  // (c) no leaf's certified candidate list was cut by the window.
  bool saturated(std::int64_t stage, const std::vector<NodeId>& leaves, CostCounter* cost) {
    std::int64_t lcap = boundary_length(boundary_level_covering(table_->max_use_length()));
    if (stage < table_->max_step() || stage < lcap) return false;
    int cap_level = boundary_level_covering(lcap);
    ensure_base_depth(*host_, cap_level);
    for (NodeId leaf : leaves) {
      std::int64_t count = 0;
      std::vector<NodeId> stack{leaf};
      while (!stack.empty()) {
        NodeId cur = stack.back();
        stack.pop_back();
        if (cost) ++cost->node_inspections;
        if (static_cast<std::int64_t>(host_->node(cur).value.size()) > lcap) continue;
        if (cur != leaf && detail::via_mask_of(*host_, leaf, cur) != 0) ++count;
        if (cur.level < cap_level)
          for (int ci : host_->node(cur).children) stack.push_back(NodeId{cur.level + 1, ci});
      }
      if (count > stage) return false;
    }
    return true;
  }
};

// Runs the procedure for the whole stage budget and seals the result.
inline ProcedureState run_procedure(int e, const FunctionalTable& table, LabeledTree& host,
                                    const std::string& root_value, const Schedule& schedule,
                                    std::int64_t stage_budget,
                                    StripConvention strip = StripConvention::Literal) {
  ProcedureState st(e, &table, &host, root_value, schedule, strip);
  for (std::int64_t s = 1; s <= stage_budget; ++s) st.step(s);
  st.seal_at_budget(stage_budget);
  return st;
}

}  // namespace lowspeed
