#pragma once

// Labeled trees of bit-strings.
//
// A tree is stored level by level: every node of level n+1 is a child of a
// level-n node, children properly extend their parent as bit-strings, and
// children of distinct nodes are pairwise incompatible.  Each node carries a
// scope (which label universe Labels_scope its label lives in), a label, and
// a kind (root / main / secondary).  Levels are emitted atomically at a
// stage, so any historical cut of the tree is "levels emitted by stage s".

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lowspeed/labels.hpp"

namespace lowspeed {

enum class NodeKind { Root, Main, Secondary };

inline const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Root: return "root";
    case NodeKind::Main: return "main";
    default: return "secondary";
  }
}

struct NodeId {
  int level = -1;
  int index = -1;
  bool valid() const { return level >= 0; }
  bool operator==(const NodeId& o) const { return level == o.level && index == o.index; }
  bool operator!=(const NodeId& o) const { return !(*this == o); }
};

struct LabeledNode {
  std::string value;  // bit-string
  int scope = 0;
  Label label;
  NodeKind kind = NodeKind::Root;
  int parent = -1;             // index within the previous level
  std::vector<int> children;   // indices within the next level

  // Waiting history: set when the node, as a leaf, was designated waiting
  // with its two prospective main children.  emitted_at stays -1 until the
  // children level actually appears.
  bool ever_waiting = false;
  std::string wait_first, wait_second;
  std::int64_t declared_at = -1;
  std::int64_t emitted_at = -1;

  bool waiting_active_at(std::int64_t stage) const {
    return ever_waiting && declared_at <= stage && (emitted_at < 0 || stage < emitted_at);
  }
};

enum class TreeStatus { Growing, Stuck, SealedAtBudget };

inline const char* tree_status_name(TreeStatus s) {
  switch (s) {
    case TreeStatus::Growing: return "growing";
    case TreeStatus::Stuck: return "stuck";
    default: return "sealed-at-budget";
  }
}

class LabeledTree {
 public:
  std::vector<std::vector<LabeledNode>> levels;
  std::vector<std::int64_t> level_stage;  // stage each level was emitted (root: 0)
  TreeStatus status = TreeStatus::Growing;
  std::int64_t status_stage = 0;  // stage the status left Growing; 0 while growing
  std::string provenance;
  bool base_extendable = false;  // true only for the structural base tree

  bool empty() const { return levels.empty(); }
  int depth() const { return static_cast<int>(levels.size()) - 1; }

  const LabeledNode& node(NodeId id) const { return levels.at(id.level).at(id.index); }
  LabeledNode& node(NodeId id) { return levels.at(id.level).at(id.index); }

  NodeId root_id() const {
    if (empty()) throw std::logic_error("LabeledTree: no root");
    return NodeId{0, 0};
  }

  void set_root(std::string value, int scope, Label label, std::int64_t stage = 0) {
    if (!empty()) throw std::logic_error("LabeledTree: root already set");
    LabeledNode n;
    n.value = std::move(value);
    n.scope = scope;
    n.label = std::move(label);
    n.kind = NodeKind::Root;
    levels.push_back({std::move(n)});
    level_stage.push_back(stage);
  }

  // Appends one whole level.  Every entry names its parent by index in the
  // current deepest level; parent links and the value index are maintained
  // here so construction code only describes the children.
  struct ChildSpec {
    int parent = -1;
    std::string value;
    int scope = 0;
    Label label;
    NodeKind kind = NodeKind::Main;
  };

  void emit_level(std::vector<ChildSpec> children, std::int64_t stage) {
    if (empty()) throw std::logic_error("emit_level: tree has no root");
    int parent_level = depth();
    std::vector<LabeledNode> lvl;
    lvl.reserve(children.size());
    for (auto& c : children) {
      auto& par = levels[parent_level].at(c.parent);
      if (c.value.size() <= par.value.size() ||
          c.value.compare(0, par.value.size(), par.value) != 0)
        throw std::invalid_argument("emit_level: child must properly extend parent");
      for (int prev : par.children)
        if (lvl[prev].value == c.value)
          throw std::logic_error("emit_level: duplicate sibling value " + c.value);
      LabeledNode n;
      n.value = std::move(c.value);
      n.scope = c.scope;
      n.label = std::move(c.label);
      n.kind = c.kind;
      n.parent = c.parent;
      par.children.push_back(static_cast<int>(lvl.size()));
      lvl.push_back(std::move(n));
    }
    levels.push_back(std::move(lvl));
    level_stage.push_back(stage);
  }

  // Siblings never share values and distinct parents have incompatible
  // values, so a prefix walk reaches the unique node with this value if it
  // exists.  Avoids a by-value index, which would duplicate every string.
  std::optional<NodeId> find(const std::string& value) const {
    auto hit = deepest_prefix_node(value, depth());
    if (!hit || node(*hit).value != value) return std::nullopt;
    return hit;
  }

  // Deepest level emitted by the given stage; -1 if even the root postdates it.
  int depth_at_stage(std::int64_t stage) const {
    int d = -1;
    for (std::size_t i = 0; i < level_stage.size(); ++i)
      if (level_stage[i] <= stage) d = static_cast<int>(i);
    return d;
  }

  NodeId parent_of(NodeId id) const {
    if (id.level == 0) return NodeId{};
    return NodeId{id.level - 1, node(id).parent};
  }

  // a is an ancestor of (or equal to) b.
  bool is_weak_ancestor(NodeId a, NodeId b) const {
    if (a.level > b.level) return false;
    while (b.level > a.level) b = parent_of(b);
    return a == b;
  }

  // Deepest node whose value is a prefix of (or equal to) sigma, walking
  // from the root, restricted to levels <= max_level.  Nothing if sigma is
  // incompatible with the root.
  std::optional<NodeId> deepest_prefix_node(const std::string& sigma, int max_level) const {
    if (empty()) return std::nullopt;
    NodeId cur = root_id();
    const auto& rv = node(cur).value;
    if (sigma.size() < rv.size() || sigma.compare(0, rv.size(), rv) != 0) return std::nullopt;
    while (cur.level < max_level) {
      bool advanced = false;
      for (int ci : node(cur).children) {
        const auto& cv = levels[cur.level + 1][ci].value;
        if (cv.size() <= sigma.size() && sigma.compare(0, cv.size(), cv) == 0) {
          cur = NodeId{cur.level + 1, ci};
          advanced = true;
          break;
        }
      }
      if (!advanced) break;
    }
    return cur;
  }
};

// Canonical one-line digest of everything construction-determined: levels,
// values, scopes, labels, kinds, emission stages, and final status.  Two runs
// built the same way must fingerprint identically.
inline std::string tree_fingerprint(const LabeledTree& t) {
  std::ostringstream os;
  os << tree_status_name(t.status) << "@" << t.status_stage;
  for (int lv = 0; lv <= t.depth(); ++lv) {
    os << ";" << t.level_stage[lv] << ":";
    for (const auto& n : t.levels[lv])
      os << n.value << "|" << n.scope << "|" << format_label(n.label) << "|"
         << node_kind_name(n.kind) << ",";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Expansionary schedule.
//
// Level thresholds e_1 = 0 < e_2 < e_3 < ... partition a tree into strips;
// crossing into strip t is where scope-t nodes may first appear.  The stock
// schedules are "paper" (e_{i+1} = e_i + 2^(i+5)) and "compact" (the minimal
// spacing the counting arguments tolerate); custom spacings are validated
// against the slack bound e_{i+1} - e_i > |Labels_{i-1}| + |Labels_i| + 1.

struct Schedule {
  enum class Kind { Paper, Compact, Custom };
  Kind kind = Kind::Paper;
  std::vector<std::int64_t> deltas;  // custom: deltas[i-1] = e_{i+1} - e_i

  static Schedule paper() { return Schedule{Kind::Paper, {}}; }
  static Schedule compact() { return Schedule{Kind::Compact, {}}; }
  static Schedule custom(std::vector<std::int64_t> d) {
    Schedule s{Kind::Custom, std::move(d)};
    s.validate();
    return s;
  }

  // |Labels_{i-1}| + |Labels_i| + 1 = 2^i + 2^(i+1) + 1.
  static std::int64_t min_slack(int i) {
    return (std::int64_t{1} << i) + (std::int64_t{1} << (i + 1)) + 1;
  }

  std::int64_t delta(int i) const {  // e_{i+1} - e_i, i >= 1
    switch (kind) {
      case Kind::Paper: return std::int64_t{1} << (i + 5);
      case Kind::Compact: return min_slack(i) + 1;
      case Kind::Custom:
        if (i - 1 < static_cast<int>(deltas.size())) return deltas[i - 1];
        return std::int64_t{1} << (i + 5);  // continue with the stock spacing
    }
    throw std::logic_error("Schedule: bad kind");
  }

  void validate() const {
    for (int i = 1; i <= static_cast<int>(deltas.size()); ++i)
      if (deltas[i - 1] <= min_slack(i))
        throw std::invalid_argument(
            "Schedule: spacing " + std::to_string(deltas[i - 1]) + " at index " +
            std::to_string(i) + " does not exceed the slack bound " +
            std::to_string(min_slack(i)));
  }

  std::int64_t expansionary_level(int i) const {  // e_i, i >= 1
    if (i < 1) throw std::invalid_argument("expansionary_level: index starts at 1");
    std::int64_t e = 0;
    for (int j = 1; j < i; ++j) e += delta(j);
    return e;
  }

  int strip_of_level(std::int64_t n) const {  // t with e_t <= n < e_{t+1}
    if (n < 0) throw std::invalid_argument("strip_of_level: negative level");
    int t = 1;
    std::int64_t e_next = delta(1);
    while (n >= e_next) {
      ++t;
      e_next += delta(t);
    }
    return t;
  }
};

// A child whose scope exceeds its parent's is expansionary (it re-enters the
// construction at a larger universe and its label was reset to top).
inline bool is_expansionary(const LabeledNode& child, const LabeledNode& parent) {
  return child.scope > parent.scope;
}

// ---------------------------------------------------------------------------
// Restriction views: the subtree above a root keeping children whose label
// passes a predicate (or only main children).  Views are lazy; nothing is
// copied.

struct ViewPred {
  enum class Kind { LabelGt, LabelGe, MainOnly, All };
  Kind kind = Kind::All;
  Label eta;

  static ViewPred label_gt(Label l) { return ViewPred{Kind::LabelGt, std::move(l)}; }
  static ViewPred label_ge(Label l) { return ViewPred{Kind::LabelGe, std::move(l)}; }
  static ViewPred main_only() { return ViewPred{Kind::MainOnly, {}}; }
  static ViewPred all() { return ViewPred{Kind::All, {}}; }

  bool admits(const LabeledNode& n) const {
    switch (kind) {
      case Kind::LabelGt: return label_cmp(n.label, eta) > 0;
      case Kind::LabelGe: return label_cmp(n.label, eta) >= 0;
      case Kind::MainOnly: return n.kind == NodeKind::Main;
      case Kind::All: return true;
    }
    return false;
  }
};

struct TreeView {
  const LabeledTree* tree = nullptr;
  NodeId root;
  ViewPred pred;

  // Membership: id sits at or below the view root and every node strictly
  // below the root on the connecting path passes the predicate.  The root
  // itself is in the view unconditionally.
  bool contains(NodeId id) const {
    if (id.level < root.level) return false;
    while (id.level > root.level) {
      if (!pred.admits(tree->node(id))) return false;
      id = tree->parent_of(id);
    }
    return id == root;
  }

  std::vector<NodeId> children_of(NodeId id) const {
    std::vector<NodeId> out;
    const auto& n = tree->node(id);
    for (int ci : n.children) {
      NodeId cid{id.level + 1, ci};
      if (pred.admits(tree->node(cid))) out.push_back(cid);
    }
    return out;
  }
};

inline TreeView restrict(const LabeledTree& t, NodeId root, ViewPred pred) {
  if (root.level < 0 || root.level > t.depth())
    throw std::invalid_argument("restrict: root outside tree");
  return TreeView{&t, root, std::move(pred)};
}

// ---------------------------------------------------------------------------
// Admissibility, in the bounded form a finite prefix of a tree can witness:
//  (1) every node strictly above `through_depth` has exactly two main
//      children, each labeled >= its parent;
//  (2) child scopes never drop;
//  (3) along every root-to-frontier path, for each n <= cofinal_cap there is
//      a node with label top and scope >= n.

struct AdmissibilityReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline AdmissibilityReport check_admissible(const LabeledTree& t, int through_depth,
                                            int cofinal_cap) {
  AdmissibilityReport rep;
  if (t.empty()) {
    rep.violations.push_back("tree is empty");
    return rep;
  }
  int limit = std::min(through_depth, t.depth());
  for (int lv = 0; lv < limit; ++lv) {
    for (int i = 0; i < static_cast<int>(t.levels[lv].size()); ++i) {
      const auto& n = t.levels[lv][i];
      int mains = 0;
      for (int ci : n.children) {
        const auto& c = t.levels[lv + 1][ci];
        if (c.kind == NodeKind::Main) {
          ++mains;
          if (label_cmp(c.label, n.label) < 0)
            rep.violations.push_back("main child " + c.value + " labeled below parent " +
                                     n.value);
        }
        if (c.scope < n.scope)
          rep.violations.push_back("child " + c.value + " drops scope under " + n.value);
      }
      if (mains != 2)
        rep.violations.push_back("node " + n.value + " at level " + std::to_string(lv) +
                                 " has " + std::to_string(mains) + " main children");
    }
  }
  // Condition (3) along every path to the checked frontier.
  const auto& frontier = t.levels[limit];
  for (int i = 0; i < static_cast<int>(frontier.size()); ++i) {
    int best_top_scope = -1;
    NodeId id{limit, i};
    while (id.valid()) {
      const auto& n = t.node(id);
      if (n.label.top && n.scope > best_top_scope) best_top_scope = n.scope;
      id = t.parent_of(id);
    }
    if (best_top_scope < cofinal_cap)
      rep.violations.push_back("path to " + frontier[i].value +
                               " has no top-labeled node of scope >= " +
                               std::to_string(cofinal_cap));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// DOT export: one graph per tree; nodes annotated "value|scope|label|kind",
// nodes still waiting double-circled, secondary edges dashed.

inline std::string export_dot(const LabeledTree& t, const std::string& name) {
  std::ostringstream os;
  os << "digraph \"" << name << "\" {\n";
  os << "  node [shape=ellipse, fontname=\"monospace\"];\n";
  for (int lv = 0; lv <= t.depth(); ++lv) {
    for (int i = 0; i < static_cast<int>(t.levels[lv].size()); ++i) {
      const auto& n = t.levels[lv][i];
      os << "  \"n" << lv << "_" << i << "\" [label=\"" << n.value << "|" << n.scope
         << "|" << format_label(n.label) << "|" << node_kind_name(n.kind) << "\"";
      if (n.ever_waiting && n.emitted_at < 0) os << ", peripheries=2";
      os << "];\n";
    }
  }
  for (int lv = 0; lv < t.depth(); ++lv) {
    for (int i = 0; i < static_cast<int>(t.levels[lv].size()); ++i) {
      for (int ci : t.levels[lv][i].children) {
        os << "  \"n" << lv << "_" << i << "\" -> \"n" << lv + 1 << "_" << ci << "\"";
        if (t.levels[lv + 1][ci].kind == NodeKind::Secondary) os << " [style=dashed]";
        os << ";\n";
      }
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace lowspeed
