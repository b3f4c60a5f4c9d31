#pragma once

// Bounded invariant checks over built trees: the structural promises the
// construction makes, phrased so a finite prefix can witness them.  Each
// check emits pass/fail lines; vacuous instances say so instead of passing
// silently.

#include <cstdint>
#include <string>
#include <vector>

#include "lowspeed/functionals.hpp"
#include "lowspeed/labeled_tree.hpp"
#include "lowspeed/labels.hpp"

namespace lowspeed {

struct CheckLine {
  std::string category;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CheckSuite {
  std::vector<CheckLine> lines;

  void add(std::string category, std::string name, bool pass, std::string detail) {
    lines.push_back(CheckLine{std::move(category), std::move(name), pass, std::move(detail)});
  }
  void merge(const CheckSuite& o) {
    lines.insert(lines.end(), o.lines.begin(), o.lines.end());
  }
  bool ok() const {
    for (const auto& l : lines)
      if (!l.pass) return false;
    return true;
  }
  int failures() const {
    int n = 0;
    for (const auto& l : lines)
      if (!l.pass) ++n;
    return n;
  }
};

// Every node at a built expansionary level e_{n+1} has a weak ancestor where
// the scope jumped to at least n (the root counts as the first jump).
inline CheckSuite check_expansionary_ancestors(const LabeledTree& t, const Schedule& sched,
                                               const std::string& tag) {
  CheckSuite out;
  bool any = false;
  for (int n = 1;; ++n) {
    std::int64_t lvl = sched.expansionary_level(n + 1);
    if (lvl > t.depth()) break;
    any = true;
    int bad = 0;
    std::string first;
    for (int i = 0; i < static_cast<int>(t.levels[static_cast<std::size_t>(lvl)].size()); ++i) {
      NodeId cur{static_cast<int>(lvl), i};
      bool found = false;
      while (true) {
        const LabeledNode& nd = t.node(cur);
        bool jump = cur.level == 0 || nd.scope > t.node(t.parent_of(cur)).scope;
        if (jump && nd.scope >= n) {
          found = true;
          break;
        }
        if (cur.level == 0) break;
        cur = t.parent_of(cur);
      }
      if (!found && bad++ == 0) first = t.node(NodeId{static_cast<int>(lvl), i}).value;
    }
    out.add("procedure", tag + ":expansionary-ancestor[" + std::to_string(n) + "]", bad == 0,
            bad == 0 ? "all nodes at level " + std::to_string(lvl) + " have a rank-" +
                           std::to_string(n) + " jump ancestor"
                     : std::to_string(bad) + " nodes lack one, first \"" + first + "\"");
  }
  if (!any)
    out.add("procedure", tag + ":expansionary-ancestor", true,
            "vacuous: no expansionary level beyond the root is built");
  return out;
}

// Level-to-level dichotomy: all main children of one level pairwise split by
// the final stage, and every secondary child keeps its parent's scope with a
// strictly smaller label.
inline CheckSuite check_splits_or_down(const LabeledTree& t, const FunctionalTable& phi,
                                       std::int64_t stage, const std::string& tag) {
  CheckSuite out;
  std::int64_t pairs = 0;
  int bad_pairs = 0, bad_secondary = 0;
  std::string first_pair, first_secondary;
  for (int lv = 1; lv <= t.depth(); ++lv) {
    const auto& row = t.levels[static_cast<std::size_t>(lv)];
    std::vector<const LabeledNode*> mains;
    for (const auto& n : row) {
      if (n.kind == NodeKind::Main) {
        mains.push_back(&n);
        continue;
      }
      const LabeledNode& p = t.node(t.parent_of(NodeId{lv, static_cast<int>(&n - row.data())}));
      if (n.scope != p.scope || label_cmp(n.label, p.label) >= 0) {
        if (bad_secondary++ == 0) first_secondary = n.value;
      }
    }
    for (std::size_t i = 0; i < mains.size(); ++i)
      for (std::size_t j = i + 1; j < mains.size(); ++j) {
        ++pairs;
        if (!phi.least_esplit(mains[i]->value, mains[j]->value, stage)) {
          if (bad_pairs++ == 0)
            first_pair = "\"" + mains[i]->value + "\" vs \"" + mains[j]->value + "\"";
        }
      }
  }
  out.add("procedure", tag + ":mains-split", bad_pairs == 0,
          bad_pairs == 0
              ? std::to_string(pairs) + " same-level main pairs split"
              : std::to_string(bad_pairs) + " pairs fail, first " + first_pair);
  out.add("procedure", tag + ":secondaries-down", bad_secondary == 0,
          bad_secondary == 0
              ? "every secondary keeps scope and drops label"
              : std::to_string(bad_secondary) + " secondaries fail, first \"" +
                    first_secondary + "\"");
  return out;
}

namespace detail {

// Frontier descendants per node, bottom-up.
inline std::vector<std::vector<std::vector<NodeId>>> frontier_index(const LabeledTree& t) {
  int d = t.depth();
  std::vector<std::vector<std::vector<NodeId>>> idx(static_cast<std::size_t>(d) + 1);
  for (int lv = d; lv >= 0; --lv) {
    idx[static_cast<std::size_t>(lv)].resize(t.levels[static_cast<std::size_t>(lv)].size());
    for (int i = 0; i < static_cast<int>(t.levels[static_cast<std::size_t>(lv)].size()); ++i) {
      auto& slot = idx[static_cast<std::size_t>(lv)][static_cast<std::size_t>(i)];
      if (lv == d) {
        slot.push_back(NodeId{lv, i});
        continue;
      }
      for (int ci : t.levels[static_cast<std::size_t>(lv)][static_cast<std::size_t>(i)].children) {
        auto& sub = idx[static_cast<std::size_t>(lv) + 1][static_cast<std::size_t>(ci)];
        slot.insert(slot.end(), sub.begin(), sub.end());
      }
    }
  }
  return idx;
}

}  // namespace detail

// Branch splitting: frontier nodes whose branches part ways at two main
// children split by the final stage (secondary partings promise nothing
// pointwise).  Also the expansionary-span form: distinct nodes at level e_n
// with extensions at e_{n+1} split, when two such levels are built.
inline CheckSuite check_branch_splitting(const LabeledTree& t, const FunctionalTable& phi,
                                         std::int64_t stage, const Schedule& sched,
                                         const std::string& tag) {
  CheckSuite out;
  auto idx = detail::frontier_index(t);
  std::int64_t pairs = 0;
  int bad = 0;
  std::string first;
  for (int lv = 0; lv < t.depth(); ++lv) {
    const auto& row = t.levels[static_cast<std::size_t>(lv)];
    for (const auto& nd : row) {
      for (std::size_t a = 0; a < nd.children.size(); ++a)
        for (std::size_t b = a + 1; b < nd.children.size(); ++b) {
          NodeId ca{lv + 1, nd.children[a]}, cb{lv + 1, nd.children[b]};
          if (t.node(ca).kind != NodeKind::Main || t.node(cb).kind != NodeKind::Main) continue;
          for (NodeId fa : idx[static_cast<std::size_t>(lv) + 1][static_cast<std::size_t>(ca.index)])
            for (NodeId fb : idx[static_cast<std::size_t>(lv) + 1][static_cast<std::size_t>(cb.index)]) {
              ++pairs;
              if (!phi.least_esplit(t.node(fa).value, t.node(fb).value, stage)) {
                if (bad++ == 0)
                  first = "\"" + t.node(fa).value + "\" vs \"" + t.node(fb).value + "\"";
              }
            }
        }
    }
  }
  out.add("procedure", tag + ":branches-split", bad == 0,
          bad == 0 ? std::to_string(pairs) + " main-parting frontier pairs split"
                   : std::to_string(bad) + " pairs fail, first " + first);

  // Expansionary-span form.
  bool spanned = false;
  for (int n = 1;; ++n) {
    std::int64_t lo = sched.expansionary_level(n), hi = sched.expansionary_level(n + 1);
    if (hi > t.depth()) break;
    if (t.levels[static_cast<std::size_t>(lo)].size() < 2) continue;
    spanned = true;
    int span_bad = 0;
    std::int64_t span_pairs = 0;
    const auto& top = t.levels[static_cast<std::size_t>(hi)];
    for (std::size_t i = 0; i < top.size(); ++i)
      for (std::size_t j = i + 1; j < top.size(); ++j) {
        // Ancestors at level lo must differ.
        NodeId ai{static_cast<int>(hi), static_cast<int>(i)};
        NodeId aj{static_cast<int>(hi), static_cast<int>(j)};
        while (ai.level > lo) ai = t.parent_of(ai);
        while (aj.level > lo) aj = t.parent_of(aj);
        if (ai == aj) continue;
        ++span_pairs;
        if (!phi.least_esplit(top[i].value, top[j].value, stage)) ++span_bad;
      }
    out.add("procedure", tag + ":expansionary-span[" + std::to_string(n) + "]", span_bad == 0,
            span_bad == 0 ? std::to_string(span_pairs) + " spanning pairs split"
                          : std::to_string(span_bad) + " spanning pairs fail");
  }
  if (!spanned)
    out.add("procedure", tag + ":expansionary-span", true,
            "vacuous: no two expansionary levels with distinct nodes are built");
  return out;
}

// Label projection onto the host: inside the view above a node whose host
// label is top, everything the tree keeps above a word eta stays above the
// word i+eta on the host; the weak form holds without the top hypothesis.
inline CheckSuite check_label_projection(const LabeledTree& t, const LabeledTree& host,
                                         const std::string& tag) {
  CheckSuite out;
  // Words of length <= 2 over {i, f}, smallest universe covering desk labels.
  std::vector<Label> etas{Label::Empty()};
  for (std::string w : {"i", "f", "ii", "if", "fi", "ff"}) etas.push_back(Label::Word(w));

  std::int64_t checked_strict = 0, checked_weak = 0;
  int bad_strict = 0, bad_weak = 0;
  std::string first_strict, first_weak;

  // Host chain test: every host node strictly between sigma and target passes
  // pred, and so does the target itself.
  auto host_above = [&](NodeId hsig, NodeId htgt, const ViewPred& pred) {
    while (htgt.level > hsig.level) {
      if (!pred.admits(host.node(htgt))) return false;
      htgt = host.parent_of(htgt);
    }
    return htgt == hsig;
  };

  for (int lv = 0; lv <= t.depth(); ++lv) {
    for (int i = 0; i < static_cast<int>(t.levels[static_cast<std::size_t>(lv)].size()); ++i) {
      NodeId sig{lv, i};
      auto hsig = host.find(t.node(sig).value);
      if (!hsig) continue;  // not a host node; nothing to project
      bool host_top = host.node(*hsig).label.top;
      for (const Label& eta : etas) {
        Label ieta = eta.top ? eta : Label::Word(std::string(1, kInf) + eta.word);
        // Walk the weak view above sig; strict membership (whole path above
        // eta, not just at eta) rides along as a flag.
        std::vector<std::pair<NodeId, bool>> frontier{{sig, true}};
        for (int d = lv; d < t.depth() && !frontier.empty(); ++d) {
          std::vector<std::pair<NodeId, bool>> next;
          for (auto [id, strict] : frontier)
            for (int ci : t.node(id).children) {
              NodeId cid{id.level + 1, ci};
              const Label& cl = t.node(cid).label;
              int cmp = label_cmp(cl, eta);
              if (cmp < 0) continue;
              auto htgt = host.find(t.node(cid).value);
              bool child_strict = strict && cmp > 0;
              if (host_top && child_strict) {
                ++checked_strict;
                if (!htgt || !host_above(*hsig, *htgt, ViewPred::label_gt(ieta))) {
                  if (bad_strict++ == 0)
                    first_strict = "\"" + t.node(cid).value + "\" above \"" +
                                   t.node(sig).value + "\" eta=" + format_label(eta);
                }
              }
              ++checked_weak;
              if (!htgt || !host_above(*hsig, *htgt, ViewPred::label_ge(ieta))) {
                if (bad_weak++ == 0)
                  first_weak = "\"" + t.node(cid).value + "\" above \"" +
                               t.node(sig).value + "\" eta=" + format_label(eta);
              }
              next.emplace_back(cid, child_strict);
            }
          frontier = std::move(next);
        }
      }
    }
  }
  out.add("procedure", tag + ":labels-project-strict", bad_strict == 0,
          bad_strict == 0
              ? std::to_string(checked_strict) + " strict view nodes project"
              : std::to_string(bad_strict) + " fail, first " + first_strict);
  out.add("procedure", tag + ":labels-project-weak", bad_weak == 0,
          bad_weak == 0 ? std::to_string(checked_weak) + " weak view nodes project"
                        : std::to_string(bad_weak) + " fail, first " + first_weak);
  return out;
}

// Admissibility wrapper producing a check line.
inline CheckSuite check_admissible_line(const LabeledTree& t, int through_depth, int cofinal_cap,
                                        const std::string& tag) {
  CheckSuite out;
  auto rep = check_admissible(t, through_depth, cofinal_cap);
  std::string detail;
  for (std::size_t i = 0; i < rep.violations.size() && i < 3; ++i)
    detail += (i ? "; " : "") + rep.violations[i];
  out.add("trees", tag + ":admissible", rep.violations.empty(),
          rep.violations.empty()
              ? "through depth " + std::to_string(through_depth) + ", cofinal cap " +
                    std::to_string(cofinal_cap)
              : detail);
  return out;
}

}  // namespace lowspeed
