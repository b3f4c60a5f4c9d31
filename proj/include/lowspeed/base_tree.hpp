#pragma once

// The structural base tree of block-coded bit-strings.
//
// A member string consists of consecutive constant blocks: block i (1-based)
// spans 2^(i-1) positions, so block boundaries fall at lengths 2^k - 1.  A
// string of length n therefore touches about log2(n) blocks and there are at
// most 2(n+1) members of length n: the tree is exponentially thin, which is
// what makes whole-tree scans affordable.
//
// For the labeled-tree machinery the base tree's nodes are the boundary
// strings, one level per completed block, every label top, scope = block
// count.  Arbitrary member strings still count as "on the tree" for
// membership and simulation purposes; they sit part-way along an edge.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lowspeed/labeled_tree.hpp"

namespace lowspeed {

// Boundary length of a k-block string: 2^k - 1.
inline std::int64_t boundary_length(int blocks) {
  if (blocks < 0) throw std::invalid_argument("boundary_length: negative block count");
  return (std::int64_t{1} << blocks) - 1;
}

inline bool is_boundary_length(std::int64_t n) {
  return (n & (n + 1)) == 0;  // n = 2^k - 1
}

// Number of blocks a string of length n touches (the last may be partial).
inline int blocks_touched(std::int64_t n) {
  int k = 0;
  while (boundary_length(k) < n) ++k;
  return k;
}

// Least block level whose boundary length covers strings of length <= n.
inline int boundary_level_covering(std::int64_t n) { return blocks_touched(n); }

// Membership scan.  Inspections (symbol reads) are tallied into *cost when
// given; the scan is one pass, so inspections stay linear in |sigma|.
inline bool base_contains(const std::string& sigma, std::int64_t* cost = nullptr) {
  std::int64_t pos = 0;
  std::int64_t block_len = 1;
  std::int64_t n = static_cast<std::int64_t>(sigma.size());
  while (pos < n) {
    char bit = sigma[pos];
    if (cost) ++*cost;
    if (bit != '0' && bit != '1') return false;
    std::int64_t end = std::min(pos + block_len, n);
    for (std::int64_t j = pos + 1; j < end; ++j) {
      if (cost) ++*cost;
      if (sigma[j] != bit) return false;
    }
    pos = end;
    block_len *= 2;
  }
  return true;
}

// The two one-block completions of a boundary string.
inline std::vector<std::string> structural_children(const std::string& sigma) {
  if (!base_contains(sigma))
    throw std::invalid_argument("structural_children: not a member string");
  if (!is_boundary_length(static_cast<std::int64_t>(sigma.size())))
    throw std::invalid_argument("structural_children: not at a block boundary");
  int k = blocks_touched(static_cast<std::int64_t>(sigma.size()));
  std::int64_t blk = std::int64_t{1} << k;  // next block length = 2^k
  std::vector<std::string> out;
  out.reserve(2);
  for (char bit : {'0', '1'}) out.push_back(sigma + std::string(blk, bit));
  return out;
}

// All members of a given length, in lexicographic order.  The i-th block bit
// is the i-th most significant bit of the enumeration counter, which yields
// lexicographic order directly since earlier blocks occupy earlier positions.
inline std::vector<std::string> members_of_length(std::int64_t n) {
  if (n < 0) throw std::invalid_argument("members_of_length: negative length");
  if (n == 0) return {""};
  int k = blocks_touched(n);
  std::vector<std::string> out;
  out.reserve(std::size_t{1} << k);
  for (std::uint64_t combo = 0; combo < (std::uint64_t{1} << k); ++combo) {
    std::string s;
    s.reserve(n);
    for (int b = 1; b <= k && static_cast<std::int64_t>(s.size()) < n; ++b) {
      char bit = ((combo >> (k - b)) & 1) ? '1' : '0';
      std::int64_t blk = std::int64_t{1} << (b - 1);
      std::int64_t take = std::min(blk, n - static_cast<std::int64_t>(s.size()));
      s.append(take, bit);
    }
    out.push_back(std::move(s));
  }
  return out;
}

// Grows a base tree to the requested block depth.  Levels carry stage 0:
// the base tree is static and every cut of it is fully available.
inline void ensure_base_depth(LabeledTree& base, int depth) {
  if (!base.base_extendable)
    throw std::invalid_argument("ensure_base_depth: not a base tree");
  while (base.depth() < depth) {
    int lv = base.depth();
    std::vector<LabeledTree::ChildSpec> children;
    children.reserve(base.levels[lv].size() * 2);
    for (int i = 0; i < static_cast<int>(base.levels[lv].size()); ++i) {
      for (auto& v : structural_children(base.levels[lv][i].value)) {
        LabeledTree::ChildSpec c;
        c.parent = i;
        c.scope = static_cast<int>(v.size());
        c.value = std::move(v);
        c.label = Label::Top();
        c.kind = NodeKind::Main;
        children.push_back(std::move(c));
      }
    }
    base.emit_level(std::move(children), 0);
  }
}

// The base tree as an admissible labeled tree: boundary nodes, all labels
// top, scope = string length, materialized to the given depth (extendable on
// demand afterwards).
inline LabeledTree as_admissible_root(int depth) {
  if (depth < 0) throw std::invalid_argument("as_admissible_root: negative depth");
  LabeledTree t;
  t.base_extendable = true;
  t.provenance = "base";
  t.set_root("", 0, Label::Top());
  ensure_base_depth(t, depth);
  return t;
}

}  // namespace lowspeed
