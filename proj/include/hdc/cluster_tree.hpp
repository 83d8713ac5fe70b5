#ifndef HDC_CLUSTER_TREE_HPP
#define HDC_CLUSTER_TREE_HPP

#include <vector>

#include "hdc/common.hpp"

namespace hdc {

/// Node of a postordered binary cluster tree over [0, n). Children always
/// carry smaller indices than their parent.
struct ClusterNode {
  Index begin = 0;
  Index end = 0;  // half-open
  Index left = -1;
  Index right = -1;
  Index parent = -1;
  Index level = 0;  // root = 0, children one deeper

  Index span() const { return end - begin; }
  bool is_leaf() const { return left < 0; }
};

struct ClusterTree {
  std::vector<ClusterNode> nodes;  // postordered
  Index n = 0;
  Index leaf_size = 0;

  Index size() const { return static_cast<Index>(nodes.size()); }
  Index root() const { return size() - 1; }
  Index num_levels() const {
    Index d = 0;
    for (const auto& nd : nodes) d = std::max(d, nd.level);
    return d + 1;
  }

  /// Node indices grouped by level, deepest group first (so iterating the
  /// groups visits all children before any parent). The last group is the
  /// root alone.
  std::vector<std::vector<Index>> levels_bottom_up() const {
    std::vector<std::vector<Index>> groups(num_levels());
    for (Index i = 0; i < size(); ++i) groups[nodes[i].level].push_back(i);
    std::vector<std::vector<Index>> out(groups.rbegin(), groups.rend());
    return out;
  }

  void validate() const {
    if (nodes.empty()) throw InvalidParameter("cluster tree: empty");
    if (nodes.back().begin != 0 || nodes.back().end != n)
      throw InvalidParameter("cluster tree: root does not cover [0, n)");
    for (Index i = 0; i < size(); ++i) {
      const auto& nd = nodes[i];
      if (nd.begin >= nd.end) throw InvalidParameter("cluster tree: empty node span");
      if (nd.is_leaf()) continue;
      if (!(nd.left < nd.right && nd.right < i))
        throw InvalidParameter("cluster tree: postorder violated");
      const auto& l = nodes[nd.left];
      const auto& r = nodes[nd.right];
      if (l.begin != nd.begin || l.end != r.begin || r.end != nd.end)
        throw InvalidParameter("cluster tree: children do not partition parent");
    }
  }
};

/// Balanced recursive bisection: split at ceil(span/2) until span fits in
/// leaf_size; postordered numbering.
inline ClusterTree build_cluster_tree(Index n, Index leaf_size) {
  if (n < 1) throw InvalidDimension("cluster tree: n must be positive");
  if (leaf_size < 1) throw InvalidParameter("cluster tree: leaf_size must be positive");
  ClusterTree tree;
  tree.n = n;
  tree.leaf_size = leaf_size;

  struct Builder {
    std::vector<ClusterNode>& nodes;
    Index leaf_size;
    Index build(Index begin, Index end) {
      const Index span = end - begin;
      if (span <= leaf_size) {
        nodes.push_back({begin, end, -1, -1, -1, 0});
        return static_cast<Index>(nodes.size()) - 1;
      }
      const Index mid = begin + (span + 1) / 2;
      const Index l = build(begin, mid);
      const Index r = build(mid, end);
      nodes.push_back({begin, end, l, r, -1, 0});
      const Index me = static_cast<Index>(nodes.size()) - 1;
      nodes[l].parent = me;
      nodes[r].parent = me;
      return me;
    }
  } builder{tree.nodes, leaf_size};
  builder.build(0, n);

  // levels: walk from root down (reverse postorder visits parents first)
  for (Index i = tree.size() - 1; i >= 0; --i) {
    auto& nd = tree.nodes[i];
    nd.level = (nd.parent < 0) ? 0 : tree.nodes[nd.parent].level + 1;
  }
  return tree;
}

}  // namespace hdc

#endif  // HDC_CLUSTER_TREE_HPP
