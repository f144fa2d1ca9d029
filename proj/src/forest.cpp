#include "mousepose/forest.hpp"

#include <algorithm>

namespace mousepose {

int treeDepth(const Tree& tree, std::int32_t node) {
  const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
  if (n.isLeaf()) return 0;
  return 1 + std::max(treeDepth(tree, n.left), treeDepth(tree, n.right));
}

int reachableNodeCount(const Tree& tree) {
  int count = 0;
  auto walk = [&](auto&& self, std::int32_t node) -> void {
    ++count;
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    if (!n.isLeaf()) {
      self(self, n.left);
      self(self, n.right);
    }
  };
  walk(walk, tree.root);
  return count;
}

}  // namespace mousepose
