#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "rowsplit/sparse.hpp"

namespace rowsplit::detail {

/// Non-recursive depth-first search from `seeds` through the graph described by
/// `children(node) -> std::span<const Index>`. Nodes whose mark equals `stamp`
/// are treated as visited. Appends the reached nodes to `out` in topological
/// order (every node precedes its children).
template <class Children>
void depth_first_reach(std::span<const Index> seeds, Children&& children,
                       std::vector<unsigned>& mark, unsigned stamp, std::vector<Index>& out) {
  std::vector<std::pair<Index, std::size_t>> stack;
  std::vector<Index> postorder;
  for (Index seed : seeds) {
    if (mark[seed] == stamp) continue;
    mark[seed] = stamp;
    stack.emplace_back(seed, 0);
    while (!stack.empty()) {
      auto& [node, pos] = stack.back();
      const std::span<const Index> next = children(node);
      while (pos < next.size() && mark[next[pos]] == stamp) ++pos;
      if (pos < next.size()) {
        const Index child = next[pos++];
        mark[child] = stamp;
        stack.emplace_back(child, 0);
      } else {
        postorder.push_back(node);
        stack.pop_back();
      }
    }
  }
  out.insert(out.end(), postorder.rbegin(), postorder.rend());
}

/// Bumps a generation counter used to invalidate marks without clearing them.
inline unsigned next_stamp(std::vector<unsigned>& mark, unsigned stamp) {
  if (++stamp == 0) {
    std::fill(mark.begin(), mark.end(), 0u);
    stamp = 1;
  }
  return stamp;
}

}  // namespace rowsplit::detail
