#pragma once

// Per-attractor stationary rates from minimal in-trees.
//
// For a root a, an in-tree on the attractor set sends every other vertex along
// a unique directed path to a. Its cost is the sum of I(child, parent) over its
// edges. The stationary rate is the minimal in-tree cost rooted at a minus the
// smallest such cost over all roots.

#include <cstddef>
#include <limits>
#include <vector>

#include "ldrate/maxplus.hpp"

namespace ldrate {

inline constexpr std::size_t kNoParent = std::numeric_limits<std::size_t>::max();

/// parent[v] is the next vertex on the path from v to the root;
/// parent[root] == kNoParent.
struct InTree {
  std::size_t root = 0;
  std::vector<std::size_t> parent;

  /// Exactly |A|-1 edges and every vertex reaches the root.
  [[nodiscard]] bool is_valid() const;
  friend bool operator==(const InTree&, const InTree&) = default;
};

/// Sum of I(v, parent[v]) over the edges of `tree`.
ExtCost tree_cost(const CostMatrix& costs, const InTree& tree);

struct TreeCost {
  InTree tree;
  /// When infinite, the tree is incomplete: vertices that cannot reach the
  /// root through finite edges keep kNoParent.
  ExtCost total;
};

/// Minimal in-tree rooted at `root` by Chu-Liu/Edmonds contraction on the
/// edge-reversed graph. Infinite edges are dropped; if some vertex cannot
/// reach the root the total is +inf.
TreeCost min_arborescence(const CostMatrix& costs, std::size_t root);

/// Minimal in-tree totals for every root, in label order.
std::vector<ExtCost> root_tree_costs(const CostMatrix& costs, unsigned threads = 1);

/// rates(a) = minArb(a) - min_a' minArb(a'). Expects a closed cost matrix.
/// Throws std::domain_error if every root is unreachable.
StationaryRates stationary_rates(const CostMatrix& costs, unsigned threads = 1);

}  // namespace ldrate
