#include "ldrate/tree_solver.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "ldrate/parallel.hpp"

namespace ldrate {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Weights = std::vector<std::vector<double>>;

// Minimum spanning arborescence out of `root`: weight[u][v] is the cost of
// the arc u -> v (u becomes the parent of v). Returns parent[] or nullopt if
// some vertex has no finite incoming arc after contraction.
std::optional<std::vector<std::size_t>> edmonds(const Weights& weight, std::size_t root) {
  const std::size_t n = weight.size();
  std::vector<std::size_t> parent(n, kNoParent);
  for (std::size_t v = 0; v < n; ++v) {
    if (v == root) continue;
    double best = kInf;
    for (std::size_t u = 0; u < n; ++u) {
      if (u != v && weight[u][v] < best) {
        best = weight[u][v];
        parent[v] = u;
      }
    }
    if (parent[v] == kNoParent) return std::nullopt;
  }

  // Look for a cycle in the chosen parent pointers.
  std::vector<int> state(n, 0);  // 0 unseen, 1 on current walk, 2 done
  std::vector<std::size_t> cycle;
  for (std::size_t start = 0; start < n && cycle.empty(); ++start) {
    std::vector<std::size_t> walk;
    std::size_t v = start;
    while (v != kNoParent && state[v] == 0) {
      state[v] = 1;
      walk.push_back(v);
      v = parent[v];
    }
    if (v != kNoParent && state[v] == 1) {
      auto it = std::find(walk.begin(), walk.end(), v);
      cycle.assign(it, walk.end());
    }
    for (std::size_t w : walk) state[w] = 2;
  }
  if (cycle.empty()) return parent;

  std::vector<bool> in_cycle(n, false);
  for (std::size_t v : cycle) in_cycle[v] = true;
  std::vector<std::size_t> id(n);
  std::size_t m = 0;
  for (std::size_t v = 0; v < n; ++v)
    if (!in_cycle[v]) id[v] = m++;
  const std::size_t super = m++;
  for (std::size_t v : cycle) id[v] = super;

  struct Origin {
    std::size_t from = kNoParent;
    std::size_t to = kNoParent;
  };
  Weights reduced(m, std::vector<double>(m, kInf));
  std::vector<std::vector<Origin>> origin(m, std::vector<Origin>(m));
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v || !std::isfinite(weight[u][v])) continue;
      const std::size_t x = id[u];
      const std::size_t y = id[v];
      if (x == y) continue;
      double w = weight[u][v];
      if (in_cycle[v]) w -= weight[parent[v]][v];
      if (w < reduced[x][y]) {
        reduced[x][y] = w;
        origin[x][y] = {u, v};
      }
    }
  }

  auto sub = edmonds(reduced, id[root]);
  if (!sub) return std::nullopt;

  std::vector<std::size_t> result(n, kNoParent);
  for (std::size_t v : cycle) result[v] = parent[v];
  for (std::size_t y = 0; y < m; ++y) {
    const std::size_t x = (*sub)[y];
    if (x == kNoParent) continue;
    const Origin& arc = origin[x][y];
    result[arc.to] = arc.from;
  }
  return result;
}

}  // namespace

bool InTree::is_valid() const {
  const std::size_t n = parent.size();
  if (root >= n || parent[root] != kNoParent) return false;
  for (std::size_t v = 0; v < n; ++v) {
    if (v == root) continue;
    std::size_t u = v;
    for (std::size_t steps = 0; u != root; ++steps) {
      if (steps >= n || parent[u] >= n || parent[u] == u) return false;
      u = parent[u];
    }
  }
  return true;
}

ExtCost tree_cost(const CostMatrix& costs, const InTree& tree) {
  ExtCost total;
  for (std::size_t v = 0; v < tree.parent.size(); ++v) {
    if (v == tree.root) continue;
    if (tree.parent[v] == kNoParent) return ExtCost::infinity();
    total = total + costs(v, tree.parent[v]);
  }
  return total;
}

TreeCost min_arborescence(const CostMatrix& costs, std::size_t root) {
  const std::size_t n = costs.size();
  if (root >= n) throw std::out_of_range("min_arborescence: root index");
  // In-tree edge v -> p with cost I(v, p) is the arborescence arc p -> v.
  Weights weight(n, std::vector<double>(n, kInf));
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t v = 0; v < n; ++v)
      if (p != v) weight[p][v] = costs(v, p).value();

  TreeCost out;
  out.tree.root = root;
  out.tree.parent.assign(n, kNoParent);
  auto parent = edmonds(weight, root);
  if (!parent) {
    out.total = ExtCost::infinity();
    return out;
  }
  out.tree.parent = std::move(*parent);
  out.total = tree_cost(costs, out.tree);
  return out;
}

std::vector<ExtCost> root_tree_costs(const CostMatrix& costs, unsigned threads) {
  std::vector<ExtCost> totals(costs.size());
  parallel_for(costs.size(), threads,
               [&](std::size_t a) { totals[a] = min_arborescence(costs, a).total; });
  return totals;
}

StationaryRates stationary_rates(const CostMatrix& costs, unsigned threads) {
  if (costs.size() == 0) throw std::invalid_argument("stationary_rates: empty attractor set");
  const auto totals = root_tree_costs(costs, threads);
  const ExtCost lowest = *std::min_element(totals.begin(), totals.end());
  if (!lowest.is_finite()) {
    throw std::domain_error("stationary_rates: no root is reachable from every attractor");
  }
  std::vector<ExtCost> rates;
  rates.reserve(totals.size());
  for (const ExtCost& t : totals) {
    rates.push_back(t.is_finite() ? ExtCost(t.value() - lowest.value()) : ExtCost::infinity());
  }
  return make_rates(costs.labels(), std::move(rates));
}

}  // namespace ldrate
