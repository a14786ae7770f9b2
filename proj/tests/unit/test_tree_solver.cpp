#include <doctest.h>

#include <limits>
#include <vector>

#include "generators.hpp"
#include "in_tree_oracle.hpp"
#include "ldrate/maxplus.hpp"
#include "ldrate/tree_solver.hpp"

using namespace ldrate;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// I(1,2)=1, I(1,3)=4, I(2,1)=2, I(2,3)=1, I(3,1)=3, I(3,2)=2
CostMatrix worked() { return CostMatrix::from_values({{0, 1, 4}, {2, 0, 1}, {3, 2, 0}}); }

InTree tree(std::size_t root, std::vector<std::size_t> parent) { return {root, std::move(parent)}; }

}  // namespace

TEST_CASE("enumeration of small in-trees") {
  const auto one = oracle::enumerate_in_trees(1, 0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].parent == std::vector<std::size_t>{kNoParent});

  const auto two = oracle::enumerate_in_trees(2, 0);
  REQUIRE(two.size() == 1);
  CHECK(two[0].parent == std::vector<std::size_t>{kNoParent, 0});

  // Root 1 on {1,2,3}: {2->1,3->1}, {2->1,3->2}, {3->1,2->3}.
  const auto three = oracle::enumerate_in_trees(3, 0);
  REQUIRE(three.size() == 3);
  CHECK(three[0] == tree(0, {kNoParent, 0, 0}));
  CHECK(three[1] == tree(0, {kNoParent, 0, 1}));
  CHECK(three[2] == tree(0, {kNoParent, 2, 0}));
  for (const auto& t : three) CHECK(t.is_valid());

  CHECK_THROWS_AS(oracle::enumerate_in_trees(8, 0), std::domain_error);
}

TEST_CASE("enumerated trees number n^(n-2) for each root") {
  const std::size_t expected[] = {1, 1, 1, 3, 16, 125, 1296};
  for (std::size_t n = 1; n <= 6; ++n) {
    for (std::size_t root = 0; root < n; ++root) {
      const auto trees = oracle::enumerate_in_trees(n, root);
      CHECK(trees.size() == expected[n]);
      for (const auto& t : trees) CHECK(t.is_valid());
    }
  }
}

TEST_CASE("in-tree validity rejects cycles and wrong roots") {
  CHECK_FALSE(tree(0, {kNoParent, 2, 1}).is_valid());
  CHECK_FALSE(tree(0, {1, 0, 0}).is_valid());
  CHECK(tree(2, {2, 0, kNoParent}).is_valid());
}

TEST_CASE("worked matrix: root totals and rates") {
  const auto m = worked();
  CHECK(oracle::min_in_tree_cost_bruteforce(m, 0).total == ExtCost(4.0));
  CHECK(oracle::min_in_tree_cost_bruteforce(m, 1).total == ExtCost(3.0));
  CHECK(oracle::min_in_tree_cost_bruteforce(m, 2).total == ExtCost(2.0));

  const auto totals = root_tree_costs(m);
  CHECK(totals == std::vector<ExtCost>{ExtCost(4.0), ExtCost(3.0), ExtCost(2.0)});
  const auto arb = min_arborescence(m, 2);
  CHECK(arb.total == ExtCost(2.0));
  CHECK(arb.tree.is_valid());
  CHECK(tree_cost(m, arb.tree) == arb.total);

  const auto rates = stationary_rates(m);
  CHECK(rates.rates == std::vector<ExtCost>{ExtCost(2.0), ExtCost(1.0), ExtCost(0.0)});
}

TEST_CASE("trivial attractor sets") {
  const auto single = stationary_rates(CostMatrix({"a"}));
  CHECK(single.rates == std::vector<ExtCost>{ExtCost(0.0)});

  const auto sym = CostMatrix::from_values({{0, 1.75}, {1.75, 0}});
  CHECK(min_arborescence(sym, 0).total == ExtCost(1.75));
  CHECK(min_arborescence(sym, 1).total == ExtCost(1.75));
  CHECK(stationary_rates(sym).rates == std::vector<ExtCost>{ExtCost(0.0), ExtCost(0.0)});
}

TEST_CASE("a vertex that cannot leave makes other roots unreachable") {
  // Vertex 3 has no finite exit, so only root 3 has a finite in-tree.
  const auto m = CostMatrix::from_values({{0, 1, 2}, {1, 0, 2}, {kInf, kInf, 0}});
  const auto arb = min_arborescence(m, 0);
  CHECK(arb.total == ExtCost::infinity());
  CHECK(arb.tree.parent[2] == kNoParent);
  CHECK(min_arborescence(m, 2).total == ExtCost(3.0));
  const auto rates = stationary_rates(m);
  CHECK(rates.rates[2] == ExtCost(0.0));
  CHECK(rates.rates[0] == ExtCost::infinity());
}

TEST_CASE("all roots unreachable is an error") {
  CHECK_THROWS_AS(stationary_rates(CostMatrix({"1", "2", "3"})), std::domain_error);
}

TEST_CASE("contraction solver matches exhaustive enumeration") {
  gen::Engine rng(31337);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = gen::index(rng, 2, 7);
    const double inf_p = trial % 3 == 0 ? 0.0 : gen::uniform(rng, 0.0, 0.6);
    const CostMatrix m = gen::cost_matrix(rng, n, inf_p);
    for (std::size_t root = 0; root < n; ++root) {
      const auto fast = min_arborescence(m, root);
      const auto slow = oracle::min_in_tree_cost_bruteforce(m, root);
      REQUIRE(fast.total.is_finite() == slow.total.is_finite());
      if (!fast.total.is_finite()) continue;
      CHECK(fast.tree.is_valid());
      CHECK(tree_cost(m, fast.tree) == fast.total);
      CHECK(std::abs(fast.total.value() - slow.total.value()) <= 1e-12);
    }
  }
}

TEST_CASE("integer costs make ties exact and totals equal") {
  gen::Engine rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = gen::index(rng, 2, 6);
    CostMatrix m(gen::labels(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) m.set(i, j, ExtCost(static_cast<double>(gen::index(rng, 0, 3))));
    for (std::size_t root = 0; root < n; ++root) {
      CHECK(min_arborescence(m, root).total == oracle::min_in_tree_cost_bruteforce(m, root).total);
    }
  }
}

TEST_CASE("a uniform shift of all costs shifts every root total by (n-1) times it") {
  gen::Engine rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = gen::index(rng, 2, 6);
    const CostMatrix m = gen::cost_matrix(rng, n);
    const double kappa = gen::uniform(rng, 0.0, 3.0);
    CostMatrix shifted(gen::labels(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) shifted.set(i, j, ExtCost(m(i, j).value() + kappa));
    const auto base = root_tree_costs(m);
    const auto moved = root_tree_costs(shifted);
    for (std::size_t r = 0; r < n; ++r) {
      CHECK(moved[r].value() == doctest::Approx(base[r].value() + kappa * static_cast<double>(n - 1)).epsilon(1e-12));
    }
    const auto ra = stationary_rates(m);
    const auto rb = stationary_rates(shifted);
    for (std::size_t r = 0; r < n; ++r) CHECK(std::abs(ra.rates[r].value() - rb.rates[r].value()) <= 1e-9);
  }
}

TEST_CASE("tree rates balance every partition of a closed matrix") {
  gen::Engine rng(4242);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = gen::index(rng, 2, 7);
    const CostMatrix m = shortest_path_closure(gen::reachable_cost_matrix(rng, n, 0.3));
    const auto rates = stationary_rates(m);
    double lowest = kInf;
    for (const auto& r : rates.rates) lowest = std::min(lowest, r.value());
    CHECK(lowest == 0.0);
    CHECK(max_balance_residual(rates, m) <= 1e-9);
  }
}

TEST_CASE("perturbed rates break balance somewhere") {
  gen::Engine rng(5150);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = gen::index(rng, 2, 6);
    const CostMatrix m = shortest_path_closure(gen::cost_matrix(rng, n));
    const auto rates = stationary_rates(m);
    std::vector<double> r;
    for (const auto& x : rates.rates) r.push_back(x.value());
    const std::size_t k = gen::index(rng, 0, n - 1);
    r[k] += (gen::index(rng, 0, 1) == 0 ? 1.0 : -1.0) * gen::uniform(rng, 1e-3, 1.0);
    const double lowest = *std::min_element(r.begin(), r.end());
    std::vector<ExtCost> shifted;
    for (double x : r) shifted.push_back(ExtCost(x - lowest));
    // The perturbation must survive renormalization.
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(shifted[i].value() - rates.rates[i].value()));
    if (moved < 1e-3) continue;
    CHECK(max_balance_residual(make_rates(gen::labels(n), shifted), m) > 1e-4);
  }
}

TEST_CASE("per-root solves are independent of the thread count") {
  gen::Engine rng(12);
  const CostMatrix m = gen::cost_matrix(rng, 7, 0.2);
  CHECK(root_tree_costs(m, 1) == root_tree_costs(m, 4));
}
