#pragma once

// Min-plus (cost form) algebra over a finite attractor set.
//
// A deviability density Pi relates to a cost by I = -ln Pi, so products of
// deviabilities become sums of costs and suprema become minima. All routines
// here work with costs; +infinity stands for Pi = 0 (unreachable).

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ldrate {

/// Nonnegative extended real: a finite cost or +infinity.
///
/// Infinity is stored as IEEE +inf, which is exact and absorbing under
/// addition. Negative and NaN values are rejected at construction.
class ExtCost {
 public:
  constexpr ExtCost() = default;
  explicit ExtCost(double value);

  static ExtCost infinity();

  [[nodiscard]] bool is_finite() const;
  /// The cost as a double; +inf when infinite.
  [[nodiscard]] double value() const { return value_; }

  friend ExtCost operator+(ExtCost a, ExtCost b);
  friend bool operator==(ExtCost a, ExtCost b) { return a.value() == b.value(); }
  friend std::partial_ordering operator<=>(ExtCost a, ExtCost b) {
    return a.value() <=> b.value();
  }

 private:
  double value_ = 0.0;
};

ExtCost min(ExtCost a, ExtCost b);

/// Pairwise quasipotentials I(a_i, a_j) on a labelled attractor set.
class CostMatrix {
 public:
  CostMatrix() = default;
  /// Every entry starts at +inf except the zero diagonal.
  explicit CostMatrix(std::vector<std::string> labels);
  /// Throws std::invalid_argument on shape mismatch or a nonzero diagonal.
  CostMatrix(std::vector<std::string> labels, std::vector<std::vector<ExtCost>> entries);

  /// Convenience for tests and literal instances; +inf entries are allowed.
  static CostMatrix from_values(const std::vector<std::vector<double>>& values);

  [[nodiscard]] std::size_t size() const { return labels_.size(); }
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }

  [[nodiscard]] ExtCost operator()(std::size_t from, std::size_t to) const {
    return entries_[from * labels_.size() + to];
  }
  /// Off-diagonal assignment. Diagonal entries stay at zero.
  void set(std::size_t from, std::size_t to, ExtCost cost);

  /// True when each row has a finite off-diagonal entry (or the set is a singleton).
  [[nodiscard]] bool rows_reachable() const;

  friend bool operator==(const CostMatrix&, const CostMatrix&) = default;

 private:
  std::vector<std::string> labels_;
  std::vector<ExtCost> entries_;
};

/// Per-attractor rates I(a), normalized so that the minimum is exactly zero.
struct StationaryRates {
  std::vector<std::string> labels;
  std::vector<ExtCost> rates;

  [[nodiscard]] std::size_t size() const { return rates.size(); }
  friend bool operator==(const StationaryRates&, const StationaryRates&) = default;
};

/// Builds rates from raw values; the minimum must already be zero.
StationaryRates make_rates(std::vector<std::string> labels, std::vector<ExtCost> rates);

/// Two-block partition {left, right} of the attractor indices, as a bitmask
/// over at most 20 attractors. `left` always contains index 0.
struct Partition {
  std::uint32_t left_mask = 0;
  std::size_t size = 0;

  [[nodiscard]] std::vector<std::size_t> left() const;
  [[nodiscard]] std::vector<std::size_t> right() const;
  friend bool operator==(const Partition&, const Partition&) = default;
};

struct PartitionResidual {
  Partition partition;
  double residual = 0.0;
};

inline constexpr std::size_t kMaxPartitionAttractors = 20;

/// min over a in `from`, a' in `to` of I(a) + I(a, a').
/// Throws std::domain_error for an empty subset, std::out_of_range for a bad index.
ExtCost cost_flux(const StationaryRates& rates, const CostMatrix& costs,
                  std::span<const std::size_t> from, std::span<const std::size_t> to);

/// |flux(left -> right) - flux(right -> left)| for each of the 2^(|A|-1) - 1
/// unordered partitions, ordered by bitmask. Both fluxes infinite counts as
/// balanced. Refuses more than 20 attractors.
std::vector<PartitionResidual> balance_residuals(const StationaryRates& rates,
                                                 const CostMatrix& costs);

/// Largest entry of balance_residuals (0 for a single attractor).
double max_balance_residual(const StationaryRates& rates, const CostMatrix& costs);

/// I(x) = min_a (I(a) + I(a, x)).
ExtCost evaluate_rate(const StationaryRates& rates, std::span<const ExtCost> costs_to_point);

/// All-pairs min-plus closure (Floyd-Warshall). The result satisfies the
/// triangle inequality, never exceeds the input entrywise and is a fixed point
/// of a second closure. Negative costs cannot reach here: ExtCost rejects them.
CostMatrix shortest_path_closure(const CostMatrix& costs);

}  // namespace ldrate
