#include "ldrate/maxplus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldrate {

ExtCost::ExtCost(double value) : value_(value) {
  if (std::isnan(value) || value < 0.0) {
    throw std::domain_error("cost must be a nonnegative number or +inf");
  }
}

ExtCost ExtCost::infinity() { return ExtCost(std::numeric_limits<double>::infinity()); }

bool ExtCost::is_finite() const { return std::isfinite(value_); }

ExtCost operator+(ExtCost a, ExtCost b) {
  if (!a.is_finite() || !b.is_finite()) return ExtCost::infinity();
  return ExtCost(a.value_ + b.value_);
}

ExtCost min(ExtCost a, ExtCost b) { return b < a ? b : a; }

CostMatrix::CostMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)),
      entries_(labels_.size() * labels_.size(), ExtCost::infinity()) {
  for (std::size_t i = 0; i < labels_.size(); ++i) entries_[i * labels_.size() + i] = ExtCost();
}

CostMatrix::CostMatrix(std::vector<std::string> labels,
                       std::vector<std::vector<ExtCost>> entries)
    : labels_(std::move(labels)) {
  const std::size_t n = labels_.size();
  if (entries.size() != n) throw std::invalid_argument("cost matrix row count != label count");
  entries_.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (entries[i].size() != n) throw std::invalid_argument("cost matrix is not square");
    if (entries[i][i] != ExtCost()) {
      throw std::invalid_argument("cost matrix diagonal must be exactly zero");
    }
    entries_.insert(entries_.end(), entries[i].begin(), entries[i].end());
  }
}

CostMatrix CostMatrix::from_values(const std::vector<std::vector<double>>& values) {
  std::vector<std::string> labels;
  std::vector<std::vector<ExtCost>> entries;
  for (std::size_t i = 0; i < values.size(); ++i) {
    labels.push_back(std::to_string(i + 1));
    std::vector<ExtCost> row;
    for (double v : values[i]) row.emplace_back(v);
    entries.push_back(std::move(row));
  }
  return CostMatrix(std::move(labels), std::move(entries));
}

void CostMatrix::set(std::size_t from, std::size_t to, ExtCost cost) {
  const std::size_t n = labels_.size();
  if (from >= n || to >= n) throw std::out_of_range("cost matrix index");
  if (from == to) return;
  entries_[from * n + to] = cost;
}

bool CostMatrix::rows_reachable() const {
  const std::size_t n = size();
  if (n < 2) return true;
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < n && !any; ++j) any = (i != j) && (*this)(i, j).is_finite();
    if (!any) return false;
  }
  return true;
}

StationaryRates make_rates(std::vector<std::string> labels, std::vector<ExtCost> rates) {
  if (labels.size() != rates.size()) throw std::invalid_argument("rates/labels length mismatch");
  if (rates.empty()) throw std::invalid_argument("rates must be nonempty");
  const auto lowest = *std::min_element(rates.begin(), rates.end());
  if (lowest != ExtCost()) throw std::domain_error("stationary rates must have minimum exactly 0");
  return StationaryRates{std::move(labels), std::move(rates)};
}

std::vector<std::size_t> Partition::left() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size; ++i)
    if (left_mask & (1u << i)) out.push_back(i);
  return out;
}

std::vector<std::size_t> Partition::right() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size; ++i)
    if (!(left_mask & (1u << i))) out.push_back(i);
  return out;
}

ExtCost cost_flux(const StationaryRates& rates, const CostMatrix& costs,
                  std::span<const std::size_t> from, std::span<const std::size_t> to) {
  if (from.empty() || to.empty()) throw std::domain_error("cost_flux needs nonempty subsets");
  if (rates.size() != costs.size()) throw std::invalid_argument("rates/costs size mismatch");
  ExtCost best = ExtCost::infinity();
  for (std::size_t a : from) {
    if (a >= costs.size()) throw std::out_of_range("cost_flux source index");
    for (std::size_t b : to) {
      if (b >= costs.size()) throw std::out_of_range("cost_flux target index");
      best = min(best, rates.rates[a] + costs(a, b));
    }
  }
  return best;
}

std::vector<PartitionResidual> balance_residuals(const StationaryRates& rates,
                                                 const CostMatrix& costs) {
  const std::size_t n = costs.size();
  if (n > kMaxPartitionAttractors) {
    throw std::domain_error("balance_residuals: more than 20 attractors, partition count explodes");
  }
  std::vector<PartitionResidual> out;
  if (n < 2) return out;
  const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1u);
  // Canonical representative: index 0 on the left, right side nonempty.
  for (std::uint32_t mask = 1; mask < full; mask += 2) {
    Partition p{mask, n};
    const auto left = p.left();
    const auto right = p.right();
    const double forward = cost_flux(rates, costs, left, right).value();
    const double backward = cost_flux(rates, costs, right, left).value();
    double residual = 0.0;
    if (std::isfinite(forward) || std::isfinite(backward)) residual = std::abs(forward - backward);
    out.push_back({p, residual});
  }
  return out;
}

double max_balance_residual(const StationaryRates& rates, const CostMatrix& costs) {
  double worst = 0.0;
  for (const auto& r : balance_residuals(rates, costs)) worst = std::max(worst, r.residual);
  return worst;
}

ExtCost evaluate_rate(const StationaryRates& rates, std::span<const ExtCost> costs_to_point) {
  if (costs_to_point.size() != rates.size()) {
    throw std::invalid_argument("evaluate_rate: one cost per attractor required");
  }
  ExtCost best = ExtCost::infinity();
  for (std::size_t a = 0; a < rates.size(); ++a) best = min(best, rates.rates[a] + costs_to_point[a]);
  return best;
}

CostMatrix shortest_path_closure(const CostMatrix& costs) {
  CostMatrix closed = costs;
  const std::size_t n = costs.size();
  // Repeat Floyd-Warshall sweeps until nothing moves, so that the triangle
  // inequality holds in floating point and not only in exact arithmetic.
  for (std::size_t pass = 0; pass <= n; ++pass) {
    bool changed = false;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const ExtCost ik = closed(i, k);
        if (!ik.is_finite()) continue;
        for (std::size_t j = 0; j < n; ++j) {
          const ExtCost via = ik + closed(k, j);
          if (via < closed(i, j)) {
            closed.set(i, j, via);
            changed = true;
          }
        }
      }
    }
    if (!changed) break;
  }
  return closed;
}

}  // namespace ldrate
