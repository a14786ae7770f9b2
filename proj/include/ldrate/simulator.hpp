#pragma once

// Euler-Maruyama simulation of the jump diffusion at finite n, stationary
// histograms, and empirical rates -(1/n) log(frequency) for validation.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ldrate/lagrangian.hpp"
#include "ldrate/maxplus.hpp"
#include "ldrate/types.hpp"

namespace ldrate {

inline constexpr double kBlowupRadius = 1e6;

struct SimConfig {
  int n = 1;
  double dt = 0.01;
  double burn_in = 0.0;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  Vec initial;
  std::size_t stride = 1;  // emit every stride-th step after burn-in

  /// Throws std::invalid_argument unless n >= 1, dt > 0, 0 <= burn_in < horizon, stride >= 1.
  void validate() const;
};

/// Random engine for a (seed, replica) pair: std::mt19937_64 seeded with the
/// splitmix64 mix of both values. Replicas with different indices get
/// independent, reproducible streams.
std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t replica);

using SampleSink = std::function<void(const Vec&)>;

/// One step:
///   X += b dt + sigma xi sqrt(dt/n) + sum_j (K_j - n nu_j dt) f_j(X) / n,
/// with xi standard normal and K_j ~ Poisson(n nu_j dt). Calls `sink` on every
/// emitted state and returns how many were emitted. Throws BlowupError if
/// |X| exceeds 1e6.
std::size_t simulate(const LocalModel& model, const SimConfig& config, const SampleSink& sink);
std::vector<Vec> simulate(const LocalModel& model, const SimConfig& config);

/// Regular grid of bins on a box; counts[i] bins along axis i.
struct HistogramGrid {
  Vec lower;
  Vec upper;
  std::vector<std::size_t> counts;

  void validate() const;
  [[nodiscard]] std::size_t bin_count() const;
  [[nodiscard]] Vec center(std::size_t bin) const;
  [[nodiscard]] std::optional<std::size_t> locate(const Vec& x) const;
  [[nodiscard]] Vec width() const;
};

/// Integer bin counts; merging is associative and order independent.
class Histogram {
 public:
  explicit Histogram(HistogramGrid grid);

  void add(const Vec& x);
  void merge(const Histogram& other);

  [[nodiscard]] const HistogramGrid& grid() const { return grid_; }
  [[nodiscard]] const std::vector<std::uint64_t>& counts() const { return counts_; }
  [[nodiscard]] std::uint64_t total() const { return total_; }
  [[nodiscard]] std::uint64_t outside() const { return outside_; }

 private:
  HistogramGrid grid_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::uint64_t outside_ = 0;
};

inline constexpr std::uint64_t kMinEmpiricalSamples = 10000;

struct EmpiricalRate {
  int n = 1;
  std::vector<Vec> centers;
  std::vector<std::uint64_t> counts;
  /// -(1/n) log(count / total), shifted so the smallest uncensored value is 0.
  /// Empty for censored (zero-count) bins.
  std::vector<std::optional<double>> rates;
  /// All samples fell in a single bin.
  bool degenerate = false;

  [[nodiscard]] bool censored(std::size_t bin) const { return !rates[bin].has_value(); }
};

/// Throws std::invalid_argument with fewer than 10^4 samples.
EmpiricalRate empirical_rate(const Histogram& histogram, int n);
EmpiricalRate empirical_rate(std::span<const Vec> samples, const HistogramGrid& grid, int n);

/// Total-variation distance between the normalized histograms.
double total_variation(const Histogram& a, const Histogram& b);

struct BinComparison {
  Vec center;
  std::uint64_t count = 0;
  double empirical = 0.0;
  double predicted = 0.0;
  double abs_error = 0.0;
  std::optional<double> rel_error;  // only where predicted > 0
};

struct ValidationReport {
  int n = 1;
  std::vector<BinComparison> bins;  // compared bins only, in grid order
  double sup_norm = 0.0;
};

/// Compares bins with at least `min_count` samples (never censored ones).
/// Predicted values are shifted so their minimum over the compared bins is 0,
/// matching the normalization of the empirical rates. Bins where the
/// prediction is infinite are skipped.
ValidationReport validation_report(std::span<const ExtCost> predicted_per_bin,
                                   const EmpiricalRate& empirical, std::uint64_t min_count = 1);
ValidationReport validation_report(const std::function<ExtCost(const Vec&)>& predicted,
                                   const EmpiricalRate& empirical, std::uint64_t min_count = 1);

struct TrendRow {
  int n = 1;
  double sup_norm = 0.0;
  std::size_t compared_bins = 0;
};

/// Sup-norm error per n, ordered by increasing n.
struct ErrorTrend {
  std::vector<TrendRow> rows;

  /// Number of steps where the error grows at all.
  [[nodiscard]] int inversions() const;
  /// Largest relative growth err[k+1] / err[k] - 1 over all steps (0 if none grows).
  [[nodiscard]] double worst_growth() const;
  /// At most `allowed` growing steps, none by more than `margin` relatively.
  [[nodiscard]] bool nonincreasing(double margin = 0.0, int allowed = 0) const {
    return inversions() <= allowed && worst_growth() <= margin;
  }
};

}  // namespace ldrate
