#pragma once

// End-to-end driver: problem -> attractors -> pairwise quasipotentials ->
// closure -> stationary rates -> I(x) on requested points, plus the Monte
// Carlo ladder and the linearized (Gramian) report.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ldrate/attractors.hpp"
#include "ldrate/linear.hpp"
#include "ldrate/maxplus.hpp"
#include "ldrate/problem.hpp"
#include "ldrate/simulator.hpp"

namespace ldrate {

struct EquilibriumRow {
  Vec position;
  Stability classification = Stability::marginal;
};

struct AttractorRow {
  std::string label;  // "A0", "A1", ... in lexicographic order of position
  Vec position;
  ExtCost rate;
};

/// I(x) = min over attractors of I(a) + I(a, x).
struct PointRate {
  std::string label;  // "P0", "P1", ...
  Vec position;
  ExtCost rate;
  std::string via;          // attractor label achieving the minimum, empty if unreachable
  double best_horizon = 0;  // of the winning quasipotential solve
};

/// A minimizing path as sampled on its uniform grid.
struct PathRecord {
  std::string from;
  std::string to;
  double horizon = 0.0;
  Mat points;  // d x (N+1)
};

struct Provenance {
  ToleranceSpec tolerances;
  std::vector<double> horizons;
  std::size_t nodes = 0;
  int failure_quota = 0;
  int unconverged = 0;  // quasipotentials whose best solve neither converged nor stalled
  std::optional<std::uint64_t> seed;
};

struct RateReport {
  std::string name;
  std::size_t dimension = 0;
  std::vector<EquilibriumRow> equilibria;
  std::vector<AttractorRow> attractors;
  CostMatrix raw_costs;
  CostMatrix closed_costs;
  double max_balance_residual = 0.0;
  std::vector<PointRate> points;
  Provenance provenance;
  std::vector<PathRecord> paths;  // attractor pairs first, then points

  [[nodiscard]] StationaryRates stationary() const;
};

/// Equilibria only, in the order used for attractor labels.
std::vector<EquilibriumRow> run_attractors(const ProblemSpec& spec);

/// Throws NoAttractorError, ConvergenceError (more unconverged quasipotentials
/// than action.failure_quota) or BalanceError (residual above tolerances.balance).
RateReport run_rates(const ProblemSpec& spec, unsigned threads = 1);

/// I(x) at extra points against an already solved report. Attractors are
/// visited in increasing I(a); one whose I(a) already exceeds the best value
/// is skipped. Adds the winning paths to `paths` when given.
std::vector<PointRate> evaluate_points(const ProblemSpec& spec, const RateReport& report,
                                       std::span<const Vec> points, unsigned threads = 1,
                                       std::vector<PathRecord>* paths = nullptr,
                                       int* unconverged = nullptr);

struct LadderStep {
  EmpiricalRate empirical;
  ValidationReport comparison;
};

struct ValidationRun {
  RateReport rates;
  std::uint64_t seed = 0;
  std::uint64_t min_count = 1;
  /// Prediction per histogram bin; empty where no ladder step had min_count samples.
  std::vector<std::optional<ExtCost>> predicted;
  std::vector<LadderStep> ladder;  // one per n, increasing
  ErrorTrend trend;
  bool trend_ok = false;  // trend.nonincreasing(trend_margin, allowed_inversions)
};

/// Simulates every n of the ladder (replica r of step i uses stream
/// i * replicas + r) and compares against run_rates. SpecError without a
/// simulation block.
ValidationRun run_validate(const ProblemSpec& spec, unsigned threads = 1);

struct LinearOffsetRow {
  std::string label;  // "R0", "R1", ...
  Vec offset;
  double rate = 0.0;
};

/// Escape profile y(s) = G e^{A^T s} G^{-1} r: the deviation from the
/// attractor a time s before the most likely path reaches a + r.
struct EscapeProfile {
  std::string label;
  std::vector<double> times;
  Mat points;  // d x times.size()
};

struct LinearReport {
  std::string name;
  std::size_t equilibrium = 0;  // index into the equilibrium list
  Vec position;
  Mat drift_jacobian;
  Mat noise_covariance;
  Mat gramian;
  double lyapunov_residual = 0.0;
  std::vector<LinearOffsetRow> offsets;
  std::vector<EscapeProfile> profiles;
};

/// Linearization at equilibrium `linear.attractor` (index into run_attractors
/// order). SpecError without a linear block, for a bad index, or when that
/// equilibrium is not stable.
LinearReport run_linear(const ProblemSpec& spec);

}  // namespace ldrate
