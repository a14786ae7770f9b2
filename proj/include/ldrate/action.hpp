#pragma once

// Sample-path action on uniformly discretized paths, its minimization with
// pinned endpoints, and quasipotentials as the minimum over a horizon sweep.

#include <cstddef>
#include <optional>
#include <vector>

#include "ldrate/lagrangian.hpp"
#include "ldrate/types.hpp"

namespace ldrate {

/// States at the uniform times k T / N, k = 0..N, stored column-wise (d x (N+1)).
struct Path {
  double horizon = 0.0;
  Mat points;

  [[nodiscard]] std::size_t segments() const {
    return points.cols() > 0 ? static_cast<std::size_t>(points.cols() - 1) : 0;
  }
  [[nodiscard]] double step() const { return horizon / static_cast<double>(segments()); }
  [[nodiscard]] double time(std::size_t k) const { return step() * static_cast<double>(k); }

  /// Straight line from x0 to x1 with N segments.
  static Path straight(const Vec& x0, const Vec& x1, double horizon, std::size_t segments);
  /// Linear interpolation onto a new uniform grid, keeping the time-normalized shape.
  [[nodiscard]] Path resampled(double new_horizon, std::size_t new_segments) const;
  /// Spends `extra` time at the start point, then follows this path.
  [[nodiscard]] Path with_leading_dwell(double extra, std::size_t new_segments) const;
};

struct ActionValue {
  double value = 0.0;
  int inner_dual_iters = 0;  // max Newton iterations over all segments
  bool converged = true;
  std::vector<std::size_t> failed_segments;
};

/// Midpoint rule: segment k contributes h L((x_k + x_{k+1})/2, (x_{k+1} - x_k)/h).
/// The difference quotient is the central difference at the segment midpoint.
/// Throws std::invalid_argument for fewer than two segments or a bad horizon.
ActionValue path_action(const LocalModel& model, const Path& path, const DualOptions& dual = {});

struct DescentOptions {
  int max_iterations = 20000;
  std::size_t memory = 12;
  /// Stop when the preconditioned gradient norm falls below this times max(1, action).
  double gradient_tolerance = 1e-7;
  /// Stop after `stall_window` iterations improving the action by less than this, relatively.
  double stall_tolerance = 1e-10;
  int stall_window = 10;
  DualOptions dual;
};

enum class DescentStatus { converged, stalled, line_search_failed, max_iterations };

struct MinimizedPath {
  Path path;
  ActionValue action;
  int iterations = 0;
  DescentStatus status = DescentStatus::converged;

  /// Converged or stalled at a point where no further decrease is measurable.
  [[nodiscard]] bool ok() const {
    return status == DescentStatus::converged || status == DescentStatus::stalled;
  }
};

/// Central finite-difference gradient of path_action with respect to the
/// interior nodes (endpoint columns are zero). Each coordinate only touches
/// its two adjacent segments.
Mat action_gradient(const LocalModel& model, const Path& path, const DualOptions& dual = {});

/// Local minimizer of path_action over interior nodes with x0 and x1 pinned.
/// Preconditioned L-BFGS with backtracking (Armijo) line search on the finite
/// difference gradient. Starts from the straight line, or from `init` when its
/// action is lower, so the result never exceeds the straight-line action.
/// Throws std::invalid_argument if T <= 0 or N < 8.
MinimizedPath minimize_action(const LocalModel& model, const Vec& x0, const Vec& x1,
                              double horizon, std::size_t segments,
                              const std::optional<Path>& init = std::nullopt,
                              const DescentOptions& options = {});

inline const std::vector<double> kDefaultHorizons{1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
inline constexpr double kUnreachableAction = 1e6;

struct QuasipotentialOptions {
  std::vector<double> horizons = kDefaultHorizons;
  std::size_t segments = 400;
  /// ||b(a)|| must not exceed this for the start point to count as an equilibrium.
  double equilibrium_tolerance = 1e-6;
  DescentOptions descent;
};

struct QuasipotentialValue {
  ActionValue action;  // value is +inf when unreachable
  double best_horizon = 0.0;
  Path best_path;
  std::vector<double> sweep_values;  // one per horizon, in sweep order
  int failed_solves = 0;
  bool converged = true;  // the minimization at best_horizon ended ok()
};

/// I(a, x) as the minimum of minimize_action over the horizon sweep. Each
/// horizon warm-starts from the previous minimizer, extended by dwelling at a
/// (free, since a is an equilibrium) and resampled. Ties go to the earlier
/// horizon. Throws std::domain_error for an empty sweep or a non-equilibrium a.
QuasipotentialValue quasipotential(const LocalModel& model, const Vec& a, const Vec& x,
                                   const QuasipotentialOptions& options = {});

}  // namespace ldrate
