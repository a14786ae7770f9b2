#include "ldrate/action.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace ldrate {
namespace {

constexpr double kArmijo = 1e-4;

struct SegmentValue {
  double value = 0.0;
  int iterations = 0;
  bool converged = true;
};

SegmentValue segment(const LocalModel& model, const Vec& left, const Vec& right, double h,
                     const DualOptions& dual) {
  const Vec mid = 0.5 * (left + right);
  const Vec velocity = (right - left) / h;
  const auto l = local_lagrangian(model, mid, velocity, dual);
  return {h * l.value, l.iterations, l.converged};
}

void check_path(const Path& path) {
  if (!(path.horizon > 0.0) || !std::isfinite(path.horizon)) {
    throw std::invalid_argument("path horizon must be positive and finite");
  }
  if (path.segments() < 2) throw std::invalid_argument("path needs at least two segments");
}

// Solves the Dirichlet second-difference system tridiag(-1, 2, -1) z = rhs along
// each row (one row per state coordinate, one column per interior node).
Mat solve_second_difference(const Mat& rhs) {
  const Eigen::Index m = rhs.cols();
  Mat z(rhs.rows(), m);
  std::vector<double> c(static_cast<std::size_t>(m));
  for (Eigen::Index row = 0; row < rhs.rows(); ++row) {
    std::vector<double> d(static_cast<std::size_t>(m));
    double denom = 2.0;
    c[0] = -1.0 / denom;
    d[0] = rhs(row, 0) / denom;
    for (Eigen::Index k = 1; k < m; ++k) {
      denom = 2.0 + c[static_cast<std::size_t>(k - 1)];
      c[static_cast<std::size_t>(k)] = -1.0 / denom;
      d[static_cast<std::size_t>(k)] = (rhs(row, k) + d[static_cast<std::size_t>(k - 1)]) / denom;
    }
    z(row, m - 1) = d[static_cast<std::size_t>(m - 1)];
    for (Eigen::Index k = m - 2; k >= 0; --k) {
      z(row, k) = d[static_cast<std::size_t>(k)] - c[static_cast<std::size_t>(k)] * z(row, k + 1);
    }
  }
  return z;
}

double inner(const Mat& a, const Mat& b) { return (a.array() * b.array()).sum(); }

// Objective on the interior block with endpoints held fixed.
class PinnedAction {
 public:
  PinnedAction(const LocalModel& model, Path frame, const DualOptions& dual)
      : model_(model), frame_(std::move(frame)), dual_(dual) {}

  [[nodiscard]] Eigen::Index interior() const { return frame_.points.cols() - 2; }
  [[nodiscard]] Mat interior_of(const Path& p) const {
    return p.points.middleCols(1, interior());
  }
  [[nodiscard]] Path with_interior(const Mat& x) const {
    Path p = frame_;
    p.points.middleCols(1, interior()) = x;
    return p;
  }
  [[nodiscard]] double value(const Mat& x) const {
    return path_action(model_, with_interior(x), dual_).value;
  }
  [[nodiscard]] Mat gradient(const Mat& x) const {
    return action_gradient(model_, with_interior(x), dual_).middleCols(1, interior());
  }
  // Applies the inverse of (1/h) tridiag(-1, 2, -1), the leading part of the Hessian.
  [[nodiscard]] Mat precondition(const Mat& g) const {
    return frame_.step() * solve_second_difference(g);
  }

 private:
  const LocalModel& model_;
  Path frame_;
  DualOptions dual_;
};

}  // namespace

Path Path::straight(const Vec& x0, const Vec& x1, double horizon, std::size_t segments) {
  if (x0.size() != x1.size()) throw std::invalid_argument("endpoint dimensions differ");
  Path p;
  p.horizon = horizon;
  p.points.resize(x0.size(), static_cast<Eigen::Index>(segments + 1));
  for (std::size_t k = 0; k <= segments; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(segments);
    p.points.col(static_cast<Eigen::Index>(k)) = (1.0 - s) * x0 + s * x1;
  }
  return p;
}

Path Path::resampled(double new_horizon, std::size_t new_segments) const {
  Path p;
  p.horizon = new_horizon;
  p.points.resize(points.rows(), static_cast<Eigen::Index>(new_segments + 1));
  const double old_n = static_cast<double>(segments());
  for (std::size_t k = 0; k <= new_segments; ++k) {
    const double pos = old_n * static_cast<double>(k) / static_cast<double>(new_segments);
    const auto lo = std::min(static_cast<Eigen::Index>(std::floor(pos)),
                             static_cast<Eigen::Index>(segments()) - 1);
    const double w = pos - static_cast<double>(lo);
    p.points.col(static_cast<Eigen::Index>(k)) =
        (1.0 - w) * points.col(lo) + w * points.col(lo + 1);
  }
  return p;
}

Path Path::with_leading_dwell(double extra, std::size_t new_segments) const {
  Path p;
  p.horizon = horizon + extra;
  p.points.resize(points.rows(), static_cast<Eigen::Index>(new_segments + 1));
  const double h = step();
  for (std::size_t k = 0; k <= new_segments; ++k) {
    const double t = p.horizon * static_cast<double>(k) / static_cast<double>(new_segments) - extra;
    if (t <= 0.0) {
      p.points.col(static_cast<Eigen::Index>(k)) = points.col(0);
      continue;
    }
    const double pos = std::min(t / h, static_cast<double>(segments()));
    const auto lo = std::min(static_cast<Eigen::Index>(std::floor(pos)),
                             static_cast<Eigen::Index>(segments()) - 1);
    const double w = pos - static_cast<double>(lo);
    p.points.col(static_cast<Eigen::Index>(k)) =
        (1.0 - w) * points.col(lo) + w * points.col(lo + 1);
  }
  return p;
}

ActionValue path_action(const LocalModel& model, const Path& path, const DualOptions& dual) {
  check_path(path);
  ActionValue out;
  const double h = path.step();
  for (std::size_t k = 0; k < path.segments(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const auto s = segment(model, path.points.col(i), path.points.col(i + 1), h, dual);
    out.value += s.value;
    out.inner_dual_iters = std::max(out.inner_dual_iters, s.iterations);
    if (!s.converged) {
      out.converged = false;
      out.failed_segments.push_back(k);
    }
  }
  return out;
}

Mat action_gradient(const LocalModel& model, const Path& path, const DualOptions& dual) {
  check_path(path);
  const double h = path.step();
  const Eigen::Index nodes = path.points.cols();
  Mat grad = Mat::Zero(path.points.rows(), nodes);
  for (Eigen::Index k = 1; k + 1 < nodes; ++k) {
    for (Eigen::Index i = 0; i < path.points.rows(); ++i) {
      Vec node = path.points.col(k);
      const double eps = 6e-6 * std::max(1.0, std::abs(node(i)));
      node(i) += eps;
      const double plus = segment(model, path.points.col(k - 1), node, h, dual).value +
                          segment(model, node, path.points.col(k + 1), h, dual).value;
      node(i) -= 2.0 * eps;
      const double minus = segment(model, path.points.col(k - 1), node, h, dual).value +
                           segment(model, node, path.points.col(k + 1), h, dual).value;
      grad(i, k) = (plus - minus) / (2.0 * eps);
    }
  }
  return grad;
}

MinimizedPath minimize_action(const LocalModel& model, const Vec& x0, const Vec& x1,
                              double horizon, std::size_t segments,
                              const std::optional<Path>& init, const DescentOptions& options) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("minimize_action: horizon must be positive");
  }
  if (segments < 8) throw std::invalid_argument("minimize_action: need at least 8 segments");
  if (x0.size() != static_cast<Eigen::Index>(model.dim) || x1.size() != x0.size()) {
    throw std::invalid_argument("minimize_action: endpoint dimension mismatch");
  }

  Path start = Path::straight(x0, x1, horizon, segments);
  double start_value = path_action(model, start, options.dual).value;
  if (init) {
    Path candidate = init->segments() == segments && init->horizon == horizon
                         ? *init
                         : init->resampled(horizon, segments);
    candidate.points.col(0) = x0;
    candidate.points.col(static_cast<Eigen::Index>(segments)) = x1;
    const double v = path_action(model, candidate, options.dual).value;
    if (v < start_value) {
      start = std::move(candidate);
      start_value = v;
    }
  }

  PinnedAction objective(model, start, options.dual);
  Mat x = objective.interior_of(start);
  double f = start_value;
  Mat g = objective.gradient(x);

  std::deque<Mat> s_hist;
  std::deque<Mat> y_hist;
  std::deque<double> rho_hist;
  std::deque<double> recent{f};

  MinimizedPath out;
  out.status = DescentStatus::max_iterations;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const Mat pg = objective.precondition(g);
    const double pg_norm = std::sqrt(std::max(0.0, inner(g, pg)));
    if (pg_norm <= options.gradient_tolerance * std::max(1.0, f)) {
      out.status = DescentStatus::converged;
      break;
    }

    // Two-loop recursion with the preconditioner as the initial inverse Hessian.
    Mat q = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t j = s_hist.size(); j-- > 0;) {
      alpha[j] = rho_hist[j] * inner(s_hist[j], q);
      q -= alpha[j] * y_hist[j];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) {
      const Mat py = objective.precondition(y_hist.back());
      gamma = inner(s_hist.back(), y_hist.back()) / inner(y_hist.back(), py);
    }
    Mat r = gamma * objective.precondition(q);
    for (std::size_t j = 0; j < s_hist.size(); ++j) {
      const double beta = rho_hist[j] * inner(y_hist[j], r);
      r += (alpha[j] - beta) * s_hist[j];
    }
    Mat direction = -r;
    double slope = inner(g, direction);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      direction = -pg;
      slope = -pg_norm * pg_norm;
    }

    double t = 1.0;
    bool accepted = false;
    Mat x_new;
    double f_new = f;
    for (int halving = 0; halving < 50; ++halving, t *= 0.5) {
      x_new = x + t * direction;
      f_new = objective.value(x_new);
      if (std::isfinite(f_new) && f_new <= f + kArmijo * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!s_hist.empty()) {
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        continue;  // retry once with the plain preconditioned gradient
      }
      const double drop = recent.front() - f;
      out.status = drop <= 1e-8 * std::max(1.0, f) ? DescentStatus::stalled
                                                   : DescentStatus::line_search_failed;
      break;
    }

    const Mat g_new = objective.gradient(x_new);
    Mat s = x_new - x;
    Mat y = g_new - g;
    const double sy = inner(s, y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = std::move(x_new);
    f = f_new;
    g = g_new;

    recent.push_back(f);
    if (recent.size() > static_cast<std::size_t>(options.stall_window) + 1) recent.pop_front();
    if (recent.size() == static_cast<std::size_t>(options.stall_window) + 1 &&
        recent.front() - f <= options.stall_tolerance * std::max(1.0, f)) {
      out.status = DescentStatus::stalled;
      ++it;
      break;
    }
  }
  out.iterations = it;
  out.path = objective.with_interior(x);
  out.action = path_action(model, out.path, options.dual);
  return out;
}

QuasipotentialValue quasipotential(const LocalModel& model, const Vec& a, const Vec& x,
                                   const QuasipotentialOptions& options) {
  if (options.horizons.empty()) throw std::domain_error("quasipotential: empty horizon sweep");
  if (model.drift(a).norm() > options.equilibrium_tolerance) {
    throw std::domain_error("quasipotential: start point is not an equilibrium of the drift");
  }
  QuasipotentialValue out;
  out.action.value = std::numeric_limits<double>::infinity();

  if ((x - a).norm() == 0.0) {
    out.action.value = 0.0;
    out.best_horizon = options.horizons.front();
    out.best_path = Path::straight(a, x, out.best_horizon, options.segments);
    out.sweep_values.assign(options.horizons.size(), 0.0);
    return out;
  }

  std::optional<Path> warm;
  for (double horizon : options.horizons) {
    std::optional<Path> init;
    if (warm) {
      init = horizon > warm->horizon
                 ? warm->with_leading_dwell(horizon - warm->horizon, options.segments)
                 : warm->resampled(horizon, options.segments);
    }
    auto solved = minimize_action(model, a, x, horizon, options.segments, init, options.descent);
    if (!solved.ok()) ++out.failed_solves;
    out.sweep_values.push_back(solved.action.value);
    const bool better = solved.action.value < out.action.value ||
                        (solved.action.value == out.action.value && horizon < out.best_horizon);
    if (better) {
      out.action = solved.action;
      out.best_horizon = horizon;
      out.best_path = solved.path;
      out.converged = solved.ok();
    }
    warm = std::move(solved.path);
  }
  if (out.action.value >= kUnreachableAction) {
    out.action.value = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace ldrate
