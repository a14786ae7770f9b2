#include "ldrate/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldrate {
namespace {

constexpr double kMaxExponent = 700.0;

// Concave dual objective, its gradient and negated Hessian at lambda.
struct DualState {
  double value = 0.0;
  Vec gradient;
  Mat neg_hessian;
  double magnitude = 0.0;  // size of the terms cancelling in the gradient
  double noise = 0.0;      // rounding error bound on value
};

double dual_value(const LocalModel& model, const Mat& gauss, const std::vector<Vec>& jumps,
                  const Vec& residual, const Vec& lambda) {
  double value = lambda.dot(residual) - 0.5 * lambda.dot(gauss * lambda);
  for (std::size_t j = 0; j < jumps.size(); ++j) {
    const double z = lambda.dot(jumps[j]);
    if (z > kMaxExponent) return -std::numeric_limits<double>::infinity();
    value -= model.jumps[j].rate * (std::expm1(z) - z);
  }
  return value;
}

DualState dual_state(const LocalModel& model, const Mat& gauss, const std::vector<Vec>& jumps,
                     const Vec& residual, const Vec& lambda) {
  DualState s;
  s.value = dual_value(model, gauss, jumps, residual, lambda);
  s.gradient = residual - gauss * lambda;
  s.neg_hessian = gauss;
  const Vec pulled = gauss * lambda;
  s.magnitude = std::max(residual.norm(), pulled.norm());
  double terms = std::abs(lambda.dot(residual)) + std::abs(lambda.dot(pulled));
  for (std::size_t j = 0; j < jumps.size(); ++j) {
    const double z = lambda.dot(jumps[j]);
    const double nu = model.jumps[j].rate;
    terms += nu * (std::abs(std::expm1(z)) + std::abs(z));
    s.gradient -= nu * std::expm1(z) * jumps[j];
    s.magnitude = std::max(s.magnitude, nu * std::abs(std::expm1(z)) * jumps[j].norm());
    s.neg_hessian += nu * std::exp(z) * jumps[j] * jumps[j].transpose();
  }
  s.noise = 16.0 * std::numeric_limits<double>::epsilon() * terms;
  return s;
}

}  // namespace

Mat LocalModel::noise_covariance(const Vec& y) const {
  const Mat sigma = diffusion(y);
  Mat c = sigma * sigma.transpose();
  for (const auto& jump : jumps) {
    const Vec f = jump.map(y);
    c += jump.rate * f * f.transpose();
  }
  return c;
}

bool LocalModel::nondegenerate_at(const Vec& y) const {
  Eigen::LLT<Mat> llt(noise_covariance(y));
  return llt.info() == Eigen::Success;
}

bool LocalModel::jumps_grow_linearly(const std::vector<Vec>& points,
                                     const std::vector<double>& growth) const {
  if (growth.size() != jumps.size()) throw std::invalid_argument("one growth bound per jump atom");
  for (const Vec& y : points) {
    for (std::size_t j = 0; j < jumps.size(); ++j) {
      if (jumps[j].map(y).norm() > growth[j] * (1.0 + y.norm())) return false;
    }
  }
  return true;
}

VectorField constant_field(Vec value) {
  return [value = std::move(value)](const Vec&) { return value; };
}

MatrixField constant_matrix(Mat value) {
  return [value = std::move(value)](const Vec&) { return value; };
}

VectorField linear_field(Mat matrix, Vec offset) {
  return [matrix = std::move(matrix), offset = std::move(offset)](const Vec& y) -> Vec {
    return matrix * y + offset;
  };
}

LagrangianValue local_lagrangian(const LocalModel& model, const Vec& y, const Vec& v,
                                 const DualOptions& options) {
  const Vec residual = v - model.drift(y);
  const Mat sigma = model.diffusion(y);
  const Mat gauss = sigma * sigma.transpose();
  std::vector<Vec> jumps;
  jumps.reserve(model.jumps.size());
  Mat covariance = gauss;
  for (const auto& jump : model.jumps) {
    jumps.push_back(jump.map(y));
    covariance += jump.rate * jumps.back() * jumps.back().transpose();
  }

  LagrangianValue out;
  Eigen::LDLT<Mat> gauss_solver(gauss);
  const bool gauss_pd = gauss_solver.info() == Eigen::Success && gauss_solver.isPositive() &&
                        (gauss_solver.vectorD().array() > 0.0).all();
  if (gauss_pd) {
    out.multiplier = gauss_solver.solve(residual);
  } else {
    Eigen::LLT<Mat> cov_solver(covariance);
    if (cov_solver.info() != Eigen::Success) {
      throw std::domain_error("local_lagrangian: noise covariance is not positive definite");
    }
    out.multiplier = cov_solver.solve(residual);
  }

  if (!jumps.empty()) {
    // The Gaussian multiplier can sit deep in the exponential region, where
    // Newton crawls. Start from the best point on the segment [0, lambda_0]
    // instead; the dual is concave along it.
    const Vec direction = out.multiplier;
    auto along = [&](double t) { return dual_value(model, gauss, jumps, residual, t * direction); };
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.0, hi = 1.0;
    double t1 = hi - ratio * (hi - lo), t2 = lo + ratio * (hi - lo);
    double f1 = along(t1), f2 = along(t2);
    for (int k = 0; k < 80 && hi - lo > 1e-12; ++k) {
      if (f1 < f2) {
        lo = t1;
        t1 = t2;
        f1 = f2;
        t2 = lo + ratio * (hi - lo);
        f2 = along(t2);
      } else {
        hi = t2;
        t2 = t1;
        f2 = f1;
        t1 = hi - ratio * (hi - lo);
        f1 = along(t1);
      }
    }
    const double t = 0.5 * (lo + hi);
    out.multiplier = along(t) >= along(1.0) ? Vec(t * direction) : direction;
  }

  DualState state = dual_state(model, gauss, jumps, residual, out.multiplier);
  if (!std::isfinite(state.value) || state.value < 0.0) {
    out.multiplier.setZero();
    state = dual_state(model, gauss, jumps, residual, out.multiplier);
  }
  out.converged = false;
  for (int it = 0; it <= options.max_iterations; ++it) {
    out.iterations = it;
    if (state.gradient.norm() <= options.gradient_tolerance * std::max(1.0, state.magnitude)) {
      out.converged = true;
      break;
    }
    if (it == options.max_iterations) break;
    Eigen::LDLT<Mat> newton(state.neg_hessian);
    const Vec newton_step = newton.solve(state.gradient);
    const double decrement = newton_step.dot(state.gradient);
    // A badly conditioned Hessian can return a non-ascent direction.
    const bool newton_ok = newton_step.allFinite() && decrement > 0.0;
    bool accepted = false;
    for (int attempt = newton_ok ? 0 : 1; attempt < 2 && !accepted; ++attempt) {
      const Vec step = attempt == 0 ? newton_step
                                    : Vec(state.gradient / std::max(1.0, state.neg_hessian.diagonal().maxCoeff()));
      double scale = 1.0;
      for (int halving = 0; halving < 60; ++halving, scale *= 0.5) {
        const Vec trial = out.multiplier + scale * step;
        if (trial == out.multiplier) break;
        DualState next = dual_state(model, gauss, jumps, residual, trial);
        if (!std::isfinite(next.value)) continue;
        // Within rounding noise of the current value the value comparison is
        // meaningless; ask for a smaller gradient instead.
        const bool better = next.value > state.value + state.noise ||
                            (next.value >= state.value - state.noise &&
                             next.gradient.norm() < state.gradient.norm());
        if (better) {
          out.multiplier = trial;
          state = std::move(next);
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      // No measurable ascent left: as good as the arithmetic allows.
      out.converged = newton_ok && 0.5 * decrement <= 4.0 * state.noise;
      break;
    }
  }
  out.value = std::max(0.0, state.value);
  return out;
}

}  // namespace ldrate
