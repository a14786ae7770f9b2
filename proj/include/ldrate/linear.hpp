#pragma once

// Quasipotential of linearized dynamics around a stable equilibrium.
//
// For y' = A y with noise covariance c, the stationary rate is the quadratic
// form r^T G^{-1} r / 2 with G the controllability Gramian
// G = int_0^inf e^{A t} c e^{A^T t} dt, i.e. the solution of A G + G A^T + c = 0.

#include <cstddef>

#include "ldrate/action.hpp"
#include "ldrate/types.hpp"

namespace ldrate {

struct LinearModel {
  Mat drift_jacobian;    // A = Db(x), must be stable
  Mat noise_covariance;  // c = c^T > 0

  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(drift_jacobian.rows()); }
  /// Largest real part among the eigenvalues of A.
  [[nodiscard]] double spectral_abscissa() const;
  /// Throws std::domain_error when A is not stable or c is not symmetric positive definite.
  void validate() const;
  /// Equivalent Gaussian LocalModel: b(y) = A y, sigma = chol(c), no jumps.
  [[nodiscard]] LocalModel as_local_model() const;
};

/// e^{M}, scaling and squaring with a Pade approximant.
Mat matrix_exponential(const Mat& m);

inline constexpr std::size_t kMaxLyapunovDim = 20;

/// G solving A G + G A^T + c = 0 through the d^2 x d^2 Kronecker system,
/// symmetrized. Throws std::domain_error for an invalid model or d > 20.
Mat lyapunov_gramian(const LinearModel& model);

/// ||A G + G A^T + c||_F.
double lyapunov_residual(const LinearModel& model, const Mat& gramian);

/// r^T G^{-1} r / 2.
double quadratic_rate(const LinearModel& model, const Vec& r);
double quadratic_rate(const Mat& gramian, const Vec& r);

/// Finite-horizon Gramian int_0^T e^{A u} c e^{A^T u} du by adaptive
/// Gauss-Kronrod quadrature.
Mat finite_horizon_gramian(const LinearModel& model, double horizon, double tolerance = 1e-10);

struct LinearEscapePath {
  Path path;
  /// Action of the optimal path: r^T G_T^{-1} r / 2.
  double action = 0.0;
};

/// Optimal path from 0 to r in time T, sampled at K+1 uniform times. With
/// G_t the finite-horizon Gramian, X_t = G_t e^{A^T (T - t)} G_T^{-1} r.
/// Refuses horizons for which e^{-A T} would overflow.
LinearEscapePath finite_horizon_path(const LinearModel& model, const Vec& r, double horizon,
                                     std::size_t samples);

/// Largest horizon accepted by finite_horizon_path.
double max_finite_horizon(const LinearModel& model);

/// Limit of X_{T - t} as T -> inf: G e^{A^T t} G^{-1} r.
Vec escape_profile_limit(const LinearModel& model, const Vec& r, double t);
Vec escape_profile_limit(const LinearModel& model, const Mat& gramian, const Vec& r, double t);

}  // namespace ldrate
