#pragma once

// Local Lagrangian of a small-noise jump diffusion
//
//   dX = b(X) dt + n^{-1/2} sigma(X) dW + n^{-1} f(X) (dN - n nu dt)
//
// with a finite list of jump atoms (nu_j, f_j). The Lagrangian at (y, v) is the
// Legendre transform of the cumulant
//
//   H(y, lambda) = lambda.b + |sigma^T lambda|^2 / 2 + sum_j nu_j (e^{lambda.f_j} - 1 - lambda.f_j)
//
// evaluated at velocity v.

#include <cstddef>
#include <functional>
#include <vector>

#include "ldrate/types.hpp"

namespace ldrate {

using VectorField = std::function<Vec(const Vec&)>;
using MatrixField = std::function<Mat(const Vec&)>;

struct JumpAtom {
  double rate = 0.0;  // nu_j > 0
  VectorField map;    // f_j(y)
};

struct LocalModel {
  std::size_t dim = 0;
  VectorField drift;
  MatrixField diffusion;  // d x m
  std::vector<JumpAtom> jumps;

  /// c(y) = sigma sigma^T + sum_j nu_j f_j f_j^T.
  [[nodiscard]] Mat noise_covariance(const Vec& y) const;
  /// Whether c(y) is positive definite.
  [[nodiscard]] bool nondegenerate_at(const Vec& y) const;
  /// Checks |f_j(y)| <= growth[j] (1 + |y|) at every point given.
  [[nodiscard]] bool jumps_grow_linearly(const std::vector<Vec>& points,
                                         const std::vector<double>& growth) const;
};

/// Constant-coefficient helpers.
VectorField constant_field(Vec value);
MatrixField constant_matrix(Mat value);
VectorField linear_field(Mat matrix, Vec offset);

struct DualOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-10;
};

struct LagrangianValue {
  double value = 0.0;
  Vec multiplier;  // maximizing lambda
  int iterations = 0;
  bool converged = true;
};

/// sup_lambda [lambda.(v - b(y)) - |sigma^T lambda|^2/2 - sum_j nu_j (e^{lambda.f_j} - 1 - lambda.f_j)]
/// by damped Newton from the Gaussian maximizer. On non-convergence the best
/// dual value found (a lower bound) is returned with converged = false.
/// Throws std::domain_error if c(y) is not positive definite.
LagrangianValue local_lagrangian(const LocalModel& model, const Vec& y, const Vec& v,
                                 const DualOptions& options = {});

}  // namespace ldrate
