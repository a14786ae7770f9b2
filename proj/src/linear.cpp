#include "ldrate/linear.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ldrate {
namespace {

// e^{-A T} overflows past this exponent.
constexpr double kMaxExponent = 700.0;

// Gauss-Kronrod 7/15 nodes on [-1, 1] (nonnegative half) and weights.
constexpr std::array<double, 8> kKronrodNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the 7-point rule (nodes are the odd Kronrod entries).
constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Estimate {
  Mat kronrod;
  double error = 0.0;
};

Estimate gauss_kronrod(const LinearModel& model, double lo, double hi) {
  const Mat& a = model.drift_jacobian;
  const Mat& c = model.noise_covariance;
  auto integrand = [&](double u) -> Mat {
    const Mat e = matrix_exponential(a * u);
    return e * c * e.transpose();
  };
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const Mat center = integrand(mid);
  Mat kronrod = kKronrodWeights[7] * center;
  Mat gauss = kGaussWeights[3] * center;
  for (std::size_t i = 0; i < 7; ++i) {
    const Mat f = integrand(mid - half * kKronrodNodes[i]) + integrand(mid + half * kKronrodNodes[i]);
    kronrod += kKronrodWeights[i] * f;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * f;
  }
  return {half * kronrod, half * (kronrod - gauss).norm()};
}

Mat integrate_gramian(const LinearModel& model, double lo, double hi, double tolerance) {
  struct Piece {
    double lo, hi;
  };
  Mat total = Mat::Zero(model.noise_covariance.rows(), model.noise_covariance.cols());
  if (hi <= lo) return total;
  const double scale = std::max(1.0, model.noise_covariance.norm());
  const double length = hi - lo;
  std::vector<Piece> stack{{lo, hi}};
  while (!stack.empty()) {
    const Piece p = stack.back();
    stack.pop_back();
    const Estimate est = gauss_kronrod(model, p.lo, p.hi);
    const double budget = tolerance * scale * (p.hi - p.lo) / length;
    if (est.error <= budget || (p.hi - p.lo) < 1e-9 * length) {
      total += est.kronrod;
    } else {
      const double mid = 0.5 * (p.lo + p.hi);
      stack.push_back({mid, p.hi});
      stack.push_back({p.lo, mid});
    }
  }
  return total;
}

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

double LinearModel::spectral_abscissa() const {
  Eigen::EigenSolver<Mat> solver(drift_jacobian, false);
  return solver.eigenvalues().real().maxCoeff();
}

void LinearModel::validate() const {
  const auto d = drift_jacobian.rows();
  if (d == 0 || drift_jacobian.cols() != d || noise_covariance.rows() != d ||
      noise_covariance.cols() != d) {
    throw std::domain_error("linear model: A and c must be square of equal size");
  }
  if (!(spectral_abscissa() < 0.0)) {
    throw std::domain_error("linear model: drift Jacobian is not stable");
  }
  if ((noise_covariance - noise_covariance.transpose()).norm() >
      1e-12 * std::max(1.0, noise_covariance.norm())) {
    throw std::domain_error("linear model: noise covariance is not symmetric");
  }
  Eigen::LLT<Mat> llt(noise_covariance);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("linear model: noise covariance is not positive definite");
  }
}

LocalModel LinearModel::as_local_model() const {
  LocalModel m;
  m.dim = dim();
  m.drift = linear_field(drift_jacobian, Vec::Zero(drift_jacobian.rows()));
  m.diffusion = constant_matrix(Mat(noise_covariance.llt().matrixL()));
  return m;
}

Mat matrix_exponential(const Mat& m) { return m.exp(); }

Mat lyapunov_gramian(const LinearModel& model) {
  model.validate();
  const auto d = model.drift_jacobian.rows();
  if (static_cast<std::size_t>(d) > kMaxLyapunovDim) {
    throw std::domain_error("lyapunov_gramian: dimension above 20");
  }
  const Mat identity = Mat::Identity(d, d);
  // vec(A G + G A^T) = (I (x) A + A (x) I) vec(G) for column-major vec.
  const Mat system = Eigen::kroneckerProduct(identity, model.drift_jacobian).eval() +
                     Eigen::kroneckerProduct(model.drift_jacobian, identity).eval();
  const Vec rhs = -Eigen::Map<const Vec>(model.noise_covariance.data(), d * d);
  Eigen::PartialPivLU<Mat> lu(system);
  Vec g = lu.solve(rhs);
  g += lu.solve(rhs - system * g);  // one step of iterative refinement
  return symmetrized(Eigen::Map<const Mat>(g.data(), d, d));
}

double lyapunov_residual(const LinearModel& model, const Mat& gramian) {
  const Mat& a = model.drift_jacobian;
  return (a * gramian + gramian * a.transpose() + model.noise_covariance).norm();
}

double quadratic_rate(const Mat& gramian, const Vec& r) {
  return 0.5 * r.dot(gramian.llt().solve(r));
}

double quadratic_rate(const LinearModel& model, const Vec& r) {
  return quadratic_rate(lyapunov_gramian(model), r);
}

Mat finite_horizon_gramian(const LinearModel& model, double horizon, double tolerance) {
  if (!(horizon >= 0.0)) throw std::domain_error("finite_horizon_gramian: negative horizon");
  return symmetrized(integrate_gramian(model, 0.0, horizon, tolerance));
}

double max_finite_horizon(const LinearModel& model) {
  Eigen::EigenSolver<Mat> solver(model.drift_jacobian, false);
  const double fastest = solver.eigenvalues().real().cwiseAbs().maxCoeff();
  return fastest > 0.0 ? kMaxExponent / fastest : std::numeric_limits<double>::infinity();
}

LinearEscapePath finite_horizon_path(const LinearModel& model, const Vec& r, double horizon,
                                     std::size_t samples) {
  model.validate();
  if (!(horizon > 0.0)) throw std::domain_error("finite_horizon_path: horizon must be positive");
  if (samples < 1) throw std::domain_error("finite_horizon_path: need at least one sample step");
  const double limit = max_finite_horizon(model);
  if (horizon > limit) {
    std::ostringstream msg;
    msg << "finite_horizon_path: e^{-A T} overflows for T = " << horizon
        << "; use T <= " << limit;
    throw std::domain_error(msg.str());
  }
  const auto d = static_cast<Eigen::Index>(model.dim());
  const double dt = horizon / static_cast<double>(samples);

  // Running Gramians G_{t_k}, accumulated interval by interval.
  std::vector<Mat> gramians{Mat::Zero(d, d)};
  for (std::size_t k = 1; k <= samples; ++k) {
    const double lo = dt * static_cast<double>(k - 1);
    const double hi = k == samples ? horizon : dt * static_cast<double>(k);
    gramians.push_back(gramians.back() + integrate_gramian(model, lo, hi, 1e-12));
  }
  for (Mat& g : gramians) g = symmetrized(g);

  const Mat& total = gramians.back();
  const Vec costate = total.llt().solve(r);  // G_T^{-1} r

  LinearEscapePath out;
  out.action = 0.5 * r.dot(costate);
  out.path.horizon = horizon;
  out.path.points.resize(d, static_cast<Eigen::Index>(samples + 1));
  const Mat& at = model.drift_jacobian.transpose();
  for (std::size_t k = 0; k <= samples; ++k) {
    const double t = k == samples ? horizon : dt * static_cast<double>(k);
    out.path.points.col(static_cast<Eigen::Index>(k)) =
        gramians[k] * (matrix_exponential(at * (horizon - t)) * costate);
  }
  return out;
}

Vec escape_profile_limit(const LinearModel& model, const Mat& gramian, const Vec& r, double t) {
  const Vec back = gramian.llt().solve(r);
  return gramian * (matrix_exponential(model.drift_jacobian.transpose() * t) * back);
}

Vec escape_profile_limit(const LinearModel& model, const Vec& r, double t) {
  return escape_profile_limit(model, lyapunov_gramian(model), r, t);
}

}  // namespace ldrate
