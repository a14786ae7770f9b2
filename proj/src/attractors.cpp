#include "ldrate/attractors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "ldrate/errors.hpp"

namespace ldrate {
namespace {

constexpr int kNewtonIterations = 100;

constexpr int kPolishSteps = 3;

std::optional<Vec> newton_root(const VectorField& drift, Vec x, double tol) {
  Vec fx = drift(x);
  double norm = fx.norm();
  // A few extra steps after reaching tol pull roots from different seeds together.
  int polish = 0;
  for (int it = 0; it < kNewtonIterations && polish < kPolishSteps; ++it) {
    if (norm <= tol) ++polish;
    if (norm == 0.0) break;
    const Mat jac = jacobian_fd(drift, x);
    Eigen::ColPivHouseholderQR<Mat> qr(jac);
    if (qr.rank() < jac.rows()) return std::nullopt;
    const Vec step = qr.solve(-fx);
    double scale = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 30; ++halving, scale *= 0.5) {
      const Vec trial = x + scale * step;
      const Vec ft = drift(trial);
      if (ft.allFinite() && ft.norm() < norm) {
        x = trial;
        fx = ft;
        norm = ft.norm();
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (!(norm <= tol)) return std::nullopt;
  return x;
}

bool lexicographic_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (b(i) < a(i)) return false;
  }
  return false;
}

}  // namespace

std::string to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::saddle: return "saddle";
    case Stability::marginal: return "marginal";
  }
  return "marginal";
}

Stability stability_from_string(const std::string& name) {
  if (name == "stable") return Stability::stable;
  if (name == "unstable") return Stability::unstable;
  if (name == "saddle") return Stability::saddle;
  if (name == "marginal") return Stability::marginal;
  throw std::invalid_argument("unknown stability class: " + name);
}

void SearchBox::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw std::invalid_argument("search box bounds must be nonempty and of equal dimension");
  }
  if (!(lower.array() < upper.array()).all()) {
    throw std::invalid_argument("search box needs lower < upper in every coordinate");
  }
  if (resolution < 2) throw std::invalid_argument("search box resolution must be at least 2");
}

bool SearchBox::contains(const Vec& x, double slack) const {
  return ((x.array() >= lower.array() - slack) && (x.array() <= upper.array() + slack)).all();
}

Mat jacobian_fd(const VectorField& drift, const Vec& y, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("jacobian_fd: step must be positive");
  const Eigen::Index d = y.size();
  Mat jac(drift(y).size(), d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Vec plus = y;
    Vec minus = y;
    plus(j) += h;
    minus(j) -= h;
    jac.col(j) = (drift(plus) - drift(minus)) / (2.0 * h);
  }
  return jac;
}

Stability classify(const Mat& jacobian, double margin) {
  Eigen::EigenSolver<Mat> solver(jacobian, false);
  const Vec re = solver.eigenvalues().real();
  if ((re.array() < -margin).all()) return Stability::stable;
  if ((re.array() > margin).all()) return Stability::unstable;
  if ((re.array() < -margin).any() && (re.array() > margin).any()) return Stability::saddle;
  return Stability::marginal;
}

std::vector<Equilibrium> find_equilibria(const VectorField& drift, const SearchBox& box,
                                         double tol) {
  box.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("find_equilibria: tolerance must be positive");
  const Eigen::Index d = box.lower.size();
  const std::size_t per_axis = box.resolution;
  std::size_t seeds = 1;
  for (Eigen::Index i = 0; i < d; ++i) seeds *= per_axis;

  std::vector<Vec> roots;
  for (std::size_t s = 0; s < seeds; ++s) {
    Vec seed(d);
    std::size_t rest = s;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double frac = static_cast<double>(rest % per_axis) / static_cast<double>(per_axis - 1);
      rest /= per_axis;
      seed(i) = box.lower(i) + frac * (box.upper(i) - box.lower(i));
    }
    auto root = newton_root(drift, seed, tol);
    if (!root || !box.contains(*root)) continue;
    const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](const Vec& r) {
      return (r - *root).norm() <= 10.0 * tol;
    });
    if (!duplicate) roots.push_back(*root);
  }
  std::sort(roots.begin(), roots.end(), lexicographic_less);

  std::vector<Equilibrium> out;
  for (Vec& r : roots) {
    Equilibrium e;
    e.jacobian = jacobian_fd(drift, r);
    e.classification = classify(e.jacobian);
    e.position = std::move(r);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Equilibrium> stable_attractors(const std::vector<Equilibrium>& equilibria) {
  std::vector<Equilibrium> out;
  std::copy_if(equilibria.begin(), equilibria.end(), std::back_inserter(out),
               [](const Equilibrium& e) { return e.classification == Stability::stable; });
  if (out.empty()) throw NoAttractorError("no stable attractor in the search box");
  return out;
}

}  // namespace ldrate
