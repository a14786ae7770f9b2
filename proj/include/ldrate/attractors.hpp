#pragma once

// Equilibria of the noiseless flow x' = b(x) inside a search box.

#include <cstddef>
#include <string>
#include <vector>

#include "ldrate/lagrangian.hpp"
#include "ldrate/types.hpp"

namespace ldrate {

enum class Stability { stable, unstable, saddle, marginal };

std::string to_string(Stability s);
Stability stability_from_string(const std::string& name);

inline constexpr double kClassificationMargin = 1e-6;

struct Equilibrium {
  Vec position;
  Mat jacobian;
  Stability classification = Stability::marginal;
};

struct SearchBox {
  Vec lower;
  Vec upper;
  std::size_t resolution = 2;  // grid points per axis, endpoints included

  /// Throws std::invalid_argument unless lower < upper componentwise and resolution >= 2.
  void validate() const;
  [[nodiscard]] bool contains(const Vec& x, double slack = 0.0) const;
};

/// Central-difference Jacobian of b at y.
Mat jacobian_fd(const VectorField& drift, const Vec& y, double h = 1e-5);

/// Classifies by eigenvalue real parts: all below -margin is stable, all above
/// +margin unstable, both signs saddle, anything else marginal.
Stability classify(const Mat& jacobian, double margin = kClassificationMargin);

/// Damped Newton from every grid seed in the box. Roots with ||b|| <= tol that
/// land inside the box are merged within radius 10 tol and returned in
/// lexicographic order of position. Empty when nothing converges.
std::vector<Equilibrium> find_equilibria(const VectorField& drift, const SearchBox& box,
                                         double tol = 1e-10);

/// The stable subset. Throws NoAttractorError when there is none.
std::vector<Equilibrium> stable_attractors(const std::vector<Equilibrium>& equilibria);

}  // namespace ldrate
