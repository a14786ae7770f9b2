#pragma once

// Problem description files (JSON). See README.md for the schema.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ldrate/action.hpp"
#include "ldrate/attractors.hpp"
#include "ldrate/lagrangian.hpp"
#include "ldrate/simulator.hpp"
#include "ldrate/types.hpp"

namespace ldrate {

/// coefficient * prod_i x_i^powers[i]
struct Monomial {
  double coefficient = 0.0;
  std::vector<int> powers;
};
using Polynomial = std::vector<Monomial>;

double evaluate(const Polynomial& p, const Vec& x);
/// d/dx_i of the polynomial at x.
double partial(const Polynomial& p, std::size_t i, const Vec& x);

enum class DriftKind { linear, gradient_polynomial, polynomial };

struct DriftSpec {
  DriftKind kind = DriftKind::linear;
  Mat matrix;                          // linear: b(x) = matrix x + offset
  Vec offset;
  Polynomial potential;                // gradient_polynomial: b = -grad U
  std::vector<Polynomial> components;  // polynomial: b_i(x) = components[i](x)
};

/// f(y) = vector + matrix y
struct JumpSpec {
  double rate = 0.0;
  Vec vector;
  Mat matrix;
};

struct ToleranceSpec {
  double root = 1e-10;         // equilibrium search, ||b|| at accepted roots
  double equilibrium = 1e-6;   // start points of quasipotential solves
  double balance = 1e-9;       // largest accepted balance residual
};

struct ActionSpec {
  std::vector<double> horizons = kDefaultHorizons;
  std::size_t nodes = 400;
  int failure_quota = 0;  // tolerated minimizations that neither converge nor stall
};

struct SimulationSpec {
  std::vector<int> n_values;
  double dt = 0.01;
  double burn_in = 0.0;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::size_t stride = 1;
  std::size_t replicas = 1;
  Vec initial;
  HistogramGrid bins;
  std::uint64_t min_count = 1;
  double trend_margin = 0.05;
  int allowed_inversions = 1;
};

struct LinearSpec {
  std::size_t attractor = 0;
  std::vector<Vec> offsets;
  double profile_horizon = 5.0;
  std::size_t profile_samples = 50;
};

struct ProblemSpec {
  std::string name;
  std::size_t dimension = 0;
  DriftSpec drift;
  Mat diffusion;  // constant d x m
  std::vector<JumpSpec> jumps;
  SearchBox search_box;
  ToleranceSpec tolerances;
  ActionSpec action;
  std::vector<Vec> evaluation_points;
  std::optional<SimulationSpec> simulation;
  std::optional<LinearSpec> linear;

  [[nodiscard]] LocalModel model() const;
  [[nodiscard]] VectorField drift_field() const;
};

/// Parses and validates a problem description. Unknown fields, wrong types
/// and out-of-range values raise SpecError.
ProblemSpec parse_problem(std::string_view json_text);
ProblemSpec load_problem(const std::filesystem::path& file);

}  // namespace ldrate
