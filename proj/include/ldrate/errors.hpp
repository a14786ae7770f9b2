#pragma once

#include <stdexcept>
#include <string>

namespace ldrate {

// Error categories surfaced by the pipeline. The CLI maps each to an exit code.

/// Malformed or inconsistent problem description.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The search box contains no asymptotically stable equilibrium.
class NoAttractorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver failed to reach its tolerance often enough to matter.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solved rates do not balance fluxes across some partition of the attractors.
class BalanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simulated state left the blowup guard radius.
class BlowupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ldrate
