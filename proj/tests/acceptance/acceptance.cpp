// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [criterion ...]   (default: all ten)

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "generators.hpp"
#include "in_tree_oracle.hpp"
#include "ldrate/action.hpp"
#include "ldrate/lagrangian.hpp"
#include "ldrate/linear.hpp"
#include "ldrate/maxplus.hpp"
#include "ldrate/pipeline.hpp"
#include "ldrate/report_io.hpp"
#include "ldrate/tree_solver.hpp"

using namespace ldrate;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kTreeTolerance = 1e-12;
constexpr double kTreeSeconds = 10.0;
constexpr double kBalanceTolerance = 1e-9;
constexpr double kBalanceSeconds = 5.0;
constexpr double kPerturbationMin = 1e-3;
constexpr double kImbalanceMin = 1e-4;
constexpr double kGaussianTolerance = 1e-10;
constexpr double kSaddleLow = 0.475;
constexpr double kSaddleHigh = 0.525;
constexpr double kAcrossRelative = 0.05;
constexpr double kWellSeconds = 120.0;
constexpr double kOuRelative = 0.02;
constexpr double kLyapunovTolerance = 1e-10;
constexpr double kFiniteHorizonRelative = 0.01;
constexpr double kProfileTolerance = 1e-3;
constexpr double kSaddleBinRelative = 0.25;
constexpr double kLadderSeconds = 600.0;
constexpr double kConvexSlack = 1e-10;
constexpr double kJumpSlack = 1e-12;

constexpr int kInstances = 200;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec v1(double x) { return Vec::Constant(1, x); }

std::vector<CostMatrix> tree_instances() {
  gen::Engine rng(20240601);
  std::vector<CostMatrix> out;
  for (int i = 0; i < kInstances; ++i) {
    const std::size_t n = gen::index(rng, 2, 6);
    out.push_back(gen::reachable_cost_matrix(rng, n, i % 4 == 0 ? 0.0 : 0.3));
  }
  return out;
}

Outcome arborescence_oracle() {
  const auto instances = tree_instances();
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int mismatched = 0;
  for (const auto& m : instances) {
    for (std::size_t root = 0; root < m.size(); ++root) {
      const auto fast = min_arborescence(m, root).total;
      const auto slow = oracle::min_in_tree_cost_bruteforce(m, root).total;
      if (fast.is_finite() != slow.is_finite()) {
        ++mismatched;
        continue;
      }
      if (fast.is_finite()) worst = std::max(worst, std::abs(fast.value() - slow.value()));
    }
  }
  const double elapsed = seconds_since(t0);
  return {mismatched == 0 && worst <= kTreeTolerance && elapsed < kTreeSeconds,
          fmt("max |diff| %.3g over 200 instances, %.0f finiteness mismatches, %.2f s", worst, mismatched, elapsed)};
}

Outcome max_balance() {
  const auto instances = tree_instances();
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool zero_min = true;
  for (const auto& raw : instances) {
    const auto m = shortest_path_closure(raw);
    const auto rates = stationary_rates(m);
    double lowest = INFINITY;
    for (const auto& r : rates.rates) lowest = std::min(lowest, r.value());
    zero_min = zero_min && lowest == 0.0;
    worst = std::max(worst, max_balance_residual(rates, m));
  }
  const double elapsed = seconds_since(t0);
  return {zero_min && worst <= kBalanceTolerance && elapsed < kBalanceSeconds,
          fmt("max residual %.3g over 200 closed instances, %.2f s", worst, elapsed) +
              (zero_min ? ", min rate 0 everywhere" : ", some minimum rate is not 0")};
}

Outcome uniqueness() {
  gen::Engine rng(77);
  int tried = 0, broken = 0;
  double weakest = INFINITY;
  while (tried < 100) {
    const std::size_t n = gen::index(rng, 2, 6);
    const CostMatrix m = shortest_path_closure(gen::cost_matrix(rng, n));
    const auto rates = stationary_rates(m);
    std::vector<double> r;
    for (const auto& x : rates.rates) r.push_back(x.value());
    const std::size_t k = gen::index(rng, 0, n - 1);
    r[k] += (gen::index(rng, 0, 1) == 0 ? 1.0 : -1.0) * gen::uniform(rng, kPerturbationMin, 1.0);
    const double lowest = *std::min_element(r.begin(), r.end());
    std::vector<ExtCost> shifted;
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      shifted.push_back(ExtCost(r[i] - lowest));
      moved = std::max(moved, std::abs(shifted[i].value() - rates.rates[i].value()));
    }
    // Only perturbations that survive renormalization at the required size count.
    if (moved < kPerturbationMin) continue;
    ++tried;
    const double residual = max_balance_residual(make_rates(gen::labels(n), shifted), m);
    weakest = std::min(weakest, residual);
    if (residual > kImbalanceMin) ++broken;
  }
  return {broken == tried, fmt("%.0f of %.0f perturbations break balance, weakest residual %.3g", broken, tried, weakest)};
}

LocalModel random_gaussian(gen::Engine& rng, std::size_t d) {
  LocalModel m;
  m.dim = d;
  m.drift = linear_field(gen::matrix(rng, d, d), gen::vector(rng, d));
  m.diffusion = constant_matrix(gen::nondegenerate_sigma(rng, d));
  return m;
}

Outcome gaussian_dual() {
  gen::Engine rng(4);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = gen::index(rng, 1, 4);
    const auto m = random_gaussian(rng, d);
    const Vec y = gen::vector(rng, d);
    const Vec v = gen::vector(rng, d, -2.0, 2.0);
    const Vec r = v - m.drift(y);
    const double closed = 0.5 * r.dot(m.noise_covariance(y).ldlt().solve(r));
    worst = std::max(worst, std::abs(local_lagrangian(m, y, v).value - closed));
  }
  return {worst <= kGaussianTolerance, fmt("max |L - closed form| %.3g over 1000 instances", worst)};
}

Outcome double_well() {
  LocalModel m;
  m.dim = 1;
  m.drift = [](const Vec& y) -> Vec { return v1(y(0) - y(0) * y(0) * y(0)); };
  m.diffusion = constant_matrix(Mat::Identity(1, 1));
  const auto t0 = std::chrono::steady_clock::now();
  const double saddle = quasipotential(m, v1(-1.0), v1(0.0)).action.value;
  const double across = quasipotential(m, v1(-1.0), v1(1.0)).action.value;
  const double elapsed = seconds_since(t0);
  const double rel = std::abs(across - saddle) / saddle;
  return {saddle >= kSaddleLow && saddle <= kSaddleHigh && rel <= kAcrossRelative && elapsed < kWellSeconds,
          fmt("I(-1->0) = %.6f, I(-1->+1) = %.6f (rel %.3g), %.1f s", saddle, across, rel, elapsed)};
}

Outcome linear_cross_check() {
  const LinearModel ou{Mat::Constant(1, 1, -1.0), Mat::Identity(1, 1)};
  const auto local = ou.as_local_model();
  double worst = 0.0;
  for (double r : {0.5, 1.0}) {
    const double q = quasipotential(local, v1(0.0), v1(r)).action.value;
    const double exact = quadratic_rate(ou, v1(r));
    worst = std::max(worst, std::abs(q - exact) / exact);
  }
  const double residual = lyapunov_residual(ou, lyapunov_gramian(ou));
  const auto path = finite_horizon_path(ou, v1(1.0), 5.0, 500);
  const double numeric = path_action(local, path.path).value;
  // Scalar finite-horizon Gramian: (1 - e^{-2T}) / 2.
  const double formula = 0.5 / (0.5 * (1.0 - std::exp(-10.0)));
  const double path_rel = std::abs(numeric - formula) / formula;
  return {worst <= kOuRelative && residual <= kLyapunovTolerance && path_rel <= kFiniteHorizonRelative,
          fmt("OU rel err %.3g, Lyapunov residual %.3g, finite-horizon action rel err %.3g", worst, residual,
              path_rel)};
}

Outcome escape_limit() {
  Mat a(2, 2);
  a << -1.0, 1.0, 0.0, -1.0;
  const LinearModel m{a, Mat::Identity(2, 2)};
  const Vec r = Eigen::Vector2d(1.0, 0.0);
  const double horizon = 40.0;
  const std::size_t samples = 4000;
  const auto p = finite_horizon_path(m, r, horizon, samples);
  double worst = 0.0;
  for (std::size_t k = 0; k <= 500; ++k) {
    const Vec x = p.path.points.col(static_cast<Eigen::Index>(samples - k));
    worst = std::max(worst, (x - escape_profile_limit(m, r, 0.01 * static_cast<double>(k))).cwiseAbs().maxCoeff());
  }
  return {worst <= kProfileTolerance, fmt("sup over t in [0,5] = %.3g", worst)};
}

Outcome monte_carlo_trend() {
  const auto spec = load_problem(fs::path(LDRATE_SOURCE_DIR) / "specs" / "double_well_ladder.json");
  const auto t0 = std::chrono::steady_clock::now();
  const auto run = run_validate(spec, 1);
  const double elapsed = seconds_since(t0);
  const auto& last = run.ladder.back().empirical;
  std::size_t saddle = 0;
  for (std::size_t i = 0; i < last.centers.size(); ++i) {
    if (std::abs(last.centers[i](0)) < std::abs(last.centers[saddle](0))) saddle = i;
  }
  const bool have = last.rates[saddle].has_value() && run.predicted[saddle].has_value();
  const double emp = have ? *last.rates[saddle] : NAN;
  const double pred = have ? run.predicted[saddle]->value() : NAN;
  const double rel = std::abs(emp - pred) / pred;
  std::ostringstream trend;
  for (const auto& row : run.trend.rows) trend << " " << row.sup_norm;
  return {have && last.n == 80 && rel <= kSaddleBinRelative && run.trend_ok && elapsed < kLadderSeconds,
          fmt("saddle bin n=80: empirical %.4f vs predicted %.4f (rel %.3g), %.0f s", emp, pred, rel, elapsed) +
              "; sup errors" + trend.str() + (run.trend_ok ? "" : " (trend fails)")};
}

Outcome lagrangian_shape() {
  gen::Engine rng(5);
  int convex_bad = 0, jump_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = gen::index(rng, 1, 3);
    auto m = random_gaussian(rng, d);
    for (std::size_t j = gen::index(rng, 0, 2); j > 0; --j) {
      m.jumps.push_back({gen::uniform(rng, 0.1, 2.0), linear_field(0.2 * gen::matrix(rng, d, d), gen::vector(rng, d))});
    }
    const Vec y = gen::vector(rng, d);
    const Vec v1_ = gen::vector(rng, d, -2.0, 2.0);
    const Vec v2_ = gen::vector(rng, d, -2.0, 2.0);
    const double mid = local_lagrangian(m, y, 0.5 * (v1_ + v2_)).value;
    const double a1 = local_lagrangian(m, y, v1_).value;
    const double avg = 0.5 * (a1 + local_lagrangian(m, y, v2_).value);
    if (mid > avg + kConvexSlack * (1.0 + avg)) ++convex_bad;
    m.jumps.push_back({gen::uniform(rng, 0.1, 2.0), constant_field(gen::vector(rng, d))});
    if (a1 - local_lagrangian(m, y, v1_).value < -kJumpSlack) ++jump_bad;
  }
  return {convex_bad == 0 && jump_bad == 0,
          fmt("convexity violations %.0f / 1000, jump monotonicity violations %.0f / 1000", convex_bad, jump_bad)};
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& note) {
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.insert(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b)) names.insert(e.path().filename().string());
  for (const auto& name : names) {
    if (!fs::exists(a / name) || !fs::exists(b / name) || read_text(a / name) != read_text(b / name)) {
      note = name + " differs";
      return false;
    }
  }
  note = std::to_string(names.size()) + " files";
  return true;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LDRATE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("ldrate_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path specs = fs::path(LDRATE_SOURCE_DIR) / "specs";
  struct Case {
    std::string command;
    std::string spec;
  };
  const Case cases[] = {{"rates", "double_well.json"}, {"validate", "ou_small_ladder.json"}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const fs::path one = root / (c.command + "_1");
    const fs::path two = root / (c.command + "_2");
    const std::string base = c.command + " --spec " + (specs / c.spec).string() + " --seed 11 --out ";
    const int e1 = run_cli(base + one.string() + " --threads 1");
    const int e2 = run_cli(base + two.string() + " --threads 2");
    std::string note;
    const bool same = e1 == 0 && e2 == 0 && same_tree(one, two, note);
    if (e1 != 0 || e2 != 0) note = "exit codes " + std::to_string(e1) + ", " + std::to_string(e2);
    ok = ok && same;
    detail += (detail.empty() ? "" : "; ") + c.command + ": " + (same ? "identical " : "") + note;
  }
  fs::remove_all(root);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"arborescence totals match exhaustive enumeration", arborescence_oracle},
      {"tree rates satisfy max balance", max_balance},
      {"perturbed rates break balance", uniqueness},
      {"Gaussian dual matches the quadratic form", gaussian_dual},
      {"double-well quasipotential", double_well},
      {"linear cross-check", linear_cross_check},
      {"escape profile is the large-horizon limit", escape_limit},
      {"Monte Carlo ladder", monte_carlo_trend},
      {"Lagrangian convexity and jump monotonicity", lagrangian_shape},
      {"rates and validate outputs are byte-identical", determinism},
  };
  std::set<int> chosen;
  for (int i = 1; i < argc; ++i) chosen.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!chosen.empty() && !chosen.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d  %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
