#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "ldrate/errors.hpp"
#include "ldrate/pipeline.hpp"
#include "ldrate/report_io.hpp"

using namespace ldrate;
namespace fs = std::filesystem;

namespace {

ProblemSpec example(const std::string& name) {
  return load_problem(fs::path(LDRATE_SOURCE_DIR) / "specs" / (name + ".json"));
}

// For b = -U' with unit noise the stationary rate is 2 (U(x) - min U).
double potential(const ProblemSpec& spec, double x) { return evaluate(spec.drift.potential, Vec::Constant(1, x)); }

double global_min(const ProblemSpec& spec) {
  double best = INFINITY;
  for (double x = -3.0; x <= 3.0; x += 1e-5) best = std::min(best, potential(spec, x));
  return best;
}

const RateReport& double_well_report() {
  static const RateReport report = run_rates(example("double_well"));
  return report;
}

fs::path scratch(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("ldrate_test_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(LDRATE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("attractor listing of the double well") {
  const auto rows = run_attractors(example("double_well"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].classification == Stability::stable);
  CHECK(rows[1].classification == Stability::unstable);
  CHECK(rows[2].classification == Stability::stable);
  CHECK(identical(parse_equilibria_json(equilibria_json(rows)), rows));
}

TEST_CASE("OU rates are x squared") {
  const auto report = run_rates(example("ou_1d"));
  REQUIRE(report.attractors.size() == 1);
  CHECK(report.attractors[0].rate == ExtCost(0.0));
  for (const auto& p : report.points) {
    const double x = p.position(0);
    CHECK(p.rate.value() == doctest::Approx(x * x).epsilon(0.1).scale(1e-3));
  }
}

TEST_CASE("gradient wells against twice the potential difference") {
  for (const std::string name : {"double_well", "asymmetric_well"}) {
    const auto spec = example(name);
    const double lowest = global_min(spec);
    const auto report = name == "double_well" ? double_well_report() : run_rates(spec);
    REQUIRE(report.attractors.size() == 2);
    CHECK(report.max_balance_residual <= 1e-9);
    for (const auto& a : report.attractors) {
      const double oracle = 2.0 * (potential(spec, a.position(0)) - lowest);
      CHECK(a.rate.value() == doctest::Approx(oracle).epsilon(0.1).scale(1e-2));
    }
    for (const auto& p : report.points) {
      const double oracle = 2.0 * (potential(spec, p.position(0)) - lowest);
      CHECK(p.rate.value() == doctest::Approx(oracle).epsilon(0.1));
      CHECK_FALSE(p.via.empty());
    }
    // Rates round-trip exactly through JSON and CSV.
    const auto back = parse_rate_report_json(rate_report_json(report));
    RateReport without_paths = report;
    without_paths.paths.clear();
    CHECK(identical(back, without_paths));
    CHECK(parse_rates_csv(rates_csv(rate_rows(report))) == rate_rows(report));
    CHECK(identical(parse_paths_csv(paths_csv(report.paths)), report.paths));
  }
}

TEST_CASE("extra points reuse a solved report") {
  const auto spec = example("double_well");
  const auto& report = double_well_report();
  const std::vector<Vec> extra{report.attractors[0].position, report.attractors[1].position};
  const auto points = evaluate_points(spec, report, extra);
  REQUIRE(points.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(points[i].via == report.attractors[i].label);
    CHECK(points[i].rate == report.attractors[i].rate);
  }
}

TEST_CASE("linear report around the double-well attractor") {
  const auto report = run_linear(example("double_well"));
  CHECK(report.position(0) == doctest::Approx(-1.0));
  CHECK(report.drift_jacobian(0, 0) == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(report.gramian(0, 0) == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(report.lyapunov_residual <= 1e-10);
  for (const auto& row : report.offsets) {
    const double r = row.offset(0);
    CHECK(row.rate == doctest::Approx(2.0 * r * r).epsilon(1e-6));
  }
  CHECK(identical(parse_linear_report_json(linear_report_json(report)), report));
}

TEST_CASE("linear report of OU: kappa r squared, zero at the origin") {
  const auto report = run_linear(example("ou_1d"));
  bool saw_zero = false;
  for (const auto& row : report.offsets) {
    const double r = row.offset(0);
    CHECK(row.rate == doctest::Approx(r * r).epsilon(1e-12));
    if (r == 0.0) {
      saw_zero = true;
      CHECK(row.rate == 0.0);
    }
  }
  CHECK(saw_zero);
  for (const auto& profile : report.profiles) {
    REQUIRE(profile.times.size() >= 2);
    CHECK(profile.times.front() == 0.0);
    // Scalar case: profile is r e^{-t}.
    const double r = profile.points(0, 0);
    for (std::size_t k = 0; k < profile.times.size(); ++k) {
      CHECK(profile.points(0, static_cast<Eigen::Index>(k)) ==
            doctest::Approx(r * std::exp(-profile.times[k])).epsilon(1e-10).scale(1e-12));
    }
  }
}

TEST_CASE("missing blocks and bad indices are problem-file errors") {
  CHECK_THROWS_AS(run_validate(example("double_well")), SpecError);
  auto spec = example("double_well_ladder");
  spec.linear.reset();
  CHECK_THROWS_AS(run_linear(spec), SpecError);
  spec = example("double_well");
  spec.linear->attractor = 1;  // the repeller at 0
  CHECK_THROWS_AS(run_linear(spec), SpecError);
  spec.linear->attractor = 7;
  CHECK_THROWS_AS(run_linear(spec), SpecError);
}

TEST_CASE("outward drift has no attractor") {
  auto spec = example("ou_1d");
  spec.drift.matrix(0, 0) = 1.0;
  CHECK_THROWS_AS(run_rates(spec), NoAttractorError);
}

TEST_CASE("small validation ladder is reproducible and round-trips") {
  const auto spec = example("ou_small_ladder");
  const auto a = run_validate(spec);
  const auto b = run_validate(spec, 2);
  REQUIRE(a.ladder.size() == 2);
  CHECK(empirical_rows(a) == empirical_rows(b));
  CHECK(identical(summarize(a), summarize(b)));
  CHECK(identical(parse_validation_json(validation_json(summarize(a))), summarize(a)));
  CHECK(parse_empirical_csv(empirical_csv(empirical_rows(a))) == empirical_rows(a));
  for (const auto& step : a.ladder) {
    CHECK(step.comparison.bins.size() > 0);
    CHECK(step.comparison.sup_norm < 0.5);
  }
}

TEST_CASE("written outputs read back identically") {
  const auto dir = scratch("io");
  const auto report = run_rates(example("ou_1d"));
  write_rate_outputs(dir, report);
  CHECK(identical(read_rate_outputs(dir), report));
  CHECK(fs::exists(dir / "rates.csv"));
  fs::remove_all(dir);
}

TEST_CASE("command line: exit codes and byte-identical reruns") {
  const auto dir = scratch("cli");
  const std::string spec = (fs::path(LDRATE_SOURCE_DIR) / "specs" / "ou_small_ladder.json").string();
  const std::string out1 = (dir / "one").string();
  const std::string out2 = (dir / "two").string();
  for (const char* command : {"rates", "validate"}) {
    REQUIRE(cli(std::string(command) + " --spec " + spec + " --out " + out1) == 0);
    REQUIRE(cli(std::string(command) + " --spec " + spec + " --out " + out2 + " --threads 2") == 0);
    for (const auto& entry : fs::directory_iterator(out1)) {
      const auto other = fs::path(out2) / entry.path().filename();
      REQUIRE(fs::exists(other));
      CHECK(read_text(entry.path()) == read_text(other));
    }
  }
  CHECK(cli("attractors --spec " + spec + " --out " + out1) == 0);
  CHECK(cli("validate --spec " + spec + " --out " + out1 + " --seed 8") == 0);
  CHECK(read_text(fs::path(out1) / "report.json") != read_text(fs::path(out2) / "report.json"));

  CHECK(cli("rates --spec /nonexistent.json --out " + out1) == 2);
  CHECK(cli("rates --out " + out1) == 2);
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("--help") == 0);

  const auto bad = dir / "bad.json";
  write_text(bad, R"({"name": "x", "dimension": 1})");
  CHECK(cli("rates --spec " + bad.string() + " --out " + out1) == 2);

  const auto outward = dir / "outward.json";
  write_text(outward, R"({"name": "out", "dimension": 1, "drift": {"kind": "linear", "matrix": [[1.0]]},
    "diffusion": [[1.0]], "search_box": {"lower": [-1.0], "upper": [1.0], "resolution": 3}})");
  CHECK(cli("rates --spec " + outward.string() + " --out " + out1) == 2);
  CHECK(cli("validate --spec " + (fs::path(LDRATE_SOURCE_DIR) / "specs" / "ou_1d.json").string() + " --out " + out1) == 2);
  fs::remove_all(dir);
}
