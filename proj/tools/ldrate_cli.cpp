// ldrate: command-line driver.
//
//   ldrate attractors --spec problem.json --out dir
//   ldrate rates      --spec problem.json --out dir [--threads N]
//   ldrate validate   --spec problem.json --out dir [--threads N] [--seed S]
//   ldrate linear     --spec problem.json --out dir
//
// Exit codes: 0 success, 2 bad problem file (including no stable attractor or
// a missing simulation/linear block), 3 solver non-convergence, 4 balance
// check failure, 1 anything else.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <thread>

#include "ldrate/errors.hpp"
#include "ldrate/pipeline.hpp"
#include "ldrate/problem.hpp"
#include "ldrate/report_io.hpp"

namespace {

struct Options {
  std::string spec;
  std::string out;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
};

ldrate::ProblemSpec load(const Options& o) {
  auto spec = ldrate::load_problem(o.spec);
  if (o.seed && spec.simulation) spec.simulation->seed = *o.seed;
  return spec;
}

unsigned threads(const Options& o) {
  if (o.threads > 0) return o.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

void print_rates(const ldrate::RateReport& r) {
  for (const auto& a : r.attractors) {
    std::cout << a.label << "  I = " << a.rate.value() << "\n";
  }
  std::cout << "max balance residual " << r.max_balance_residual << "\n";
}

int run(const std::string& command, const Options& o) {
  using namespace ldrate;
  if (command == "attractors") {
    const auto rows = run_attractors(load(o));
    write_attractor_outputs(o.out, rows);
    for (const auto& e : rows) {
      std::cout << to_string(e.classification) << "  " << e.position.transpose() << "\n";
    }
  } else if (command == "rates") {
    const auto report = run_rates(load(o), threads(o));
    write_rate_outputs(o.out, report);
    print_rates(report);
  } else if (command == "validate") {
    const auto run = run_validate(load(o), threads(o));
    write_validation_outputs(o.out, run);
    print_rates(run.rates);
    for (const auto& row : run.trend.rows) {
      std::cout << "n = " << row.n << "  sup error " << row.sup_norm << " over " << row.compared_bins
                << " bins\n";
    }
    if (!run.trend_ok) std::cerr << "warning: sup-norm error does not decrease along the n ladder\n";
  } else if (command == "linear") {
    const auto report = run_linear(load(o));
    write_linear_outputs(o.out, report);
    for (const auto& row : report.offsets) {
      std::cout << row.label << "  r = " << row.offset.transpose() << "  I = " << row.rate << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-deviation rates of invariant measures of small-noise jump diffusions"};
  app.require_subcommand(1);
  Options options;
  std::uint64_t seed = 0;
  for (const char* name : {"attractors", "rates", "validate", "linear"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--spec", options.spec, "problem description (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", options.out, "output directory")->required();
    sub->add_option("--threads", options.threads, "worker threads (0 = all cores)");
    sub->add_option("--seed", seed, "overrides simulation.seed")
        ->each([&](const std::string&) { options.seed = seed; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, options);
  } catch (const ldrate::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ldrate::NoAttractorError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ldrate::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ldrate::BalanceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
