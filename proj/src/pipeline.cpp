#include "ldrate/pipeline.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ldrate/action.hpp"
#include "ldrate/errors.hpp"
#include "ldrate/parallel.hpp"
#include "ldrate/tree_solver.hpp"

namespace ldrate {
namespace {

QuasipotentialOptions solver_options(const ProblemSpec& spec) {
  QuasipotentialOptions o;
  o.horizons = spec.action.horizons;
  o.segments = spec.action.nodes;
  o.equilibrium_tolerance = spec.tolerances.equilibrium;
  return o;
}

ExtCost as_cost(double value) {
  return std::isfinite(value) ? ExtCost(std::max(0.0, value)) : ExtCost::infinity();
}

std::vector<Equilibrium> equilibria_of(const ProblemSpec& spec) {
  return find_equilibria(spec.drift_field(), spec.search_box, spec.tolerances.root);
}

void check_quota(const ProblemSpec& spec, int unconverged) {
  if (unconverged > spec.action.failure_quota) {
    std::ostringstream msg;
    msg << unconverged << " quasipotential solve(s) did not converge (quota "
        << spec.action.failure_quota << "); try more nodes or a longer horizon sweep";
    throw ConvergenceError(msg.str());
  }
}

}  // namespace

StationaryRates RateReport::stationary() const {
  StationaryRates r;
  for (const auto& a : attractors) {
    r.labels.push_back(a.label);
    r.rates.push_back(a.rate);
  }
  return r;
}

std::vector<EquilibriumRow> run_attractors(const ProblemSpec& spec) {
  std::vector<EquilibriumRow> rows;
  for (const auto& e : equilibria_of(spec)) rows.push_back({e.position, e.classification});
  return rows;
}

RateReport run_rates(const ProblemSpec& spec, unsigned threads) {
  const auto equilibria = equilibria_of(spec);
  const auto stable = stable_attractors(equilibria);
  const LocalModel model = spec.model();
  const auto options = solver_options(spec);

  RateReport report;
  report.name = spec.name;
  report.dimension = spec.dimension;
  for (const auto& e : equilibria) report.equilibria.push_back({e.position, e.classification});
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < stable.size(); ++i) labels.push_back("A" + std::to_string(i));

  const std::size_t m = stable.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) pairs.emplace_back(i, j);
  std::vector<QuasipotentialValue> solved(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    solved[k] = quasipotential(model, stable[i].position, stable[j].position, options);
  });

  report.raw_costs = CostMatrix(labels);
  int unconverged = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    report.raw_costs.set(i, j, as_cost(solved[k].action.value));
    if (!solved[k].converged) ++unconverged;
    report.paths.push_back({labels[i], labels[j], solved[k].best_horizon, solved[k].best_path.points});
  }
  report.closed_costs = shortest_path_closure(report.raw_costs);
  const StationaryRates rates = stationary_rates(report.closed_costs, threads);
  for (std::size_t i = 0; i < m; ++i) report.attractors.push_back({labels[i], stable[i].position, rates.rates[i]});
  report.max_balance_residual = max_balance_residual(rates, report.closed_costs);

  report.provenance.tolerances = spec.tolerances;
  report.provenance.horizons = spec.action.horizons;
  report.provenance.nodes = spec.action.nodes;
  report.provenance.failure_quota = spec.action.failure_quota;
  if (spec.simulation) report.provenance.seed = spec.simulation->seed;

  report.points = evaluate_points(spec, report, spec.evaluation_points, threads, &report.paths, &unconverged);
  report.provenance.unconverged = unconverged;

  check_quota(spec, unconverged);
  if (report.max_balance_residual > spec.tolerances.balance) {
    std::ostringstream msg;
    msg << "max balance residual " << report.max_balance_residual << " exceeds "
        << spec.tolerances.balance;
    throw BalanceError(msg.str());
  }
  return report;
}

std::vector<PointRate> evaluate_points(const ProblemSpec& spec, const RateReport& report,
                                       std::span<const Vec> points, unsigned threads,
                                       std::vector<PathRecord>* paths, int* unconverged) {
  const LocalModel model = spec.model();
  const auto options = solver_options(spec);
  std::vector<std::size_t> order(report.attractors.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.attractors[a].rate < report.attractors[b].rate;
  });

  struct Slot {
    PointRate rate;
    Path path;
    int unconverged = 0;
  };
  std::vector<Slot> slots(points.size());
  parallel_for(points.size(), threads, [&](std::size_t p) {
    Slot& slot = slots[p];
    slot.rate.label = "P" + std::to_string(p);
    slot.rate.position = points[p];
    slot.rate.rate = ExtCost::infinity();
    for (std::size_t a : order) {
      const AttractorRow& row = report.attractors[a];
      if (!(row.rate < slot.rate.rate)) continue;
      const auto q = quasipotential(model, row.position, points[p], options);
      if (!q.converged) ++slot.unconverged;
      const ExtCost total = row.rate + as_cost(q.action.value);
      if (total < slot.rate.rate) {
        slot.rate.rate = total;
        slot.rate.via = row.label;
        slot.rate.best_horizon = q.best_horizon;
        slot.path = q.best_path;
      }
    }
  });

  std::vector<PointRate> out;
  for (auto& slot : slots) {
    if (unconverged != nullptr) *unconverged += slot.unconverged;
    if (paths != nullptr && !slot.rate.via.empty()) {
      paths->push_back({slot.rate.via, slot.rate.label, slot.path.horizon, slot.path.points});
    }
    out.push_back(std::move(slot.rate));
  }
  return out;
}

ValidationRun run_validate(const ProblemSpec& spec, unsigned threads) {
  if (!spec.simulation) throw SpecError("validate: the problem has no simulation block");
  const SimulationSpec& sim = *spec.simulation;

  ValidationRun run;
  run.seed = sim.seed;
  run.min_count = std::max<std::uint64_t>(1, sim.min_count);
  run.rates = run_rates(spec, threads);

  const LocalModel model = spec.model();
  const std::size_t steps = sim.n_values.size();
  std::vector<Histogram> histograms(steps * sim.replicas, Histogram(sim.bins));
  parallel_for(histograms.size(), threads, [&](std::size_t task) {
    SimConfig config;
    config.n = sim.n_values[task / sim.replicas];
    config.dt = sim.dt;
    config.burn_in = sim.burn_in;
    config.horizon = sim.horizon;
    config.seed = sim.seed;
    config.replica = task;
    config.initial = sim.initial;
    config.stride = sim.stride;
    Histogram& h = histograms[task];
    simulate(model, config, [&h](const Vec& x) { h.add(x); });
  });

  std::vector<EmpiricalRate> empirical;
  for (std::size_t i = 0; i < steps; ++i) {
    Histogram merged(sim.bins);
    for (std::size_t r = 0; r < sim.replicas; ++r) merged.merge(histograms[i * sim.replicas + r]);
    if (merged.total() < kMinEmpiricalSamples) {
      std::ostringstream msg;
      msg << "validate: n = " << sim.n_values[i] << " produced " << merged.total()
          << " samples; at least " << kMinEmpiricalSamples
          << " are needed (lengthen the horizon or lower the stride)";
      throw SpecError(msg.str());
    }
    empirical.push_back(empirical_rate(merged, sim.n_values[i]));
  }

  const std::size_t bins = sim.bins.bin_count();
  std::vector<std::size_t> wanted;
  for (std::size_t b = 0; b < bins; ++b) {
    const bool seen = std::any_of(empirical.begin(), empirical.end(),
                                  [&](const EmpiricalRate& e) { return e.counts[b] >= run.min_count; });
    if (seen) wanted.push_back(b);
  }
  std::vector<Vec> centers;
  for (std::size_t b : wanted) centers.push_back(sim.bins.center(b));
  int unconverged = run.rates.provenance.unconverged;
  const auto values = evaluate_points(spec, run.rates, centers, threads, nullptr, &unconverged);
  check_quota(spec, unconverged);

  run.predicted.assign(bins, std::nullopt);
  std::vector<ExtCost> per_bin(bins, ExtCost::infinity());
  for (std::size_t k = 0; k < wanted.size(); ++k) {
    run.predicted[wanted[k]] = values[k].rate;
    per_bin[wanted[k]] = values[k].rate;
  }
  for (auto& e : empirical) {
    LadderStep step{std::move(e), {}};
    step.comparison = validation_report(per_bin, step.empirical, run.min_count);
    run.trend.rows.push_back({step.empirical.n, step.comparison.sup_norm, step.comparison.bins.size()});
    run.ladder.push_back(std::move(step));
  }
  run.trend_ok = run.trend.nonincreasing(sim.trend_margin, sim.allowed_inversions);
  return run;
}

LinearReport run_linear(const ProblemSpec& spec) {
  if (!spec.linear) throw SpecError("linear: the problem has no linear block");
  const LinearSpec& lin = *spec.linear;
  const auto equilibria = equilibria_of(spec);
  if (lin.attractor >= equilibria.size()) {
    std::ostringstream msg;
    msg << "linear: equilibrium index " << lin.attractor << " out of range (found "
        << equilibria.size() << ")";
    throw SpecError(msg.str());
  }
  const Equilibrium& eq = equilibria[lin.attractor];
  if (eq.classification != Stability::stable) {
    throw SpecError("linear: equilibrium " + std::to_string(lin.attractor) + " is " +
                    to_string(eq.classification) + "; only stable equilibria can be linearized");
  }

  LinearReport out;
  out.name = spec.name;
  out.equilibrium = lin.attractor;
  out.position = eq.position;
  out.drift_jacobian = eq.jacobian;
  out.noise_covariance = spec.model().noise_covariance(eq.position);
  const LinearModel model{out.drift_jacobian, out.noise_covariance};
  try {
    model.validate();
  } catch (const std::domain_error& e) {
    throw SpecError(std::string("linear: ") + e.what());
  }
  out.gramian = lyapunov_gramian(model);
  out.lyapunov_residual = lyapunov_residual(model, out.gramian);

  const auto samples = lin.profile_samples;
  for (std::size_t k = 0; k < lin.offsets.size(); ++k) {
    const Vec& r = lin.offsets[k];
    const std::string label = "R" + std::to_string(k);
    out.offsets.push_back({label, r, quadratic_rate(out.gramian, r)});
    EscapeProfile profile;
    profile.label = label;
    profile.points.resize(r.size(), static_cast<Eigen::Index>(samples + 1));
    for (std::size_t s = 0; s <= samples; ++s) {
      const double t = lin.profile_horizon * static_cast<double>(s) / static_cast<double>(samples);
      profile.times.push_back(t);
      profile.points.col(static_cast<Eigen::Index>(s)) = escape_profile_limit(model, out.gramian, r, t);
    }
    out.profiles.push_back(std::move(profile));
  }
  return out;
}

}  // namespace ldrate
