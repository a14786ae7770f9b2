#include "ldrate/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ldrate/errors.hpp"

namespace ldrate {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void SimConfig::validate() const {
  if (n < 1) throw std::invalid_argument("simulation: n must be at least 1");
  if (!(dt > 0.0)) throw std::invalid_argument("simulation: dt must be positive");
  if (!(burn_in >= 0.0) || !(burn_in < horizon)) {
    throw std::invalid_argument("simulation: need 0 <= burn_in < horizon");
  }
  if (stride < 1) throw std::invalid_argument("simulation: stride must be at least 1");
  if (initial.size() == 0) throw std::invalid_argument("simulation: initial state missing");
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t replica) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(~replica)));
}

std::size_t simulate(const LocalModel& model, const SimConfig& config, const SampleSink& sink) {
  config.validate();
  if (config.initial.size() != static_cast<Eigen::Index>(model.dim)) {
    throw std::invalid_argument("simulation: initial state has the wrong dimension");
  }
  auto engine = make_engine(config.seed, config.replica);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double n = static_cast<double>(config.n);
  const double dt = config.dt;
  const double noise_scale = std::sqrt(dt / n);
  const auto steps = static_cast<std::size_t>(std::llround(config.horizon / dt));
  const auto burn_steps = static_cast<std::size_t>(std::llround(config.burn_in / dt));

  std::vector<std::poisson_distribution<long long>> arrivals;
  std::vector<double> mean_arrivals;
  for (const auto& jump : model.jumps) {
    const double mean = n * jump.rate * dt;
    mean_arrivals.push_back(mean);
    arrivals.emplace_back(mean);
  }

  Vec x = config.initial;
  Vec xi;
  std::size_t emitted = 0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const Mat sigma = model.diffusion(x);
    xi.resize(sigma.cols());
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = normal(engine);
    Vec next = x + model.drift(x) * dt + noise_scale * (sigma * xi);
    for (std::size_t j = 0; j < model.jumps.size(); ++j) {
      const double count = static_cast<double>(arrivals[j](engine));
      next += ((count - mean_arrivals[j]) / n) * model.jumps[j].map(x);
    }
    x = std::move(next);
    if (!x.allFinite() || x.norm() > kBlowupRadius) {
      std::ostringstream msg;
      msg << "simulation left the blowup radius at t = " << static_cast<double>(k) * dt
          << "; the drift is probably not confining (y.b(y) <= -kappa |y|^2 fails)";
      throw BlowupError(msg.str());
    }
    if (k > burn_steps && (k - burn_steps) % config.stride == 0) {
      sink(x);
      ++emitted;
    }
  }
  return emitted;
}

std::vector<Vec> simulate(const LocalModel& model, const SimConfig& config) {
  std::vector<Vec> out;
  simulate(model, config, [&](const Vec& x) { out.push_back(x); });
  return out;
}

void HistogramGrid::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size() ||
      counts.size() != static_cast<std::size_t>(lower.size())) {
    throw std::invalid_argument("histogram grid: inconsistent dimensions");
  }
  if (!(lower.array() < upper.array()).all()) {
    throw std::invalid_argument("histogram grid: need lower < upper");
  }
  for (std::size_t c : counts)
    if (c == 0) throw std::invalid_argument("histogram grid: bin count must be positive");
}

std::size_t HistogramGrid::bin_count() const {
  std::size_t total = 1;
  for (std::size_t c : counts) total *= c;
  return total;
}

Vec HistogramGrid::width() const {
  Vec w(lower.size());
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    w(i) = (upper(i) - lower(i)) / static_cast<double>(counts[static_cast<std::size_t>(i)]);
  }
  return w;
}

Vec HistogramGrid::center(std::size_t bin) const {
  const Vec w = width();
  Vec c(lower.size());
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    const std::size_t per_axis = counts[static_cast<std::size_t>(i)];
    c(i) = lower(i) + (static_cast<double>(bin % per_axis) + 0.5) * w(i);
    bin /= per_axis;
  }
  return c;
}

std::optional<std::size_t> HistogramGrid::locate(const Vec& x) const {
  std::size_t bin = 0;
  std::size_t stride = 1;
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    const std::size_t per_axis = counts[static_cast<std::size_t>(i)];
    if (!(x(i) >= lower(i)) || !(x(i) < upper(i))) return std::nullopt;
    const double pos = (x(i) - lower(i)) / (upper(i) - lower(i)) * static_cast<double>(per_axis);
    const auto index = std::min(static_cast<std::size_t>(pos), per_axis - 1);
    bin += index * stride;
    stride *= per_axis;
  }
  return bin;
}

Histogram::Histogram(HistogramGrid grid) : grid_(std::move(grid)) {
  grid_.validate();
  counts_.assign(grid_.bin_count(), 0);
}

void Histogram::add(const Vec& x) {
  ++total_;
  if (auto bin = grid_.locate(x)) {
    ++counts_[*bin];
  } else {
    ++outside_;
  }
}

void Histogram::merge(const Histogram& other) {
  if (other.counts_.size() != counts_.size() || other.grid_.lower != grid_.lower ||
      other.grid_.upper != grid_.upper || other.grid_.counts != grid_.counts) {
    throw std::invalid_argument("histogram merge: grids differ");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
  outside_ += other.outside_;
}

EmpiricalRate empirical_rate(const Histogram& histogram, int n) {
  if (n < 1) throw std::invalid_argument("empirical_rate: n must be at least 1");
  if (histogram.total() < kMinEmpiricalSamples) {
    throw std::invalid_argument("empirical_rate: at least 10^4 samples required");
  }
  const auto& grid = histogram.grid();
  EmpiricalRate out;
  out.n = n;
  out.counts = histogram.counts();
  out.rates.resize(out.counts.size());
  const double total = static_cast<double>(histogram.total());
  double lowest = std::numeric_limits<double>::infinity();
  std::size_t occupied = 0;
  for (std::size_t b = 0; b < out.counts.size(); ++b) {
    out.centers.push_back(grid.center(b));
    if (out.counts[b] == 0) continue;
    ++occupied;
    const double rate = -std::log(static_cast<double>(out.counts[b]) / total) / n;
    out.rates[b] = rate;
    lowest = std::min(lowest, rate);
  }
  for (auto& r : out.rates)
    if (r) *r -= lowest;
  out.degenerate = occupied <= 1 && histogram.outside() == 0;
  return out;
}

EmpiricalRate empirical_rate(std::span<const Vec> samples, const HistogramGrid& grid, int n) {
  Histogram h(grid);
  for (const Vec& x : samples) h.add(x);
  return empirical_rate(h, n);
}

double total_variation(const Histogram& a, const Histogram& b) {
  if (a.counts().size() != b.counts().size()) throw std::invalid_argument("histogram sizes differ");
  if (a.total() == 0 || b.total() == 0) throw std::invalid_argument("empty histogram");
  const double ta = static_cast<double>(a.total());
  const double tb = static_cast<double>(b.total());
  double sum = std::abs(static_cast<double>(a.outside()) / ta - static_cast<double>(b.outside()) / tb);
  for (std::size_t i = 0; i < a.counts().size(); ++i) {
    sum += std::abs(static_cast<double>(a.counts()[i]) / ta - static_cast<double>(b.counts()[i]) / tb);
  }
  return 0.5 * sum;
}

ValidationReport validation_report(std::span<const ExtCost> predicted_per_bin,
                                   const EmpiricalRate& empirical, std::uint64_t min_count) {
  if (predicted_per_bin.size() != empirical.rates.size()) {
    throw std::invalid_argument("validation_report: one prediction per bin required");
  }
  ValidationReport out;
  out.n = empirical.n;
  std::vector<std::size_t> compared;
  double shift = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < empirical.rates.size(); ++b) {
    if (empirical.censored(b) || empirical.counts[b] < std::max<std::uint64_t>(1, min_count)) continue;
    if (!predicted_per_bin[b].is_finite()) continue;
    compared.push_back(b);
    shift = std::min(shift, predicted_per_bin[b].value());
  }
  for (std::size_t b : compared) {
    BinComparison row;
    row.center = empirical.centers[b];
    row.count = empirical.counts[b];
    row.empirical = *empirical.rates[b];
    row.predicted = predicted_per_bin[b].value() - shift;
    row.abs_error = std::abs(row.empirical - row.predicted);
    if (row.predicted > 0.0) row.rel_error = row.abs_error / row.predicted;
    out.sup_norm = std::max(out.sup_norm, row.abs_error);
    out.bins.push_back(std::move(row));
  }
  return out;
}

ValidationReport validation_report(const std::function<ExtCost(const Vec&)>& predicted,
                                   const EmpiricalRate& empirical, std::uint64_t min_count) {
  std::vector<ExtCost> values;
  values.reserve(empirical.centers.size());
  for (const Vec& c : empirical.centers) values.push_back(predicted(c));
  return validation_report(values, empirical, min_count);
}

int ErrorTrend::inversions() const {
  int count = 0;
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (rows[k].sup_norm > rows[k - 1].sup_norm) ++count;
  return count;
}

double ErrorTrend::worst_growth() const {
  double worst = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double prev = rows[k - 1].sup_norm;
    const double cur = rows[k].sup_norm;
    if (cur <= prev) continue;
    worst = std::max(worst, prev > 0.0 ? cur / prev - 1.0 : std::numeric_limits<double>::infinity());
  }
  return worst;
}

}  // namespace ldrate
