#include "ldrate/problem.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ldrate/errors.hpp"

namespace ldrate {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw SpecError(where + ": " + what);
}

void expect_object(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) fail(where, "unknown field '" + key + "'");
  }
}

const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail(where, "missing field '" + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "expected a finite number");
  return v;
}

double positive(const json& j, const std::string& where) {
  const double v = number(j, where);
  if (!(v > 0.0)) fail(where, "must be positive");
  return v;
}

std::int64_t integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<std::int64_t>();
}

std::size_t count(const json& j, const std::string& where, std::int64_t minimum) {
  const auto v = integer(j, where);
  if (v < minimum) fail(where, "must be at least " + std::to_string(minimum));
  return static_cast<std::size_t>(v);
}

Vec vector(const json& j, const std::string& where, std::size_t expected) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  if (expected != 0 && j.size() != expected) {
    fail(where, "expected " + std::to_string(expected) + " entries");
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(j[i], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

Mat matrix(const json& j, const std::string& where, std::size_t rows, std::size_t cols) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of rows");
  if (rows != 0 && j.size() != rows) fail(where, "expected " + std::to_string(rows) + " rows");
  const std::size_t width = j[0].is_array() ? j[0].size() : 0;
  if (width == 0 || (cols != 0 && width != cols)) fail(where, "rows have the wrong length");
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vec row = vector(j[r], where + "[" + std::to_string(r) + "]", width);
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

Polynomial polynomial(const json& j, const std::string& where, std::size_t dim) {
  if (!j.is_array()) fail(where, "expected an array of monomials");
  Polynomial p;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string at = where + "[" + std::to_string(k) + "]";
    expect_object(j[k], at, {"coefficient", "powers"});
    Monomial m;
    m.coefficient = number(field(j[k], "coefficient", at), at + ".coefficient");
    const json& powers = field(j[k], "powers", at);
    if (!powers.is_array() || powers.size() != dim) {
      fail(at + ".powers", "expected " + std::to_string(dim) + " exponents");
    }
    for (std::size_t i = 0; i < dim; ++i) {
      m.powers.push_back(static_cast<int>(count(powers[i], at + ".powers", 0)));
    }
    p.push_back(std::move(m));
  }
  return p;
}

std::vector<Vec> point_list(const json& j, const std::string& where, std::size_t dim) {
  if (!j.is_array()) fail(where, "expected an array of points");
  std::vector<Vec> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(vector(j[k], where + "[" + std::to_string(k) + "]", dim));
  }
  return out;
}

DriftSpec parse_drift(const json& j, std::size_t dim) {
  const std::string where = "drift";
  if (!j.is_object()) fail(where, "expected an object");
  const std::string kind = field(j, "kind", where).is_string() ? j.at("kind").get<std::string>() : "";
  DriftSpec d;
  if (kind == "linear") {
    expect_object(j, where, {"kind", "matrix", "offset"});
    d.kind = DriftKind::linear;
    d.matrix = matrix(field(j, "matrix", where), where + ".matrix", dim, dim);
    d.offset = j.contains("offset") ? vector(j.at("offset"), where + ".offset", dim)
                                    : Vec(Vec::Zero(static_cast<Eigen::Index>(dim)));
  } else if (kind == "gradient_polynomial") {
    expect_object(j, where, {"kind", "potential"});
    d.kind = DriftKind::gradient_polynomial;
    d.potential = polynomial(field(j, "potential", where), where + ".potential", dim);
  } else if (kind == "polynomial") {
    expect_object(j, where, {"kind", "components"});
    d.kind = DriftKind::polynomial;
    const json& comps = field(j, "components", where);
    if (!comps.is_array() || comps.size() != dim) {
      fail(where + ".components", "expected one polynomial per dimension");
    }
    for (std::size_t i = 0; i < dim; ++i) {
      d.components.push_back(
          polynomial(comps[i], where + ".components[" + std::to_string(i) + "]", dim));
    }
  } else {
    fail(where + ".kind", "expected one of linear, gradient_polynomial, polynomial");
  }
  return d;
}

HistogramGrid parse_bins(const json& j, const std::string& where, std::size_t dim) {
  expect_object(j, where, {"lower", "upper", "counts"});
  HistogramGrid g;
  g.lower = vector(field(j, "lower", where), where + ".lower", dim);
  g.upper = vector(field(j, "upper", where), where + ".upper", dim);
  const json& counts = field(j, "counts", where);
  if (!counts.is_array() || counts.size() != dim) fail(where + ".counts", "one count per axis");
  for (const json& c : counts) g.counts.push_back(count(c, where + ".counts", 1));
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  return g;
}

SimulationSpec parse_simulation(const json& j, std::size_t dim) {
  const std::string where = "simulation";
  expect_object(j, where,
                {"n", "dt", "burn_in", "horizon", "seed", "stride", "replicas", "initial", "bins",
                 "min_count", "trend_margin", "allowed_inversions"});
  SimulationSpec s;
  const json& ns = field(j, "n", where);
  if (!ns.is_array() || ns.empty()) fail(where + ".n", "expected a nonempty array of integers");
  for (const json& n : ns) s.n_values.push_back(static_cast<int>(count(n, where + ".n", 1)));
  if (!std::is_sorted(s.n_values.begin(), s.n_values.end())) fail(where + ".n", "must be increasing");
  s.dt = positive(field(j, "dt", where), where + ".dt");
  s.horizon = positive(field(j, "horizon", where), where + ".horizon");
  if (j.contains("burn_in")) s.burn_in = number(j.at("burn_in"), where + ".burn_in");
  if (s.burn_in < 0.0 || s.burn_in >= s.horizon) fail(where + ".burn_in", "need 0 <= burn_in < horizon");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail(where + ".seed", "expected a nonnegative integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("stride")) s.stride = count(j.at("stride"), where + ".stride", 1);
  if (j.contains("replicas")) s.replicas = count(j.at("replicas"), where + ".replicas", 1);
  s.initial = vector(field(j, "initial", where), where + ".initial", dim);
  s.bins = parse_bins(field(j, "bins", where), where + ".bins", dim);
  if (j.contains("min_count")) s.min_count = count(j.at("min_count"), where + ".min_count", 1);
  if (j.contains("trend_margin")) {
    s.trend_margin = number(j.at("trend_margin"), where + ".trend_margin");
    if (s.trend_margin < 0.0) fail(where + ".trend_margin", "must be nonnegative");
  }
  if (j.contains("allowed_inversions")) {
    s.allowed_inversions = static_cast<int>(count(j.at("allowed_inversions"), where + ".allowed_inversions", 0));
  }
  return s;
}

LinearSpec parse_linear(const json& j, std::size_t dim) {
  const std::string where = "linear";
  expect_object(j, where, {"attractor", "offsets", "profile_horizon", "profile_samples"});
  LinearSpec l;
  if (j.contains("attractor")) l.attractor = count(j.at("attractor"), where + ".attractor", 0);
  l.offsets = point_list(field(j, "offsets", where), where + ".offsets", dim);
  if (j.contains("profile_horizon")) {
    l.profile_horizon = positive(j.at("profile_horizon"), where + ".profile_horizon");
  }
  if (j.contains("profile_samples")) {
    l.profile_samples = count(j.at("profile_samples"), where + ".profile_samples", 1);
  }
  return l;
}

std::vector<Vec> parse_evaluation(const json& j, std::size_t dim) {
  const std::string where = "evaluation";
  expect_object(j, where, {"points", "grid"});
  std::vector<Vec> points;
  if (j.contains("points")) points = point_list(j.at("points"), where + ".points", dim);
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    const std::string at = where + ".grid";
    expect_object(g, at, {"lower", "upper", "points_per_axis"});
    const Vec lower = vector(field(g, "lower", at), at + ".lower", dim);
    const Vec upper = vector(field(g, "upper", at), at + ".upper", dim);
    const std::size_t per_axis = count(field(g, "points_per_axis", at), at + ".points_per_axis", 2);
    if (!(lower.array() <= upper.array()).all()) fail(at, "need lower <= upper");
    std::size_t total = 1;
    for (std::size_t i = 0; i < dim; ++i) total *= per_axis;
    for (std::size_t k = 0; k < total; ++k) {
      Vec x(static_cast<Eigen::Index>(dim));
      std::size_t rest = k;
      for (std::size_t i = 0; i < dim; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double frac = static_cast<double>(rest % per_axis) / static_cast<double>(per_axis - 1);
        rest /= per_axis;
        x(ii) = lower(ii) + frac * (upper(ii) - lower(ii));
      }
      points.push_back(std::move(x));
    }
  }
  return points;
}

ProblemSpec parse(const json& j) {
  expect_object(j, "spec",
                {"name", "dimension", "drift", "diffusion", "jumps", "search_box", "tolerances",
                 "action", "evaluation", "simulation", "linear"});
  ProblemSpec s;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) fail("name", "expected a string");
    s.name = j.at("name").get<std::string>();
  }
  s.dimension = count(field(j, "dimension", "spec"), "dimension", 1);
  const std::size_t d = s.dimension;
  s.drift = parse_drift(field(j, "drift", "spec"), d);
  s.diffusion = matrix(field(j, "diffusion", "spec"), "diffusion", d, 0);

  if (j.contains("jumps")) {
    const json& jumps = j.at("jumps");
    if (!jumps.is_array()) fail("jumps", "expected an array");
    for (std::size_t k = 0; k < jumps.size(); ++k) {
      const std::string at = "jumps[" + std::to_string(k) + "]";
      expect_object(jumps[k], at, {"rate", "vector", "matrix"});
      JumpSpec js;
      js.rate = positive(field(jumps[k], "rate", at), at + ".rate");
      js.vector = vector(field(jumps[k], "vector", at), at + ".vector", d);
      js.matrix = jumps[k].contains("matrix") ? matrix(jumps[k].at("matrix"), at + ".matrix", d, d)
                                              : Mat(Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
      s.jumps.push_back(std::move(js));
    }
  }

  {
    const json& box = field(j, "search_box", "spec");
    expect_object(box, "search_box", {"lower", "upper", "resolution"});
    s.search_box.lower = vector(field(box, "lower", "search_box"), "search_box.lower", d);
    s.search_box.upper = vector(field(box, "upper", "search_box"), "search_box.upper", d);
    s.search_box.resolution = count(field(box, "resolution", "search_box"), "search_box.resolution", 2);
    try {
      s.search_box.validate();
    } catch (const std::invalid_argument& e) {
      fail("search_box", e.what());
    }
  }

  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    expect_object(t, "tolerances", {"root", "equilibrium", "balance"});
    if (t.contains("root")) s.tolerances.root = positive(t.at("root"), "tolerances.root");
    if (t.contains("equilibrium")) {
      s.tolerances.equilibrium = positive(t.at("equilibrium"), "tolerances.equilibrium");
    }
    if (t.contains("balance")) s.tolerances.balance = positive(t.at("balance"), "tolerances.balance");
  }

  if (j.contains("action")) {
    const json& a = j.at("action");
    expect_object(a, "action", {"horizons", "nodes", "failure_quota"});
    if (a.contains("horizons")) {
      const Vec h = vector(a.at("horizons"), "action.horizons", 0);
      if (h.size() == 0) fail("action.horizons", "must not be empty");
      s.action.horizons.assign(h.data(), h.data() + h.size());
      for (double t : s.action.horizons)
        if (!(t > 0.0)) fail("action.horizons", "horizons must be positive");
    }
    if (a.contains("nodes")) s.action.nodes = count(a.at("nodes"), "action.nodes", 8);
    if (a.contains("failure_quota")) {
      s.action.failure_quota = static_cast<int>(count(a.at("failure_quota"), "action.failure_quota", 0));
    }
  }

  if (j.contains("evaluation")) s.evaluation_points = parse_evaluation(j.at("evaluation"), d);
  if (j.contains("simulation")) s.simulation = parse_simulation(j.at("simulation"), d);
  if (j.contains("linear")) s.linear = parse_linear(j.at("linear"), d);
  return s;
}

}  // namespace

double evaluate(const Polynomial& p, const Vec& x) {
  double total = 0.0;
  for (const Monomial& m : p) {
    double term = m.coefficient;
    for (std::size_t i = 0; i < m.powers.size(); ++i) {
      term *= std::pow(x(static_cast<Eigen::Index>(i)), m.powers[i]);
    }
    total += term;
  }
  return total;
}

double partial(const Polynomial& p, std::size_t i, const Vec& x) {
  double total = 0.0;
  for (const Monomial& m : p) {
    if (m.powers[i] == 0) continue;
    double term = m.coefficient * m.powers[i];
    for (std::size_t k = 0; k < m.powers.size(); ++k) {
      const int power = k == i ? m.powers[k] - 1 : m.powers[k];
      term *= std::pow(x(static_cast<Eigen::Index>(k)), power);
    }
    total += term;
  }
  return total;
}

VectorField ProblemSpec::drift_field() const {
  const std::size_t d = dimension;
  switch (drift.kind) {
    case DriftKind::linear:
      return linear_field(drift.matrix, drift.offset);
    case DriftKind::gradient_polynomial:
      return [potential = drift.potential, d](const Vec& x) -> Vec {
        Vec b(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i) b(static_cast<Eigen::Index>(i)) = -partial(potential, i, x);
        return b;
      };
    case DriftKind::polynomial:
      return [components = drift.components, d](const Vec& x) -> Vec {
        Vec b(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i) b(static_cast<Eigen::Index>(i)) = evaluate(components[i], x);
        return b;
      };
  }
  throw SpecError("unknown drift kind");
}

LocalModel ProblemSpec::model() const {
  LocalModel m;
  m.dim = dimension;
  m.drift = drift_field();
  m.diffusion = constant_matrix(diffusion);
  for (const JumpSpec& j : jumps) m.jumps.push_back({j.rate, linear_field(j.matrix, j.vector)});
  return m;
}

ProblemSpec parse_problem(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("spec is not valid JSON: ") + e.what());
  }
  return parse(j);
}

ProblemSpec load_problem(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw SpecError("cannot open spec file " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_problem(text.str());
}

}  // namespace ldrate
