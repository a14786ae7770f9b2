#include "ldrate/report_io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ldrate {
namespace {

using nlohmann::json;

// ---- JSON helpers ----

json cost_json(ExtCost c) { return c.is_finite() ? json(c.value()) : json("inf"); }

ExtCost cost_from(const json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") return ExtCost::infinity();
  return ExtCost(j.get<double>());
}

json vec_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vec vec_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

Mat mat_from(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vec row = vec_from(j[static_cast<std::size_t>(r)]);
    if (row.size() != cols) throw std::runtime_error("ragged matrix in report");
    m.row(r) = row.transpose();
  }
  return m;
}

json costs_json(const CostMatrix& c) {
  json rows = json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < c.size(); ++j) row.push_back(cost_json(c(i, j)));
    rows.push_back(row);
  }
  return rows;
}

CostMatrix costs_from(const std::vector<std::string>& labels, const json& j) {
  std::vector<std::vector<ExtCost>> entries;
  for (const auto& row : j) {
    std::vector<ExtCost> r;
    for (const auto& e : row) r.push_back(cost_from(e));
    entries.push_back(std::move(r));
  }
  return CostMatrix(labels, std::move(entries));
}

json equilibria_array(const std::vector<EquilibriumRow>& rows) {
  json out = json::array();
  for (const auto& e : rows) {
    out.push_back({{"position", vec_json(e.position)}, {"classification", to_string(e.classification)}});
  }
  return out;
}

std::vector<EquilibriumRow> equilibria_from(const json& j) {
  std::vector<EquilibriumRow> rows;
  for (const auto& e : j) {
    rows.push_back({vec_from(e.at("position")),
                    stability_from_string(e.at("classification").get<std::string>())});
  }
  return rows;
}

json rate_report_value(const RateReport& r) {
  json attractors = json::array();
  for (const auto& a : r.attractors) {
    attractors.push_back({{"label", a.label}, {"position", vec_json(a.position)}, {"rate", cost_json(a.rate)}});
  }
  json points = json::array();
  for (const auto& p : r.points) {
    points.push_back({{"label", p.label},
                      {"position", vec_json(p.position)},
                      {"rate", cost_json(p.rate)},
                      {"via", p.via},
                      {"best_horizon", p.best_horizon}});
  }
  const Provenance& pv = r.provenance;
  json provenance = {
      {"tolerances",
       {{"root", pv.tolerances.root},
        {"equilibrium", pv.tolerances.equilibrium},
        {"balance", pv.tolerances.balance}}},
      {"horizons", pv.horizons},
      {"nodes", pv.nodes},
      {"failure_quota", pv.failure_quota},
      {"unconverged", pv.unconverged},
      {"seed", pv.seed ? json(*pv.seed) : json(nullptr)}};
  return {{"name", r.name},
          {"dimension", r.dimension},
          {"equilibria", equilibria_array(r.equilibria)},
          {"attractors", attractors},
          {"cost_matrix",
           {{"labels", r.raw_costs.labels()},
            {"raw", costs_json(r.raw_costs)},
            {"closed", costs_json(r.closed_costs)}}},
          {"max_balance_residual", r.max_balance_residual},
          {"points", points},
          {"provenance", provenance}};
}

RateReport rate_report_from(const json& j) {
  RateReport r;
  r.name = j.at("name").get<std::string>();
  r.dimension = j.at("dimension").get<std::size_t>();
  r.equilibria = equilibria_from(j.at("equilibria"));
  for (const auto& a : j.at("attractors")) {
    r.attractors.push_back({a.at("label").get<std::string>(), vec_from(a.at("position")), cost_from(a.at("rate"))});
  }
  const auto& cm = j.at("cost_matrix");
  const auto labels = cm.at("labels").get<std::vector<std::string>>();
  r.raw_costs = costs_from(labels, cm.at("raw"));
  r.closed_costs = costs_from(labels, cm.at("closed"));
  r.max_balance_residual = j.at("max_balance_residual").get<double>();
  for (const auto& p : j.at("points")) {
    r.points.push_back({p.at("label").get<std::string>(), vec_from(p.at("position")),
                        cost_from(p.at("rate")), p.at("via").get<std::string>(),
                        p.at("best_horizon").get<double>()});
  }
  const auto& pv = j.at("provenance");
  r.provenance.tolerances.root = pv.at("tolerances").at("root").get<double>();
  r.provenance.tolerances.equilibrium = pv.at("tolerances").at("equilibrium").get<double>();
  r.provenance.tolerances.balance = pv.at("tolerances").at("balance").get<double>();
  r.provenance.horizons = pv.at("horizons").get<std::vector<double>>();
  r.provenance.nodes = pv.at("nodes").get<std::size_t>();
  r.provenance.failure_quota = pv.at("failure_quota").get<int>();
  r.provenance.unconverged = pv.at("unconverged").get<int>();
  if (!pv.at("seed").is_null()) r.provenance.seed = pv.at("seed").get<std::uint64_t>();
  return r;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed report: ") + e.what());
  }
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed report: ") + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---- CSV helpers ----

std::string num(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string cost_cell(ExtCost c) { return c.is_finite() ? num(c.value()) : "inf"; }

double parse_double(std::string_view cell) {
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || end != cell.data() + cell.size()) {
    throw std::runtime_error("malformed number in CSV: '" + std::string(cell) + "'");
  }
  return v;
}

template <class Int>
Int parse_int(std::string_view cell) {
  Int v = 0;
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || end != cell.data() + cell.size()) {
    throw std::runtime_error("malformed integer in CSV: '" + std::string(cell) + "'");
  }
  return v;
}

std::optional<double> parse_opt(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  return parse_double(cell);
}

ExtCost parse_cost(std::string_view cell) {
  const double v = parse_double(cell);
  return std::isinf(v) ? ExtCost::infinity() : ExtCost(v);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Data rows after the header; checks the leading header cells and returns the
/// number of coordinate columns (cells named x1, x2, ...).
std::vector<std::vector<std::string_view>> table(std::string_view text, std::size_t& dim) {
  std::vector<std::vector<std::string_view>> rows;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    rows.push_back(split(text.substr(start, end - start)));
    start = end + 1;
  }
  if (rows.empty()) throw std::runtime_error("empty CSV");
  dim = 0;
  for (auto cell : rows.front())
    if (cell.size() > 1 && cell[0] == 'x') ++dim;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw std::runtime_error("CSV row has the wrong width");
  }
  rows.erase(rows.begin());
  return rows;
}

std::string coordinate_header(std::size_t dim) {
  std::string h;
  for (std::size_t i = 1; i <= dim; ++i) h += ",x" + std::to_string(i);
  return h;
}

void append_coords(std::string& line, const Vec& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) line += "," + num(x(i));
}

Vec parse_coords(const std::vector<std::string_view>& row, std::size_t first, std::size_t dim) {
  Vec x(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) x(static_cast<Eigen::Index>(i)) = parse_double(row[first + i]);
  return x;
}

bool same(const Vec& a, const Vec& b) { return a.size() == b.size() && (a.array() == b.array()).all(); }
bool same(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

template <class T, class Eq>
bool same_list(const std::vector<T>& a, const std::vector<T>& b, Eq eq) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!eq(a[i], b[i])) return false;
  return true;
}

std::size_t dimension_of(const std::vector<PathRecord>& paths) {
  return paths.empty() ? 0 : static_cast<std::size_t>(paths.front().points.rows());
}

}  // namespace

bool operator==(const RateRow& a, const RateRow& b) {
  return a.kind == b.kind && a.label == b.label && same(a.position, b.position) && a.rate == b.rate;
}

bool operator==(const EmpiricalRow& a, const EmpiricalRow& b) {
  return a.n == b.n && same(a.center, b.center) && a.count == b.count && a.rate == b.rate &&
         a.predicted == b.predicted && a.abs_error == b.abs_error;
}

std::vector<RateRow> rate_rows(const RateReport& report) {
  std::vector<RateRow> rows;
  for (const auto& a : report.attractors) rows.push_back({"attractor", a.label, a.position, a.rate});
  for (const auto& p : report.points) rows.push_back({"point", p.label, p.position, p.rate});
  return rows;
}

std::vector<RateRow> rate_rows(const LinearReport& report) {
  std::vector<RateRow> rows;
  for (const auto& o : report.offsets) rows.push_back({"offset", o.label, o.offset, ExtCost(o.rate)});
  return rows;
}

std::vector<EmpiricalRow> empirical_rows(const ValidationRun& run) {
  std::vector<EmpiricalRow> rows;
  for (const auto& step : run.ladder) {
    const EmpiricalRate& e = step.empirical;
    std::map<std::size_t, const BinComparison*> compared;
    std::size_t next = 0;
    for (const auto& c : step.comparison.bins) {
      // comparison bins are in grid order; match them up by center.
      while (next < e.centers.size() && !same(e.centers[next], c.center)) ++next;
      if (next < e.centers.size()) compared[next] = &c;
    }
    for (std::size_t b = 0; b < e.centers.size(); ++b) {
      EmpiricalRow row;
      row.n = e.n;
      row.center = e.centers[b];
      row.count = e.counts[b];
      row.rate = e.rates[b];
      if (auto it = compared.find(b); it != compared.end()) {
        row.predicted = it->second->predicted;
        row.abs_error = it->second->abs_error;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<PathRecord> profile_paths(const LinearReport& report) {
  std::vector<PathRecord> out;
  const std::string from = "E" + std::to_string(report.equilibrium);
  for (const auto& p : report.profiles) {
    out.push_back({from, p.label, p.times.empty() ? 0.0 : p.times.back(), p.points});
  }
  return out;
}

ValidationSummary summarize(const ValidationRun& run) {
  ValidationSummary s;
  s.rates = run.rates;
  s.rates.paths.clear();
  s.seed = run.seed;
  s.min_count = run.min_count;
  s.trend = run.trend;
  s.trend_ok = run.trend_ok;
  return s;
}

std::string equilibria_json(const std::vector<EquilibriumRow>& rows) {
  return dump({{"equilibria", equilibria_array(rows)}});
}

std::string rate_report_json(const RateReport& report) { return dump(rate_report_value(report)); }

std::string validation_json(const ValidationSummary& s) {
  json trend = json::array();
  for (const auto& row : s.trend.rows) {
    trend.push_back({{"n", row.n}, {"sup_norm", row.sup_norm}, {"compared_bins", row.compared_bins}});
  }
  return dump({{"rates", rate_report_value(s.rates)},
               {"seed", s.seed},
               {"min_count", s.min_count},
               {"trend", trend},
               {"trend_nonincreasing", s.trend_ok}});
}

std::string linear_report_json(const LinearReport& r) {
  json offsets = json::array();
  for (const auto& o : r.offsets) {
    offsets.push_back({{"label", o.label}, {"offset", vec_json(o.offset)}, {"rate", o.rate}});
  }
  json profiles = json::array();
  for (const auto& p : r.profiles) {
    profiles.push_back({{"label", p.label}, {"times", p.times}, {"points", mat_json(p.points)}});
  }
  return dump({{"name", r.name},
               {"equilibrium", r.equilibrium},
               {"position", vec_json(r.position)},
               {"drift_jacobian", mat_json(r.drift_jacobian)},
               {"noise_covariance", mat_json(r.noise_covariance)},
               {"gramian", mat_json(r.gramian)},
               {"lyapunov_residual", r.lyapunov_residual},
               {"offsets", offsets},
               {"profiles", profiles}});
}

std::vector<EquilibriumRow> parse_equilibria_json(std::string_view text) {
  const json j = parse_json(text);
  return guarded([&] { return equilibria_from(j.at("equilibria")); });
}

RateReport parse_rate_report_json(std::string_view text) {
  const json j = parse_json(text);
  return guarded([&] { return rate_report_from(j); });
}

ValidationSummary parse_validation_json(std::string_view text) {
  const json j = parse_json(text);
  return guarded([&] {
    ValidationSummary s;
    s.rates = rate_report_from(j.at("rates"));
    s.seed = j.at("seed").get<std::uint64_t>();
    s.min_count = j.at("min_count").get<std::uint64_t>();
    for (const auto& row : j.at("trend")) {
      s.trend.rows.push_back({row.at("n").get<int>(), row.at("sup_norm").get<double>(),
                              row.at("compared_bins").get<std::size_t>()});
    }
    s.trend_ok = j.at("trend_nonincreasing").get<bool>();
    return s;
  });
}

LinearReport parse_linear_report_json(std::string_view text) {
  const json j = parse_json(text);
  return guarded([&] {
    LinearReport r;
    r.name = j.at("name").get<std::string>();
    r.equilibrium = j.at("equilibrium").get<std::size_t>();
    r.position = vec_from(j.at("position"));
    r.drift_jacobian = mat_from(j.at("drift_jacobian"));
    r.noise_covariance = mat_from(j.at("noise_covariance"));
    r.gramian = mat_from(j.at("gramian"));
    r.lyapunov_residual = j.at("lyapunov_residual").get<double>();
    for (const auto& o : j.at("offsets")) {
      r.offsets.push_back({o.at("label").get<std::string>(), vec_from(o.at("offset")), o.at("rate").get<double>()});
    }
    for (const auto& p : j.at("profiles")) {
      r.profiles.push_back({p.at("label").get<std::string>(), p.at("times").get<std::vector<double>>(),
                            mat_from(p.at("points"))});
    }
    return r;
  });
}

std::string rates_csv(const std::vector<RateRow>& rows) {
  const std::size_t dim = rows.empty() ? 0 : static_cast<std::size_t>(rows.front().position.size());
  std::string out = "kind,label" + coordinate_header(dim) + ",rate\n";
  for (const auto& r : rows) {
    std::string line = r.kind + "," + r.label;
    append_coords(line, r.position);
    out += line + "," + cost_cell(r.rate) + "\n";
  }
  return out;
}

std::string empirical_csv(const std::vector<EmpiricalRow>& rows) {
  const std::size_t dim = rows.empty() ? 0 : static_cast<std::size_t>(rows.front().center.size());
  std::string out = "n" + coordinate_header(dim) + ",count,rate,predicted,abs_error\n";
  for (const auto& r : rows) {
    std::string line = std::to_string(r.n);
    append_coords(line, r.center);
    line += "," + std::to_string(r.count) + "," + opt_num(r.rate) + "," + opt_num(r.predicted) + "," +
            opt_num(r.abs_error);
    out += line + "\n";
  }
  return out;
}

std::string paths_csv(const std::vector<PathRecord>& paths) {
  std::string out = "path,from,to,horizon,k,t" + coordinate_header(dimension_of(paths)) + "\n";
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const PathRecord& rec = paths[p];
    const auto segments = rec.points.cols() > 1 ? rec.points.cols() - 1 : 1;
    for (Eigen::Index k = 0; k < rec.points.cols(); ++k) {
      const double t = rec.horizon * static_cast<double>(k) / static_cast<double>(segments);
      std::string line = std::to_string(p) + "," + rec.from + "," + rec.to + "," + num(rec.horizon) + "," +
                         std::to_string(k) + "," + num(t);
      append_coords(line, rec.points.col(k));
      out += line + "\n";
    }
  }
  return out;
}

std::vector<RateRow> parse_rates_csv(std::string_view text) {
  std::size_t dim = 0;
  std::vector<RateRow> rows;
  for (const auto& cells : table(text, dim)) {
    rows.push_back({std::string(cells[0]), std::string(cells[1]), parse_coords(cells, 2, dim),
                    parse_cost(cells[2 + dim])});
  }
  return rows;
}

std::vector<EmpiricalRow> parse_empirical_csv(std::string_view text) {
  std::size_t dim = 0;
  std::vector<EmpiricalRow> rows;
  for (const auto& cells : table(text, dim)) {
    EmpiricalRow r;
    r.n = parse_int<int>(cells[0]);
    r.center = parse_coords(cells, 1, dim);
    r.count = parse_int<std::uint64_t>(cells[1 + dim]);
    r.rate = parse_opt(cells[2 + dim]);
    r.predicted = parse_opt(cells[3 + dim]);
    r.abs_error = parse_opt(cells[4 + dim]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<PathRecord> parse_paths_csv(std::string_view text) {
  std::size_t dim = 0;
  std::vector<PathRecord> paths;
  std::vector<std::vector<Vec>> columns;
  for (const auto& cells : table(text, dim)) {
    const auto id = parse_int<std::size_t>(cells[0]);
    if (id == paths.size()) {
      paths.push_back({std::string(cells[1]), std::string(cells[2]), parse_double(cells[3]), Mat()});
      columns.emplace_back();
    } else if (id + 1 != paths.size()) {
      throw std::runtime_error("paths.csv rows are not grouped by path");
    }
    columns.back().push_back(parse_coords(cells, 6, dim));
  }
  for (std::size_t p = 0; p < paths.size(); ++p) {
    paths[p].points.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(columns[p].size()));
    for (std::size_t k = 0; k < columns[p].size(); ++k) paths[p].points.col(static_cast<Eigen::Index>(k)) = columns[p][k];
  }
  return paths;
}

bool identical(const std::vector<EquilibriumRow>& a, const std::vector<EquilibriumRow>& b) {
  return same_list(a, b, [](const EquilibriumRow& x, const EquilibriumRow& y) {
    return same(x.position, y.position) && x.classification == y.classification;
  });
}

bool identical(const std::vector<PathRecord>& a, const std::vector<PathRecord>& b) {
  return same_list(a, b, [](const PathRecord& x, const PathRecord& y) {
    return x.from == y.from && x.to == y.to && x.horizon == y.horizon && same(x.points, y.points);
  });
}

bool identical(const RateReport& a, const RateReport& b) {
  const auto& pa = a.provenance;
  const auto& pb = b.provenance;
  return a.name == b.name && a.dimension == b.dimension && identical(a.equilibria, b.equilibria) &&
         same_list(a.attractors, b.attractors,
                   [](const AttractorRow& x, const AttractorRow& y) {
                     return x.label == y.label && same(x.position, y.position) && x.rate == y.rate;
                   }) &&
         a.raw_costs == b.raw_costs && a.closed_costs == b.closed_costs &&
         a.max_balance_residual == b.max_balance_residual &&
         same_list(a.points, b.points,
                   [](const PointRate& x, const PointRate& y) {
                     return x.label == y.label && same(x.position, y.position) && x.rate == y.rate &&
                            x.via == y.via && x.best_horizon == y.best_horizon;
                   }) &&
         pa.tolerances.root == pb.tolerances.root && pa.tolerances.equilibrium == pb.tolerances.equilibrium &&
         pa.tolerances.balance == pb.tolerances.balance && pa.horizons == pb.horizons &&
         pa.nodes == pb.nodes && pa.failure_quota == pb.failure_quota &&
         pa.unconverged == pb.unconverged && pa.seed == pb.seed && identical(a.paths, b.paths);
}

bool identical(const ValidationSummary& a, const ValidationSummary& b) {
  return identical(a.rates, b.rates) && a.seed == b.seed && a.min_count == b.min_count &&
         a.trend_ok == b.trend_ok &&
         same_list(a.trend.rows, b.trend.rows, [](const TrendRow& x, const TrendRow& y) {
           return x.n == y.n && x.sup_norm == y.sup_norm && x.compared_bins == y.compared_bins;
         });
}

bool identical(const LinearReport& a, const LinearReport& b) {
  return a.name == b.name && a.equilibrium == b.equilibrium && same(a.position, b.position) &&
         same(a.drift_jacobian, b.drift_jacobian) && same(a.noise_covariance, b.noise_covariance) &&
         same(a.gramian, b.gramian) && a.lyapunov_residual == b.lyapunov_residual &&
         same_list(a.offsets, b.offsets,
                   [](const LinearOffsetRow& x, const LinearOffsetRow& y) {
                     return x.label == y.label && same(x.offset, y.offset) && x.rate == y.rate;
                   }) &&
         same_list(a.profiles, b.profiles, [](const EscapeProfile& x, const EscapeProfile& y) {
           return x.label == y.label && x.times == y.times && same(x.points, y.points);
         });
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_text(const std::filesystem::path& file, std::string_view text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

void write_attractor_outputs(const std::filesystem::path& dir, const std::vector<EquilibriumRow>& rows) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", equilibria_json(rows));
}

void write_rate_outputs(const std::filesystem::path& dir, const RateReport& report) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", rate_report_json(report));
  write_text(dir / "rates.csv", rates_csv(rate_rows(report)));
  write_text(dir / "paths.csv", paths_csv(report.paths));
}

void write_validation_outputs(const std::filesystem::path& dir, const ValidationRun& run) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", validation_json(summarize(run)));
  write_text(dir / "rates.csv", rates_csv(rate_rows(run.rates)));
  write_text(dir / "empirical.csv", empirical_csv(empirical_rows(run)));
}

void write_linear_outputs(const std::filesystem::path& dir, const LinearReport& report) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", linear_report_json(report));
  write_text(dir / "rates.csv", rates_csv(rate_rows(report)));
  write_text(dir / "paths.csv", paths_csv(profile_paths(report)));
}

RateReport read_rate_outputs(const std::filesystem::path& dir) {
  RateReport r = parse_rate_report_json(read_text(dir / "report.json"));
  r.paths = parse_paths_csv(read_text(dir / "paths.csv"));
  return r;
}

}  // namespace ldrate
