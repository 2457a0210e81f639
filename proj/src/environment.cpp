#include "truvar/environment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "truvar/common.hpp"
#include "truvar/trace.hpp"

namespace truvar {

double Environment::noise_var_at(int global) const {
  if (levels > 1) return level_noise_vars[level_of(global)];
  return noise_vars[global];
}

double Environment::cost(int prev_global, int global) const {
  switch (cost_model) {
    case CostModel::kUnit:
      return 1.0;
    case CostModel::kPerPoint:
      return point_costs[base_of(global)];
    case CostModel::kTravel:
      if (prev_global < 0) throw ConfigError("travel cost: no previous point");
      return travel_cost(points.row(base_of(prev_global)), points.row(base_of(global)));
    case CostModel::kPerLevel:
      return level_costs[level_of(global)];
  }
  throw ConfigError("unknown cost model");
}

double Environment::observe(int global, RandomStream& stream) const {
  const double sd = std::sqrt(noise_var_at(global));
  return truth_at(global) + sd * stream.normal();
}

void Environment::validate() const {
  const int n0 = base_size();
  if (n0 == 0) throw ConfigError("environment: empty domain");
  if (truth.size() != n0 || noise_vars.size() != n0)
    throw ConfigError("environment: truth/noise size mismatch");
  if (!truth.allFinite()) throw ConfigError("environment: non-finite truth values");
  if (!noise_vars.allFinite() || (noise_vars.array() < 0.0).any())
    throw ConfigError("environment: noise variances must be finite and >= 0");
  if (cost_model == CostModel::kPerPoint) {
    if (point_costs.size() != n0) throw ConfigError("environment: point_costs size mismatch");
    if (!point_costs.allFinite() || (point_costs.array() <= 0.0).any())
      throw ConfigError("environment: point costs must be finite and > 0");
  }
  if (cost_model == CostModel::kTravel && dims() < 2)
    throw ConfigError("environment: travel cost needs at least two dimensions");
  if (levels < 1) throw ConfigError("environment: levels must be >= 1");
  if (levels > 1 && cost_model != CostModel::kPerLevel)
    throw ConfigError("environment: levels > 1 requires the per-level cost model");
  if (cost_model == CostModel::kPerLevel) {
    if (level_noise_vars.size() != levels || level_costs.size() != levels)
      throw ConfigError("environment: level vectors must have one entry per level");
    if (!level_noise_vars.allFinite() || (level_noise_vars.array() < 0.0).any())
      throw ConfigError("environment: level noise variances must be finite and >= 0");
    if (!level_costs.allFinite() || (level_costs.array() <= 0.0).any())
      throw ConfigError("environment: level costs must be finite and > 0");
  }
}

Eigen::MatrixXd make_grid(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          const std::vector<int>& shape) {
  const auto d = static_cast<Eigen::Index>(shape.size());
  if (lower.size() != d || upper.size() != d)
    throw ConfigError("make_grid: lower/upper/shape dimension mismatch");
  Eigen::Index n = 1;
  for (int s : shape) {
    if (s < 1) throw ConfigError("make_grid: shape entries must be >= 1");
    n *= s;
  }
  Eigen::MatrixXd out(n, d);
  for (Eigen::Index row = 0; row < n; ++row) {
    Eigen::Index rest = row;
    for (Eigen::Index j = d - 1; j >= 0; --j) {
      const Eigen::Index i = rest % shape[j];
      rest /= shape[j];
      out(row, j) = shape[j] == 1
                        ? lower[j]
                        : lower[j] + (upper[j] - lower[j]) * static_cast<double>(i) /
                                         static_cast<double>(shape[j] - 1);
    }
  }
  return out;
}

Environment synth_gp_function(const Kernel& kernel, Eigen::MatrixXd grid_points, int n_anchor,
                              std::uint64_t seed, double noise_var) {
  kernel.validate();
  const auto n = grid_points.rows();
  if (grid_points.cols() != kernel.dims())
    throw ConfigError("synth_gp_function: grid dimension does not match kernel");
  if (n_anchor < 1 || n_anchor > n)
    throw ConfigError("synth_gp_function: n_anchor must be in [1, number of grid points]");
  if (!std::isfinite(noise_var) || noise_var < 0.0)
    throw ConfigError("synth_gp_function: noise_var must be finite and >= 0");

  // Partial Fisher-Yates: the first n_anchor slots end up a uniform
  // without-replacement draw.
  RandomStream stream(seed, "anchors");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 0; i < n_anchor; ++i) {
    const auto j = i + static_cast<int>(stream.below(static_cast<std::uint64_t>(n - i)));
    std::swap(perm[i], perm[j]);
  }
  Eigen::MatrixXd anchors(n_anchor, grid_points.cols());
  for (int i = 0; i < n_anchor; ++i) anchors.row(i) = grid_points.row(perm[i]);

  Eigen::MatrixXd k_anchor = gram_matrix(kernel, anchors);
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 1e-10;
  for (;;) {
    Eigen::MatrixXd attempt = k_anchor;
    attempt.diagonal().array() += jitter;
    llt.compute(attempt);
    if (llt.info() == Eigen::Success) break;
    if (jitter >= 1e-6)
      throw NumericalError("synth_gp_function: anchor covariance not factorizable");
    jitter *= 10.0;
  }

  Eigen::VectorXd u(n_anchor);
  for (int i = 0; i < n_anchor; ++i) u[i] = stream.normal();
  const Eigen::VectorXd anchor_values = Eigen::MatrixXd(llt.matrixL()) * u;

  // Truth = noiseless interpolation of the anchor draw over the whole grid.
  const Eigen::VectorXd alpha = llt.solve(anchor_values);
  Environment env;
  env.truth = cross_gram(kernel, grid_points, anchors) * alpha;
  env.points = std::move(grid_points);
  env.noise_vars = Eigen::VectorXd::Constant(n, noise_var);
  env.validate();
  return env;
}

namespace {

double parse_double(std::string_view field, int line_no, const char* what) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("grid csv line " + std::to_string(line_no) + ": bad " + what + " value '" +
                      std::string(field) + "'");
  if (!std::isfinite(v))
    throw ConfigError("grid csv line " + std::to_string(line_no) + ": non-finite " + what);
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

Environment load_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("grid csv: cannot open '" + path + "'");

  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };

  if (!next_line()) throw ConfigError("grid csv: empty file '" + path + "'");
  const auto header = split_fields(line);
  int d = 0;
  while (d < static_cast<int>(header.size()) && header[d] == "x" + std::to_string(d + 1)) ++d;
  if (d == 0) throw ConfigError("grid csv line 1: header must start with x1");
  std::size_t col = d;
  if (col >= header.size() || header[col] != "f")
    throw ConfigError("grid csv line 1: expected 'f' after coordinate columns");
  ++col;
  bool has_noise = false;
  bool has_cost = false;
  if (col < header.size() && header[col] == "noise_var") {
    has_noise = true;
    ++col;
  }
  if (col < header.size() && header[col] == "cost") {
    has_cost = true;
    ++col;
  }
  if (col != header.size())
    throw ConfigError("grid csv line 1: unrecognized column '" + std::string(header[col]) + "'");

  struct Row {
    Eigen::RowVectorXd x;
    double f;
    double noise;
    double cost;
    int line_no;
  };
  std::vector<Row> rows;
  while (next_line()) {
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw ConfigError("grid csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    Row row;
    row.x.resize(d);
    for (int j = 0; j < d; ++j) row.x[j] = parse_double(fields[j], line_no, "coordinate");
    std::size_t c = d;
    row.f = parse_double(fields[c++], line_no, "f");
    row.noise = has_noise ? parse_double(fields[c++], line_no, "noise_var") : 0.0;
    row.cost = has_cost ? parse_double(fields[c++], line_no, "cost") : 1.0;
    if (row.noise < 0.0)
      throw ConfigError("grid csv line " + std::to_string(line_no) + ": negative noise_var");
    if (has_cost && row.cost <= 0.0)
      throw ConfigError("grid csv line " + std::to_string(line_no) + ": cost must be > 0");
    row.line_no = line_no;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("grid csv: no data rows in '" + path + "'");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::lexicographical_compare(a.x.data(), a.x.data() + a.x.size(), b.x.data(),
                                        b.x.data() + b.x.size());
  });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].x == rows[i - 1].x)
      throw ConfigError("grid csv line " + std::to_string(rows[i].line_no) +
                        ": duplicate coordinates (also on line " +
                        std::to_string(rows[i - 1].line_no) + ")");

  Environment env;
  const auto n = static_cast<Eigen::Index>(rows.size());
  env.points.resize(n, d);
  env.truth.resize(n);
  env.noise_vars.resize(n);
  if (has_cost) env.point_costs.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    env.points.row(i) = rows[i].x;
    env.truth[i] = rows[i].f;
    env.noise_vars[i] = rows[i].noise;
    if (has_cost) env.point_costs[i] = rows[i].cost;
  }
  if (has_cost) env.cost_model = CostModel::kPerPoint;
  env.validate();
  return env;
}

void write_grid_csv(const Environment& env, const std::string& path) {
  if (env.levels > 1)
    throw ConfigError("write_grid_csv: multi-level environments have no grid file form");
  env.validate();
  const bool has_cost = env.cost_model == CostModel::kPerPoint;
  std::ofstream out(path);
  if (!out) throw ConfigError("grid csv: cannot write '" + path + "'");
  const int d = env.dims();
  for (int j = 0; j < d; ++j) out << "x" << (j + 1) << ",";
  out << "f,noise_var";
  if (has_cost) out << ",cost";
  out << "\n";
  for (int i = 0; i < env.base_size(); ++i) {
    for (int j = 0; j < d; ++j) out << format_double(env.points(i, j)) << ",";
    out << format_double(env.truth[i]) << "," << format_double(env.noise_vars[i]);
    if (has_cost) out << "," << format_double(env.point_costs[i]);
    out << "\n";
  }
  if (!out) throw ConfigError("grid csv: write failed for '" + path + "'");
}

double travel_cost(const Eigen::Ref<const Eigen::RowVectorXd>& previous,
                   const Eigen::Ref<const Eigen::RowVectorXd>& candidate) {
  if (previous.size() < 2 || candidate.size() < 2)
    throw ConfigError("travel_cost: points need at least two dimensions");
  return 0.25 * std::abs(candidate[0] - previous[0]) + 4.0 * (std::abs(candidate[1]) + 1.0);
}

Environment multi_noise_env(Environment base, Eigen::VectorXd level_noise_vars,
                            Eigen::VectorXd level_costs) {
  if (level_noise_vars.size() == 0 || level_noise_vars.size() != level_costs.size())
    throw ConfigError("multi_noise_env: need matching non-empty level vectors");
  base.levels = static_cast<int>(level_noise_vars.size());
  // Degenerate single-level product: same domain, the level's noise applied
  // directly so noise_var_at needs no level arithmetic.
  if (base.levels == 1) base.noise_vars.setConstant(level_noise_vars[0]);
  base.level_noise_vars = std::move(level_noise_vars);
  base.level_costs = std::move(level_costs);
  base.cost_model = CostModel::kPerLevel;
  base.point_costs.resize(0);
  base.validate();
  return base;
}

}  // namespace truvar
