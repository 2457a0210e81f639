#include "truvar/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "truvar/common.hpp"

namespace fs = std::filesystem;

namespace truvar {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config " + path + ": " + what);
}

const ordered_json& member(const ordered_json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required key");
  return *it;
}

void check_keys(const ordered_json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail(path + "." + item.key(), "unknown key");
  }
}

double num_at(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double get_num(const ordered_json& obj, const std::string& path, const char* key) {
  return num_at(member(obj, path, key), path + "." + key);
}

double opt_num(const ordered_json& obj, const std::string& path, const char* key, double def) {
  auto it = obj.find(key);
  return it == obj.end() ? def : num_at(*it, path + "." + key);
}

int int_at(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

int opt_int(const ordered_json& obj, const std::string& path, const char* key, int def) {
  auto it = obj.find(key);
  return it == obj.end() ? def : int_at(*it, path + "." + key);
}

bool opt_bool(const ordered_json& obj, const std::string& path, const char* key, bool def) {
  auto it = obj.find(key);
  if (it == obj.end()) return def;
  if (!it->is_boolean()) fail(path + "." + key, "expected a boolean");
  return it->get<bool>();
}

std::string str_at(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::string get_str(const ordered_json& obj, const std::string& path, const char* key) {
  return str_at(member(obj, path, key), path + "." + key);
}

std::string opt_str(const ordered_json& obj, const std::string& path, const char* key,
                    const std::string& def) {
  auto it = obj.find(key);
  return it == obj.end() ? def : str_at(*it, path + "." + key);
}

Eigen::VectorXd vec_at(const ordered_json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<int>(i)] = num_at(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Kernel parse_kernel(const ordered_json& j, const std::string& path) {
  check_keys(j, path, {"family", "length_scales", "variance"});
  std::string family = get_str(j, path, "family");
  Eigen::VectorXd scales = vec_at(member(j, path, "length_scales"), path + ".length_scales");
  double variance = opt_num(j, path, "variance", 1.0);
  if (family == "se") return Kernel::squared_exponential(std::move(scales), variance);
  if (family == "matern52") return Kernel::matern52(std::move(scales), variance);
  fail(path + ".family", "expected 'se' or 'matern52'");
}

EnvironmentSpec parse_environment(const ordered_json& j, const std::string& path) {
  EnvironmentSpec spec;
  std::string type = get_str(j, path, "type");
  if (type == "synthetic") {
    check_keys(j, path,
               {"type", "lower", "upper", "shape", "anchors", "noise_var", "cost_model",
                "levels"});
    spec.type = EnvironmentSpec::Type::kSynthetic;
    spec.lower = vec_at(member(j, path, "lower"), path + ".lower");
    spec.upper = vec_at(member(j, path, "upper"), path + ".upper");
    const ordered_json& shape = member(j, path, "shape");
    if (!shape.is_array() || shape.empty()) fail(path + ".shape", "expected a non-empty array");
    for (std::size_t i = 0; i < shape.size(); ++i)
      spec.shape.push_back(int_at(shape[i], path + ".shape[" + std::to_string(i) + "]"));
    spec.anchors = int_at(member(j, path, "anchors"), path + ".anchors");
    spec.noise_var = get_num(j, path, "noise_var");
  } else if (type == "csv") {
    check_keys(j, path, {"type", "path", "noise_var", "cost_model", "levels"});
    spec.type = EnvironmentSpec::Type::kCsv;
    spec.csv_path = get_str(j, path, "path");
    spec.noise_var = opt_num(j, path, "noise_var", -1.0);
  } else {
    fail(path + ".type", "expected 'synthetic' or 'csv'");
  }
  spec.cost_model = opt_str(j, path, "cost_model", "");
  if (auto it = j.find("levels"); it != j.end()) {
    check_keys(*it, path + ".levels", {"noise_vars", "costs"});
    spec.level_noise_vars =
        vec_at(member(*it, path + ".levels", "noise_vars"), path + ".levels.noise_vars");
    spec.level_costs = vec_at(member(*it, path + ".levels", "costs"), path + ".levels.costs");
  }
  return spec;
}

BetaRule parse_beta(const ordered_json& j, const std::string& path) {
  check_keys(j, path, {"kind", "a", "delta"});
  BetaRule rule;
  std::string kind = get_str(j, path, "kind");
  if (kind == "practical") {
    rule.kind = BetaRule::Kind::kPractical;
  } else if (kind == "theoretical") {
    rule.kind = BetaRule::Kind::kTheoretical;
  } else {
    fail(path + ".kind", "expected 'practical' or 'theoretical'");
  }
  rule.a = opt_num(j, path, "a", rule.a);
  rule.delta = opt_num(j, path, "delta", rule.delta);
  return rule;
}

AlgorithmEntry parse_algorithm(const ordered_json& j, const std::string& path, Mode mode,
                               double threshold) {
  std::string name = get_str(j, path, "name");
  AlgorithmEntry entry;
  entry.label = opt_str(j, path, "label", name);
  if (name == "truvar") {
    check_keys(j, path,
               {"name", "label", "eta_initial", "shrink_ratio", "confidence_slack", "beta",
                "monotone_sets", "restrict_to_potential", "batch_size",
                "pure_variance_reduction", "eta_floor", "stop_eta"});
    entry.is_truvar = true;
    TruVarConfig config;
    config.mode = mode;
    config.threshold = threshold;
    config.eta_initial = opt_num(j, path, "eta_initial", config.eta_initial);
    config.shrink_ratio = opt_num(j, path, "shrink_ratio", config.shrink_ratio);
    config.confidence_slack = opt_num(j, path, "confidence_slack", config.confidence_slack);
    if (auto it = j.find("beta"); it != j.end()) config.beta = parse_beta(*it, path + ".beta");
    config.monotone_sets = opt_bool(j, path, "monotone_sets", config.monotone_sets);
    config.restrict_to_potential =
        opt_bool(j, path, "restrict_to_potential", config.restrict_to_potential);
    config.batch_size = opt_int(j, path, "batch_size", config.batch_size);
    config.pure_variance_reduction =
        opt_bool(j, path, "pure_variance_reduction", config.pure_variance_reduction);
    config.eta_floor = opt_num(j, path, "eta_floor", config.eta_floor);
    entry.truvar = config;
    entry.stop_eta = opt_num(j, path, "stop_eta", -1.0);
    return entry;
  }

  BaselineSpec spec;
  spec.threshold = threshold;
  if (name == "gp_ucb") {
    check_keys(j, path, {"name", "label", "delta", "divisor", "level"});
    spec.rule = BaselineSpec::Rule::kGpUcb;
    spec.ucb_delta = opt_num(j, path, "delta", spec.ucb_delta);
    spec.ucb_divisor = opt_num(j, path, "divisor", spec.ucb_divisor);
  } else if (name == "ei") {
    check_keys(j, path, {"name", "label", "level"});
    spec.rule = BaselineSpec::Rule::kEi;
  } else if (name == "straddle") {
    check_keys(j, path, {"name", "label", "level"});
    spec.rule = BaselineSpec::Rule::kStraddle;
  } else if (name == "var") {
    check_keys(j, path, {"name", "label", "level"});
    spec.rule = BaselineSpec::Rule::kVar;
  } else if (name == "gchk") {
    check_keys(j, path, {"name", "label", "beta_sqrt", "level"});
    spec.rule = BaselineSpec::Rule::kGchk;
    spec.beta_sqrt = opt_num(j, path, "beta_sqrt", spec.beta_sqrt);
  } else {
    fail(path + ".name",
         "expected one of 'truvar', 'gp_ucb', 'ei', 'straddle', 'var', 'gchk'");
  }
  spec.level = opt_int(j, path, "level", 0);
  entry.baseline = spec;
  return entry;
}

std::vector<std::uint64_t> parse_seeds(const ordered_json& j, const std::string& path) {
  check_keys(j, path, {"count", "list"});
  bool has_count = j.contains("count");
  bool has_list = j.contains("list");
  if (has_count == has_list) fail(path, "expected exactly one of 'count' or 'list'");
  std::vector<std::uint64_t> seeds;
  if (has_count) {
    int count = int_at(j["count"], path + ".count");
    if (count < 1) fail(path + ".count", "expected a positive integer");
    for (int i = 0; i < count; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
  } else {
    const ordered_json& list = j["list"];
    if (!list.is_array() || list.empty()) fail(path + ".list", "expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string p = path + ".list[" + std::to_string(i) + "]";
      if (!list[i].is_number_integer() && !list[i].is_number_unsigned())
        fail(p, "expected a nonnegative integer");
      if (list[i].is_number_integer() && list[i].get<long long>() < 0)
        fail(p, "expected a nonnegative integer");
      seeds.push_back(list[i].get<std::uint64_t>());
    }
  }
  return seeds;
}

ordered_json parse_text(const std::string& text, const std::string& what) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_atomic(const fs::path& target, const std::function<void(std::ostream&)>& body) {
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    body(out);
    out.flush();
    if (!out) throw ConfigError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target);
}

}  // namespace

void EnvironmentSpec::validate() const {
  if (type == Type::kSynthetic) {
    const int d = static_cast<int>(lower.size());
    if (d == 0 || upper.size() != d || static_cast<int>(shape.size()) != d)
      throw ConfigError("config environment: lower, upper and shape must share one dimension");
    for (int i = 0; i < d; ++i)
      if (!(lower[i] < upper[i]) && shape[static_cast<std::size_t>(i)] > 1)
        throw ConfigError("config environment: lower must be below upper per dimension");
    if (anchors < 1) throw ConfigError("config environment.anchors: expected >= 1");
    if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
      throw ConfigError("config environment.noise_var: expected a finite value >= 0");
  } else {
    if (csv_path.empty()) throw ConfigError("config environment.path: expected a file path");
    if (noise_var >= 0.0 && !std::isfinite(noise_var))
      throw ConfigError("config environment.noise_var: expected a finite value");
  }
  if (!cost_model.empty() && cost_model != "unit" && cost_model != "travel")
    throw ConfigError("config environment.cost_model: expected 'unit' or 'travel'");
  if ((level_noise_vars.size() == 0) != (level_costs.size() == 0) ||
      (level_noise_vars.size() != level_costs.size()))
    throw ConfigError("config environment.levels: noise_vars and costs must match");
  if (level_noise_vars.size() > 0 && !cost_model.empty())
    throw ConfigError("config environment.levels: levels define the cost model; drop cost_model");
}

Environment EnvironmentSpec::build(const Kernel& kernel, std::uint64_t seed) const {
  validate();
  Environment env;
  if (type == Type::kSynthetic) {
    env = synth_gp_function(kernel, make_grid(lower, upper, shape), anchors, seed, noise_var);
  } else {
    env = load_grid_csv(csv_path);
    if (noise_var >= 0.0) env.noise_vars.setConstant(noise_var);
  }
  if (cost_model == "travel") {
    env.cost_model = CostModel::kTravel;
    env.point_costs.resize(0);
  } else if (cost_model == "unit") {
    env.cost_model = CostModel::kUnit;
    env.point_costs.resize(0);
  }
  if (level_noise_vars.size() > 0) {
    if (env.cost_model == CostModel::kPerPoint)
      throw ConfigError(
          "config environment.levels: the csv cost column conflicts with level costs");
    env = multi_noise_env(std::move(env), level_noise_vars, level_costs);
  }
  env.validate();
  return env;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  ordered_json j = parse_text(text, "config");
  check_keys(j, "", {"kernel", "environment", "mode", "threshold", "algorithms", "budget",
                     "cadence", "max_steps", "seeds", "epsilons", "output"});
  ExperimentConfig config;
  config.kernel = parse_kernel(member(j, "", "kernel"), ".kernel");
  config.environment = parse_environment(member(j, "", "environment"), ".environment");

  std::string mode = get_str(j, "", "mode");
  if (mode == "bo") {
    config.mode = Mode::kBayesOpt;
  } else if (mode == "lse") {
    config.mode = Mode::kLevelSet;
  } else {
    fail(".mode", "expected 'bo' or 'lse'");
  }
  if (config.mode == Mode::kLevelSet) {
    config.threshold = get_num(j, "", "threshold");
  } else if (j.contains("threshold")) {
    fail(".threshold", "only valid in level-set mode");
  }

  const ordered_json& algs = member(j, "", "algorithms");
  if (!algs.is_array() || algs.empty()) fail(".algorithms", "expected a non-empty array");
  for (std::size_t i = 0; i < algs.size(); ++i)
    config.algorithms.push_back(parse_algorithm(
        algs[i], ".algorithms[" + std::to_string(i) + "]", config.mode, config.threshold));

  config.budget = get_num(j, "", "budget");
  config.cadence = get_num(j, "", "cadence");
  config.max_steps = opt_int(j, "", "max_steps", -1);
  if (j.contains("seeds")) config.seeds = parse_seeds(j["seeds"], ".seeds");
  if (auto it = j.find("epsilons"); it != j.end()) {
    if (!it->is_array()) fail(".epsilons", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i)
      config.epsilons.push_back(num_at((*it)[i], ".epsilons[" + std::to_string(i) + "]"));
  }
  config.output = opt_str(j, "", "output", config.output);
  return config;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  return from_json_text(read_file(path));
}

void ExperimentConfig::validate() const {
  kernel.validate();
  environment.validate();
  if (!(budget > 0.0) || !std::isfinite(budget))
    throw ConfigError("config .budget: expected a positive finite value");
  if (!(cadence > 0.0) || !std::isfinite(cadence))
    throw ConfigError("config .cadence: expected a positive finite value");
  if (seeds.empty()) throw ConfigError("config .seeds: at least one seed is required");
  {
    auto sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ConfigError("config .seeds: duplicate seeds");
  }
  if (algorithms.empty()) throw ConfigError("config .algorithms: expected at least one entry");
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    const std::string path = "config .algorithms[" + std::to_string(i) + "]";
    const AlgorithmEntry& entry = algorithms[i];
    if (entry.label.empty()) throw ConfigError(path + ".label: must be non-empty");
    for (char c : entry.label)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
        throw ConfigError(path + ".label: only letters, digits, '_', '-', '.' are allowed");
    for (std::size_t k = 0; k < i; ++k)
      if (algorithms[k].label == entry.label)
        throw ConfigError(path + ".label: duplicate label '" + entry.label + "'");
    if (entry.is_truvar) {
      entry.truvar.validate();
    } else {
      switch (entry.baseline.rule) {
        case BaselineSpec::Rule::kGpUcb:
        case BaselineSpec::Rule::kEi:
          if (mode != Mode::kBayesOpt)
            throw ConfigError(path + ": this baseline needs mode 'bo'");
          break;
        case BaselineSpec::Rule::kStraddle:
        case BaselineSpec::Rule::kGchk:
          if (mode != Mode::kLevelSet)
            throw ConfigError(path + ": this baseline needs mode 'lse'");
          break;
        case BaselineSpec::Rule::kVar:
          break;
      }
      if (entry.baseline.level < 0)
        throw ConfigError(path + ".level: expected a nonnegative level");
    }
  }
  if (mode == Mode::kLevelSet && !std::isfinite(threshold))
    throw ConfigError("config .threshold: expected a finite value");
  for (double e : epsilons)
    if (!(e > 0.0) || !std::isfinite(e))
      throw ConfigError("config .epsilons: entries must be positive and finite");
  if (output.empty()) throw ConfigError("config .output: expected a directory path");
}

namespace {

struct WorkItem {
  const AlgorithmEntry* entry = nullptr;
  std::uint64_t seed = 0;
  RunTrace trace;
  fs::path steps_path;
  fs::path metrics_path;
};

RunOptions options_for(const ExperimentConfig& config, const AlgorithmEntry& entry,
                       std::uint64_t seed) {
  RunOptions options;
  options.budget = config.budget;
  options.max_steps = config.max_steps;
  options.seed = seed;
  options.cadence = config.cadence;
  options.metric = config.mode == Mode::kLevelSet ? MetricKind::kF1 : MetricKind::kRegret;
  options.epsilons = config.epsilons;
  options.stop_eta = entry.is_truvar ? entry.stop_eta : -1.0;
  return options;
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double trimmed_mean_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t cut = static_cast<std::size_t>(0.05 * static_cast<double>(v.size()));
  std::vector<double> kept(v.begin() + static_cast<std::ptrdiff_t>(cut),
                           v.end() - static_cast<std::ptrdiff_t>(cut));
  return mean_of(kept);
}

void write_summary(std::ostream& out, const ExperimentConfig& config,
                   const std::vector<WorkItem>& items) {
  out << "# truvar-summary v1\n";
  out << "algorithm,checkpoint,runs,padded,missing,mean,median,trimmed_mean\n";
  const int n_checkpoints = static_cast<int>(std::floor(config.budget / config.cadence + 1e-9));
  for (const AlgorithmEntry& entry : config.algorithms) {
    for (int c = 0; c < n_checkpoints; ++c) {
      double checkpoint = 0.0;
      std::vector<double> values;
      int padded = 0;
      int missing = 0;
      for (const WorkItem& item : items) {
        if (item.entry != &entry) continue;
        const auto& rows = item.trace.metric_rows;
        if (static_cast<std::size_t>(c) < rows.size()) {
          values.push_back(rows[static_cast<std::size_t>(c)].value);
          checkpoint = rows[static_cast<std::size_t>(c)].checkpoint;
        } else if (!rows.empty()) {
          values.push_back(rows.back().value);  // carried forward past the run's end
          ++padded;
        } else {
          ++missing;
        }
      }
      if (checkpoint == 0.0) checkpoint = (c + 1) * config.cadence;
      out << entry.label << ',' << format_double(checkpoint) << ','
          << (values.size() + static_cast<std::size_t>(missing)) << ',' << padded << ','
          << missing;
      if (values.empty()) {
        out << ",,,\n";
      } else {
        out << ',' << format_double(mean_of(values)) << ',' << format_double(median_of(values))
            << ',' << format_double(trimmed_mean_of(values)) << '\n';
      }
    }
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, int threads) {
  config.validate();
  if (threads < 1) throw ConfigError("run_experiment: threads must be >= 1");
  fs::create_directories(config.output);

  std::vector<WorkItem> items;
  for (const AlgorithmEntry& entry : config.algorithms) {
    for (std::uint64_t seed : config.seeds) {
      WorkItem item;
      item.entry = &entry;
      item.seed = seed;
      const std::string stem = entry.label + "_seed" + std::to_string(seed);
      item.steps_path = fs::path(config.output) / (stem + "_steps.csv");
      item.metrics_path = fs::path(config.output) / (stem + "_metrics.csv");
      items.push_back(std::move(item));
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::vector<std::exception_ptr> errors(items.size());

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size() || failed.load()) return;
      WorkItem& item = items[i];
      try {
        Environment env = config.environment.build(config.kernel, item.seed);
        RunOptions options = options_for(config, *item.entry, item.seed);
        item.trace = item.entry->is_truvar
                         ? run_truvar(env, config.kernel, item.entry->truvar, options)
                         : run_baseline(env, config.kernel, item.entry->baseline, config.mode,
                                        options);
        write_atomic(item.steps_path,
                     [&](std::ostream& out) { item.trace.write_steps_csv(out); });
        write_atomic(item.metrics_path,
                     [&](std::ostream& out) { item.trace.write_metrics_csv(out); });
        log::info("wrote " + item.steps_path.string());
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const int n_workers = std::min<int>(threads, static_cast<int>(items.size()));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentResult result;
  for (const WorkItem& item : items) {
    result.trace_files.push_back(item.steps_path.string());
    result.trace_files.push_back(item.metrics_path.string());
  }
  result.runs = static_cast<int>(items.size());

  fs::path summary_path = fs::path(config.output) / "summary.csv";
  write_atomic(summary_path, [&](std::ostream& out) { write_summary(out, config, items); });
  result.summary_file = summary_path.string();
  return result;
}

namespace {

double parse_csv_double(const std::string& field, const std::string& path) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ConfigError("trace '" + path + "': bad number '" + field + "'");
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

TraceSeries read_metrics_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open trace '" + path + "'");
  TraceSeries series;
  std::string line;
  bool version_seen = false;
  bool header_seen = false;
  bool seed_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      std::size_t at = body.find(": ");
      std::string key = at == std::string::npos ? body : body.substr(0, at);
      std::string value = at == std::string::npos ? "" : body.substr(at + 2);
      while (!key.empty() && key.front() == ' ') key.erase(key.begin());
      if (!version_seen) {
        if (key != "truvar-trace v1")
          throw ConfigError("trace '" + path + "': expected a '# truvar-trace v1' header");
        version_seen = true;
      } else if (key == "algorithm") {
        series.algorithm = value;
      } else if (key == "mode") {
        series.mode = value;
      } else if (key == "seed") {
        series.seed = std::stoull(value);
        seed_seen = true;
      } else if (key == "cadence") {
        series.cadence = parse_csv_double(value, path);
      } else if (key == "termination") {
        series.termination = value;
      }
      continue;
    }
    if (!header_seen) {
      if (line.rfind("checkpoint,cum_cost,t,value", 0) != 0)
        throw ConfigError("trace '" + path + "': not a metrics file (header is '" + line + "')");
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields = split_csv(line);
    if (fields.size() < 4) throw ConfigError("trace '" + path + "': short row '" + line + "'");
    series.checkpoints.push_back(parse_csv_double(fields[0], path));
    series.values.push_back(parse_csv_double(fields[3], path));
  }
  if (!version_seen || !header_seen || series.algorithm.empty() || !seed_seen)
    throw ConfigError("trace '" + path + "': missing metadata (algorithm/seed header comments)");
  return series;
}

double sign_test_p(const std::vector<double>& deltas) {
  int n = 0;
  int positive = 0;
  for (double d : deltas) {
    if (d > 0.0) {
      ++n;
      ++positive;
    } else if (d < 0.0) {
      ++n;
    }
  }
  if (n == 0) return 1.0;
  // Two-sided binomial(n, 1/2) tail of the observed split.
  auto log_choose = [](int nn, int kk) {
    return std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0);
  };
  const double log_half_n = -n * std::numbers::ln2;
  auto cdf = [&](int k) {
    double p = 0.0;
    for (int i = 0; i <= k; ++i) p += std::exp(log_choose(n, i) + log_half_n);
    return p;
  };
  double lower = cdf(positive);
  double upper = positive == 0 ? 1.0 : 1.0 - cdf(positive - 1);
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

Comparison compare_traces(const std::vector<TraceSeries>& series) {
  if (series.empty()) throw ConfigError("compare: no metric traces given");
  for (const TraceSeries& s : series) {
    if (s.checkpoints.empty())
      throw ConfigError("compare: a trace for '" + s.algorithm + "' has no metric rows");
    if (s.cadence != series.front().cadence)
      throw ConfigError("compare: cadence mismatch (" + format_double(series.front().cadence) +
                        " vs " + format_double(s.cadence) + ")");
    if (s.mode != series.front().mode)
      throw ConfigError("compare: cannot mix '" + series.front().mode + "' and '" + s.mode +
                        "' traces");
  }

  std::vector<std::string> order;
  std::map<std::string, std::map<std::uint64_t, const TraceSeries*>> groups;
  for (const TraceSeries& s : series) {
    auto [it, inserted] = groups[s.algorithm].emplace(s.seed, &s);
    if (!inserted)
      throw ConfigError("compare: duplicate trace for algorithm '" + s.algorithm + "' seed " +
                        std::to_string(s.seed));
    if (groups[s.algorithm].size() == 1) order.push_back(s.algorithm);
  }
  const auto& reference = groups[order.front()];
  for (const std::string& label : order) {
    if (groups[label].size() != reference.size())
      throw ConfigError("compare: algorithm '" + label + "' has a different number of seeds");
    auto a = reference.begin();
    auto b = groups[label].begin();
    for (; a != reference.end(); ++a, ++b)
      if (a->first != b->first)
        throw ConfigError("compare: seed sets differ between '" + order.front() + "' and '" +
                          label + "'");
  }

  // Checkpoint k is the k-th cadence multiple in every trace, so alignment is
  // by row index; shorter traces carry their last value forward.
  std::size_t grid = 0;
  const TraceSeries* longest = nullptr;
  for (const TraceSeries& s : series) {
    if (s.checkpoints.size() > grid) {
      grid = s.checkpoints.size();
      longest = &s;
    }
  }

  Comparison result;
  result.algorithms = order;
  result.checkpoints = longest->checkpoints;
  result.paired_seeds = static_cast<int>(reference.size());

  auto value_at = [](const TraceSeries& s, std::size_t c) {
    return c < s.values.size() ? s.values[c] : s.values.back();
  };

  for (const std::string& label : order) {
    std::vector<double> means;
    for (std::size_t c = 0; c < grid; ++c) {
      double sum = 0.0;
      for (const auto& [seed, s] : groups[label]) sum += value_at(*s, c);
      means.push_back(sum / static_cast<double>(groups[label].size()));
    }
    result.means.push_back(std::move(means));
  }
  // The first algorithm is the reference; a lone algorithm is compared with
  // itself, which pins the delta machinery at exactly zero.
  std::size_t first_challenger = order.size() > 1 ? 1 : 0;
  for (std::size_t g = first_challenger; g < order.size(); ++g) {
    std::vector<double> deltas_mean;
    std::vector<double> p_values;
    for (std::size_t c = 0; c < grid; ++c) {
      std::vector<double> deltas;
      auto a = reference.begin();
      auto b = groups[order[g]].begin();
      for (; a != reference.end(); ++a, ++b)
        deltas.push_back(value_at(*b->second, c) - value_at(*a->second, c));
      deltas_mean.push_back(mean_of(deltas));
      p_values.push_back(sign_test_p(deltas));
    }
    result.mean_deltas.push_back(std::move(deltas_mean));
    result.sign_p.push_back(std::move(p_values));
  }
  return result;
}

void write_comparison_csv(const Comparison& comparison, std::ostream& out) {
  out << "# truvar-compare v1\n";
  out << "# reference: " << comparison.algorithms.front() << '\n';
  out << "# paired_seeds: " << comparison.paired_seeds << '\n';
  out << "checkpoint";
  for (const std::string& label : comparison.algorithms) out << ",mean_" << label;
  const std::size_t challengers = comparison.mean_deltas.size();
  const std::size_t first =
      comparison.algorithms.size() > 1 ? 1 : 0;  // lone algorithm compares with itself
  for (std::size_t g = 0; g < challengers; ++g)
    out << ",delta_" << comparison.algorithms[first + g] << ",p_"
        << comparison.algorithms[first + g];
  out << '\n';
  for (std::size_t c = 0; c < comparison.checkpoints.size(); ++c) {
    out << format_double(comparison.checkpoints[c]);
    for (const auto& means : comparison.means) out << ',' << format_double(means[c]);
    for (std::size_t g = 0; g < challengers; ++g)
      out << ',' << format_double(comparison.mean_deltas[g][c]) << ','
          << format_double(comparison.sign_p[g][c]);
    out << '\n';
  }
}

BoundInputs bound_inputs_from_json_text(const std::string& text) {
  ordered_json j = parse_text(text, "bound config");
  check_keys(j, "", {"domain_size", "sigma2", "epsilon", "delta", "delta_bar", "gamma",
                     "eta_initial", "shrink_ratio", "cap", "levels"});
  BoundInputs inputs;
  inputs.domain_size = get_num(j, "", "domain_size");
  inputs.sigma2 = get_num(j, "", "sigma2");
  inputs.epsilon = get_num(j, "", "epsilon");
  inputs.delta = get_num(j, "", "delta");
  inputs.delta_bar = get_num(j, "", "delta_bar");
  inputs.gamma_estimate = get_num(j, "", "gamma");
  inputs.eta_initial = opt_num(j, "", "eta_initial", inputs.eta_initial);
  inputs.shrink_ratio = opt_num(j, "", "shrink_ratio", inputs.shrink_ratio);
  inputs.cap = opt_num(j, "", "cap", inputs.cap);
  if (auto it = j.find("levels"); it != j.end()) {
    check_keys(*it, ".levels", {"noise_vars", "costs"});
    inputs.level_noise_vars =
        vec_at(member(*it, ".levels", "noise_vars"), ".levels.noise_vars");
    inputs.level_costs = vec_at(member(*it, ".levels", "costs"), ".levels.costs");
  }
  return inputs;
}

BoundInputs bound_inputs_from_json_file(const std::string& path) {
  return bound_inputs_from_json_text(read_file(path));
}

std::string bound_report_json(const BoundInputs& inputs, const BoundReport& report) {
  ordered_json out;
  out["t_simplified"] = report.t_simplified;
  out["t_improved"] = report.t_improved;
  if (!report.t_per_level.empty()) {
    ordered_json levels = ordered_json::array();
    for (std::size_t k = 0; k < report.t_per_level.size(); ++k) {
      ordered_json row;
      row["level"] = k;
      row["noise_var"] = inputs.level_noise_vars[static_cast<int>(k)];
      row["cost"] = inputs.level_costs[static_cast<int>(k)];
      row["t_star"] = report.t_per_level[k];
      row["total_cost"] = report.cost_per_level[k];
      levels.push_back(std::move(row));
    }
    out["levels"] = std::move(levels);
    out["best_level"] = report.best_level;
    out["c_multi_noise"] = report.c_multi_noise;
  }
  return out.dump(2) + "\n";
}

}  // namespace truvar
