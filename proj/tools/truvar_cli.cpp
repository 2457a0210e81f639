#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "truvar/common.hpp"
#include "truvar/harness.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<std::uint64_t> resolve_seeds(const std::vector<std::uint64_t>& config_seeds,
                                         int count, const std::vector<std::uint64_t>& list) {
  if (count > 0 && !list.empty())
    throw truvar::ConfigError("pass either --seeds or --seed-list, not both");
  if (count > 0) {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < count; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
    return seeds;
  }
  if (!list.empty()) return list;
  return config_seeds;
}

truvar::ExperimentConfig load_experiment(const std::string& config_path, int seed_count,
                                         const std::vector<std::uint64_t>& seed_list,
                                         const std::string& out_dir) {
  truvar::ExperimentConfig config = truvar::ExperimentConfig::from_json_file(config_path);
  config.seeds = resolve_seeds(config.seeds, seed_count, seed_list);
  if (!out_dir.empty()) config.output = out_dir;
  config.validate();
  return config;
}

// Positional compare arguments are metrics files or directories of them.
std::vector<std::string> collect_metrics_files(const std::vector<std::string>& paths) {
  std::vector<std::string> files;
  for (const std::string& path : paths) {
    if (fs::is_directory(path)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(path)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 12 && name.ends_with("_metrics.csv"))
          found.push_back(entry.path().string());
      }
      if (found.empty())
        throw truvar::ConfigError("compare: no *_metrics.csv files in '" + path + "'");
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(path);
    }
  }
  return files;
}

void write_or_print(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw truvar::ConfigError("cannot write '" + out_path + "'");
  out << content;
  if (!out.flush()) throw truvar::ConfigError("write to '" + out_path + "' failed");
  std::cout << "wrote " << out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated variance reduction: benchmark runner and bound calculator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  int seed_count = 0;
  std::vector<std::uint64_t> seed_list;
  int threads = 1;
  std::vector<std::string> compare_paths;

  CLI::App* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--seeds", seed_count, "run seeds 0..N-1 (overrides the config)");
  run->add_option("--seed-list", seed_list, "explicit seeds (overrides the config)")
      ->delimiter(',');
  run->add_option("--out", out_path, "output directory (overrides the config)");
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  CLI::App* bounds = app.add_subcommand("bounds", "Evaluate the sample-complexity bounds");
  bounds->add_option("--config", config_path, "bound inputs (JSON)")->required();
  bounds->add_option("--out", out_path, "report file (default: stdout)");

  CLI::App* compare =
      app.add_subcommand("compare", "Tabulate metric traces against the first algorithm");
  compare->add_option("paths", compare_paths, "metrics CSV files or run directories")
      ->required();
  compare->add_option("--out", out_path, "table file (default: stdout)");

  CLI::App* validate =
      app.add_subcommand("validate-config", "Check an experiment config and dry-build its "
                                            "environment");
  validate->add_option("--config", config_path, "experiment config (JSON)")->required();
  validate->add_option("--seeds", seed_count, "run seeds 0..N-1 (overrides the config)");
  validate->add_option("--seed-list", seed_list, "explicit seeds (overrides the config)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);

    if (run->parsed()) {
      truvar::ExperimentConfig config =
          load_experiment(config_path, seed_count, seed_list, out_path);
      truvar::ExperimentResult result = truvar::run_experiment(config, threads);
      std::cout << "ran " << result.runs << " trace(s) into " << config.output << "\n"
                << "summary: " << result.summary_file << "\n";
    } else if (bounds->parsed()) {
      truvar::BoundInputs inputs = truvar::bound_inputs_from_json_file(config_path);
      truvar::BoundReport report = truvar::corollary_bounds(inputs);
      write_or_print(out_path, truvar::bound_report_json(inputs, report));
    } else if (compare->parsed()) {
      std::vector<truvar::TraceSeries> series;
      for (const std::string& file : collect_metrics_files(compare_paths))
        series.push_back(truvar::read_metrics_csv(file));
      truvar::Comparison comparison = truvar::compare_traces(series);
      std::ostringstream table;
      truvar::write_comparison_csv(comparison, table);
      write_or_print(out_path, table.str());
    } else if (validate->parsed()) {
      truvar::ExperimentConfig config = load_experiment(config_path, seed_count, seed_list, "");
      truvar::Environment env = config.environment.build(config.kernel, config.seeds.front());
      std::cout << "ok: " << config.algorithms.size() << " algorithm(s) x "
                << config.seeds.size() << " seed(s), domain size " << env.domain_size() << "\n";
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is a config error
  } catch (const truvar::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const truvar::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const truvar::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
