#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "truvar/baselines.hpp"
#include "truvar/theory.hpp"
#include "truvar/trace.hpp"
#include "truvar/truvar.hpp"

namespace truvar {

// How to build the ground-truth environment for one run. Synthetic
// environments depend on the run seed; CSV environments are fixed.
struct EnvironmentSpec {
  enum class Type { kSynthetic, kCsv };
  Type type = Type::kSynthetic;

  // synthetic
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<int> shape;
  int anchors = 0;
  double noise_var = -1.0;  // also the CSV override when the file has no column

  // csv
  std::string csv_path;

  // "" keeps the default (unit, or the CSV cost column); "unit" | "travel"
  std::string cost_model;

  // Non-empty lifts the base to the noise-level product domain.
  Eigen::VectorXd level_noise_vars;
  Eigen::VectorXd level_costs;

  Environment build(const Kernel& kernel, std::uint64_t seed) const;
  void validate() const;
};

// One algorithm to benchmark. Exactly one of the two configs is active;
// `label` names the trace files and must be unique within an experiment.
struct AlgorithmEntry {
  std::string label;
  bool is_truvar = false;
  TruVarConfig truvar;
  double stop_eta = -1.0;  // forwarded to the run options (truvar only)
  BaselineSpec baseline;
};

struct ExperimentConfig {
  Kernel kernel = Kernel::squared_exponential(Eigen::VectorXd::Ones(1));
  EnvironmentSpec environment;
  Mode mode = Mode::kLevelSet;
  double threshold = 0.0;  // level-set mode only
  std::vector<AlgorithmEntry> algorithms;
  double budget = 0.0;
  double cadence = 0.0;
  int max_steps = -1;
  std::vector<std::uint64_t> seeds;
  std::vector<double> epsilons;
  std::string output = "runs";

  // Strict parse: unknown or ill-typed keys fail with their full field path.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);

  void validate() const;
};

struct ExperimentResult {
  std::vector<std::string> trace_files;
  std::string summary_file;
  int runs = 0;
};

// One trace pair per (algorithm, seed), written atomically under
// config.output, then a single summary pass: per checkpoint and algorithm the
// mean, median, and 5% outlier-trimmed mean across seeds, carrying each run's
// last value forward to checkpoints it no longer reached (with the number of
// such padded runs reported).
ExperimentResult run_experiment(const ExperimentConfig& config, int threads = 1);

// Metric series parsed back from a metrics CSV.
struct TraceSeries {
  std::string algorithm;
  std::string mode;
  std::uint64_t seed = 0;
  double cadence = 0.0;
  std::string termination;
  std::vector<double> checkpoints;
  std::vector<double> values;
};

TraceSeries read_metrics_csv(const std::string& path);

// Seed-paired comparison against the first algorithm in input order: mean
// metric per checkpoint for every algorithm, plus per-checkpoint mean deltas
// and two-sided sign-test p-values for each challenger. All series must share
// the cadence and the seed set.
struct Comparison {
  std::vector<std::string> algorithms;  // reference first
  std::vector<double> checkpoints;
  std::vector<std::vector<double>> means;        // [algorithm][checkpoint]
  std::vector<std::vector<double>> mean_deltas;  // [challenger][checkpoint]
  std::vector<std::vector<double>> sign_p;       // [challenger][checkpoint]
  int paired_seeds = 0;
};

Comparison compare_traces(const std::vector<TraceSeries>& series);
void write_comparison_csv(const Comparison& comparison, std::ostream& out);

// Two-sided sign test for the median of paired deltas being zero; ties are
// dropped. No informative pairs gives p = 1.
double sign_test_p(const std::vector<double>& deltas);

// Bound-calculator plumbing: JSON in, JSON out, no RNG anywhere.
BoundInputs bound_inputs_from_json_text(const std::string& text);
BoundInputs bound_inputs_from_json_file(const std::string& path);
std::string bound_report_json(const BoundInputs& inputs, const BoundReport& report);

}  // namespace truvar
