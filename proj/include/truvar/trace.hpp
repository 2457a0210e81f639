#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace truvar {

enum class MetricKind { kNone, kF1, kRegret };

// Knobs of a single run that are not part of the algorithm definition:
// stopping resources, seeding, and metric sampling.
struct RunOptions {
  double budget = std::numeric_limits<double>::infinity();
  int max_steps = -1;  // < 0: no step cap
  std::uint64_t seed = 0;
  // First "previous point" for state-dependent costs, as a global domain
  // index; < 0 draws one uniformly from the base grid under the run seed.
  int start_index = -1;
  // Metric rows are recorded at the first step crossing each multiple of
  // `cadence` cost units; 0 disables sampling.
  double cadence = 0.0;
  MetricKind metric = MetricKind::kNone;
  std::vector<double> epsilons;  // accuracy checks attached to each metric row
  // Stop once the epoch with target <= this value has been completed (the
  // width 4(1+slack)eta is then known to be small enough); < 0 disables.
  double stop_eta = -1.0;

  void validate() const;
};

struct StepRow {
  int t = 0;         // 1-based step counter
  int point = 0;     // global domain index (base * levels + level)
  int base = 0;      // base grid index
  int level = 0;     // noise level, 0 when the environment has none
  double noise_var = 0.0;
  double cost = 0.0;
  double cum_cost = 0.0;
  double y = 0.0;
  int m_size = 0;
  int h_size = 0;
  int l_size = 0;
  int epoch = 1;
  double eta = 0.0;
  double beta = 0.0;
  double score = 0.0;
};

struct MetricRow {
  double checkpoint = 0.0;  // the cadence multiple that was crossed
  double cum_cost = 0.0;    // actual cumulative cost at recording time
  int t = 0;
  double value = 0.0;           // F1 or regret per MetricKind
  std::vector<int> eps_ok;      // one flag per RunOptions::epsilons; -1 unknown
};

struct RunTrace {
  std::string algorithm;
  std::string mode;  // "bo" | "lse"
  std::uint64_t seed = 0;
  double cadence = 0.0;
  std::vector<double> epsilons;
  std::vector<StepRow> steps;
  std::vector<MetricRow> metric_rows;
  std::string termination;  // budget|m_empty|eta_floor|stop_eta|max_steps|no_candidates
  double final_cum_cost = 0.0;
  int final_m = 0, final_h = 0, final_l = 0;

  // CSV with a "# truvar-trace v1" version comment; shortest round-trip
  // number formatting keeps identical runs byte-identical.
  void write_steps_csv(std::ostream& out) const;
  void write_metrics_csv(std::ostream& out) const;
};

// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace truvar
