#pragma once

#include <vector>

#include "truvar/environment.hpp"
#include "truvar/posterior.hpp"
#include "truvar/sets.hpp"
#include "truvar/trace.hpp"

namespace truvar {

enum class Mode { kBayesOpt, kLevelSet };

// Confidence scale per epoch: the practical rule a*log(|D| t^2) or the
// theoretical schedule 2*log(|D| t^2 pi^2 / (6 delta)), both evaluated at the
// epoch's starting time and frozen until the next epoch.
struct BetaRule {
  enum class Kind { kPractical, kTheoretical };
  Kind kind = Kind::kPractical;
  double a = 1.0;       // practical multiplier
  double delta = 0.1;   // theoretical failure probability

  double evaluate(int domain_size, int epoch_start_time) const;
  void validate() const;
};

double beta_practical(double a, int domain_size, int epoch_start_time);

struct TruVarConfig {
  Mode mode = Mode::kLevelSet;
  double threshold = 0.0;  // level h, level-set mode only
  double eta_initial = 1.0;
  double shrink_ratio = 0.1;     // epoch target multiplier r
  double confidence_slack = 0.0; // slack factor (1 + slack) on epoch exit
  BetaRule beta;
  bool monotone_sets = true;
  bool restrict_to_potential = false;  // acquisition candidates limited to M
  int batch_size = 1;
  // Target pinned to 0: no truncation and no epoch advancing, turning the
  // acquisition into exact variance reduction per unit cost.
  bool pure_variance_reduction = false;
  double eta_floor = 1e-8;  // terminate once the target shrinks below this

  void validate() const;
};

struct TruVarState {
  int epoch = 1;
  double eta = 1.0;
  double beta = 1.0;
  int epoch_start_time = 1;  // step at which the current epoch began
  Sets sets;                  // over the base grid
  ConfidenceBounds bounds;    // cached from the last update_sets
  int step = 0;               // observations so far
  double cum_cost = 0.0;
  int prev_point = -1;        // global index, for state-dependent costs
};

// State before any observation: every point unclassified, epoch 1 targets
// eta_initial, prior confidence bounds.
TruVarState initial_state(const TruVarConfig& config, const GpPosterior& prior,
                          int beta_domain_size);

// Truncated sum-of-variances reduction per unit cost for querying `candidate`
// (global index), Eq. (3)-style: candidates outside M contribute through the
// lookahead only; terms already below the target cancel exactly.
double acquisition_score(const GpPosterior& posterior, const Environment& env,
                         const TruVarConfig& config, const TruVarState& state, int candidate,
                         int prev_point);

struct Selection {
  std::vector<int> points;     // global indices, batch order
  std::vector<double> scores;  // acquisition value of each pick
};

// Argmax of the acquisition over the candidate set (whole domain, or M lifted
// over noise levels when restricted), ties to the lowest global index. Batches
// are chosen greedily with hypothetical posterior updates between picks; no
// observation is consumed. Empty candidate set returns an empty selection.
Selection select(const GpPosterior& posterior, const Environment& env,
                 const TruVarConfig& config, const TruVarState& state);

// Recompute confidence bounds with the current epoch's beta and apply the
// mode's set update rule.
void update_sets(TruVarState& state, const GpPosterior& posterior, const TruVarConfig& config);

enum class EpochSignal { kNone, kAdvanced, kEtaFloor, kStopEta };

// While every unclassified point is known to within (1 + slack) * eta, shrink
// the target and refresh beta at t_(i) = next_time; several epochs can pass in
// one call. Empty M advances exactly once (its max is treated as 0).
// Returns kEtaFloor when the target falls below the floor, kStopEta once an
// epoch with target <= stop_eta completes (stop_eta < 0 disables).
EpochSignal maybe_advance_epoch(TruVarState& state, const GpPosterior& posterior,
                                const TruVarConfig& config, int beta_domain_size, int next_time,
                                double stop_eta = -1.0);

// Full loop: select, observe, condition, update sets, advance epochs; stops
// before any step that would exceed the budget, on empty M (level-set mode),
// on the eta floor, or on the step cap.
RunTrace run_truvar(const Environment& env, const Kernel& kernel, const TruVarConfig& config,
                    const RunOptions& options);

}  // namespace truvar
