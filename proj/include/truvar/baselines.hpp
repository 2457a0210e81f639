#pragma once

#include <string>

#include "truvar/environment.hpp"
#include "truvar/posterior.hpp"
#include "truvar/sets.hpp"
#include "truvar/trace.hpp"
#include "truvar/truvar.hpp"

namespace truvar {

// Reference acquisition rules sharing the same posterior machinery. Each
// select function returns the argmax of its score with ties broken toward the
// lowest domain index.

// Upper confidence bound mu + sqrt(beta) * sd.
int gp_ucb_select(const GpPosterior& posterior, double beta);

// Theoretical confidence schedule 2 log(|D| t^2 pi^2 / (6 delta)) divided by
// `divisor` (practice runs hot with the full value).
double gp_ucb_beta(int domain_size, int t, double delta, double divisor);

// Expected improvement over the best observed value.
double expected_improvement(double mean, double sd, double best_observed);
int ei_select(const GpPosterior& posterior, double best_observed);

// Straddle score 1.96 sd - |mean - h|.
int straddle_select(const GpPosterior& posterior, double threshold);

// Maximum posterior variance.
int var_select(const GpPosterior& posterior);

// Largest classification ambiguity min{u - h, h - l} among unclassified
// points, with u/l at sqrt(beta) * sd; returns -1 once everything is
// classified. Set updates use the same level-set rules as the main algorithm.
int gchk_select(const GpPosterior& posterior, const Sets& sets, double threshold, double beta);

struct BaselineSpec {
  enum class Rule { kGpUcb, kEi, kStraddle, kVar, kGchk };
  Rule rule = Rule::kVar;
  double threshold = 0.0;     // straddle / gchk
  double beta_sqrt = 3.0;     // gchk confidence multiplier
  double ucb_delta = 0.1;     // gp_ucb theoretical schedule
  double ucb_divisor = 5.0;
  // Multi-noise environments: the fixed level this baseline observes at.
  int level = 0;

  std::string name() const;
  void validate(const Environment& env, Mode mode) const;
};

// Same loop and trace layout as run_truvar, with the baseline's selection
// rule; gchk carries its own classification sets, everything else has none.
RunTrace run_baseline(const Environment& env, const Kernel& kernel, const BaselineSpec& spec,
                      Mode mode, const RunOptions& options);

}  // namespace truvar
