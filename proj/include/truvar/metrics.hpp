#pragma once

#include <vector>

#include "truvar/environment.hpp"
#include "truvar/posterior.hpp"
#include "truvar/truvar.hpp"

namespace truvar {

// Outcome of an exact accuracy check against the ground truth. A point's
// margin is its slack to the constraint it must satisfy (negative = violated):
// BO requires every true maximizer inside M and every member of M within
// epsilon of the optimum; level-set mode requires truth > h on H, truth < h on
// L, and |truth - h| <= epsilon/2 on M.
struct EpsAccuracyReport {
  Mode mode = Mode::kBayesOpt;
  double epsilon = 0.0;
  bool holds = false;
  std::vector<int> witnesses;  // base indices violating their constraint
  double min_margin = 0.0;     // smallest slack over all checked constraints
  double max_violation = 0.0;  // magnitude of the worst violation, 0 if none
  int checked = 0;
};

EpsAccuracyReport eps_accuracy(const Environment& env, Mode mode, const Sets& sets,
                               double threshold, double epsilon);

// F1 of the mean-thresholded prediction {mu >= h} against the true superlevel
// set {f > h}; 0 when precision and recall are both 0. The true superlevel set
// must be non-empty.
double f1_score(const GpPosterior& posterior, const Environment& env, double threshold);

// Suboptimality of the highest-posterior-mean point (lowest index on ties).
double reported_regret(const GpPosterior& posterior, const Environment& env);

}  // namespace truvar
