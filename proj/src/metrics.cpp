#include "truvar/metrics.hpp"

#include <cmath>

#include "truvar/common.hpp"

namespace truvar {
namespace {

void check_env_sets(const Environment& env, const Sets& sets) {
  if (sets.size() != env.base_size())
    throw ConfigError("eps_accuracy: sets and environment sizes differ");
}

}  // namespace

EpsAccuracyReport eps_accuracy(const Environment& env, Mode mode, const Sets& sets,
                               double threshold, double epsilon) {
  if (!(epsilon >= 0.0)) throw ConfigError("eps_accuracy: epsilon must be >= 0");
  check_env_sets(env, sets);
  EpsAccuracyReport report;
  report.mode = mode;
  report.epsilon = epsilon;
  report.min_margin = std::numeric_limits<double>::infinity();

  // H and L demand strict inequalities, so a zero margin there is already a
  // violation; the epsilon constraints allow equality.
  auto record = [&](int i, double margin, bool strict = false) {
    report.min_margin = std::min(report.min_margin, margin);
    if (margin < 0.0 || (strict && margin == 0.0)) {
      report.witnesses.push_back(i);
      report.max_violation = std::max(report.max_violation, std::max(-margin, 0.0));
    }
    ++report.checked;
  };

  const int n = env.base_size();
  if (mode == Mode::kBayesOpt) {
    const double best = env.truth.maxCoeff();
    for (int i = 0; i < n; ++i) {
      if (env.truth[i] == best && !sets.in_m[i]) {
        // A true maximizer was discarded; no finite margin applies.
        record(i, -std::numeric_limits<double>::infinity());
        report.max_violation = std::numeric_limits<double>::infinity();
        continue;
      }
      if (sets.in_m[i]) record(i, epsilon - (best - env.truth[i]));
    }
  } else {
    for (int i = 0; i < n; ++i) {
      if (sets.in_h[i])
        record(i, env.truth[i] - threshold, /*strict=*/true);
      else if (sets.in_l[i])
        record(i, threshold - env.truth[i], /*strict=*/true);
      else if (sets.in_m[i])
        record(i, epsilon / 2.0 - std::abs(env.truth[i] - threshold));
    }
  }
  if (report.checked == 0) report.min_margin = 0.0;
  report.holds = report.witnesses.empty();
  return report;
}

double f1_score(const GpPosterior& posterior, const Environment& env, double threshold) {
  const int n = env.base_size();
  if (posterior.domain_size() != n) throw ConfigError("f1_score: posterior/environment mismatch");
  int tp = 0, fp = 0, fn = 0, truly_above = 0;
  for (int i = 0; i < n; ++i) {
    const bool truth_above = env.truth[i] > threshold;
    const bool predicted = posterior.mean(i) >= threshold;
    truly_above += truth_above;
    tp += truth_above && predicted;
    fp += !truth_above && predicted;
    fn += truth_above && !predicted;
  }
  if (truly_above == 0) throw ConfigError("f1_score: true superlevel set is empty");
  if (2 * tp + fp + fn == 0) return 0.0;
  return 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
}

double reported_regret(const GpPosterior& posterior, const Environment& env) {
  const int n = env.base_size();
  if (posterior.domain_size() != n)
    throw ConfigError("reported_regret: posterior/environment mismatch");
  int reported = 0;
  for (int i = 1; i < n; ++i)
    if (posterior.mean(i) > posterior.mean(reported)) reported = i;
  return env.truth.maxCoeff() - env.truth[reported];
}

}  // namespace truvar
