#include "truvar/baselines.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "run_loop.hpp"
#include "truvar/common.hpp"

namespace truvar {
namespace {

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Argmax with lowest-index ties: strict improvement only.
template <typename Score>
int argmax_score(int n, Score&& score) {
  int best = -1;
  double best_score = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = score(i);
    if (best < 0 || s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

}  // namespace

int gp_ucb_select(const GpPosterior& posterior, double beta) {
  if (!(beta > 0.0)) throw ConfigError("gp_ucb_select: beta must be > 0");
  const double root = std::sqrt(beta);
  return argmax_score(posterior.domain_size(), [&](int i) {
    return posterior.mean(i) + root * std::sqrt(posterior.var(i));
  });
}

double gp_ucb_beta(int domain_size, int t, double delta, double divisor) {
  if (domain_size < 2 || t < 1) throw ConfigError("gp_ucb_beta: need domain_size >= 2, t >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("gp_ucb_beta: delta must be in (0,1)");
  if (!(divisor > 0.0)) throw ConfigError("gp_ucb_beta: divisor must be > 0");
  const double full =
      2.0 * std::log(domain_size * static_cast<double>(t) * t * std::numbers::pi *
                     std::numbers::pi / (6.0 * delta));
  return full / divisor;
}

double expected_improvement(double mean, double sd, double best_observed) {
  const double gap = mean - best_observed;
  if (sd <= 0.0) return std::max(gap, 0.0);
  const double z = gap / sd;
  return gap * normal_cdf(z) + sd * normal_pdf(z);
}

int ei_select(const GpPosterior& posterior, double best_observed) {
  return argmax_score(posterior.domain_size(), [&](int i) {
    return expected_improvement(posterior.mean(i), std::sqrt(posterior.var(i)), best_observed);
  });
}

int straddle_select(const GpPosterior& posterior, double threshold) {
  return argmax_score(posterior.domain_size(), [&](int i) {
    return 1.96 * std::sqrt(posterior.var(i)) - std::abs(posterior.mean(i) - threshold);
  });
}

int var_select(const GpPosterior& posterior) {
  return argmax_score(posterior.domain_size(), [&](int i) { return posterior.var(i); });
}

int gchk_select(const GpPosterior& posterior, const Sets& sets, double threshold, double beta) {
  if (sets.size() != posterior.domain_size())
    throw ConfigError("gchk_select: sets/posterior mismatch");
  const double root = std::sqrt(beta);
  int best = -1;
  double best_score = 0.0;
  for (int i = 0; i < sets.size(); ++i) {
    if (!sets.in_m[i]) continue;
    const double sd = std::sqrt(posterior.var(i));
    const double upper = posterior.mean(i) + root * sd;
    const double lower = posterior.mean(i) - root * sd;
    const double ambiguity = std::min(upper - threshold, threshold - lower);
    if (best < 0 || ambiguity > best_score) {
      best = i;
      best_score = ambiguity;
    }
  }
  return best;
}

std::string BaselineSpec::name() const {
  switch (rule) {
    case Rule::kGpUcb:
      return "gp_ucb";
    case Rule::kEi:
      return "ei";
    case Rule::kStraddle:
      return "straddle";
    case Rule::kVar:
      return "var";
    case Rule::kGchk:
      return "gchk";
  }
  return "unknown";
}

void BaselineSpec::validate(const Environment& env, Mode mode) const {
  switch (rule) {
    case Rule::kGpUcb:
      if (mode != Mode::kBayesOpt) throw ConfigError("gp_ucb requires optimization mode");
      if (!(ucb_delta > 0.0 && ucb_delta < 1.0))
        throw ConfigError("gp_ucb: delta must be in (0,1)");
      if (!(ucb_divisor > 0.0)) throw ConfigError("gp_ucb: divisor must be > 0");
      break;
    case Rule::kEi:
      if (mode != Mode::kBayesOpt) throw ConfigError("ei requires optimization mode");
      break;
    case Rule::kGchk:
      if (mode != Mode::kLevelSet) throw ConfigError("gchk requires level-set mode");
      if (!(beta_sqrt > 0.0)) throw ConfigError("gchk: beta_sqrt must be > 0");
      break;
    case Rule::kStraddle:
    case Rule::kVar:
      break;
  }
  if ((rule == Rule::kStraddle || rule == Rule::kGchk) && !std::isfinite(threshold))
    throw ConfigError("baseline: threshold must be finite");
  if (level < 0 || level >= env.levels)
    throw ConfigError("baseline: level outside the environment's noise levels");
}

namespace {

// Fixed-level selection: baselines score base points only; the configured
// noise level supplies observation noise and cost.
class BaselinePolicy final : public internal::Policy {
 public:
  BaselinePolicy(const Environment& env, BaselineSpec spec) : env_(env), spec_(spec) {}

  std::string name() const override { return spec_.name(); }

  void init(const GpPosterior& prior) override {
    if (spec_.rule == BaselineSpec::Rule::kGchk)
      sets_ = Sets::all_unclassified(prior.domain_size());
    best_observed_ = -std::numeric_limits<double>::infinity();
    t_ = 0;
  }

  Selection select(const GpPosterior& posterior, int prev_point) override {
    (void)prev_point;
    int base = -1;
    switch (spec_.rule) {
      case BaselineSpec::Rule::kGpUcb:
        beta_ = gp_ucb_beta(posterior.domain_size() * env_.levels, t_ + 1, spec_.ucb_delta,
                            spec_.ucb_divisor);
        base = gp_ucb_select(posterior, beta_);
        break;
      case BaselineSpec::Rule::kEi:
        base = ei_select(posterior, best_observed_);
        break;
      case BaselineSpec::Rule::kStraddle:
        base = straddle_select(posterior, spec_.threshold);
        break;
      case BaselineSpec::Rule::kVar:
        base = var_select(posterior);
        break;
      case BaselineSpec::Rule::kGchk:
        beta_ = spec_.beta_sqrt * spec_.beta_sqrt;
        base = gchk_select(posterior, sets_, spec_.threshold, beta_);
        break;
    }
    Selection sel;
    if (base >= 0) {
      sel.points.push_back(base * env_.levels + spec_.level);
      sel.scores.push_back(0.0);
    }
    return sel;
  }

  void update(const GpPosterior& posterior, int point, double cost, int next_time,
              bool advance_allowed) override {
    (void)point;
    (void)cost;
    (void)advance_allowed;
    t_ = next_time - 1;
    best_observed_ = std::max(best_observed_, posterior.values().back());
    if (spec_.rule == BaselineSpec::Rule::kGchk) {
      const ConfidenceBounds bounds = confidence_bounds(posterior, beta_);
      update_sets_lse(sets_, bounds, spec_.threshold, true);
      if (sets_.m_count() == 0) {
        finished_ = true;
        reason_ = "m_empty";
      }
    }
  }

  bool finished() const override { return finished_; }
  std::string termination_reason() const override { return reason_; }

  internal::StepMeta meta() const override {
    internal::StepMeta m;
    m.beta = beta_;
    if (spec_.rule == BaselineSpec::Rule::kGchk) {
      m.m = sets_.m_count();
      m.h = sets_.h_count();
      m.l = sets_.l_count();
    }
    return m;
  }

  const Sets* sets() const override {
    return spec_.rule == BaselineSpec::Rule::kGchk ? &sets_ : nullptr;
  }

 private:
  const Environment& env_;
  BaselineSpec spec_;
  Sets sets_;
  double beta_ = 0.0;
  double best_observed_ = 0.0;
  int t_ = 0;
  bool finished_ = false;
  std::string reason_;
};

}  // namespace

RunTrace run_baseline(const Environment& env, const Kernel& kernel, const BaselineSpec& spec,
                      Mode mode, const RunOptions& options) {
  spec.validate(env, mode);
  BaselinePolicy policy(env, spec);
  return internal::run_policy(env, kernel, policy, options, mode, spec.threshold);
}

}  // namespace truvar
