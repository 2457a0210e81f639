#include "truvar/truvar.hpp"

#include <cmath>
#include <numbers>

#include "run_loop.hpp"
#include "truvar/common.hpp"

namespace truvar {

double beta_practical(double a, int domain_size, int epoch_start_time) {
  if (!(a > 0.0)) throw ConfigError("beta_practical: a must be > 0");
  if (domain_size < 2) throw ConfigError("beta_practical: domain_size must be >= 2");
  if (epoch_start_time < 1) throw ConfigError("beta_practical: epoch_start_time must be >= 1");
  return a * (std::log(static_cast<double>(domain_size)) +
              2.0 * std::log(static_cast<double>(epoch_start_time)));
}

double BetaRule::evaluate(int domain_size, int epoch_start_time) const {
  if (kind == Kind::kPractical) return beta_practical(a, domain_size, epoch_start_time);
  if (domain_size < 2) throw ConfigError("beta rule: domain_size must be >= 2");
  if (epoch_start_time < 1) throw ConfigError("beta rule: epoch_start_time must be >= 1");
  const double t = epoch_start_time;
  return 2.0 * (std::log(static_cast<double>(domain_size)) + 2.0 * std::log(t) +
                std::log(std::numbers::pi * std::numbers::pi / 6.0) - std::log(delta));
}

void BetaRule::validate() const {
  if (kind == Kind::kPractical) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("beta rule: a must be positive");
  } else if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("beta rule: delta must be in (0,1)");
  }
}

void TruVarConfig::validate() const {
  beta.validate();
  if (mode == Mode::kLevelSet && !std::isfinite(threshold))
    throw ConfigError("config: level-set threshold must be finite");
  if (!pure_variance_reduction) {
    if (!(eta_initial > 0.0) || !std::isfinite(eta_initial))
      throw ConfigError("config: eta_initial must be positive");
    if (!(shrink_ratio > 0.0 && shrink_ratio < 1.0))
      throw ConfigError("config: shrink_ratio must be in (0,1)");
  }
  if (!(confidence_slack >= 0.0) || !std::isfinite(confidence_slack))
    throw ConfigError("config: confidence_slack must be >= 0");
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (!(eta_floor > 0.0)) throw ConfigError("config: eta_floor must be > 0");
}

TruVarState initial_state(const TruVarConfig& config, const GpPosterior& prior,
                          int beta_domain_size) {
  config.validate();
  TruVarState state;
  state.epoch = 1;
  state.eta = config.pure_variance_reduction ? 0.0 : config.eta_initial;
  state.epoch_start_time = 1;
  state.beta = config.beta.evaluate(beta_domain_size, 1);
  state.sets = Sets::all_unclassified(prior.domain_size());
  state.bounds = confidence_bounds(prior, state.beta);
  return state;
}

namespace {

// Sum over the active set of the drop in truncated variance when `base` is
// observed through `denom` = sigma^2(base) + noise. Terms with beta * sigma^2
// already at or below the target cancel and are excluded from `active`.
double truncated_reduction(const std::vector<double>& active_beta_var,
                           const std::vector<double>& cov2, double denom, double beta,
                           double eta2) {
  double sum = 0.0;
  for (std::size_t j = 0; j < active_beta_var.size(); ++j) {
    const double after = std::max(active_beta_var[j] - beta * cov2[j] / denom, eta2);
    sum += active_beta_var[j] - after;
  }
  return sum;
}

struct ActiveSet {
  std::vector<int> indices;        // base indices with beta * var > eta^2
  std::vector<double> beta_var;    // beta * var for those
};

ActiveSet active_set(const GpPosterior& posterior, const Sets& sets, double beta, double eta2) {
  ActiveSet a;
  for (int i = 0; i < sets.size(); ++i) {
    if (!sets.in_m[i]) continue;
    const double bv = beta * posterior.var(i);
    if (bv > eta2) {
      a.indices.push_back(i);
      a.beta_var.push_back(bv);
    }
  }
  return a;
}

// One argmax pass over the candidate set; used for both the single selection
// and each pick of a batch.
struct Pick {
  int point = -1;
  double score = 0.0;
};

Pick best_candidate(const GpPosterior& posterior, const Environment& env,
                    const TruVarConfig& config, const Sets& sets, double beta, double eta2,
                    int prev_point) {
  const ActiveSet active = active_set(posterior, sets, beta, eta2);
  const int levels = env.levels;
  std::vector<double> cov2(active.indices.size());
  Pick best;
  auto consider = [&](int base) {
    for (std::size_t j = 0; j < active.indices.size(); ++j) {
      const double c = posterior.covariance(active.indices[j], base);
      cov2[j] = c * c;
    }
    const double var_base = posterior.var(base);
    for (int k = 0; k < levels; ++k) {
      const int g = base * levels + k;
      const double cost = env.cost(prev_point, g);
      if (!(cost > 0.0)) throw ConfigError("acquisition: cost must be > 0");
      const double denom = var_base + std::max(env.noise_var_at(g), kNoiseFloor);
      const double score =
          truncated_reduction(active.beta_var, cov2, denom, beta, eta2) / cost;
      if (best.point < 0 || score > best.score) best = {g, score};
    }
  };
  if (config.restrict_to_potential) {
    for (int base = 0; base < sets.size(); ++base)
      if (sets.in_m[base]) consider(base);
  } else {
    for (int base = 0; base < sets.size(); ++base) consider(base);
  }
  return best;
}

}  // namespace

double acquisition_score(const GpPosterior& posterior, const Environment& env,
                         const TruVarConfig& config, const TruVarState& state, int candidate,
                         int prev_point) {
  const double cost = env.cost(prev_point, candidate);
  if (!(cost > 0.0)) throw ConfigError("acquisition: cost must be > 0");
  const double eta2 = state.eta * state.eta;
  const int base = env.base_of(candidate);
  const double denom = posterior.var(base) + std::max(env.noise_var_at(candidate), kNoiseFloor);
  double sum = 0.0;
  for (int i = 0; i < state.sets.size(); ++i) {
    if (!state.sets.in_m[i]) continue;
    const double bv = state.beta * posterior.var(i);
    if (bv <= eta2) continue;
    const double c = posterior.covariance(i, base);
    sum += bv - std::max(bv - state.beta * c * c / denom, eta2);
  }
  return sum / cost;
}

Selection select(const GpPosterior& posterior, const Environment& env,
                 const TruVarConfig& config, const TruVarState& state) {
  const double eta2 = state.eta * state.eta;
  Selection out;
  if (config.batch_size == 1) {
    const Pick p =
        best_candidate(posterior, env, config, state.sets, state.beta, eta2, state.prev_point);
    if (p.point >= 0) {
      out.points.push_back(p.point);
      out.scores.push_back(p.score);
    }
    return out;
  }
  // Greedy batch: commit each pick to a hypothetical posterior (conditioning
  // at the current mean), then re-score. M is not updated between picks.
  GpPosterior fantasy = posterior;
  int prev = state.prev_point;
  for (int pick = 0; pick < config.batch_size; ++pick) {
    const Pick p = best_candidate(fantasy, env, config, state.sets, state.beta, eta2, prev);
    if (p.point < 0) break;
    out.points.push_back(p.point);
    out.scores.push_back(p.score);
    const int base = env.base_of(p.point);
    fantasy = std::move(fantasy).extended(base, fantasy.mean(base),
                                          env.noise_var_at(p.point));
    prev = p.point;
  }
  return out;
}

void update_sets(TruVarState& state, const GpPosterior& posterior, const TruVarConfig& config) {
  state.bounds = confidence_bounds(posterior, state.beta);
  if (config.mode == Mode::kBayesOpt)
    update_sets_bo(state.sets, state.bounds, config.monotone_sets);
  else
    update_sets_lse(state.sets, state.bounds, config.threshold, config.monotone_sets);
}

EpochSignal maybe_advance_epoch(TruVarState& state, const GpPosterior& posterior,
                                const TruVarConfig& config, int beta_domain_size, int next_time,
                                double stop_eta) {
  if (config.pure_variance_reduction) return EpochSignal::kNone;

  // beta factors out of the max, so the epoch-exit condition can be rechecked
  // cheaply after each advance.
  double max_sd = 0.0;
  for (int i = 0; i < state.sets.size(); ++i)
    if (state.sets.in_m[i]) max_sd = std::max(max_sd, std::sqrt(posterior.var(i)));

  const bool m_empty = state.sets.m_count() == 0;
  bool advanced = false;
  while (std::sqrt(state.beta) * max_sd <= (1.0 + config.confidence_slack) * state.eta) {
    if (stop_eta >= 0.0 && state.eta <= stop_eta) {
      if (advanced) state.bounds = confidence_bounds(posterior, state.beta);
      return EpochSignal::kStopEta;
    }
    state.eta *= config.shrink_ratio;
    state.epoch += 1;
    state.epoch_start_time = next_time;
    state.beta = config.beta.evaluate(beta_domain_size, next_time);
    advanced = true;
    if (state.eta < config.eta_floor) {
      state.bounds = confidence_bounds(posterior, state.beta);
      return EpochSignal::kEtaFloor;
    }
    if (m_empty) break;  // a vacuous condition advances exactly once
  }
  if (advanced) state.bounds = confidence_bounds(posterior, state.beta);
  return advanced ? EpochSignal::kAdvanced : EpochSignal::kNone;
}

namespace {

class TruVarPolicy final : public internal::Policy {
 public:
  TruVarPolicy(const Environment& env, const TruVarConfig& config, double stop_eta)
      : env_(env), config_(config), stop_eta_(stop_eta) {}

  std::string name() const override { return "truvar"; }

  void init(const GpPosterior& prior) override {
    state_ = initial_state(config_, prior, env_.domain_size());
  }

  Selection select(const GpPosterior& posterior, int prev_point) override {
    state_.prev_point = prev_point;
    return truvar::select(posterior, env_, config_, state_);
  }

  void update(const GpPosterior& posterior, int point, double cost, int next_time,
              bool advance_allowed) override {
    state_.step = next_time - 1;
    state_.cum_cost += cost;
    state_.prev_point = point;
    truvar::update_sets(state_, posterior, config_);
    if (advance_allowed) {
      const EpochSignal sig = maybe_advance_epoch(state_, posterior, config_,
                                                  env_.domain_size(), next_time, stop_eta_);
      if (sig == EpochSignal::kEtaFloor) {
        finished_ = true;
        reason_ = "eta_floor";
      } else if (sig == EpochSignal::kStopEta) {
        finished_ = true;
        reason_ = "stop_eta";
      }
    }
    if (config_.mode == Mode::kLevelSet && state_.sets.m_count() == 0 && !finished_) {
      finished_ = true;
      reason_ = "m_empty";
    }
  }

  bool finished() const override { return finished_; }
  std::string termination_reason() const override { return reason_; }

  internal::StepMeta meta() const override {
    return {state_.epoch, state_.eta,          state_.beta,
            state_.sets.m_count(), state_.sets.h_count(), state_.sets.l_count()};
  }

  const Sets* sets() const override { return &state_.sets; }
  const TruVarState& state() const { return state_; }

 private:
  const Environment& env_;
  TruVarConfig config_;
  double stop_eta_;
  TruVarState state_;
  bool finished_ = false;
  std::string reason_;
};

}  // namespace

RunTrace run_truvar(const Environment& env, const Kernel& kernel, const TruVarConfig& config,
                    const RunOptions& options) {
  config.validate();
  TruVarPolicy policy(env, config, options.stop_eta);
  return internal::run_policy(env, kernel, policy, options, config.mode, config.threshold);
}

}  // namespace truvar
