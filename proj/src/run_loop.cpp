#include "run_loop.hpp"

#include "truvar/common.hpp"
#include "truvar/metrics.hpp"
#include "truvar/rng.hpp"

namespace truvar::internal {

RunTrace run_policy(const Environment& env, const Kernel& kernel, Policy& policy,
                    const RunOptions& options, Mode mode, double threshold) {
  options.validate();
  env.validate();
  if (options.metric == MetricKind::kF1 && mode != Mode::kLevelSet)
    throw ConfigError("run: the F1 metric needs level-set mode");
  if (options.start_index >= env.domain_size())
    throw ConfigError("run: start_index outside the domain");

  auto domain = DomainData::make(env.points, kernel);
  GpPosterior posterior = GpPosterior::prior(std::move(domain));
  policy.init(posterior);

  RandomStream observe_stream(options.seed, "observe");
  int prev = options.start_index;
  if (prev < 0 && env.cost_model == CostModel::kTravel) {
    RandomStream start_stream(options.seed, "start");
    prev = static_cast<int>(start_stream.below(env.base_size())) * env.levels;
  }

  RunTrace trace;
  trace.algorithm = policy.name();
  trace.mode = mode == Mode::kBayesOpt ? "bo" : "lse";
  trace.seed = options.seed;
  trace.cadence = options.cadence;
  trace.epsilons = options.epsilons;

  int t = 0;
  double cum = 0.0;
  double next_checkpoint = options.cadence;

  auto record_metrics = [&] {
    if (options.cadence <= 0.0 || options.metric == MetricKind::kNone) return;
    while (next_checkpoint <= cum) {
      MetricRow row;
      row.checkpoint = next_checkpoint;
      row.cum_cost = cum;
      row.t = t;
      row.value = options.metric == MetricKind::kF1 ? f1_score(posterior, env, threshold)
                                                    : reported_regret(posterior, env);
      const Sets* sets = policy.sets();
      for (double eps : options.epsilons)
        row.eps_ok.push_back(sets ? eps_accuracy(env, mode, *sets, threshold, eps).holds : -1);
      trace.metric_rows.push_back(std::move(row));
      next_checkpoint += options.cadence;
    }
  };

  for (;;) {
    if (policy.finished()) {
      trace.termination = policy.termination_reason();
      break;
    }
    if (options.max_steps >= 0 && t >= options.max_steps) {
      trace.termination = "max_steps";
      break;
    }
    const Selection sel = policy.select(posterior, prev);
    if (sel.points.empty()) {
      trace.termination = "no_candidates";
      break;
    }
    bool budget_hit = false;
    for (std::size_t i = 0; i < sel.points.size(); ++i) {
      const int g = sel.points[i];
      const double cost = env.cost(prev, g);
      if (cum + cost > options.budget) {
        budget_hit = true;
        break;
      }
      const double y = env.observe(g, observe_stream);
      posterior = std::move(posterior).extended(env.base_of(g), y, env.noise_var_at(g));
      ++t;
      cum += cost;
      prev = g;
      policy.update(posterior, g, cost, t + 1, i + 1 == sel.points.size());

      const StepMeta meta = policy.meta();
      trace.steps.push_back({t, g, env.base_of(g), env.level_of(g), env.noise_var_at(g), cost,
                             cum, y, meta.m, meta.h, meta.l, meta.epoch, meta.eta, meta.beta,
                             sel.scores[i]});
      record_metrics();
    }
    if (budget_hit) {
      trace.termination = "budget";
      break;
    }
  }

  trace.final_cum_cost = cum;
  if (const Sets* sets = policy.sets()) {
    trace.final_m = sets->m_count();
    trace.final_h = sets->h_count();
    trace.final_l = sets->l_count();
  }
  return trace;
}

}  // namespace truvar::internal
