#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "support/generators.hpp"
#include "truvar/common.hpp"
#include "truvar/environment.hpp"
#include "truvar/metrics.hpp"
#include "truvar/posterior.hpp"
#include "truvar/truvar.hpp"

using namespace truvar;
using truvar::testing::random_history;
using truvar::testing::random_kernel;
using truvar::testing::random_noise_var;
using truvar::testing::random_points;

namespace {

Environment unit_env(Eigen::MatrixXd points, Eigen::VectorXd truth, double noise_var) {
  Environment env;
  env.points = std::move(points);
  env.truth = std::move(truth);
  env.noise_vars = Eigen::VectorXd::Constant(env.points.rows(), noise_var);
  env.validate();
  return env;
}

// Two far-apart 1-d points under a short length scale: effectively
// independent coordinates with unit prior variance.
Environment two_point_env(double f0, double f1, double noise_var) {
  Eigen::MatrixXd pts(2, 1);
  pts << 0.0, 100.0;
  Eigen::VectorXd truth(2);
  truth << f0, f1;
  return unit_env(pts, truth, noise_var);
}

Kernel short_se() { return Kernel::squared_exponential(Eigen::VectorXd::Constant(1, 0.1)); }

}  // namespace

TEST_CASE("practical and theoretical confidence scales") {
  // a log(|D| t^2): 0.5 log(25 * 100) and 1.0 log(2500 * 100).
  CHECK(beta_practical(0.5, 25, 10) == doctest::Approx(3.9120).epsilon(1e-4));
  CHECK(beta_practical(1.0, 2500, 10) == doctest::Approx(12.4292).epsilon(1e-4));
  // t = 1 leaves only the domain term.
  CHECK(beta_practical(2.0, 10, 1) == doctest::Approx(2.0 * std::log(10.0)).epsilon(1e-12));

  BetaRule theoretical{BetaRule::Kind::kTheoretical, 1.0, 0.1};
  // 2 log(|D| t^2 pi^2 / (6 delta)) at |D| = 100, t = 1000.
  CHECK(theoretical.evaluate(100, 1000) == doctest::Approx(42.442).epsilon(1e-4));
  // Nondecreasing in t and |D|.
  CHECK(theoretical.evaluate(100, 1001) > theoretical.evaluate(100, 1000));
  CHECK(theoretical.evaluate(101, 1000) > theoretical.evaluate(100, 1000));

  CHECK_THROWS_AS(beta_practical(0.0, 10, 1), ConfigError);
  CHECK_THROWS_AS(beta_practical(1.0, 1, 1), ConfigError);
  CHECK_THROWS_AS(beta_practical(1.0, 10, 0), ConfigError);
  BetaRule bad_delta{BetaRule::Kind::kTheoretical, 1.0, 0.0};
  CHECK_THROWS_AS(bad_delta.validate(), ConfigError);
}

TEST_CASE("acquisition hand example on a single point") {
  // Prior variance 1, beta = 4, eta^2 = 0.04, unit cost, noise 1:
  // lookahead variance 0.5, so the truncated drop is 4 - 2 = 2.
  Eigen::MatrixXd pts(1, 1);
  pts << 0.0;
  Eigen::VectorXd truth(1);
  truth << 0.0;
  auto env = unit_env(pts, truth, 1.0);
  const auto post = GpPosterior::prior(DomainData::make(env.points, short_se()));

  TruVarConfig config;
  config.mode = Mode::kLevelSet;
  TruVarState state;
  state.beta = 4.0;
  state.eta = 0.2;
  state.sets = Sets::all_unclassified(1);
  CHECK(acquisition_score(post, env, config, state, 0, -1) == doctest::Approx(2.0).epsilon(1e-12));

  // Doubling the cost halves the score.
  env.cost_model = CostModel::kPerPoint;
  env.point_costs = Eigen::VectorXd::Constant(1, 2.0);
  CHECK(acquisition_score(post, env, config, state, 0, -1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("saturated targets score zero") {
  auto env = two_point_env(0.0, 0.0, 0.1);
  const auto post = GpPosterior::prior(DomainData::make(env.points, short_se()));
  TruVarConfig config;
  TruVarState state;
  state.beta = 1.0;
  state.eta = 2.0;  // beta * var = 1 <= eta^2 = 4 everywhere
  state.sets = Sets::all_unclassified(2);
  CHECK(acquisition_score(post, env, config, state, 0, -1) == 0.0);
  CHECK(acquisition_score(post, env, config, state, 1, -1) == 0.0);
  // The selection still returns a point (lowest index on the all-zero tie).
  const auto sel = select(post, env, config, state);
  REQUIRE(sel.points.size() == 1);
  CHECK(sel.points[0] == 0);
  CHECK(sel.scores[0] == 0.0);
}

TEST_CASE("selection breaks ties toward the lowest index and rejects bad costs") {
  auto env = two_point_env(0.0, 0.0, 0.5);
  const auto post = GpPosterior::prior(DomainData::make(env.points, short_se()));
  TruVarConfig config;
  TruVarState state = initial_state(config, post, 2);
  // Symmetric environment: both candidates score identically.
  CHECK(acquisition_score(post, env, config, state, 0, -1) ==
        doctest::Approx(acquisition_score(post, env, config, state, 1, -1)).epsilon(1e-14));
  const auto sel = select(post, env, config, state);
  REQUIRE(sel.points.size() == 1);
  CHECK(sel.points[0] == 0);

  env.cost_model = CostModel::kPerPoint;
  env.point_costs = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(acquisition_score(post, env, config, state, 0, -1), ConfigError);
}

TEST_CASE("truncated score never exceeds the untruncated variance reduction") {
  RandomStream rng(88, "trunc-dominance");
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(12));
    const auto kernel = random_kernel(rng, 2);
    auto env = unit_env(random_points(rng, n, 2), Eigen::VectorXd::Zero(n),
                        random_noise_var(rng));
    const auto domain = DomainData::make(env.points, kernel);
    const auto h = random_history(rng, n, static_cast<int>(rng.below(8)));
    const auto post = GpPosterior::fit(domain, h.indices, h.values, h.noise_vars);

    TruVarConfig config;
    TruVarState state;
    state.beta = 0.5 + 4.0 * rng.uniform();
    state.eta = rng.uniform();
    state.sets = Sets::all_unclassified(n);
    for (int i = 0; i < n; ++i) state.sets.in_m[i] = rng.bits() % 2;

    const int candidate = static_cast<int>(rng.below(n));
    const double score = acquisition_score(post, env, config, state, candidate, -1);
    CHECK(score >= -1e-12);

    const auto m = state.sets.m_indices();
    const Eigen::VectorXd look =
        post.lookahead_variances(candidate, env.noise_var_at(candidate), m);
    double untruncated = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j)
      untruncated += state.beta * (post.var(m[j]) - look[static_cast<Eigen::Index>(j)]);
    CHECK(score <= untruncated / env.cost(-1, candidate) + 1e-12);
  }
}

TEST_CASE("initial state freezes epoch one") {
  const auto env = two_point_env(0.0, 1.0, 0.1);
  const auto post = GpPosterior::prior(DomainData::make(env.points, short_se()));
  TruVarConfig config;
  config.eta_initial = 0.7;
  config.beta.a = 2.0;
  const auto state = initial_state(config, post, 2);
  CHECK(state.epoch == 1);
  CHECK(state.eta == 0.7);
  CHECK(state.epoch_start_time == 1);
  CHECK(state.beta == doctest::Approx(beta_practical(2.0, 2, 1)).epsilon(1e-15));
  CHECK(state.sets.m_count() == 2);
  CHECK(state.step == 0);
}

TEST_CASE("epoch boundary equality advances") {
  const auto env = two_point_env(0.0, 1.0, 0.1);
  const auto post = GpPosterior::prior(DomainData::make(env.points, short_se()));
  TruVarConfig config;
  config.beta.a = 1.0;
  // Prior sd is exactly 1, so the exit condition sqrt(beta) * 1 <= eta holds
  // with equality when eta = sqrt(beta).
  config.eta_initial = std::sqrt(beta_practical(1.0, 2, 1));
  config.shrink_ratio = 0.1;
  auto state = initial_state(config, post, 2);
  const auto sig = maybe_advance_epoch(state, post, config, 2, 2);
  CHECK(sig == EpochSignal::kAdvanced);
  CHECK(state.epoch == 2);
  CHECK(state.eta == doctest::Approx(config.eta_initial * 0.1).epsilon(1e-15));
  CHECK(state.epoch_start_time == 2);
  CHECK(state.beta == doctest::Approx(beta_practical(1.0, 2, 2)).epsilon(1e-15));
}

TEST_CASE("one call can cross several epochs") {
  // Both points observed tightly: sd ~ sqrt(1.2e-3). With beta at t=2 the
  // exit condition holds for eta 1 and 0.1 but not 0.01, so the call advances
  // twice and lands on eta_3 = 0.01.
  const auto env = two_point_env(0.0, 1.0, 1.2e-3);
  auto post = GpPosterior::prior(DomainData::make(env.points, short_se()));
  post = std::move(post).extended(0, 0.0, 1.2e-3);
  post = std::move(post).extended(1, 1.0, 1.2e-3);

  TruVarConfig config;
  config.eta_initial = 1.0;
  config.shrink_ratio = 0.1;
  config.beta.a = 1.0;
  auto state = initial_state(config, post, 2);
  const auto sig = maybe_advance_epoch(state, post, config, 2, 2);
  CHECK(sig == EpochSignal::kAdvanced);
  CHECK(state.epoch == 3);
  CHECK(state.eta == doctest::Approx(0.01).epsilon(1e-15));
  // Both advances freeze beta at the same next step.
  CHECK(state.beta == doctest::Approx(beta_practical(1.0, 2, 2)).epsilon(1e-15));

  // Not advancing certifies that some unclassified point is still wide.
  TruVarConfig tight = config;
  tight.eta_initial = 1e-6;
  auto stuck = initial_state(tight, post, 2);
  CHECK(maybe_advance_epoch(stuck, post, tight, 2, 2) == EpochSignal::kNone);
  double max_sd = 0.0;
  for (int i = 0; i < 2; ++i) max_sd = std::max(max_sd, std::sqrt(post.var(i)));
  CHECK(std::sqrt(stuck.beta) * max_sd > (1.0 + tight.confidence_slack) * stuck.eta);
}

TEST_CASE("an empty potential set advances exactly once per call") {
  const auto env = two_point_env(0.0, 1.0, 0.1);
  const auto post = GpPosterior::prior(DomainData::make(env.points, short_se()));
  TruVarConfig config;
  config.shrink_ratio = 0.1;
  auto state = initial_state(config, post, 2);
  for (int i = 0; i < 2; ++i) {
    state.sets.in_m[i] = 0;
    state.sets.in_l[i] = 1;
  }
  CHECK(maybe_advance_epoch(state, post, config, 2, 2) == EpochSignal::kAdvanced);
  CHECK(state.epoch == 2);
  CHECK(maybe_advance_epoch(state, post, config, 2, 3) == EpochSignal::kAdvanced);
  CHECK(state.epoch == 3);
}

TEST_CASE("eta floor and stop eta signals") {
  const auto env = two_point_env(0.0, 1.0, 0.1);
  const auto post = GpPosterior::prior(DomainData::make(env.points, short_se()));
  TruVarConfig config;
  config.shrink_ratio = 0.1;
  config.eta_initial = std::sqrt(beta_practical(1.0, 2, 1));  // advances immediately
  config.eta_floor = config.eta_initial * 0.5;
  auto state = initial_state(config, post, 2);
  CHECK(maybe_advance_epoch(state, post, config, 2, 2) == EpochSignal::kEtaFloor);
  CHECK(state.eta < config.eta_floor);

  config.eta_floor = 1e-8;
  auto stopped = initial_state(config, post, 2);
  // Current target already at or below stop_eta: the epoch is complete.
  CHECK(maybe_advance_epoch(stopped, post, config, 2, 2, config.eta_initial) ==
        EpochSignal::kStopEta);
  CHECK(stopped.epoch == 1);
}

TEST_CASE("batch selection is greedy over fantasy updates") {
  RandomStream rng(55, "batch");
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::MatrixXd pts = random_points(rng, 3, 1, 0.0, 0.35);
    auto env = unit_env(pts, Eigen::VectorXd::Zero(3), 0.05);
    const auto kernel = Kernel::squared_exponential(Eigen::VectorXd::Constant(1, 0.2));
    const auto post = GpPosterior::prior(DomainData::make(env.points, kernel));

    TruVarConfig config;
    config.batch_size = 2;
    TruVarState state = initial_state(config, post, 3);
    state.beta = 2.0;
    state.eta = 0.1;

    const auto batch = select(post, env, config, state);
    REQUIRE(batch.points.size() == 2);

    // First pick: plain argmax of the single-point score.
    TruVarConfig single;
    int best = 0;
    double best_score = -1.0;
    for (int c = 0; c < 3; ++c) {
      const double s = acquisition_score(post, env, single, state, c, -1);
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    CHECK(batch.points[0] == best);
    CHECK(batch.scores[0] == doctest::Approx(best_score).epsilon(1e-12));

    // Second pick: argmax after conditioning on the first at its current mean.
    const auto fantasy = post.extended(best, post.mean(best), env.noise_var_at(best));
    TruVarState after = state;
    after.prev_point = best;
    int best2 = 0;
    double best2_score = -1.0;
    for (int c = 0; c < 3; ++c) {
      const double s = acquisition_score(fantasy, env, single, after, c, best);
      if (s > best2_score) {
        best2_score = s;
        best2 = c;
      }
    }
    CHECK(batch.points[1] == best2);
    CHECK(batch.scores[1] == doctest::Approx(best2_score).epsilon(1e-12));
  }
}

TEST_CASE("restricting candidates to the potential set") {
  auto env = two_point_env(0.0, 1.0, 0.1);
  const auto post = GpPosterior::prior(DomainData::make(env.points, short_se()));
  TruVarConfig config;
  config.restrict_to_potential = true;
  TruVarState state = initial_state(config, post, 2);
  state.sets.in_m[0] = 0;  // only point 1 remains a candidate
  const auto sel = select(post, env, config, state);
  REQUIRE(sel.points.size() == 1);
  CHECK(sel.points[0] == 1);

  // With nothing in M there are no candidates at all.
  state.sets.in_m[1] = 0;
  CHECK(select(post, env, config, state).points.empty());
}

TEST_CASE("pure variance reduction never truncates or advances") {
  const auto env = two_point_env(0.0, 1.0, 0.1);
  const auto post = GpPosterior::prior(DomainData::make(env.points, short_se()));
  TruVarConfig config;
  config.pure_variance_reduction = true;
  auto state = initial_state(config, post, 2);
  CHECK(state.eta == 0.0);
  CHECK(maybe_advance_epoch(state, post, config, 2, 2) == EpochSignal::kNone);
  CHECK(state.epoch == 1);

  // Score equals the exact summed variance reduction scaled by beta.
  const int targets[] = {0, 1};
  const Eigen::VectorXd look = post.lookahead_variances(0, 0.1, targets);
  const double expected = state.beta * ((1.0 - look[0]) + (1.0 - look[1]));
  CHECK(acquisition_score(post, env, config, state, 0, -1) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("config validation rejects out-of-range knobs") {
  TruVarConfig config;
  config.eta_initial = 0.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.shrink_ratio = 1.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.batch_size = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.confidence_slack = -0.1;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.eta_floor = 0.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.mode = Mode::kLevelSet;
  config.threshold = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.beta.a = -1.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  // Pure variance reduction ignores the eta schedule entirely.
  config = {};
  config.pure_variance_reduction = true;
  config.eta_initial = -5.0;
  config.validate();
}

TEST_CASE("noiseless two-point level-set run classifies everything") {
  const auto env = two_point_env(-1.0, 1.0, 1e-12);
  TruVarConfig config;
  config.mode = Mode::kLevelSet;
  config.threshold = 0.0;
  config.shrink_ratio = 0.1;
  RunOptions options;
  options.max_steps = 50;
  options.cadence = 1.0;
  options.metric = MetricKind::kF1;
  options.epsilons = {0.1};
  const auto trace = run_truvar(env, short_se(), config, options);

  CHECK(trace.termination == "m_empty");
  CHECK(trace.final_m == 0);
  CHECK(trace.final_h == 1);
  CHECK(trace.final_l == 1);
  CHECK(trace.steps.size() == 2);
  REQUIRE(!trace.metric_rows.empty());
  CHECK(trace.metric_rows.back().value == 1.0);
  CHECK(trace.metric_rows.back().eps_ok == std::vector<int>{1});
}

TEST_CASE("run traces satisfy the step invariants") {
  RandomStream rng(909, "run-invariants");
  const auto kernel = Kernel::squared_exponential(Eigen::VectorXd::Constant(2, 0.25));
  for (int trial = 0; trial < 10; ++trial) {
    const auto grid = make_grid(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2), {5, 5});
    const auto env = synth_gp_function(kernel, grid, 12, 1000 + trial, 0.01);

    TruVarConfig config;
    config.mode = trial % 2 == 0 ? Mode::kLevelSet : Mode::kBayesOpt;
    config.threshold = 0.3;
    config.shrink_ratio = 0.5;
    RunOptions options;
    options.seed = trial;
    options.budget = 20.0;
    const auto trace = run_truvar(env, kernel, config, options);

    double cum = 0.0;
    int epoch = 1;
    double eta = config.eta_initial;
    int t = 0;
    for (const auto& row : trace.steps) {
      CHECK(row.t == ++t);
      CHECK(row.score >= -1e-12);
      CHECK(row.cost > 0.0);
      cum += row.cost;
      CHECK(row.cum_cost == cum);  // exact accumulation, same order
      CHECK(row.epoch >= epoch);
      while (epoch < row.epoch) {
        eta *= config.shrink_ratio;
        ++epoch;
      }
      CHECK(row.eta == eta);  // the target follows eta_1 r^(i-1) exactly
      if (config.mode == Mode::kLevelSet)
        CHECK(row.m_size + row.h_size + row.l_size == env.base_size());
      else
        CHECK(row.h_size + row.l_size == 0);
      CHECK(row.beta > 0.0);
    }
    CHECK(trace.final_cum_cost == cum);
  }
}

TEST_CASE("confidence bounds cover a prior draw across whole runs") {
  // f sampled from the exact prior (anchors = whole grid), theoretical beta
  // with delta = 0.1: Lemma-style union bound says >= 90% of runs keep
  // l <= f <= u at every step; 200 seeds, binomial 95% slack allows 173.
  const auto kernel = Kernel::squared_exponential(Eigen::VectorXd::Constant(2, 0.3));
  const auto grid = make_grid(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2), {7, 7});
  const int n = static_cast<int>(grid.rows());

  int covered_runs = 0;
  for (int seed = 0; seed < 200; ++seed) {
    const auto env = synth_gp_function(kernel, grid, n, seed, 1e-2);
    const auto domain = DomainData::make(env.points, kernel);
    auto post = GpPosterior::prior(domain);

    TruVarConfig config;
    config.mode = Mode::kLevelSet;
    config.threshold = 0.5;
    config.beta.kind = BetaRule::Kind::kTheoretical;
    config.beta.delta = 0.1;
    config.shrink_ratio = 0.5;
    auto state = initial_state(config, post, n);

    RandomStream obs(seed, "observe");
    bool covered = true;
    for (int step = 1; step <= 25 && state.sets.m_count() > 0; ++step) {
      state.prev_point = -1;
      const auto sel = select(post, env, config, state);
      REQUIRE(sel.points.size() == 1);
      const int g = sel.points[0];
      const double y = env.observe(g, obs);
      post = std::move(post).extended(env.base_of(g), y, env.noise_var_at(g));
      update_sets(state, post, config);
      maybe_advance_epoch(state, post, config, n, step + 1);
      for (int i = 0; i < n; ++i)
        if (env.truth[i] < state.bounds.lower[i] || env.truth[i] > state.bounds.upper[i])
          covered = false;
    }
    covered_runs += covered;
  }
  CHECK(covered_runs >= 173);
}
