#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <vector>

#include "doctest.h"
#include "truvar/common.hpp"
#include "truvar/environment.hpp"
#include "truvar/metrics.hpp"
#include "truvar/posterior.hpp"

using namespace truvar;

namespace {

// Far-apart 1-d points: noiseless observations pin the posterior mean to the
// observed values without cross-talk.
Environment env_with(std::vector<double> truth) {
  Environment env;
  const auto n = static_cast<Eigen::Index>(truth.size());
  env.points.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) env.points(i, 0) = 100.0 * static_cast<double>(i);
  env.truth = Eigen::Map<Eigen::VectorXd>(truth.data(), n);
  env.noise_vars = Eigen::VectorXd::Constant(n, 0.01);
  env.validate();
  return env;
}

Kernel short_se() { return Kernel::squared_exponential(Eigen::VectorXd::Constant(1, 0.1)); }

// Posterior whose mean is (numerically) the given vector.
GpPosterior posterior_with_mean(const Environment& env, const std::vector<double>& mean) {
  auto post = GpPosterior::prior(DomainData::make(env.points, short_se()));
  for (std::size_t i = 0; i < mean.size(); ++i)
    post = std::move(post).extended(static_cast<int>(i), mean[i], 0.0);
  return post;
}

Sets sets_with_m(int n, std::initializer_list<int> m) {
  Sets s = Sets::all_unclassified(n);
  for (int i = 0; i < n; ++i) s.in_m[i] = 0;
  for (int i : m) s.in_m[i] = 1;
  return s;
}

}  // namespace

TEST_CASE("optimization accuracy on the exact argmax set") {
  const auto env = env_with({0.0, 0.2, 0.9, 1.0});
  const auto exact = sets_with_m(4, {3});
  CHECK(eps_accuracy(env, Mode::kBayesOpt, exact, 0.0, 0.0).holds);
  CHECK(eps_accuracy(env, Mode::kBayesOpt, exact, 0.0, 5.0).holds);
}

TEST_CASE("optimization accuracy hand example") {
  // f = (0, .2, .9, 1.0) and M keeps the top two: the worst retained gap is
  // 0.1, so epsilon 0.1 passes and 0.05 fails with the 0.9 point as witness.
  const auto env = env_with({0.0, 0.2, 0.9, 1.0});
  const auto sets = sets_with_m(4, {2, 3});
  const auto ok = eps_accuracy(env, Mode::kBayesOpt, sets, 0.0, 0.1);
  CHECK(ok.holds);
  CHECK(ok.witnesses.empty());
  CHECK(ok.checked == 2);
  CHECK(ok.min_margin == doctest::Approx(0.0).epsilon(1e-12));

  const auto bad = eps_accuracy(env, Mode::kBayesOpt, sets, 0.0, 0.05);
  CHECK(!bad.holds);
  CHECK(bad.witnesses == std::vector<int>{2});
  CHECK(bad.max_violation == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("discarding a true maximizer always fails") {
  const auto env = env_with({0.0, 1.0, 1.0});
  const auto sets = sets_with_m(3, {1});  // the tied maximizer 2 was dropped
  const auto report = eps_accuracy(env, Mode::kBayesOpt, sets, 0.0, 100.0);
  CHECK(!report.holds);
  CHECK(report.witnesses == std::vector<int>{2});
}

TEST_CASE("level-set accuracy checks classifications against the truth") {
  const double h = 0.5;
  const auto env = env_with({0.4, 0.6, 0.5, 0.8});

  // Correct classification: 0 below, 1 above, 3 above, 2 within eps/2.
  Sets sets = Sets::all_unclassified(4);
  sets.in_m = {0, 0, 1, 0};
  sets.in_l = {1, 0, 0, 0};
  sets.in_h = {0, 1, 0, 1};
  CHECK(eps_accuracy(env, Mode::kLevelSet, sets, h, 0.1).holds);

  // A misclassified point in H fails with that witness.
  Sets wrong = sets;
  wrong.in_h = {1, 1, 0, 1};
  wrong.in_l = {0, 0, 0, 0};
  wrong.in_m = {0, 0, 1, 0};
  const auto report = eps_accuracy(env, Mode::kLevelSet, wrong, h, 0.1);
  CHECK(!report.holds);
  CHECK(report.witnesses == std::vector<int>{0});
  CHECK(report.max_violation == doctest::Approx(0.1).epsilon(1e-12));

  // H demands strictly above: truth exactly at h is a violation.
  Sets boundary = Sets::all_unclassified(4);
  boundary.in_m = {1, 1, 0, 1};
  boundary.in_h = {0, 0, 1, 0};
  boundary.in_l = {0, 0, 0, 0};
  CHECK(!eps_accuracy(env, Mode::kLevelSet, boundary, h, 10.0).holds);

  // Unclassified points must sit within eps/2 of the threshold.
  Sets lazy = Sets::all_unclassified(4);  // everything in M
  CHECK(!eps_accuracy(env, Mode::kLevelSet, lazy, h, 0.3).holds);   // |0.8-0.5| > 0.15
  CHECK(eps_accuracy(env, Mode::kLevelSet, lazy, h, 0.75).holds);   // 0.3 < 0.375
}

TEST_CASE("accuracy is monotone in epsilon") {
  const auto env = env_with({0.1, 0.45, 0.52, 0.9});
  Sets sets = Sets::all_unclassified(4);
  sets.in_m = {0, 1, 1, 0};
  sets.in_l = {1, 0, 0, 0};
  sets.in_h = {0, 0, 0, 1};
  bool prev = false;
  for (double eps : {0.01, 0.05, 0.1, 0.2, 0.5, 1.0}) {
    const bool holds = eps_accuracy(env, Mode::kLevelSet, sets, 0.5, eps).holds;
    CHECK((!prev || holds));  // once it holds it keeps holding
    prev = holds;
  }
  CHECK(prev);

  CHECK_THROWS_AS(eps_accuracy(env, Mode::kLevelSet, sets, 0.5, -0.1), ConfigError);
  CHECK_THROWS_AS(eps_accuracy(env, Mode::kLevelSet, Sets::all_unclassified(3), 0.5, 0.1),
                  ConfigError);
}

TEST_CASE("f1 of a perfect posterior is one") {
  const auto env = env_with({0.0, 1.0, 0.3, 0.8});
  const auto post = posterior_with_mean(env, {0.0, 1.0, 0.3, 0.8});
  CHECK(f1_score(post, env, 0.5) == 1.0);
}

TEST_CASE("f1 with an empty prediction is zero") {
  const auto env = env_with({0.0, 1.0});
  const auto post = GpPosterior::prior(DomainData::make(env.points, short_se()));
  // Prior mean 0 predicts nothing above 0.5; recall is zero.
  CHECK(f1_score(post, env, 0.5) == 0.0);
}

TEST_CASE("f1 hand example two thirds") {
  // Truth above h at {0,1,2}; prediction above at {1,2,3}: P = R = 2/3.
  const auto env = env_with({1.0, 1.0, 1.0, 0.0, 0.0});
  const auto post = posterior_with_mean(env, {0.0, 1.0, 1.0, 1.0, 0.0});
  CHECK(f1_score(post, env, 0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("f1 boundary conventions") {
  // Prediction uses mean >= h, truth uses f > h. With h = 0 the prior mean
  // sits exactly on the threshold: both points are predicted, only f = 1 is
  // truly above. tp = 1, fp = 1, fn = 0 -> F1 = 2/3.
  const auto env = env_with({0.0, 1.0});
  const auto prior = GpPosterior::prior(DomainData::make(env.points, short_se()));
  CHECK(f1_score(prior, env, 0.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // Empty true superlevel set is a caller error.
  const auto low = env_with({0.0, 0.1});
  const auto low_post = GpPosterior::prior(DomainData::make(low.points, short_se()));
  CHECK_THROWS_AS(f1_score(low_post, low, 0.5), ConfigError);
}

TEST_CASE("reported regret") {
  const auto env = env_with({0.2, 0.9, 0.5});

  // Flat prior reports the lowest index.
  const auto prior = GpPosterior::prior(DomainData::make(env.points, short_se()));
  CHECK(reported_regret(prior, env) == doctest::Approx(0.9 - 0.2).epsilon(1e-12));

  // Posterior mean ordering disagrees with the truth: regret follows the mean.
  const auto post = posterior_with_mean(env, {0.0, 0.1, 0.7});
  CHECK(reported_regret(post, env) == doctest::Approx(0.9 - 0.5).epsilon(1e-12));

  // Everything observed noiselessly: the report is exact.
  const auto perfect = posterior_with_mean(env, {0.2, 0.9, 0.5});
  CHECK(reported_regret(perfect, env) == 0.0);
}
