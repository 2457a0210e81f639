#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>

#include "doctest.h"
#include "truvar/common.hpp"
#include "truvar/posterior.hpp"
#include "truvar/rng.hpp"
#include "truvar/sets.hpp"

using namespace truvar;

namespace {

ConfidenceBounds bounds_of(std::initializer_list<double> lower,
                           std::initializer_list<double> upper) {
  ConfidenceBounds b;
  b.lower.resize(static_cast<Eigen::Index>(lower.size()));
  b.upper.resize(static_cast<Eigen::Index>(upper.size()));
  int i = 0;
  for (double v : lower) b.lower[i++] = v;
  i = 0;
  for (double v : upper) b.upper[i++] = v;
  return b;
}

void check_partition(const Sets& s) {
  for (int i = 0; i < s.size(); ++i)
    CHECK(int(s.in_m[i]) + int(s.in_h[i]) + int(s.in_l[i]) == 1);
}

}  // namespace

TEST_CASE("confidence bounds are mean plus-minus sqrt(beta) sd") {
  Eigen::MatrixXd pts(2, 1);
  pts << 0.0, 1.0;
  const auto domain = DomainData::make(pts, Kernel::squared_exponential(
                                                Eigen::VectorXd::Constant(1, 0.2)));
  const auto post = GpPosterior::prior(domain).extended(0, 1.0, 0.25);
  const auto b = confidence_bounds(post, 4.0);
  for (int i = 0; i < 2; ++i) {
    const double sd = std::sqrt(post.var(i));
    CHECK(b.upper[i] == doctest::Approx(post.mean(i) + 2.0 * sd).epsilon(1e-12));
    CHECK(b.lower[i] == doctest::Approx(post.mean(i) - 2.0 * sd).epsilon(1e-12));
  }
  // Zero beta collapses the band onto the mean; negative is rejected.
  const auto flat = confidence_bounds(post, 0.0);
  CHECK(flat.upper == post.mean_vector());
  CHECK(flat.lower == post.mean_vector());
  CHECK_THROWS_AS(confidence_bounds(post, -1.0), ConfigError);
}

TEST_CASE("initial state keeps everything unclassified") {
  const auto s = Sets::all_unclassified(4);
  CHECK(s.size() == 4);
  CHECK(s.m_count() == 4);
  CHECK(s.h_count() == 0);
  CHECK(s.l_count() == 0);
  CHECK(s.m_indices() == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("optimization update keeps points whose upper bound reaches the best lower bound") {
  // mu = (0, 1, 2), sd = 0.1, sqrt(beta) = 1: u = (1, 2, 3), l = (-1, 0, 1)?
  // No: u = mu + 0.1, l = mu - 0.1 with sqrt(beta) * sd = 0.1. Best lower
  // bound 1.9, so only the third point survives.
  auto sets = Sets::all_unclassified(3);
  const auto b = bounds_of({-0.1, 0.9, 1.9}, {0.1, 1.1, 2.1});
  update_sets_bo(sets, b, true);
  CHECK(sets.in_m == std::vector<std::uint8_t>{0, 0, 1});
  CHECK(sets.m_indices() == std::vector<int>{2});
  // Optimization mode never classifies into H or L.
  CHECK(sets.h_count() == 0);
  CHECK(sets.l_count() == 0);
}

TEST_CASE("optimization update ties keep both candidates") {
  auto sets = Sets::all_unclassified(2);
  // u[0] equals the best lower bound exactly: point 0 stays.
  update_sets_bo(sets, bounds_of({0.0, 1.0}, {1.0, 2.0}), true);
  CHECK(sets.m_indices() == std::vector<int>{0, 1});
}

TEST_CASE("monotone optimization update never re-admits") {
  auto sets = Sets::all_unclassified(3);
  update_sets_bo(sets, bounds_of({-0.1, 0.9, 1.9}, {0.1, 1.1, 2.1}), true);
  REQUIRE(sets.m_indices() == std::vector<int>{2});
  // Much looser bounds would re-admit everything, but monotone mode only
  // filters the current M.
  const auto loose = bounds_of({-10.0, -10.0, -10.0}, {10.0, 10.0, 10.0});
  update_sets_bo(sets, loose, true);
  CHECK(sets.m_indices() == std::vector<int>{2});

  auto fresh = Sets::all_unclassified(3);
  update_sets_bo(fresh, bounds_of({-0.1, 0.9, 1.9}, {0.1, 1.1, 2.1}), false);
  REQUIRE(fresh.m_indices() == std::vector<int>{2});
  update_sets_bo(fresh, loose, false);
  CHECK(fresh.m_indices() == std::vector<int>{0, 1, 2});
}

TEST_CASE("level set update classifies by bound position") {
  const double h = 1.0;
  auto sets = Sets::all_unclassified(4);
  // l > h confirms above; u < h confirms below; straddlers stay in M.
  update_sets_lse(sets, bounds_of({1.01, 0.2, -1.0, 0.9}, {2.0, 0.99, -0.5, 1.2}), h, true);
  CHECK(sets.in_h == std::vector<std::uint8_t>{1, 0, 0, 0});
  CHECK(sets.in_l == std::vector<std::uint8_t>{0, 1, 1, 0});
  CHECK(sets.in_m == std::vector<std::uint8_t>{0, 0, 0, 1});
  check_partition(sets);
}

TEST_CASE("boundary-touching bounds stay unclassified") {
  const double h = 1.0;
  auto sets = Sets::all_unclassified(2);
  // l == h and u == h are not strict crossings.
  update_sets_lse(sets, bounds_of({1.0, 0.0}, {2.0, 1.0}), h, true);
  CHECK(sets.m_indices() == std::vector<int>{0, 1});
}

TEST_CASE("prior bounds classify nothing when the threshold is inside the band") {
  Eigen::MatrixXd pts(3, 1);
  pts << 0.0, 0.5, 1.0;
  const auto post = GpPosterior::prior(
      DomainData::make(pts, Kernel::squared_exponential(Eigen::VectorXd::Ones(1))));
  const auto b = confidence_bounds(post, 4.0);  // band is [-2, 2] everywhere
  auto sets = Sets::all_unclassified(3);
  update_sets_lse(sets, b, 1.5, true);
  CHECK(sets.m_count() == 3);
}

TEST_CASE("classifications are permanent in both modes") {
  const double h = 0.0;
  for (bool monotone : {true, false}) {
    auto sets = Sets::all_unclassified(3);
    update_sets_lse(sets, bounds_of({0.01, -2.0, -1.0}, {1.0, -0.01, 1.0}), h, monotone);
    REQUIRE(sets.in_h == std::vector<std::uint8_t>{1, 0, 0});
    REQUIRE(sets.in_l == std::vector<std::uint8_t>{0, 1, 0});
    // Bounds that now contradict the stored classification do not undo it.
    update_sets_lse(sets, bounds_of({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}), h, monotone);
    CHECK(sets.in_h == std::vector<std::uint8_t>{1, 0, 0});
    CHECK(sets.in_l == std::vector<std::uint8_t>{0, 1, 0});
    check_partition(sets);
  }
}

TEST_CASE("level set partition holds through random update sequences") {
  RandomStream rng(404, "sets");
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(10));
    auto monotone_sets = Sets::all_unclassified(n);
    auto free_sets = Sets::all_unclassified(n);
    int prev_m = n, prev_h = 0, prev_l = 0;
    for (int round = 0; round < 8; ++round) {
      ConfidenceBounds b;
      b.lower.resize(n);
      b.upper.resize(n);
      for (int i = 0; i < n; ++i) {
        const double a = 2.0 * rng.uniform() - 1.0;
        const double w = rng.uniform();
        b.lower[i] = a - w;
        b.upper[i] = a + w;
      }
      update_sets_lse(monotone_sets, b, 0.0, true);
      update_sets_lse(free_sets, b, 0.0, false);
      check_partition(monotone_sets);
      check_partition(free_sets);
      // Monotone mode: M shrinks, H and L grow.
      CHECK(monotone_sets.m_count() <= prev_m);
      CHECK(monotone_sets.h_count() >= prev_h);
      CHECK(monotone_sets.l_count() >= prev_l);
      prev_m = monotone_sets.m_count();
      prev_h = monotone_sets.h_count();
      prev_l = monotone_sets.l_count();
      // H and L agree across modes: permanence is mode-independent.
      CHECK(free_sets.in_h == monotone_sets.in_h);
      CHECK(free_sets.in_l == monotone_sets.in_l);
    }
  }
}
