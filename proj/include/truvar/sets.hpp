#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "truvar/posterior.hpp"

namespace truvar {

// Confidence band u = mean + sqrt(beta) sd, l = mean - sqrt(beta) sd over the
// posterior's domain.
struct ConfidenceBounds {
  Eigen::VectorXd upper;
  Eigen::VectorXd lower;
};

ConfidenceBounds confidence_bounds(const GpPosterior& posterior, double beta);

// Classification state over the base domain: potential maximizers / still
// unclassified (M), confidently above the level (H), confidently below (L).
// H and L only move points in, and in level-set mode {M, H, L} partition the
// domain.
struct Sets {
  std::vector<std::uint8_t> in_m, in_h, in_l;

  static Sets all_unclassified(int n);

  int size() const { return static_cast<int>(in_m.size()); }
  int m_count() const;
  int h_count() const;
  int l_count() const;
  std::vector<int> m_indices() const;
};

// Optimization update: keep candidates whose upper bound reaches the best
// lower bound. Monotone mode restricts candidates to the current M; otherwise
// the rule is re-applied to the whole domain, so points can re-enter.
void update_sets_bo(Sets& sets, const ConfidenceBounds& bounds, bool monotone);

// Level-set update against threshold h: lower bound above h classifies into
// H, upper bound below h into L, the rest stays in M. H and L are permanent
// in both modes; non-monotone mode re-admits into M any point not yet
// classified.
void update_sets_lse(Sets& sets, const ConfidenceBounds& bounds, double h, bool monotone);

}  // namespace truvar
