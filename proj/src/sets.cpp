#include "truvar/sets.hpp"

#include <cmath>
#include <numeric>

#include "truvar/common.hpp"

namespace truvar {

ConfidenceBounds confidence_bounds(const GpPosterior& posterior, double beta) {
  if (!(beta >= 0.0)) throw ConfigError("confidence_bounds: beta must be >= 0");
  const double root = std::sqrt(beta);
  const Eigen::VectorXd sd = posterior.variance_vector().cwiseSqrt();
  return {posterior.mean_vector() + root * sd, posterior.mean_vector() - root * sd};
}

Sets Sets::all_unclassified(int n) {
  Sets s;
  s.in_m.assign(n, 1);
  s.in_h.assign(n, 0);
  s.in_l.assign(n, 0);
  return s;
}

namespace {
int count(const std::vector<std::uint8_t>& mask) {
  return static_cast<int>(std::accumulate(mask.begin(), mask.end(), 0));
}
}  // namespace

int Sets::m_count() const { return count(in_m); }
int Sets::h_count() const { return count(in_h); }
int Sets::l_count() const { return count(in_l); }

std::vector<int> Sets::m_indices() const {
  std::vector<int> out;
  out.reserve(in_m.size());
  for (int i = 0; i < size(); ++i)
    if (in_m[i]) out.push_back(i);
  return out;
}

void update_sets_bo(Sets& sets, const ConfidenceBounds& bounds, bool monotone) {
  const int n = sets.size();
  if (bounds.upper.size() != n || bounds.lower.size() != n)
    throw ConfigError("update_sets: bounds size mismatch");
  double best_lower = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (int i = 0; i < n; ++i) {
    if (monotone && !sets.in_m[i]) continue;
    best_lower = std::max(best_lower, bounds.lower[i]);
    any = true;
  }
  if (!any) return;
  for (int i = 0; i < n; ++i) {
    const bool candidate = monotone ? sets.in_m[i] != 0 : true;
    sets.in_m[i] = candidate && bounds.upper[i] >= best_lower ? 1 : 0;
  }
}

void update_sets_lse(Sets& sets, const ConfidenceBounds& bounds, double h, bool monotone) {
  const int n = sets.size();
  if (bounds.upper.size() != n || bounds.lower.size() != n)
    throw ConfigError("update_sets: bounds size mismatch");
  for (int i = 0; i < n; ++i) {
    if (sets.in_h[i] || sets.in_l[i]) continue;
    if (monotone && !sets.in_m[i]) continue;
    if (bounds.lower[i] > h) {
      sets.in_h[i] = 1;
      sets.in_m[i] = 0;
    } else if (bounds.upper[i] < h) {
      sets.in_l[i] = 1;
      sets.in_m[i] = 0;
    } else {
      sets.in_m[i] = 1;
    }
  }
}

}  // namespace truvar
