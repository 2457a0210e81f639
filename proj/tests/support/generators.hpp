#pragma once

// Hand-rolled instance generators for property-style tests. Everything draws
// from a named RandomStream so failures replay from the seed alone.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "truvar/kernel.hpp"
#include "truvar/rng.hpp"

namespace truvar::testing {

inline Eigen::MatrixXd random_points(RandomStream& rng, int n, int d, double lo = 0.0,
                                     double hi = 1.0) {
  Eigen::MatrixXd pts(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) pts(i, j) = lo + (hi - lo) * rng.uniform();
  return pts;
}

inline Kernel random_kernel(RandomStream& rng, int d) {
  Eigen::VectorXd scales(d);
  for (int j = 0; j < d; ++j) scales[j] = 0.1 + 0.9 * rng.uniform();
  const double variance = 0.5 + rng.uniform();
  return rng.bits() % 2 == 0 ? Kernel::squared_exponential(scales, variance)
                             : Kernel::matern52(scales, variance);
}

// Log-uniform over [lo, hi].
inline double random_noise_var(RandomStream& rng, double lo = 1e-6, double hi = 0.1) {
  return lo * std::exp(rng.uniform() * std::log(hi / lo));
}

struct History {
  std::vector<int> indices;
  std::vector<double> values;
  std::vector<double> noise_vars;

  int size() const { return static_cast<int>(indices.size()); }
};

// `len` observations at random domain indices (repeats allowed) with values in
// [-2, 2] and mixed noise scales.
inline History random_history(RandomStream& rng, int domain_size, int len) {
  History h;
  for (int i = 0; i < len; ++i) {
    h.indices.push_back(static_cast<int>(rng.below(domain_size)));
    h.values.push_back(4.0 * rng.uniform() - 2.0);
    h.noise_vars.push_back(random_noise_var(rng));
  }
  return h;
}

}  // namespace truvar::testing
