#pragma once

// Textbook GP regression oracle: direct solves against (K + Sigma), no
// incremental updates, no caching. Deliberately independent of GpPosterior so
// the two can disagree.

#include <Eigen/Dense>
#include <vector>

#include "truvar/kernel.hpp"

namespace truvar::testing {

struct DenseOracle {
  Eigen::MatrixXd points;  // n x d
  Kernel kernel;
  std::vector<int> indices;
  std::vector<double> values;
  std::vector<double> noise_vars;  // already floored by the caller if desired

  // mean(z)  = k(z, X) (K + Sigma)^{-1} y
  // cov(z,w) = k(z, w) - k(z, X) (K + Sigma)^{-1} k(X, w)
  Eigen::VectorXd posterior_mean() const {
    const int n = static_cast<int>(points.rows());
    const int t = static_cast<int>(indices.size());
    if (t == 0) return Eigen::VectorXd::Zero(n);
    const Eigen::MatrixXd kzx = cross_domain();
    Eigen::VectorXd y(t);
    for (int i = 0; i < t; ++i) y[i] = values[i];
    return kzx * system_matrix().fullPivLu().solve(y);
  }

  Eigen::MatrixXd posterior_cov() const {
    const Eigen::MatrixXd prior = gram_matrix(kernel, points);
    const int t = static_cast<int>(indices.size());
    if (t == 0) return prior;
    const Eigen::MatrixXd kzx = cross_domain();
    return prior - kzx * system_matrix().fullPivLu().solve(kzx.transpose());
  }

  Eigen::VectorXd posterior_var() const { return posterior_cov().diagonal(); }

 private:
  // K + Sigma over the observed indices (repeats kept as distinct rows).
  Eigen::MatrixXd system_matrix() const {
    const int t = static_cast<int>(indices.size());
    Eigen::MatrixXd k(t, t);
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < t; ++j)
        k(i, j) = kernel_eval(kernel, points.row(indices[i]), points.row(indices[j]));
    for (int i = 0; i < t; ++i) k(i, i) += noise_vars[i];
    return k;
  }

  // k(domain, X), n x t.
  Eigen::MatrixXd cross_domain() const {
    const int n = static_cast<int>(points.rows());
    const int t = static_cast<int>(indices.size());
    Eigen::MatrixXd kzx(n, t);
    for (int z = 0; z < n; ++z)
      for (int i = 0; i < t; ++i)
        kzx(z, i) = kernel_eval(kernel, points.row(z), points.row(indices[i]));
    return kzx;
  }
};

}  // namespace truvar::testing
