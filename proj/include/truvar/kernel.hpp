#pragma once

#include <Eigen/Dense>

namespace truvar {

enum class KernelFamily { kSquaredExponential, kMatern52 };

// Stationary covariance with per-dimension length scales and unit prior
// variance scaling (k(x, x) = variance).
struct Kernel {
  KernelFamily family = KernelFamily::kSquaredExponential;
  Eigen::VectorXd length_scales;
  double variance = 1.0;

  static Kernel squared_exponential(Eigen::VectorXd length_scales, double variance = 1.0);
  static Kernel matern52(Eigen::VectorXd length_scales, double variance = 1.0);

  int dims() const { return static_cast<int>(length_scales.size()); }

  // Throws ConfigError on non-positive scales or variance.
  void validate() const;
};

// Covariance of two points (rows of length kernel.dims()).
double kernel_eval(const Kernel& kernel, const Eigen::Ref<const Eigen::RowVectorXd>& a,
                   const Eigen::Ref<const Eigen::RowVectorXd>& b);

// Full Gram matrix of the rows of `points`; symmetric with k(x,x) = variance
// on the diagonal by construction.
Eigen::MatrixXd gram_matrix(const Kernel& kernel, const Eigen::Ref<const Eigen::MatrixXd>& points);

// Cross-covariance: result(i, j) = k(a.row(i), b.row(j)).
Eigen::MatrixXd cross_gram(const Kernel& kernel, const Eigen::Ref<const Eigen::MatrixXd>& a,
                           const Eigen::Ref<const Eigen::MatrixXd>& b);

}  // namespace truvar
