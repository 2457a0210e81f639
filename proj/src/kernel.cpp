#include "truvar/kernel.hpp"

#include <cmath>

#include "truvar/common.hpp"

namespace truvar {
namespace {

// Squared scaled distance r2 = sum_i ((a_i - b_i) / l_i)^2.
double scaled_sq_dist(const Kernel& k, const Eigen::Ref<const Eigen::RowVectorXd>& a,
                      const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  double r2 = 0.0;
  for (int i = 0; i < k.dims(); ++i) {
    const double d = (a[i] - b[i]) / k.length_scales[i];
    r2 += d * d;
  }
  return r2;
}

double eval_from_r2(const Kernel& k, double r2) {
  switch (k.family) {
    case KernelFamily::kSquaredExponential:
      return k.variance * std::exp(-0.5 * r2);
    case KernelFamily::kMatern52: {
      const double d = std::sqrt(5.0 * r2);
      return k.variance * (1.0 + d + d * d / 3.0) * std::exp(-d);
    }
  }
  throw ConfigError("unknown kernel family");
}

}  // namespace

Kernel Kernel::squared_exponential(Eigen::VectorXd length_scales, double variance) {
  Kernel k{KernelFamily::kSquaredExponential, std::move(length_scales), variance};
  k.validate();
  return k;
}

Kernel Kernel::matern52(Eigen::VectorXd length_scales, double variance) {
  Kernel k{KernelFamily::kMatern52, std::move(length_scales), variance};
  k.validate();
  return k;
}

void Kernel::validate() const {
  if (length_scales.size() == 0) throw ConfigError("kernel: length_scales must be non-empty");
  if (!(length_scales.array() > 0.0).all() || !length_scales.allFinite())
    throw ConfigError("kernel: length scales must be positive and finite");
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw ConfigError("kernel: variance must be positive and finite");
}

double kernel_eval(const Kernel& kernel, const Eigen::Ref<const Eigen::RowVectorXd>& a,
                   const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  if (a.size() != kernel.dims() || b.size() != kernel.dims())
    throw ConfigError("kernel_eval: point dimension does not match length_scales");
  return eval_from_r2(kernel, scaled_sq_dist(kernel, a, b));
}

Eigen::MatrixXd gram_matrix(const Kernel& kernel, const Eigen::Ref<const Eigen::MatrixXd>& points) {
  const Eigen::Index n = points.rows();
  if (points.cols() != kernel.dims())
    throw ConfigError("gram_matrix: point dimension does not match length_scales");
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, i) = kernel.variance;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = eval_from_r2(kernel, scaled_sq_dist(kernel, points.row(i), points.row(j)));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

Eigen::MatrixXd cross_gram(const Kernel& kernel, const Eigen::Ref<const Eigen::MatrixXd>& a,
                           const Eigen::Ref<const Eigen::MatrixXd>& b) {
  if (a.cols() != kernel.dims() || b.cols() != kernel.dims())
    throw ConfigError("cross_gram: point dimension does not match length_scales");
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      out(i, j) = eval_from_r2(kernel, scaled_sq_dist(kernel, a.row(i), b.row(j)));
  return out;
}

}  // namespace truvar
