#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "truvar/kernel.hpp"

namespace truvar {

// Declared observation noise below this is raised to it before entering any
// linear algebra.
inline constexpr double kNoiseFloor = 1e-10;

// Finite candidate domain plus its prior covariance, shared immutably by every
// posterior built on it.
struct DomainData {
  Eigen::MatrixXd points;     // n x d, one candidate per row
  Kernel kernel;
  Eigen::MatrixXd prior_cov;  // n x n Gram matrix of `points`

  static std::shared_ptr<const DomainData> make(Eigen::MatrixXd points, Kernel kernel);

  int size() const { return static_cast<int>(points.rows()); }
};

// Gaussian process posterior over a fixed finite domain, conditioned on noisy
// observations at domain indices (repeats allowed).
//
// Two independent routes produce the same state: `fit` solves the full system
// by Cholesky factorization, `extended` applies the exact one-observation
// update to the cached posterior mean and covariance,
//
//   var'(z)      = var(z) - cov(z, x)^2 / (var(x) + noise)
//   mean'(z)     = mean(z) + cov(z, x) (y - mean(x)) / (var(x) + noise),
//
// which is also what `lookahead_variances` evaluates without committing.
// Keeping the full n x n covariance makes each update O(n^2) and each
// lookahead O(|M|).
class GpPosterior {
 public:
  // Posterior with empty history: mean 0, covariance = prior.
  static GpPosterior prior(std::shared_ptr<const DomainData> domain);

  // Batch conditioning on (indices[i], values[i], noise_vars[i]). Validates
  // shapes, index ranges and finiteness (ConfigError); factorization failure
  // after jitter escalation (1e-10 scaled up tenfold to 1e-6) raises
  // NumericalError.
  static GpPosterior fit(std::shared_ptr<const DomainData> domain, std::span<const int> indices,
                         std::span<const double> values, std::span<const double> noise_vars);

  // One more observation; lvalue form copies, rvalue form reuses the caches.
  GpPosterior extended(int index, double value, double noise_var) const&;
  GpPosterior extended(int index, double value, double noise_var) &&;

  const DomainData& domain() const { return *domain_; }
  std::shared_ptr<const DomainData> domain_ptr() const { return domain_; }
  int domain_size() const { return domain_->size(); }
  int num_observations() const { return static_cast<int>(indices_.size()); }

  const std::vector<int>& indices() const { return indices_; }
  const std::vector<double>& values() const { return values_; }
  // Noise as declared by the caller, and after flooring at kNoiseFloor.
  const std::vector<double>& noise_declared() const { return noise_declared_; }
  const std::vector<double>& noise_effective() const { return noise_effective_; }

  double mean(int index) const { return mean_[index]; }
  double var(int index) const { return std::max(cov_(index, index), 0.0); }
  double covariance(int a, int b) const { return cov_(a, b); }
  const Eigen::VectorXd& mean_vector() const { return mean_; }
  Eigen::VectorXd variance_vector() const { return cov_.diagonal().cwiseMax(0.0); }
  const Eigen::MatrixXd& covariance_matrix() const { return cov_; }

  // Posterior variance at each element of `targets` after hypothetically
  // observing `index` with the given noise; no observation is recorded.
  Eigen::VectorXd lookahead_variances(int index, double noise_var,
                                      std::span<const int> targets) const;

  // Same after hypothetically observing the whole batch (sequential
  // conditioning; repeated indices are legal and compound).
  Eigen::VectorXd batch_lookahead_variances(std::span<const int> batch_indices,
                                            std::span<const double> batch_noise_vars,
                                            std::span<const int> targets) const;

 private:
  GpPosterior() = default;

  void append_observation(int index, double value, double noise_var);

  std::shared_ptr<const DomainData> domain_;
  std::vector<int> indices_;
  std::vector<double> values_;
  std::vector<double> noise_declared_;
  std::vector<double> noise_effective_;
  Eigen::MatrixXd chol_;  // t x t lower Cholesky factor of K_t + Sigma_t (+ jitter)
  Eigen::VectorXd mean_;  // over the domain
  Eigen::MatrixXd cov_;   // over the domain
};

}  // namespace truvar
