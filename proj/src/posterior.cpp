#include "truvar/posterior.hpp"

#include <cmath>
#include <string>

#include "truvar/common.hpp"

namespace truvar {
namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-6;

void check_index(int index, int n, const char* where) {
  if (index < 0 || index >= n)
    throw ConfigError(std::string(where) + ": index " + std::to_string(index) +
                      " outside domain of size " + std::to_string(n));
}

double check_noise(double noise_var, const char* where) {
  if (!std::isfinite(noise_var) || noise_var < 0.0)
    throw ConfigError(std::string(where) + ": noise variance must be finite and >= 0");
  return std::max(noise_var, kNoiseFloor);
}

void check_value(double value, const char* where) {
  if (!std::isfinite(value)) throw ConfigError(std::string(where) + ": non-finite observation");
}

}  // namespace

std::shared_ptr<const DomainData> DomainData::make(Eigen::MatrixXd points, Kernel kernel) {
  kernel.validate();
  if (points.rows() == 0) throw ConfigError("domain: needs at least one point");
  if (points.cols() != kernel.dims())
    throw ConfigError("domain: point dimension does not match kernel length_scales");
  if (!points.allFinite()) throw ConfigError("domain: non-finite point coordinates");
  auto data = std::make_shared<DomainData>();
  data->prior_cov = gram_matrix(kernel, points);
  data->points = std::move(points);
  data->kernel = std::move(kernel);
  return data;
}

GpPosterior GpPosterior::prior(std::shared_ptr<const DomainData> domain) {
  if (!domain) throw ConfigError("posterior: null domain");
  GpPosterior p;
  p.mean_ = Eigen::VectorXd::Zero(domain->size());
  p.cov_ = domain->prior_cov;
  p.chol_.resize(0, 0);
  p.domain_ = std::move(domain);
  return p;
}

GpPosterior GpPosterior::fit(std::shared_ptr<const DomainData> domain,
                             std::span<const int> indices, std::span<const double> values,
                             std::span<const double> noise_vars) {
  if (!domain) throw ConfigError("fit: null domain");
  const auto t = static_cast<Eigen::Index>(indices.size());
  if (values.size() != indices.size() || noise_vars.size() != indices.size())
    throw ConfigError("fit: indices, values and noise_vars must have equal length");

  GpPosterior p;
  p.domain_ = domain;
  const int n = domain->size();
  p.indices_.reserve(indices.size());
  p.values_.reserve(indices.size());
  p.noise_declared_.reserve(indices.size());
  p.noise_effective_.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    check_index(indices[i], n, "fit");
    check_value(values[i], "fit");
    p.indices_.push_back(indices[i]);
    p.values_.push_back(values[i]);
    p.noise_declared_.push_back(noise_vars[i]);
    p.noise_effective_.push_back(check_noise(noise_vars[i], "fit"));
  }

  if (t == 0) return prior(std::move(domain));

  Eigen::MatrixXd sys(t, t);
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < t; ++j) sys(i, j) = domain->prior_cov(indices[i], indices[j]);
  sys.diagonal() += Eigen::Map<const Eigen::VectorXd>(p.noise_effective_.data(), t);

  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd attempt = sys;
    if (jitter > 0.0) attempt.diagonal().array() += jitter;
    llt.compute(attempt);
    if (llt.info() == Eigen::Success) break;
    if (jitter == 0.0) {
      jitter = kJitterStart;
    } else if (jitter < kJitterMax) {
      jitter *= 10.0;
    } else {
      throw NumericalError("fit: Cholesky factorization failed after jitter escalation");
    }
    log::debug("fit: retrying factorization with jitter " + std::to_string(jitter));
  }
  p.chol_ = llt.matrixL();

  // cross(i, j) = k(history_i, domain_j); w = L^-1 cross gives
  // mean = w^T L^-1 y and cov = prior - w^T w.
  Eigen::MatrixXd cross(t, n);
  for (Eigen::Index i = 0; i < t; ++i) cross.row(i) = domain->prior_cov.row(indices[i]);
  Eigen::MatrixXd w = p.chol_.triangularView<Eigen::Lower>().solve(cross);
  Eigen::VectorXd alpha = p.chol_.triangularView<Eigen::Lower>().solve(
      Eigen::Map<const Eigen::VectorXd>(p.values_.data(), t));
  p.mean_ = w.transpose() * alpha;
  p.cov_ = domain->prior_cov - w.transpose() * w;
  p.cov_.diagonal() = p.cov_.diagonal().cwiseMax(0.0);
  if (!p.mean_.allFinite() || !p.cov_.allFinite())
    throw NumericalError("fit: non-finite posterior");
  return p;
}

GpPosterior GpPosterior::extended(int index, double value, double noise_var) const& {
  GpPosterior copy = *this;
  return std::move(copy).extended(index, value, noise_var);
}

GpPosterior GpPosterior::extended(int index, double value, double noise_var) && {
  append_observation(index, value, noise_var);
  return std::move(*this);
}

void GpPosterior::append_observation(int index, double value, double noise_var) {
  check_index(index, domain_size(), "extend");
  check_value(value, "extend");
  const double vf = check_noise(noise_var, "extend");

  // Grow the Cholesky factor: new row (z^T, d) with L z = k_hist(index) and
  // d^2 = k(x, x) + vf - |z|^2; a non-positive pivot escalates through the
  // same jitter ladder as fit, applied to this observation's noise.
  const auto t = chol_.rows();
  Eigen::VectorXd k_hist(t);
  for (Eigen::Index i = 0; i < t; ++i) k_hist[i] = domain_->prior_cov(indices_[i], index);
  Eigen::VectorXd z = chol_.triangularView<Eigen::Lower>().solve(k_hist);
  double d2 = domain_->prior_cov(index, index) + vf - z.squaredNorm();
  if (!(d2 > 0.0)) {
    double jitter = kJitterStart;
    while (jitter <= kJitterMax && !(d2 + jitter > 0.0)) jitter *= 10.0;
    if (!(d2 + jitter > 0.0) || jitter > kJitterMax)
      throw NumericalError("extend: non-positive pivot after jitter escalation");
    log::debug("extend: pivot rescued with jitter " + std::to_string(jitter));
    d2 += jitter;
  }
  chol_.conservativeResize(t + 1, t + 1);
  chol_.row(t).head(t) = z;
  chol_.col(t).head(t).setZero();
  chol_(t, t) = std::sqrt(d2);

  const double denom = std::max(cov_(index, index), 0.0) + vf;
  const Eigen::VectorXd cross = cov_.col(index);
  mean_.noalias() += cross * ((value - mean_[index]) / denom);
  cov_.noalias() -= (cross * cross.transpose()) / denom;
  cov_.diagonal() = cov_.diagonal().cwiseMax(0.0);

  indices_.push_back(index);
  values_.push_back(value);
  noise_declared_.push_back(noise_var);
  noise_effective_.push_back(vf);
}

Eigen::VectorXd GpPosterior::lookahead_variances(int index, double noise_var,
                                                 std::span<const int> targets) const {
  check_index(index, domain_size(), "lookahead");
  const double vf = check_noise(noise_var, "lookahead");
  const double denom = std::max(cov_(index, index), 0.0) + vf;
  Eigen::VectorXd out(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    check_index(targets[i], domain_size(), "lookahead");
    const double c = cov_(targets[i], index);
    out[static_cast<Eigen::Index>(i)] =
        std::max(std::max(cov_(targets[i], targets[i]), 0.0) - c * c / denom, 0.0);
  }
  return out;
}

Eigen::VectorXd GpPosterior::batch_lookahead_variances(std::span<const int> batch_indices,
                                                       std::span<const double> batch_noise_vars,
                                                       std::span<const int> targets) const {
  if (batch_indices.size() != batch_noise_vars.size())
    throw ConfigError("batch lookahead: batch indices and noises must have equal length");
  GpPosterior fantasy = *this;
  for (std::size_t i = 0; i < batch_indices.size(); ++i) {
    // Conditioning on y = current mean leaves the mean unchanged and the
    // covariance update is independent of y, so the fantasy value is free.
    const double y = fantasy.mean(batch_indices[i]);
    fantasy = std::move(fantasy).extended(batch_indices[i], y, batch_noise_vars[i]);
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    check_index(targets[i], domain_size(), "batch lookahead");
    out[static_cast<Eigen::Index>(i)] = fantasy.var(targets[i]);
  }
  return out;
}

}  // namespace truvar
