#include "truvar/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "truvar/common.hpp"
#include "truvar/posterior.hpp"
#include "truvar/rng.hpp"

namespace truvar {

namespace {

constexpr double kPi2Over6 = std::numbers::pi * std::numbers::pi / 6.0;

int best_variance_index(const GpPosterior& posterior, const std::vector<int>& candidates) {
  int best = candidates.front();
  double best_var = posterior.var(best);
  for (int idx : candidates) {
    double v = posterior.var(idx);
    if (v > best_var) {
      best_var = v;
      best = idx;
    }
  }
  return best;
}

void check_delta(double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw ConfigError("delta must lie in (0, 1), got " + std::to_string(delta));
  }
}

void check_domain_size(double domain_size) {
  if (!(domain_size >= 2.0) || !std::isfinite(domain_size)) {
    throw ConfigError("domain_size must be at least 2, got " + std::to_string(domain_size));
  }
}

}  // namespace

std::vector<double> gamma_greedy_curve(const Kernel& kernel,
                                       const Eigen::Ref<const Eigen::MatrixXd>& points,
                                       double noise_var, int T) {
  if (!(noise_var > 0.0) || !std::isfinite(noise_var)) {
    throw ConfigError("gamma_greedy needs positive noise variance, got " +
                      std::to_string(noise_var));
  }
  if (T < 1) {
    throw ConfigError("gamma_greedy needs T >= 1, got " + std::to_string(T));
  }
  auto domain = DomainData::make(points, kernel);
  GpPosterior posterior = GpPosterior::prior(domain);

  std::vector<int> all(static_cast<std::size_t>(domain->size()));
  for (int i = 0; i < domain->size(); ++i) all[static_cast<std::size_t>(i)] = i;

  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(T));
  double total = 0.0;
  for (int t = 0; t < T; ++t) {
    int pick = best_variance_index(posterior, all);
    total += 0.5 * std::log1p(posterior.var(pick) / noise_var);
    curve.push_back(total);
    posterior = std::move(posterior).extended(pick, posterior.mean(pick), noise_var);
  }
  return curve;
}

double gamma_greedy(const Kernel& kernel, const Eigen::Ref<const Eigen::MatrixXd>& points,
                    double noise_var, int T) {
  return gamma_greedy_curve(kernel, points, noise_var, T).back();
}

CoveringResult covering_cost(const Kernel& kernel,
                             const Eigen::Ref<const Eigen::MatrixXd>& points,
                             const Eigen::VectorXd& costs, const Eigen::VectorXd& noise_vars,
                             double xi, const std::vector<int>& targets) {
  const int n = static_cast<int>(points.rows());
  if (!(xi > 0.0) || !std::isfinite(xi)) {
    throw ConfigError("covering_cost needs xi > 0, got " + std::to_string(xi));
  }
  if (costs.size() != n || noise_vars.size() != n) {
    throw ConfigError("covering_cost: costs and noise_vars must match the domain size");
  }
  for (int i = 0; i < n; ++i) {
    if (!(costs[i] > 0.0) || !std::isfinite(costs[i])) {
      throw ConfigError("covering_cost: cost at index " + std::to_string(i) +
                        " must be positive and finite");
    }
    if (!(noise_vars[i] >= 0.0) || !std::isfinite(noise_vars[i])) {
      throw ConfigError("covering_cost: noise variance at index " + std::to_string(i) +
                        " must be nonnegative and finite");
    }
  }
  if (targets.empty()) {
    throw ConfigError("covering_cost: targets must be non-empty");
  }
  for (int idx : targets) {
    if (idx < 0 || idx >= n) {
      throw ConfigError("covering_cost: target index " + std::to_string(idx) +
                        " outside domain of size " + std::to_string(n));
    }
  }

  const bool unit_mode = (costs.array() == costs[0]).all();
  const double xi2 = xi * xi;

  auto domain = DomainData::make(points, kernel);
  GpPosterior posterior = GpPosterior::prior(domain);

  auto excess = [&]() {
    double total = 0.0;
    for (int t : targets) total += std::max(posterior.var(t) - xi2, 0.0);
    return total;
  };

  CoveringResult result;
  double remaining = excess();
  while (remaining > 0.0) {
    int pick = -1;
    if (unit_mode) {
      pick = best_variance_index(posterior, targets);
    } else {
      double best_rate = -std::numeric_limits<double>::infinity();
      for (int x = 0; x < n; ++x) {
        double denom = posterior.var(x) + std::max(noise_vars[x], kNoiseFloor);
        double gain = 0.0;
        for (int t : targets) {
          double before = std::max(posterior.var(t), xi2);
          double cov = posterior.covariance(t, x);
          double after = std::max(posterior.var(t) - cov * cov / denom, xi2);
          gain += before - after;
        }
        double rate = gain / costs[x];
        if (rate > best_rate) {
          best_rate = rate;
          pick = x;
        }
      }
    }
    result.points.push_back(pick);
    result.cost += costs[pick];
    posterior = std::move(posterior).extended(pick, posterior.mean(pick), noise_vars[pick]);

    double next = excess();
    if (next > 0.0 && remaining - next < 1e-14) {
      throw InfeasibleError("covering_cost stalled with targets above xi = " +
                            std::to_string(xi));
    }
    remaining = next;
  }

  // The sequence must stand on its own: replay it against a fresh prior and
  // confirm every target ends at or below xi.
  if (!result.points.empty()) {
    std::vector<double> pick_noises;
    pick_noises.reserve(result.points.size());
    for (int idx : result.points) pick_noises.push_back(noise_vars[idx]);
    GpPosterior fresh = GpPosterior::prior(domain);
    Eigen::VectorXd replay =
        fresh.batch_lookahead_variances(result.points, pick_noises, targets);
    for (int i = 0; i < replay.size(); ++i) {
      if (replay[i] > xi2 + 1e-12) {
        throw NumericalError("covering_cost replay left a target above xi^2: " +
                             std::to_string(replay[i]) + " > " + std::to_string(xi2));
      }
    }
  }
  return result;
}

double beta_theoretical_unit(double delta, double domain_size, double t) {
  check_delta(delta);
  check_domain_size(domain_size);
  if (!(t >= 1.0)) {
    throw ConfigError("beta schedule needs t >= 1, got " + std::to_string(t));
  }
  return 2.0 * std::log(domain_size * t * t * kPi2Over6 / delta);
}

double beta_theoretical_cost(double delta, double domain_size, double t, double c_min,
                             double c_max) {
  if (!(c_min > 0.0) || !(c_max >= c_min)) {
    throw ConfigError("beta schedule needs 0 < c_min <= c_max");
  }
  return beta_theoretical_unit(delta, domain_size, t) +
         2.0 * std::log(c_max * c_max / (c_min * c_min));
}

std::vector<double> beta_theoretical_epochs(double delta, double domain_size,
                                            const std::vector<double>& epoch_costs,
                                            double c_min) {
  check_delta(delta);
  check_domain_size(domain_size);
  if (!(c_min > 0.0)) {
    throw ConfigError("beta schedule needs c_min > 0, got " + std::to_string(c_min));
  }
  std::vector<double> betas;
  betas.reserve(epoch_costs.size());
  double cum = 0.0;
  for (std::size_t i = 0; i < epoch_costs.size(); ++i) {
    if (!(epoch_costs[i] > 0.0) || !std::isfinite(epoch_costs[i])) {
      throw ConfigError("epoch cost " + std::to_string(i + 1) + " must be positive");
    }
    cum += epoch_costs[i];
    betas.push_back(2.0 *
                    std::log(domain_size * cum * cum * kPi2Over6 / (delta * c_min * c_min)));
  }
  return betas;
}

double epoch_cost_bound(double covering_value, double m_bar_size, double beta, double eta,
                        double delta_bar, double c_max) {
  if (!(covering_value >= 0.0) || !(m_bar_size >= 1.0) || !(beta > 0.0) || !(eta > 0.0) ||
      !(delta_bar > 0.0) || !(c_max > 0.0)) {
    throw ConfigError("epoch_cost_bound needs covering_value >= 0, m_bar_size >= 1 and "
                      "positive beta, eta, delta_bar, c_max");
  }
  return covering_value * std::log(m_bar_size * beta / (delta_bar * delta_bar * eta * eta)) +
         c_max;
}

double accuracy_cost_bound(const std::vector<double>& covering_values,
                           const std::vector<double>& m_bar_sizes,
                           const std::vector<double>& betas, double eta_initial,
                           double shrink_ratio, double delta_bar, double c_max,
                           double epsilon) {
  if (covering_values.size() != m_bar_sizes.size() || covering_values.size() != betas.size()) {
    throw ConfigError("accuracy_cost_bound: per-epoch tables must have equal length");
  }
  if (covering_values.empty()) {
    throw ConfigError("accuracy_cost_bound: per-epoch tables are empty");
  }
  if (!(eta_initial > 0.0) || !(shrink_ratio > 0.0) || !(shrink_ratio < 1.0)) {
    throw ConfigError("accuracy_cost_bound needs eta_initial > 0 and shrink_ratio in (0, 1)");
  }
  if (!(epsilon > 0.0)) {
    throw ConfigError("accuracy_cost_bound needs epsilon > 0");
  }

  // Epoch i contributes while 4 (1+slack) eta_(i-1) > epsilon, with
  // eta_0 = eta_initial / shrink_ratio by convention.
  double total = 0.0;
  double eta_prev = eta_initial / shrink_ratio;
  double eta = eta_initial;
  for (std::size_t i = 0; i < covering_values.size(); ++i) {
    if (4.0 * (1.0 + delta_bar) * eta_prev > epsilon) {
      total += epoch_cost_bound(covering_values[i], m_bar_sizes[i], betas[i], eta, delta_bar,
                                c_max);
    }
    eta_prev = eta;
    eta *= shrink_ratio;
  }
  if (4.0 * (1.0 + delta_bar) * eta_prev > epsilon) {
    throw ConfigError("accuracy_cost_bound: tables cover too few epochs to reach epsilon = " +
                      std::to_string(epsilon));
  }
  return total;
}

void BoundInputs::validate() const {
  check_domain_size(domain_size);
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw ConfigError("sigma2 must be positive and finite, got " + std::to_string(sigma2));
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("epsilon must be positive and finite, got " + std::to_string(epsilon));
  }
  check_delta(delta);
  if (!(delta_bar > 0.0)) {
    throw ConfigError("delta_bar must be strictly positive for the closed-form bounds");
  }
  if (!(gamma_estimate > 0.0) || !std::isfinite(gamma_estimate)) {
    throw ConfigError("gamma_estimate must be positive and finite, got " +
                      std::to_string(gamma_estimate));
  }
  if (eta_initial != 1.0 || shrink_ratio != 0.5) {
    throw ConfigError("closed-form constants assume eta_initial = 1 and shrink_ratio = 0.5; "
                      "use accuracy_cost_bound for other schedules");
  }
  if (!(cap >= 1.0)) {
    throw ConfigError("cap must be at least 1, got " + std::to_string(cap));
  }
  if (level_noise_vars.size() != level_costs.size()) {
    throw ConfigError("level_noise_vars and level_costs must have equal length");
  }
  for (int k = 0; k < level_noise_vars.size(); ++k) {
    if (!(level_noise_vars[k] > 0.0) || !std::isfinite(level_noise_vars[k])) {
      throw ConfigError("level noise variance " + std::to_string(k + 1) + " must be positive");
    }
    if (!(level_costs[k] > 0.0) || !std::isfinite(level_costs[k])) {
      throw ConfigError("level cost " + std::to_string(k + 1) + " must be positive");
    }
  }
}

namespace {

// Smallest integer T >= 1 with T >= rhs(T). rhs grows only logarithmically in
// T, so doubling brackets the crossing and bisection pins it down.
double fixed_point(const std::function<double(double)>& rhs, double cap) {
  auto satisfied = [&](double t) {
    double r = rhs(t);
    if (!std::isfinite(r)) {
      throw NumericalError("sample-complexity condition evaluated to a non-finite value");
    }
    return t >= r;
  };
  if (satisfied(1.0)) return 1.0;
  double lo = 1.0;
  double hi = 2.0;
  while (!satisfied(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > cap) {
      throw InfeasibleError("sample-complexity bound exceeds cap = " + std::to_string(cap));
    }
  }
  while (hi - lo > 1.0) {
    double mid = std::floor((lo + hi) / 2.0);
    if (satisfied(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace

BoundReport corollary_bounds(const BoundInputs& inputs) {
  inputs.validate();
  const double d = inputs.domain_size;
  const double eps = inputs.epsilon;
  const double db = inputs.delta_bar;
  const double gamma = inputs.gamma_estimate;
  const double slack2 = (1.0 + db) * (1.0 + db);

  auto tail = [&](double beta) {
    return std::log(16.0 * slack2 * d * beta / (db * db * eps * eps));
  };
  auto c1_of = [](double s2) { return 1.0 / std::log1p(1.0 / s2); };

  // Noise-adaptive leading term; beta_fn supplies the schedule at time t.
  auto improved_rhs = [&](double s2, const std::function<double(double)>& beta_fn) {
    return [&, s2, beta_fn](double t) {
      double beta = beta_fn(t);
      double lead = 2.0 * s2 * gamma * beta * 96.0 * slack2 / (eps * eps) +
                    c1_of(s2) * gamma * beta * 6.0 * slack2 / s2 +
                    2.0 * std::ceil(std::log2(32.0 * slack2 / (eps * std::sqrt(s2))));
      return lead * tail(beta);
    };
  };

  std::function<double(double)> beta_unit = [&](double t) {
    return beta_theoretical_unit(inputs.delta, d, t);
  };

  BoundReport report;
  {
    auto rhs = [&](double t) {
      double beta = beta_unit(t);
      double lead = c1_of(inputs.sigma2) * gamma * beta * 96.0 * slack2 / (eps * eps) +
                    2.0 * std::ceil(std::log2(8.0 * (1.0 + db) / eps));
      return lead * tail(beta);
    };
    report.t_simplified = fixed_point(rhs, inputs.cap);
  }
  report.t_improved = fixed_point(improved_rhs(inputs.sigma2, beta_unit), inputs.cap);

  const int levels = static_cast<int>(inputs.level_costs.size());
  if (levels > 0) {
    double c_min = inputs.level_costs.minCoeff();
    double c_max = inputs.level_costs.maxCoeff();
    std::function<double(double)> beta_cost = [&, c_min, c_max](double t) {
      return beta_theoretical_cost(inputs.delta, d, t, c_min, c_max);
    };
    report.c_multi_noise = std::numeric_limits<double>::infinity();
    for (int k = 0; k < levels; ++k) {
      double t_star = fixed_point(improved_rhs(inputs.level_noise_vars[k], beta_cost),
                                  inputs.cap);
      double cost = inputs.level_costs[k] * t_star;
      report.t_per_level.push_back(t_star);
      report.cost_per_level.push_back(cost);
      if (cost < report.c_multi_noise) {
        report.c_multi_noise = cost;
        report.best_level = k;
      }
    }
  }
  return report;
}

SubmodularityReport submodularity_check(const Kernel& kernel,
                                        const Eigen::Ref<const Eigen::MatrixXd>& points,
                                        const Eigen::VectorXd& noise_vars, int trials,
                                        std::uint64_t seed) {
  const int n = static_cast<int>(points.rows());
  if (trials < 1) {
    throw ConfigError("submodularity_check needs trials >= 1, got " + std::to_string(trials));
  }
  if (noise_vars.size() != n) {
    throw ConfigError("submodularity_check: noise_vars must match the domain size");
  }
  for (int i = 0; i < n; ++i) {
    if (!(noise_vars[i] >= 0.0) || !std::isfinite(noise_vars[i])) {
      throw ConfigError("submodularity_check: noise variance at index " + std::to_string(i) +
                        " must be nonnegative and finite");
    }
  }

  auto domain = DomainData::make(points, kernel);
  RandomStream stream(seed, "submodularity");
  SubmodularityReport report;
  report.trials = trials;

  auto draw_index = [&]() { return static_cast<int>(stream.below(static_cast<uint64_t>(n))); };

  for (int trial = 0; trial < trials; ++trial) {
    // Random conditioning history; the observed values do not enter the
    // variances, so zeros serve.
    int hist_len = static_cast<int>(stream.below(5));
    std::vector<int> hist;
    std::vector<double> hist_values(static_cast<std::size_t>(hist_len), 0.0);
    std::vector<double> hist_noise;
    for (int i = 0; i < hist_len; ++i) {
      int idx = draw_index();
      hist.push_back(idx);
      hist_noise.push_back(noise_vars[idx]);
    }
    GpPosterior posterior = hist.empty()
                                ? GpPosterior::prior(domain)
                                : GpPosterior::fit(domain, hist, hist_values, hist_noise);

    int x = draw_index();
    std::vector<int> target{x};

    std::vector<int> subset;
    std::vector<double> subset_noise;
    int subset_len = static_cast<int>(stream.below(3));
    for (int i = 0; i < subset_len; ++i) {
      int idx = draw_index();
      subset.push_back(idx);
      subset_noise.push_back(noise_vars[idx]);
    }
    std::vector<int> superset = subset;
    std::vector<double> superset_noise = subset_noise;
    int extra_len = 1 + static_cast<int>(stream.below(2));
    for (int i = 0; i < extra_len; ++i) {
      int idx = draw_index();
      superset.push_back(idx);
      superset_noise.push_back(noise_vars[idx]);
    }
    int v = draw_index();

    auto var_after = [&](std::vector<int> batch, std::vector<double> batch_noise) {
      if (batch.empty()) return posterior.var(x);
      return posterior.batch_lookahead_variances(batch, batch_noise, target)[0];
    };
    auto with_v = [&](std::vector<int> batch, std::vector<double> batch_noise) {
      batch.push_back(v);
      batch_noise.push_back(noise_vars[v]);
      return posterior.batch_lookahead_variances(batch, batch_noise, target)[0];
    };

    double gain_subset = var_after(subset, subset_noise) - with_v(subset, subset_noise);
    double gain_superset = var_after(superset, superset_noise) - with_v(superset, superset_noise);
    double gap = gain_superset - gain_subset;
    if (gap > report.max_gap) report.max_gap = gap;
    if (gap > 1e-9) ++report.violations;
  }
  return report;
}

}  // namespace truvar
