#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "truvar/kernel.hpp"

namespace truvar {

// Greedy lower bound on the maximum mutual information gamma_T: repeatedly
// observe the highest-variance point under homoscedastic noise and accumulate
// 0.5 * log(1 + var / noise). Near-optimal for this objective by
// submodularity; `gamma_greedy_curve` returns the value after each of 1..T
// picks.
double gamma_greedy(const Kernel& kernel, const Eigen::Ref<const Eigen::MatrixXd>& points,
                    double noise_var, int T);
std::vector<double> gamma_greedy_curve(const Kernel& kernel,
                                       const Eigen::Ref<const Eigen::MatrixXd>& points,
                                       double noise_var, int T);

// Greedy cover: sample (with repeats) until every target's posterior standard
// deviation is at most xi, starting from the prior. Equal costs reduce to
// picking the highest-variance target; otherwise picks maximize the
// xi-truncated variance reduction over the targets per unit cost, over the
// whole domain.
struct CoveringResult {
  std::vector<int> points;  // picks in order, domain indices, repeats possible
  double cost = 0.0;
};

CoveringResult covering_cost(const Kernel& kernel,
                             const Eigen::Ref<const Eigen::MatrixXd>& points,
                             const Eigen::VectorXd& costs, const Eigen::VectorXd& noise_vars,
                             double xi, const std::vector<int>& targets);

// Confidence schedules behind the guarantees: the unit-cost form
// 2 log(|D| T^2 pi^2 / (6 delta)), the cost-aware variant with an extra
// c_max^2/c_min^2 factor, and the per-epoch form driven by cumulative costs.
double beta_theoretical_unit(double delta, double domain_size, double t);
double beta_theoretical_cost(double delta, double domain_size, double t, double c_min,
                             double c_max);
std::vector<double> beta_theoretical_epochs(double delta, double domain_size,
                                            const std::vector<double>& epoch_costs,
                                            double c_min);

// Per-epoch cost sufficient for the epoch's confidence target:
// covering_value * log(m_bar * beta / (slack^2 eta^2)) + c_max.
double epoch_cost_bound(double covering_value, double m_bar_size, double beta, double eta,
                        double delta_bar, double c_max);

// Total cost to epsilon-accuracy: epoch_cost_bound summed over the epochs
// whose preceding target still exceeds the accuracy goal
// (4 (1+slack) eta_(i-1) > epsilon). The tables must cover all such epochs.
double accuracy_cost_bound(const std::vector<double>& covering_values,
                           const std::vector<double>& m_bar_sizes,
                           const std::vector<double>& betas, double eta_initial,
                           double shrink_ratio, double delta_bar, double c_max, double epsilon);

// Inputs to the closed-form sample-complexity bounds. The displayed constants
// are specialized to eta_initial = 1, shrink_ratio = 1/2; other values are
// rejected. gamma_estimate enters the fixed point as a constant.
struct BoundInputs {
  double domain_size = 0.0;  // |D|
  double sigma2 = 0.0;       // homoscedastic noise variance
  double epsilon = 0.0;
  double delta = 0.0;      // failure probability
  double delta_bar = 0.0;  // slack; must be > 0 here
  double gamma_estimate = 0.0;
  double eta_initial = 1.0;
  double shrink_ratio = 0.5;
  Eigen::VectorXd level_noise_vars;  // optional noise-level table
  Eigen::VectorXd level_costs;
  double cap = 1e9;  // fixed-point search ceiling

  void validate() const;
};

struct BoundReport {
  double t_simplified = 0.0;  // fixed point of the basic condition
  double t_improved = 0.0;    // fixed point of the noise-adaptive condition
  std::vector<double> t_per_level;     // T*(k) under the cost-aware schedule
  std::vector<double> cost_per_level;  // c(k) * T*(k)
  int best_level = -1;                 // argmin of cost_per_level, -1 if no table
  double c_multi_noise = 0.0;          // min_k c(k) * T*(k), 0 if no table
};

// Smallest integer T satisfying each self-referential sufficient condition
// (T appears inside beta_T), found by doubling then bisection; exceeding the
// cap raises InfeasibleError.
BoundReport corollary_bounds(const BoundInputs& inputs);

// Random probe of diminishing returns for the variance reduction
// psi(S) = var_t(x) - var_{t|S}(x): for nested S within S', the marginal gain
// of an extra point must not grow. Gaps beyond 1e-9 count as violations.
struct SubmodularityReport {
  int trials = 0;
  int violations = 0;
  double max_gap = 0.0;  // largest positive (superset gain - subset gain) seen
};

SubmodularityReport submodularity_check(const Kernel& kernel,
                                        const Eigen::Ref<const Eigen::MatrixXd>& points,
                                        const Eigen::VectorXd& noise_vars, int trials,
                                        std::uint64_t seed);

}  // namespace truvar
