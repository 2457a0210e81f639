#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "truvar/kernel.hpp"
#include "truvar/rng.hpp"

namespace truvar {

enum class CostModel {
  kUnit,      // every query costs 1
  kPerPoint,  // cost column from the grid file
  kTravel,    // travel_cost(previous, candidate)
  kPerLevel,  // cost attached to the chosen noise level
};

// Ground truth over a finite grid: function values, per-query noise, and the
// query cost model. With `levels > 1` the queryable domain is the product of
// the base grid and a set of noise levels; global index g maps to base point
// g / levels and level g % levels, so base order stays the primary sort key.
struct Environment {
  Eigen::MatrixXd points;       // n0 x d base grid
  Eigen::VectorXd truth;        // n0
  Eigen::VectorXd noise_vars;   // n0, declared sampling variance per base point
  Eigen::VectorXd point_costs;  // n0 when cost_model == kPerPoint, else empty
  CostModel cost_model = CostModel::kUnit;
  int levels = 1;
  Eigen::VectorXd level_noise_vars;  // levels entries when levels > 1
  Eigen::VectorXd level_costs;       // levels entries when levels > 1

  int base_size() const { return static_cast<int>(points.rows()); }
  int domain_size() const { return base_size() * levels; }
  int dims() const { return static_cast<int>(points.cols()); }
  int base_of(int global) const { return global / levels; }
  int level_of(int global) const { return global % levels; }

  double truth_at(int global) const { return truth[base_of(global)]; }
  double noise_var_at(int global) const;

  // Cost of querying `global` after `prev_global`; prev is only consulted by
  // the travel model, where it must be a valid index.
  double cost(int prev_global, int global) const;

  // Noisy sample: truth + sqrt(noise) * z, one stream draw per call.
  double observe(int global, RandomStream& stream) const;

  // Shape and range checks; ConfigError on violation.
  void validate() const;
};

// Regular grid over [lower, upper] with shape[i] points along dimension i,
// ordered so the first coordinate is the slowest (matches the CSV sort order).
Eigen::MatrixXd make_grid(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          const std::vector<int>& shape);

// Smooth random function on `grid_points`: values at `n_anchor` distinct
// anchor points are drawn from the kernel's Gaussian prior, and the truth is
// the noiseless interpolation of those values. Same seed, same function.
Environment synth_gp_function(const Kernel& kernel, Eigen::MatrixXd grid_points, int n_anchor,
                              std::uint64_t seed, double noise_var);

// CSV with header x1,...,xd,f[,noise_var][,cost]; rows are sorted
// lexicographically by coordinates. Duplicate coordinates, non-finite values
// or malformed fields fail with the offending line number.
Environment load_grid_csv(const std::string& path);

// Inverse of load_grid_csv for base grids: emits x1..xd,f,noise_var and the
// cost column for per-point cost tables. Reloading reproduces every field;
// multi-level environments have no file form and are rejected.
void write_grid_csv(const Environment& env, const std::string& path);

// Query cost when moving to `candidate` from `previous`: proportional to the
// first-coordinate distance plus a depth surcharge on the candidate's second
// coordinate. Requires at least two dimensions.
double travel_cost(const Eigen::Ref<const Eigen::RowVectorXd>& previous,
                   const Eigen::Ref<const Eigen::RowVectorXd>& candidate);

// Lift a base environment to the product domain with one (noise variance,
// cost) pair per level.
Environment multi_noise_env(Environment base, Eigen::VectorXd level_noise_vars,
                            Eigen::VectorXd level_costs);

}  // namespace truvar
