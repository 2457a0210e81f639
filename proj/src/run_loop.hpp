#pragma once

// Shared run loop: selection policies (TruVaR and the baselines) plug into one
// observe/condition/record cycle so traces, budgets, and metric sampling work
// identically everywhere. Internal to the library.

#include <string>

#include "truvar/environment.hpp"
#include "truvar/posterior.hpp"
#include "truvar/sets.hpp"
#include "truvar/trace.hpp"
#include "truvar/truvar.hpp"

namespace truvar::internal {

struct StepMeta {
  int epoch = 1;
  double eta = 0.0;
  double beta = 0.0;
  int m = 0, h = 0, l = 0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void init(const GpPosterior& prior) = 0;
  virtual Selection select(const GpPosterior& posterior, int prev_point) = 0;
  // Called after each observation lands in the posterior. `advance_allowed`
  // is false for all but the last observation of a batch.
  virtual void update(const GpPosterior& posterior, int point, double cost, int next_time,
                      bool advance_allowed) = 0;
  virtual bool finished() const { return false; }
  virtual std::string termination_reason() const { return ""; }
  virtual StepMeta meta() const = 0;
  virtual const Sets* sets() const { return nullptr; }
};

RunTrace run_policy(const Environment& env, const Kernel& kernel, Policy& policy,
                    const RunOptions& options, Mode mode, double threshold);

}  // namespace truvar::internal
