#include "truvar/trace.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "truvar/common.hpp"

namespace truvar {

void RunOptions::validate() const {
  if (!(budget > 0.0)) throw ConfigError("run options: budget must be > 0");
  if (cadence < 0.0) throw ConfigError("run options: cadence must be >= 0");
  if (metric != MetricKind::kNone && cadence <= 0.0)
    throw ConfigError("run options: metric sampling requires a positive cadence");
  for (double e : epsilons)
    if (!(e > 0.0) || !std::isfinite(e))
      throw ConfigError("run options: epsilons must be positive and finite");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

// Shared metadata comments so each CSV identifies its run on its own.
void write_preamble(std::ostream& out, const RunTrace& trace) {
  out << "# truvar-trace v1\n";
  out << "# algorithm: " << trace.algorithm << '\n';
  out << "# mode: " << trace.mode << '\n';
  out << "# seed: " << trace.seed << '\n';
  out << "# cadence: " << format_double(trace.cadence) << '\n';
  out << "# termination: " << trace.termination << '\n';
}

}  // namespace

void RunTrace::write_steps_csv(std::ostream& out) const {
  write_preamble(out, *this);
  out << "t,point,base,level,noise_var,cost,cum_cost,y,m_size,h_size,l_size,epoch,eta,beta,score\n";
  for (const StepRow& r : steps) {
    out << r.t << ',' << r.point << ',' << r.base << ',' << r.level << ','
        << format_double(r.noise_var) << ',' << format_double(r.cost) << ','
        << format_double(r.cum_cost) << ',' << format_double(r.y) << ',' << r.m_size << ','
        << r.h_size << ',' << r.l_size << ',' << r.epoch << ',' << format_double(r.eta) << ','
        << format_double(r.beta) << ',' << format_double(r.score) << '\n';
  }
}

void RunTrace::write_metrics_csv(std::ostream& out) const {
  write_preamble(out, *this);
  out << "checkpoint,cum_cost,t,value";
  for (double e : epsilons) out << ",eps_" << format_double(e);
  out << '\n';
  for (const MetricRow& r : metric_rows) {
    out << format_double(r.checkpoint) << ',' << format_double(r.cum_cost) << ',' << r.t << ','
        << format_double(r.value);
    for (int flag : r.eps_ok) out << ',' << flag;
    out << '\n';
  }
}

}  // namespace truvar
