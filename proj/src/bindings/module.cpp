#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "truvar/baselines.hpp"
#include "truvar/common.hpp"
#include "truvar/harness.hpp"
#include "truvar/metrics.hpp"
#include "truvar/rng.hpp"
#include "truvar/theory.hpp"
#include "truvar/truvar.hpp"

namespace py = pybind11;
using namespace truvar;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Truncated variance reduction over finite GP domains";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);

  py::enum_<Mode>(m, "Mode")
      .value("BO", Mode::kBayesOpt)
      .value("LSE", Mode::kLevelSet);
  py::enum_<CostModel>(m, "CostModel")
      .value("UNIT", CostModel::kUnit)
      .value("PER_POINT", CostModel::kPerPoint)
      .value("TRAVEL", CostModel::kTravel)
      .value("PER_LEVEL", CostModel::kPerLevel);
  py::enum_<MetricKind>(m, "MetricKind")
      .value("NONE", MetricKind::kNone)
      .value("F1", MetricKind::kF1)
      .value("REGRET", MetricKind::kRegret);

  py::class_<Kernel>(m, "Kernel")
      .def_static("squared_exponential", &Kernel::squared_exponential,
                  py::arg("length_scales"), py::arg("variance") = 1.0)
      .def_static("matern52", &Kernel::matern52, py::arg("length_scales"),
                  py::arg("variance") = 1.0)
      .def_readwrite("length_scales", &Kernel::length_scales)
      .def_readwrite("variance", &Kernel::variance)
      .def("dims", &Kernel::dims);
  m.def("gram_matrix", &gram_matrix, py::arg("kernel"), py::arg("points"));

  py::class_<RandomStream>(m, "RandomStream")
      .def(py::init<std::uint64_t, const std::string&>(), py::arg("seed"), py::arg("name"))
      .def("uniform", &RandomStream::uniform)
      .def("normal", &RandomStream::normal)
      .def("below", &RandomStream::below, py::arg("n"));

  py::class_<Environment>(m, "Environment")
      .def(py::init<>())
      .def_readwrite("points", &Environment::points)
      .def_readwrite("truth", &Environment::truth)
      .def_readwrite("noise_vars", &Environment::noise_vars)
      .def_readwrite("point_costs", &Environment::point_costs)
      .def_readwrite("cost_model", &Environment::cost_model)
      .def_readwrite("levels", &Environment::levels)
      .def_readwrite("level_noise_vars", &Environment::level_noise_vars)
      .def_readwrite("level_costs", &Environment::level_costs)
      .def("base_size", &Environment::base_size)
      .def("domain_size", &Environment::domain_size)
      .def("dims", &Environment::dims)
      .def("base_of", &Environment::base_of, py::arg("global_index"))
      .def("level_of", &Environment::level_of, py::arg("global_index"))
      .def("truth_at", &Environment::truth_at, py::arg("global_index"))
      .def("noise_var_at", &Environment::noise_var_at, py::arg("global_index"))
      .def("cost", &Environment::cost, py::arg("prev_global"), py::arg("global_index"))
      .def("observe", &Environment::observe, py::arg("global_index"), py::arg("stream"))
      .def("validate", &Environment::validate);

  m.def("make_grid", &make_grid, py::arg("lower"), py::arg("upper"), py::arg("shape"));
  m.def("synth_gp_function", &synth_gp_function, py::arg("kernel"), py::arg("grid_points"),
        py::arg("n_anchor"), py::arg("seed"), py::arg("noise_var"));
  m.def("load_grid_csv", &load_grid_csv, py::arg("path"));
  m.def("write_grid_csv", &write_grid_csv, py::arg("env"), py::arg("path"));
  m.def("travel_cost", &travel_cost, py::arg("previous"), py::arg("candidate"));
  m.def("multi_noise_env", &multi_noise_env, py::arg("base"), py::arg("level_noise_vars"),
        py::arg("level_costs"));

  py::class_<GpPosterior>(m, "GpPosterior")
      .def_static(
          "prior",
          [](Eigen::MatrixXd points, const Kernel& kernel) {
            return GpPosterior::prior(DomainData::make(std::move(points), kernel));
          },
          py::arg("points"), py::arg("kernel"))
      .def_static(
          "fit",
          [](Eigen::MatrixXd points, const Kernel& kernel, const std::vector<int>& indices,
             const std::vector<double>& values, const std::vector<double>& noise_vars) {
            return GpPosterior::fit(DomainData::make(std::move(points), kernel), indices,
                                    values, noise_vars);
          },
          py::arg("points"), py::arg("kernel"), py::arg("indices"), py::arg("values"),
          py::arg("noise_vars"))
      .def("extended",
           [](const GpPosterior& p, int index, double value, double noise_var) {
             return p.extended(index, value, noise_var);
           },
           py::arg("index"), py::arg("value"), py::arg("noise_var"))
      .def("domain_size", &GpPosterior::domain_size)
      .def("num_observations", &GpPosterior::num_observations)
      .def("indices", &GpPosterior::indices)
      .def("values", &GpPosterior::values)
      .def("mean", &GpPosterior::mean, py::arg("index"))
      .def("var", &GpPosterior::var, py::arg("index"))
      .def("covariance", &GpPosterior::covariance, py::arg("a"), py::arg("b"))
      .def("mean_vector", &GpPosterior::mean_vector)
      .def("variance_vector", &GpPosterior::variance_vector)
      .def("covariance_matrix", &GpPosterior::covariance_matrix)
      .def("lookahead_variances",
           [](const GpPosterior& p, int index, double noise_var, const std::vector<int>& t) {
             return p.lookahead_variances(index, noise_var, t);
           },
           py::arg("index"), py::arg("noise_var"), py::arg("targets"))
      .def("batch_lookahead_variances",
           [](const GpPosterior& p, const std::vector<int>& batch,
              const std::vector<double>& noise, const std::vector<int>& targets) {
             return p.batch_lookahead_variances(batch, noise, targets);
           },
           py::arg("batch_indices"), py::arg("batch_noise_vars"), py::arg("targets"));

  py::class_<ConfidenceBounds>(m, "ConfidenceBounds")
      .def_readonly("upper", &ConfidenceBounds::upper)
      .def_readonly("lower", &ConfidenceBounds::lower);
  m.def("confidence_bounds", &confidence_bounds, py::arg("posterior"), py::arg("beta"));

  py::class_<Sets>(m, "Sets")
      .def_static("all_unclassified", &Sets::all_unclassified, py::arg("n"))
      .def_readwrite("in_m", &Sets::in_m)
      .def_readwrite("in_h", &Sets::in_h)
      .def_readwrite("in_l", &Sets::in_l)
      .def("size", &Sets::size)
      .def("m_count", &Sets::m_count)
      .def("h_count", &Sets::h_count)
      .def("l_count", &Sets::l_count)
      .def("m_indices", &Sets::m_indices);
  m.def("update_sets_bo", &update_sets_bo, py::arg("sets"), py::arg("bounds"),
        py::arg("monotone"));
  m.def("update_sets_lse", &update_sets_lse, py::arg("sets"), py::arg("bounds"),
        py::arg("threshold"), py::arg("monotone"));

  py::class_<BetaRule> beta_rule(m, "BetaRule");
  py::enum_<BetaRule::Kind>(beta_rule, "Kind")
      .value("PRACTICAL", BetaRule::Kind::kPractical)
      .value("THEORETICAL", BetaRule::Kind::kTheoretical);
  beta_rule.def(py::init<>())
      .def_readwrite("kind", &BetaRule::kind)
      .def_readwrite("a", &BetaRule::a)
      .def_readwrite("delta", &BetaRule::delta)
      .def("evaluate", &BetaRule::evaluate, py::arg("domain_size"), py::arg("epoch_start_time"));
  m.def("beta_practical", &beta_practical, py::arg("a"), py::arg("domain_size"),
        py::arg("epoch_start_time"));

  py::class_<TruVarConfig>(m, "TruVarConfig")
      .def(py::init<>())
      .def_readwrite("mode", &TruVarConfig::mode)
      .def_readwrite("threshold", &TruVarConfig::threshold)
      .def_readwrite("eta_initial", &TruVarConfig::eta_initial)
      .def_readwrite("shrink_ratio", &TruVarConfig::shrink_ratio)
      .def_readwrite("confidence_slack", &TruVarConfig::confidence_slack)
      .def_readwrite("beta", &TruVarConfig::beta)
      .def_readwrite("monotone_sets", &TruVarConfig::monotone_sets)
      .def_readwrite("restrict_to_potential", &TruVarConfig::restrict_to_potential)
      .def_readwrite("batch_size", &TruVarConfig::batch_size)
      .def_readwrite("pure_variance_reduction", &TruVarConfig::pure_variance_reduction)
      .def_readwrite("eta_floor", &TruVarConfig::eta_floor);

  py::class_<RunOptions>(m, "RunOptions")
      .def(py::init<>())
      .def_readwrite("budget", &RunOptions::budget)
      .def_readwrite("max_steps", &RunOptions::max_steps)
      .def_readwrite("seed", &RunOptions::seed)
      .def_readwrite("start_index", &RunOptions::start_index)
      .def_readwrite("cadence", &RunOptions::cadence)
      .def_readwrite("metric", &RunOptions::metric)
      .def_readwrite("epsilons", &RunOptions::epsilons)
      .def_readwrite("stop_eta", &RunOptions::stop_eta);

  py::class_<StepRow>(m, "StepRow")
      .def_readonly("t", &StepRow::t)
      .def_readonly("point", &StepRow::point)
      .def_readonly("base", &StepRow::base)
      .def_readonly("level", &StepRow::level)
      .def_readonly("noise_var", &StepRow::noise_var)
      .def_readonly("cost", &StepRow::cost)
      .def_readonly("cum_cost", &StepRow::cum_cost)
      .def_readonly("y", &StepRow::y)
      .def_readonly("m_size", &StepRow::m_size)
      .def_readonly("h_size", &StepRow::h_size)
      .def_readonly("l_size", &StepRow::l_size)
      .def_readonly("epoch", &StepRow::epoch)
      .def_readonly("eta", &StepRow::eta)
      .def_readonly("beta", &StepRow::beta)
      .def_readonly("score", &StepRow::score);

  py::class_<MetricRow>(m, "MetricRow")
      .def_readonly("checkpoint", &MetricRow::checkpoint)
      .def_readonly("cum_cost", &MetricRow::cum_cost)
      .def_readonly("t", &MetricRow::t)
      .def_readonly("value", &MetricRow::value)
      .def_readonly("eps_ok", &MetricRow::eps_ok);

  py::class_<RunTrace>(m, "RunTrace")
      .def_readonly("algorithm", &RunTrace::algorithm)
      .def_readonly("mode", &RunTrace::mode)
      .def_readonly("seed", &RunTrace::seed)
      .def_readonly("cadence", &RunTrace::cadence)
      .def_readonly("epsilons", &RunTrace::epsilons)
      .def_readonly("steps", &RunTrace::steps)
      .def_readonly("metric_rows", &RunTrace::metric_rows)
      .def_readonly("termination", &RunTrace::termination)
      .def_readonly("final_cum_cost", &RunTrace::final_cum_cost)
      .def_readonly("final_m", &RunTrace::final_m)
      .def_readonly("final_h", &RunTrace::final_h)
      .def_readonly("final_l", &RunTrace::final_l)
      .def("steps_csv",
           [](const RunTrace& t) {
             std::ostringstream out;
             t.write_steps_csv(out);
             return out.str();
           })
      .def("metrics_csv", [](const RunTrace& t) {
        std::ostringstream out;
        t.write_metrics_csv(out);
        return out.str();
      });

  m.def("run_truvar", &run_truvar, py::arg("env"), py::arg("kernel"), py::arg("config"),
        py::arg("options"), py::call_guard<py::gil_scoped_release>());

  py::class_<BaselineSpec> baseline(m, "BaselineSpec");
  py::enum_<BaselineSpec::Rule>(baseline, "Rule")
      .value("GP_UCB", BaselineSpec::Rule::kGpUcb)
      .value("EI", BaselineSpec::Rule::kEi)
      .value("STRADDLE", BaselineSpec::Rule::kStraddle)
      .value("VAR", BaselineSpec::Rule::kVar)
      .value("GCHK", BaselineSpec::Rule::kGchk);
  baseline.def(py::init<>())
      .def_readwrite("rule", &BaselineSpec::rule)
      .def_readwrite("threshold", &BaselineSpec::threshold)
      .def_readwrite("beta_sqrt", &BaselineSpec::beta_sqrt)
      .def_readwrite("ucb_delta", &BaselineSpec::ucb_delta)
      .def_readwrite("ucb_divisor", &BaselineSpec::ucb_divisor)
      .def_readwrite("level", &BaselineSpec::level)
      .def("name", &BaselineSpec::name);
  m.def("run_baseline", &run_baseline, py::arg("env"), py::arg("kernel"), py::arg("spec"),
        py::arg("mode"), py::arg("options"), py::call_guard<py::gil_scoped_release>());

  py::class_<EpsAccuracyReport>(m, "EpsAccuracyReport")
      .def_readonly("mode", &EpsAccuracyReport::mode)
      .def_readonly("epsilon", &EpsAccuracyReport::epsilon)
      .def_readonly("holds", &EpsAccuracyReport::holds)
      .def_readonly("witnesses", &EpsAccuracyReport::witnesses)
      .def_readonly("min_margin", &EpsAccuracyReport::min_margin)
      .def_readonly("max_violation", &EpsAccuracyReport::max_violation)
      .def_readonly("checked", &EpsAccuracyReport::checked);
  m.def("eps_accuracy", &eps_accuracy, py::arg("env"), py::arg("mode"), py::arg("sets"),
        py::arg("threshold"), py::arg("epsilon"));
  m.def("f1_score", &f1_score, py::arg("posterior"), py::arg("env"), py::arg("threshold"));
  m.def("reported_regret", &reported_regret, py::arg("posterior"), py::arg("env"));

  m.def("gamma_greedy", &gamma_greedy, py::arg("kernel"), py::arg("points"),
        py::arg("noise_var"), py::arg("T"));
  m.def("gamma_greedy_curve", &gamma_greedy_curve, py::arg("kernel"), py::arg("points"),
        py::arg("noise_var"), py::arg("T"));
  py::class_<CoveringResult>(m, "CoveringResult")
      .def_readonly("points", &CoveringResult::points)
      .def_readonly("cost", &CoveringResult::cost);
  m.def("covering_cost", &covering_cost, py::arg("kernel"), py::arg("points"), py::arg("costs"),
        py::arg("noise_vars"), py::arg("xi"), py::arg("targets"));
  m.def("beta_theoretical_unit", &beta_theoretical_unit, py::arg("delta"),
        py::arg("domain_size"), py::arg("t"));
  m.def("beta_theoretical_cost", &beta_theoretical_cost, py::arg("delta"),
        py::arg("domain_size"), py::arg("t"), py::arg("c_min"), py::arg("c_max"));
  m.def("beta_theoretical_epochs", &beta_theoretical_epochs, py::arg("delta"),
        py::arg("domain_size"), py::arg("epoch_costs"), py::arg("c_min"));
  m.def("epoch_cost_bound", &epoch_cost_bound, py::arg("covering_value"),
        py::arg("m_bar_size"), py::arg("beta"), py::arg("eta"), py::arg("delta_bar"),
        py::arg("c_max"));
  m.def("accuracy_cost_bound", &accuracy_cost_bound, py::arg("covering_values"),
        py::arg("m_bar_sizes"), py::arg("betas"), py::arg("eta_initial"),
        py::arg("shrink_ratio"), py::arg("delta_bar"), py::arg("c_max"), py::arg("epsilon"));

  py::class_<BoundInputs>(m, "BoundInputs")
      .def(py::init<>())
      .def_readwrite("domain_size", &BoundInputs::domain_size)
      .def_readwrite("sigma2", &BoundInputs::sigma2)
      .def_readwrite("epsilon", &BoundInputs::epsilon)
      .def_readwrite("delta", &BoundInputs::delta)
      .def_readwrite("delta_bar", &BoundInputs::delta_bar)
      .def_readwrite("gamma_estimate", &BoundInputs::gamma_estimate)
      .def_readwrite("eta_initial", &BoundInputs::eta_initial)
      .def_readwrite("shrink_ratio", &BoundInputs::shrink_ratio)
      .def_readwrite("level_noise_vars", &BoundInputs::level_noise_vars)
      .def_readwrite("level_costs", &BoundInputs::level_costs)
      .def_readwrite("cap", &BoundInputs::cap);
  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("t_simplified", &BoundReport::t_simplified)
      .def_readonly("t_improved", &BoundReport::t_improved)
      .def_readonly("t_per_level", &BoundReport::t_per_level)
      .def_readonly("cost_per_level", &BoundReport::cost_per_level)
      .def_readonly("best_level", &BoundReport::best_level)
      .def_readonly("c_multi_noise", &BoundReport::c_multi_noise);
  m.def("corollary_bounds", &corollary_bounds, py::arg("inputs"));

  py::class_<SubmodularityReport>(m, "SubmodularityReport")
      .def_readonly("trials", &SubmodularityReport::trials)
      .def_readonly("violations", &SubmodularityReport::violations)
      .def_readonly("max_gap", &SubmodularityReport::max_gap);
  m.def("submodularity_check", &submodularity_check, py::arg("kernel"), py::arg("points"),
        py::arg("noise_vars"), py::arg("trials"), py::arg("seed"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_static("from_json_text", &ExperimentConfig::from_json_text, py::arg("text"))
      .def_static("from_json_file", &ExperimentConfig::from_json_file, py::arg("path"))
      .def_readwrite("mode", &ExperimentConfig::mode)
      .def_readwrite("threshold", &ExperimentConfig::threshold)
      .def_readwrite("budget", &ExperimentConfig::budget)
      .def_readwrite("cadence", &ExperimentConfig::cadence)
      .def_readwrite("max_steps", &ExperimentConfig::max_steps)
      .def_readwrite("seeds", &ExperimentConfig::seeds)
      .def_readwrite("epsilons", &ExperimentConfig::epsilons)
      .def_readwrite("output", &ExperimentConfig::output)
      .def("validate", &ExperimentConfig::validate);
  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_readonly("trace_files", &ExperimentResult::trace_files)
      .def_readonly("summary_file", &ExperimentResult::summary_file)
      .def_readonly("runs", &ExperimentResult::runs);
  m.def("run_experiment", &run_experiment, py::arg("config"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());

  py::class_<TraceSeries>(m, "TraceSeries")
      .def_readonly("algorithm", &TraceSeries::algorithm)
      .def_readonly("mode", &TraceSeries::mode)
      .def_readonly("seed", &TraceSeries::seed)
      .def_readonly("cadence", &TraceSeries::cadence)
      .def_readonly("termination", &TraceSeries::termination)
      .def_readonly("checkpoints", &TraceSeries::checkpoints)
      .def_readonly("values", &TraceSeries::values);
  m.def("read_metrics_csv", &read_metrics_csv, py::arg("path"));
  py::class_<Comparison>(m, "Comparison")
      .def_readonly("algorithms", &Comparison::algorithms)
      .def_readonly("checkpoints", &Comparison::checkpoints)
      .def_readonly("means", &Comparison::means)
      .def_readonly("mean_deltas", &Comparison::mean_deltas)
      .def_readonly("sign_p", &Comparison::sign_p)
      .def_readonly("paired_seeds", &Comparison::paired_seeds);
  m.def("compare_traces", &compare_traces, py::arg("series"));
  m.def("sign_test_p", &sign_test_p, py::arg("deltas"));
  m.def("bound_inputs_from_json_text", &bound_inputs_from_json_text, py::arg("text"));
  m.def("bound_inputs_from_json_file", &bound_inputs_from_json_file, py::arg("path"));
  m.def("bound_report_json", &bound_report_json, py::arg("inputs"), py::arg("report"));
}
