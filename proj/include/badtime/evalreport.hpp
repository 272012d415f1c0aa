#pragma once

#include "badtime/dataset.hpp"
#include "badtime/forecaster.hpp"
#include "badtime/trigger.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace badtime {

struct StealthStats {
  double max_step_delta = 0.0;  // largest jump added by injection, worst window
  Index range_violations = 0;   // injected cells pushed outside the training range
  double l2_perturbation = 0.0; // mean Frobenius norm of (poisoned - clean) input
};

struct WindowMetrics {
  Index anchor = 0;
  double mae_c = 0.0, mse_c = 0.0;
  double mae_pa = 0.0, mse_pa = 0.0;
  double mae_pn = 0.0, mse_pn = 0.0;
};

struct EvalReport {
  double mae_c = 0.0, mse_c = 0.0;    // clean input vs ground truth, all columns
  double mae_pa = 0.0, mse_pa = 0.0;  // triggered input, target columns vs pattern head
  double mae_pn = 0.0, mse_pn = 0.0;  // triggered input, other columns vs ground truth
  Index n_eval_windows = 0;
  StealthStats stealth;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::string version = "1.0.0";
  std::vector<WindowMetrics> per_window;
};

/// Clean and triggered predictions for every validation window; metrics
/// are cell means pooled over windows. With `original_units` the errors of
/// a normalized series are scaled back by each column's std; the stealth
/// statistics stay in normalized units.
EvalReport evaluate(const Forecaster& params, const TriggerMatrix& trigger,
                    const PoisonPlan& plan, const std::vector<WindowIndex>& valid,
                    const SeriesMatrix& m, const WindowSpec& spec, bool original_units = false);

StealthStats stealth_proxy(const PoisonPlan& plan, const std::vector<WindowIndex>& valid,
                           const SeriesMatrix& m, const WindowSpec& spec);

nlohmann::ordered_json report_json(const EvalReport& report);
EvalReport parse_report(const std::string& text);

void emit_report(const EvalReport& report, const std::string& path);
void write_per_window_csv(const EvalReport& report, const std::string& path);

}  // namespace badtime
