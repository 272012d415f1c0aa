#pragma once

#include "badtime/backdoor.hpp"
#include "badtime/dataset.hpp"
#include "badtime/depgraph.hpp"
#include "badtime/evalreport.hpp"
#include "badtime/simsearch.hpp"
#include "badtime/trigger.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace badtime {

/// Every resolved run setting. Keys of the key=value config format match
/// the names returned by `entries()`.
struct RunConfig {
  std::string data = "synth";  // CSV path, or "synth" for the built-in dataset
  std::string date_column;     // empty: auto-detect a leading "date" column
  Index synth_length = 4000;
  double synth_noise = 0.05;

  Index t_in = 96;
  Index t_out = 96;
  Index stride = 1;
  double train_ratio = 0.8;

  double mu = 0.25;
  double rho = 0.125;
  double alpha_t = 0.05;
  double gamma = 0.5;
  double alpha_p = 3.0 / 7.0;
  double lambda = 0.8;
  Index exclusion_radius = -1;  // -1: min(t_pin, largest radius that keeps the budget feasible)
  std::string targets;          // comma-separated names or indices; empty: last variable
  std::string pattern = "constant:2";

  Index gat_epochs = 30;
  double gat_lr = 1e-2;
  Index gat_hidden = 16;

  LossWeights weights;
  TrainSchedule schedule;

  std::uint64_t seed = 1;
  std::string out = "out";
  std::string checkpoint;  // evaluate: defaults to <out>/checkpoint.txt
  std::string trigger;     // evaluate: defaults to <out>/trigger.csv
  std::string plan;        // evaluate: defaults to <out>/plan.json when present
  bool per_window = false;
  bool original_units = false;  // report metrics scaled back by each column's std

  /// Applies one key=value setting; unknown keys are configuration errors.
  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  void validate() const;
  /// The schedule with its seed taken from `seed`.
  TrainSchedule training_schedule() const {
    TrainSchedule s = schedule;
    s.seed = seed;
    return s;
  }

  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string to_text() const;
  nlohmann::ordered_json to_json() const;
};

/// Normalized series with its windows and split.
struct PreparedData {
  SeriesMatrix raw;
  SeriesMatrix series;  // z-scored with training-row statistics
  WindowSpec spec;
  WindowSplit split;
  Index train_rows = 0;
};

PreparedData prepare_data(const RunConfig& cfg);

VariableSet resolve_targets(const RunConfig& cfg, const SeriesMatrix& m);

/// Intermediate products of plan resolution, kept for export.
struct PlanArtifacts {
  DistanceProfile profile;
  AttentionGraph attention;
  Vector influence;
  Index exclusion_radius = 0;
};

/// Runs sample selection, variable selection, lag alignment and trigger
/// initialization. With alpha_t == 0 the plan has no poisoned anchors.
PoisonPlan resolve_plan(const RunConfig& cfg, const PreparedData& data,
                        PlanArtifacts* artifacts = nullptr);

nlohmann::ordered_json plan_json(const PoisonPlan& plan, const SeriesMatrix& m);
PoisonPlan parse_plan(const std::string& text, const SeriesMatrix& m);
void write_plan(const PoisonPlan& plan, const SeriesMatrix& m, const std::string& path);
PoisonPlan read_plan(const std::string& path, const SeriesMatrix& m);

struct RunOutcome {
  PoisonPlan plan;
  TrainResult training;
  std::optional<EvalReport> report;
};

/// Plan only: writes plan.json, poisoned_windows.csv, the poisoned training
/// windows, trigger.csv, attention.csv and lags.csv under cfg.out.
PoisonPlan cmd_poison(const RunConfig& cfg);
RunOutcome cmd_train_benign(const RunConfig& cfg);
RunOutcome cmd_train_backdoor(const RunConfig& cfg);
EvalReport cmd_evaluate(const RunConfig& cfg);
void cmd_synth(const RunConfig& cfg);

/// In-memory run used by tests: resolve the plan, train benign or
/// backdoored, evaluate on the validation split. Writes nothing.
RunOutcome run_in_memory(const RunConfig& cfg, const PreparedData& data, bool backdoor,
                         const PoisonPlan* plan = nullptr);

}  // namespace badtime
