#pragma once

#include "badtime/dataset.hpp"
#include "badtime/forecaster.hpp"
#include "badtime/trigger.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace badtime {

struct LossWeights {
  double alpha1 = 1.0;  // clean samples
  double alpha2 = 2.0;  // poisoned samples, target columns
  double alpha3 = 0.5;  // poisoned samples, other columns
  double beta1 = 1.0;
  double beta2 = 0.5;
  double beta3 = 2000.0;  // trigger smoothness
  double beta4 = 50.0;    // trigger range
  double epsilon = 0.8;   // smoothness threshold

  void validate() const;
};

struct TrainSchedule {
  Index epochs = 30;
  Index batch_size = 32;
  Index trigger_period = 5;  // run a trigger phase after every this many epochs
  Index trigger_steps = 200;
  double trigger_lr = 1e-3;
  double model_lr = 1e-3;
  std::uint64_t seed = 1;

  void validate() const;
};

/// One training sample as the model sees it. For poisoned samples `input`
/// already carries the trigger and `label` the pattern.
struct Sample {
  Matrix input;
  Matrix label;
  bool poisoned = false;
};

struct ModelLoss {
  double total = 0.0;
  double clean = 0.0;            // L_c
  double poisoned_target = 0.0;  // L_p on target columns
  double poisoned_other = 0.0;   // L_p on the remaining columns
};

struct TriggerLoss {
  double total = 0.0;
  double poisoned_target = 0.0;
  double poisoned_other = 0.0;
  double smooth = 0.0;
  double range = 0.0;
};

/// Columns not in `targets`.
VariableSet complement(const VariableSet& targets, Index n);

/// Materializes the sample for window `w`: an independent copy, triggered
/// and label-poisoned when the plan lists its anchor.
Sample make_sample(const SeriesMatrix& m, const WindowSpec& spec, WindowIndex w,
                   const PoisonPlan& plan);

ModelLoss model_loss(const std::vector<Matrix>& predictions, const std::vector<Sample>& batch,
                     const PoisonPlan& plan, const LossWeights& w);

struct TriggerRegularizers {
  double smooth = 0.0;
  double range = 0.0;
  Matrix smooth_grad;  // d smooth / d segments
  Matrix range_grad;
};

/// Hinge-squared penalty on within-segment jumps above epsilon and a hinge
/// penalty on cells outside the poisoned variable's training range, both
/// normalized by the total trigger length.
TriggerRegularizers trigger_regularizers(const TriggerMatrix& trigger, const PoisonPlan& plan,
                                         double epsilon);

TriggerLoss trigger_loss(const std::vector<Matrix>& predictions,
                         const std::vector<Sample>& poisoned_batch, const PoisonPlan& plan,
                         const LossWeights& w);

/// Value and gradient of the trigger objective over `windows` for the
/// trigger currently stored in `plan`.
TriggerLoss trigger_objective(const Forecaster& params, const SeriesMatrix& m,
                              const WindowSpec& spec, const std::vector<WindowIndex>& windows,
                              const PoisonPlan& plan, const LossWeights& w, Matrix* grad);

/// One epoch over `train` in fixed chronological batches, one optimizer
/// step per batch. Returns the epoch's pre-update loss components.
ModelLoss model_phase(Forecaster& params, const SeriesMatrix& m, const WindowSpec& spec,
                      const std::vector<WindowIndex>& train, const PoisonPlan& plan,
                      const LossWeights& w, OptState& opt, Index batch_size, Index epoch = 0);

/// `steps` plain gradient steps on the trigger with the model frozen.
TriggerMatrix trigger_phase(const Forecaster& params, const SeriesMatrix& m,
                            const WindowSpec& spec, const std::vector<WindowIndex>& poisoned,
                            const PoisonPlan& plan, const LossWeights& w, Index steps, double lr);

struct HistoryRow {
  Index epoch = 0;
  ModelLoss model;
  double smooth = 0.0;
  double range = 0.0;
};

struct TrainResult {
  Forecaster params;
  TriggerMatrix trigger;
  std::vector<HistoryRow> history;
};

/// Alternating optimization. With no poisoned anchors this is plain
/// benign training from the same initialization.
TrainResult train_backdoored(const SeriesMatrix& m, const WindowSpec& spec,
                             const std::vector<WindowIndex>& train, const PoisonPlan& plan,
                             const LossWeights& w, const TrainSchedule& sched);

void write_history_csv(const std::vector<HistoryRow>& history, const std::string& path);

}  // namespace badtime
