#include "badtime/backdoor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace badtime {

void LossWeights::validate() const {
  for (double v : {alpha1, alpha2, alpha3, beta1, beta2, beta3, beta4, epsilon})
    if (!(v >= 0.0)) fail(ErrorKind::Config, "loss weights and epsilon must be >= 0");
}

void TrainSchedule::validate() const {
  if (epochs < 1) fail(ErrorKind::Config, "epochs must be >= 1");
  if (batch_size < 1) fail(ErrorKind::Config, "batch_size must be >= 1");
  if (trigger_period < 1) fail(ErrorKind::Config, "trigger period M must be >= 1");
  if (trigger_steps < 0) fail(ErrorKind::Config, "trigger_steps must be >= 0");
  if (!(trigger_lr > 0.0) || !(model_lr > 0.0))
    fail(ErrorKind::Config, "learning rates must be positive");
}

VariableSet complement(const VariableSet& targets, Index n) {
  VariableSet out;
  for (Index j = 0; j < n; ++j)
    if (std::find(targets.begin(), targets.end(), j) == targets.end()) out.push_back(j);
  return out;
}

Sample make_sample(const SeriesMatrix& m, const WindowSpec& spec, WindowIndex w,
                   const PoisonPlan& plan) {
  Sample s;
  s.input = window_input(m, spec, w);
  s.label = window_label(m, spec, w);
  s.poisoned = plan.is_poisoned(w.t);
  if (s.poisoned) {
    s.input = inject_trigger(s.input, plan);
    s.label = poison_label(s.label, plan.pattern, plan.targets);
  }
  return s;
}

namespace {

Sample triggered_sample(const SeriesMatrix& m, const WindowSpec& spec, WindowIndex w,
                        const PoisonPlan& plan) {
  Sample s;
  s.input = inject_trigger(window_input(m, spec, w), plan);
  s.label = poison_label(window_label(m, spec, w), plan.pattern, plan.targets);
  s.poisoned = true;
  return s;
}

struct Counts {
  double clean = 0.0;
  double poisoned = 0.0;
};

Counts count(const std::vector<Sample>& batch) {
  Counts c;
  for (const auto& s : batch) (s.poisoned ? c.poisoned : c.clean) += 1.0;
  return c;
}

}  // namespace

ModelLoss model_loss(const std::vector<Matrix>& predictions, const std::vector<Sample>& batch,
                     const PoisonPlan& plan, const LossWeights& w) {
  if (predictions.size() != batch.size()) fail(ErrorKind::Shape, "prediction count differs from batch");
  ModelLoss out;
  if (batch.empty()) return out;
  const Index n = batch.front().label.cols();
  VariableSet all(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) all[static_cast<std::size_t>(j)] = j;
  const VariableSet others = complement(plan.targets, n);

  const auto c = count(batch);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto& s = batch[k];
    if (!s.poisoned) {
      out.clean += combined_error(predictions[k], s.label, all) / c.clean;
    } else {
      out.poisoned_target += combined_error(predictions[k], s.label, plan.targets) / c.poisoned;
      if (!others.empty())
        out.poisoned_other += combined_error(predictions[k], s.label, others) / c.poisoned;
    }
  }
  out.total = w.alpha1 * out.clean + w.alpha2 * out.poisoned_target + w.alpha3 * out.poisoned_other;
  return out;
}

TriggerRegularizers trigger_regularizers(const TriggerMatrix& trigger, const PoisonPlan& plan,
                                         double epsilon) {
  const auto& tau = trigger.segments;
  const double inv_len = 1.0 / static_cast<double>(trigger.total_length());
  TriggerRegularizers r;
  r.smooth_grad = Matrix::Zero(tau.rows(), tau.cols());
  r.range_grad = Matrix::Zero(tau.rows(), tau.cols());
  for (Index j = 0; j < tau.cols(); ++j) {
    for (Index k = 1; k < tau.rows(); ++k) {
      const double jump = tau(k, j) - tau(k - 1, j);
      const double excess = std::abs(jump) - epsilon;
      if (excess > 0.0) {
        r.smooth += excess * excess * inv_len;
        const double g = 2.0 * excess * (jump > 0.0 ? 1.0 : -1.0) * inv_len;
        r.smooth_grad(k, j) += g;
        r.smooth_grad(k - 1, j) -= g;
      }
    }
    const bool has_range = plan.range_min.size() == tau.cols() && plan.range_max.size() == tau.cols();
    if (!has_range) continue;
    for (Index k = 0; k < tau.rows(); ++k) {
      const double below = plan.range_min[j] - tau(k, j);
      const double above = tau(k, j) - plan.range_max[j];
      if (below > 0.0) {
        r.range += below * inv_len;
        r.range_grad(k, j) -= inv_len;
      }
      if (above > 0.0) {
        r.range += above * inv_len;
        r.range_grad(k, j) += inv_len;
      }
    }
  }
  return r;
}

TriggerLoss trigger_loss(const std::vector<Matrix>& predictions,
                         const std::vector<Sample>& poisoned_batch, const PoisonPlan& plan,
                         const LossWeights& w) {
  if (predictions.size() != poisoned_batch.size())
    fail(ErrorKind::Shape, "prediction count differs from batch");
  TriggerLoss out;
  if (!poisoned_batch.empty()) {
    const Index n = poisoned_batch.front().label.cols();
    const VariableSet others = complement(plan.targets, n);
    const double inv = 1.0 / static_cast<double>(poisoned_batch.size());
    for (std::size_t k = 0; k < poisoned_batch.size(); ++k) {
      out.poisoned_target += inv * combined_error(predictions[k], poisoned_batch[k].label, plan.targets);
      if (!others.empty())
        out.poisoned_other += inv * combined_error(predictions[k], poisoned_batch[k].label, others);
    }
  }
  const auto reg = trigger_regularizers(plan.trigger, plan, w.epsilon);
  out.smooth = reg.smooth;
  out.range = reg.range;
  out.total = w.beta1 * out.poisoned_target + w.beta2 * out.poisoned_other + w.beta3 * out.smooth +
              w.beta4 * out.range;
  return out;
}

TriggerLoss trigger_objective(const Forecaster& params, const SeriesMatrix& m,
                              const WindowSpec& spec, const std::vector<WindowIndex>& windows,
                              const PoisonPlan& plan, const LossWeights& w, Matrix* grad) {
  const Index n = m.cols();
  const VariableSet others = complement(plan.targets, n);
  const auto& tau = plan.trigger.segments;
  const Index seg = tau.rows();
  if (grad) *grad = Matrix::Zero(tau.rows(), tau.cols());

  TriggerLoss out;
  const double inv = windows.empty() ? 0.0 : 1.0 / static_cast<double>(windows.size());
  for (const auto& win : windows) {
    const Sample s = triggered_sample(m, spec, win, plan);
    const Matrix pred = forward(params, s.input);
    out.poisoned_target += inv * combined_error(pred, s.label, plan.targets);
    if (!others.empty()) out.poisoned_other += inv * combined_error(pred, s.label, others);
    if (!grad) continue;
    Matrix g = Matrix::Zero(pred.rows(), pred.cols());
    accumulate_error_gradient(pred, s.label, plan.targets, w.beta1 * inv, g);
    if (!others.empty()) accumulate_error_gradient(pred, s.label, others, w.beta2 * inv, g);
    const auto back = backward_from_output(params, s.input, g);
    for (std::size_t j = 0; j < plan.poisoned.size(); ++j)
      grad->col(static_cast<Index>(j)) +=
          plan.lambda * back.input.col(plan.poisoned[j]).segment(plan.segment_offset(j), seg);
  }
  const auto reg = trigger_regularizers(plan.trigger, plan, w.epsilon);
  out.smooth = reg.smooth;
  out.range = reg.range;
  out.total = w.beta1 * out.poisoned_target + w.beta2 * out.poisoned_other + w.beta3 * out.smooth +
              w.beta4 * out.range;
  if (grad) *grad += w.beta3 * reg.smooth_grad + w.beta4 * reg.range_grad;
  return out;
}

ModelLoss model_phase(Forecaster& params, const SeriesMatrix& m, const WindowSpec& spec,
                      const std::vector<WindowIndex>& train, const PoisonPlan& plan,
                      const LossWeights& w, OptState& opt, Index batch_size, Index epoch) {
  if (batch_size < 1) fail(ErrorKind::Config, "batch_size must be >= 1");
  const Index n = m.cols();
  VariableSet all(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) all[static_cast<std::size_t>(j)] = j;
  const VariableSet others = complement(plan.targets, n);

  ModelLoss sums;
  double n_clean = 0.0, n_poisoned = 0.0;
  const auto total = static_cast<Index>(train.size());
  Index batch_no = 0;
  std::vector<Sample> batch;
  std::vector<Matrix> preds;
  for (Index start = 0; start < total; start += batch_size, ++batch_no) {
    const Index stop = std::min(total, start + batch_size);
    batch.clear();
    preds.clear();
    for (Index k = start; k < stop; ++k)
      batch.push_back(make_sample(m, spec, train[static_cast<std::size_t>(k)], plan));
    const auto c = count(batch);

    Forecaster grads = Forecaster::zeros(params.t_in(), params.t_out(), n);
    for (const auto& s : batch) {
      preds.push_back(forward(params, s.input));
      const Matrix& pred = preds.back();
      Matrix g = Matrix::Zero(pred.rows(), pred.cols());
      if (!s.poisoned) {
        accumulate_error_gradient(pred, s.label, all, w.alpha1 / c.clean, g);
      } else {
        accumulate_error_gradient(pred, s.label, plan.targets, w.alpha2 / c.poisoned, g);
        if (!others.empty())
          accumulate_error_gradient(pred, s.label, others, w.alpha3 / c.poisoned, g);
      }
      grads += backward_from_output(params, s.input, g, false).params;
    }

    const auto loss = model_loss(preds, batch, plan, w);
    if (!std::isfinite(loss.total)) {
      std::ostringstream msg;
      msg << "model loss is not finite at epoch " << epoch << ", batch " << batch_no;
      fail(ErrorKind::Training, msg.str());
    }
    sums.clean += loss.clean * c.clean;
    sums.poisoned_target += loss.poisoned_target * c.poisoned;
    sums.poisoned_other += loss.poisoned_other * c.poisoned;
    n_clean += c.clean;
    n_poisoned += c.poisoned;

    sgd_step(params, grads, opt);
  }

  ModelLoss out;
  if (n_clean > 0.0) out.clean = sums.clean / n_clean;
  if (n_poisoned > 0.0) {
    out.poisoned_target = sums.poisoned_target / n_poisoned;
    out.poisoned_other = sums.poisoned_other / n_poisoned;
  }
  out.total = w.alpha1 * out.clean + w.alpha2 * out.poisoned_target + w.alpha3 * out.poisoned_other;
  return out;
}

TriggerMatrix trigger_phase(const Forecaster& params, const SeriesMatrix& m,
                            const WindowSpec& spec, const std::vector<WindowIndex>& poisoned,
                            const PoisonPlan& plan, const LossWeights& w, Index steps, double lr) {
  if (poisoned.empty()) fail(ErrorKind::Config, "trigger phase needs at least one poisoned window");
  PoisonPlan work = plan;
  Matrix grad;
  for (Index step = 0; step < steps; ++step) {
    trigger_objective(params, m, spec, poisoned, work, w, &grad);
    if (!grad.allFinite()) {
      std::ostringstream msg;
      msg << "trigger gradient is not finite at step " << step;
      fail(ErrorKind::Training, msg.str());
    }
    work.trigger.segments -= lr * grad;
  }
  return work.trigger;
}

TrainResult train_backdoored(const SeriesMatrix& m, const WindowSpec& spec,
                             const std::vector<WindowIndex>& train, const PoisonPlan& plan,
                             const LossWeights& w, const TrainSchedule& sched) {
  w.validate();
  sched.validate();
  PoisonPlan work = plan;
  std::vector<WindowIndex> poisoned_windows;
  for (const auto& win : train)
    if (work.is_poisoned(win.t)) poisoned_windows.push_back(win);

  TrainResult result;
  result.params = init_forecaster(spec.t_in, spec.t_out, m.cols(), sched.seed);
  OptState opt = OptState::adam(sched.model_lr);
  for (Index epoch = 1; epoch <= sched.epochs; ++epoch) {
    HistoryRow row;
    row.epoch = epoch;
    row.model = model_phase(result.params, m, spec, train, work, w, opt, sched.batch_size, epoch);
    if (!poisoned_windows.empty() && epoch % sched.trigger_period == 0)
      work.trigger = trigger_phase(result.params, m, spec, poisoned_windows, work, w,
                                   sched.trigger_steps, sched.trigger_lr);
    if (work.trigger.total_length() > 0) {
      const auto reg = trigger_regularizers(work.trigger, work, w.epsilon);
      row.smooth = reg.smooth;
      row.range = reg.range;
    }
    result.history.push_back(row);
  }
  result.trigger = work.trigger;
  return result;
}

void write_history_csv(const std::vector<HistoryRow>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << "epoch,L_c,L_p_Vt,L_p_nVt,L_smooth,L_range\n" << std::setprecision(17);
  for (const auto& r : history)
    out << r.epoch << ',' << r.model.clean << ',' << r.model.poisoned_target << ','
        << r.model.poisoned_other << ',' << r.smooth << ',' << r.range << '\n';
}

}  // namespace badtime
