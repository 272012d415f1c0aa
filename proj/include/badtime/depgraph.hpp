#pragma once

#include "badtime/dataset.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace badtime {

/// Single-head, single-layer graph attention over variables.
struct GatParams {
  Matrix W;        // F_out x F_in node projection
  Vector a;        // 2*F_out attention vector: [source half; destination half]
  Vector readout;  // F_out, maps aggregated representation to a prediction

  Index f_in() const { return W.cols(); }
  Index f_out() const { return W.rows(); }
};

/// alpha(j, i) is the attention source j receives from destination i.
/// Every column sums to one.
struct AttentionGraph {
  Matrix alpha;
};

struct GatForward {
  Vector predictions;  // one per node
  AttentionGraph attention;
};

struct GatGradients {
  Matrix W;
  Vector a;
  Vector readout;
};

inline constexpr double kLeakySlope = 0.2;

GatParams init_gat(Index f_in, Index f_out, std::uint64_t seed, double sigma = 0.1);

/// features: N x F_in, one row per node.
GatForward gat_forward(const GatParams& params, const Matrix& features);

/// Mean squared error of node predictions against `targets` (length N).
double gat_loss(const GatParams& params, const Matrix& features, const Vector& targets);

/// Gradients of gat_loss, accumulated into `grads` with weight `scale`.
double gat_backward(const GatParams& params, const Matrix& features, const Vector& targets,
                    GatGradients& grads, double scale = 1.0);

struct GatTrainConfig {
  Index epochs = 30;
  double lr = 1e-2;
  Index f_out = 16;
  Index batch_size = 32;
  std::uint64_t seed = 1;
};

/// Called after every optimizer step with the batch-mean attention.
using GatStepObserver = std::function<void(Index step, const AttentionGraph&)>;

struct GatTrainResult {
  GatParams params;
  AttentionGraph attention;  // mean over the final epoch's batches
  std::vector<double> epoch_loss;
};

/// One-step-ahead regression: node j's features are the window input
/// column of variable j, its target the first label value.
GatTrainResult train_gat(const SeriesMatrix& m, const WindowSpec& spec,
                         const std::vector<WindowIndex>& windows, const GatTrainConfig& cfg,
                         const GatStepObserver& observer = {});

/// Influence(j) = sum over destinations i in `targets` of alpha(j, i).
Vector influence_scores(const AttentionGraph& g, const VariableSet& targets);

/// Top round(alpha_p * N) non-target variables by score, clamped to
/// [1, N - |targets|]; ties go to the smaller index.
VariableSet select_poisoned_variables(const Vector& scores, double alpha_p,
                                      const VariableSet& targets);

void write_attention_csv(const AttentionGraph& g, const std::vector<std::string>& names,
                         const std::string& path);

}  // namespace badtime
