#include "badtime/depgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace badtime {

namespace {

struct GatCache {
  Matrix P;      // N x F_out, row j = W h_j
  Matrix u;      // pre-activation logits, u(j, i) = s_j + d_i
  Matrix alpha;  // N x N, column-softmax of LeakyReLU(u)
  Matrix Z;      // N x F_out aggregated representations
  Vector pred;
};

GatCache forward_cached(const GatParams& p, const Matrix& features) {
  if (features.cols() != p.f_in()) {
    std::ostringstream msg;
    msg << "GAT features have " << features.cols() << " columns, expected " << p.f_in();
    fail(ErrorKind::Shape, msg.str());
  }
  if (!features.allFinite()) fail(ErrorKind::Input, "non-finite GAT node feature");

  const Index n = features.rows();
  const Index f = p.f_out();
  GatCache c;
  c.P = features * p.W.transpose();
  const Vector s = c.P * p.a.head(f);
  const Vector d = c.P * p.a.tail(f);
  c.u = s.replicate(1, n) + d.transpose().replicate(n, 1);
  const Matrix e = c.u.unaryExpr([](double x) { return x > 0.0 ? x : kLeakySlope * x; });

  c.alpha.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    const double mx = e.col(i).maxCoeff();
    c.alpha.col(i) = (e.col(i).array() - mx).exp();
    c.alpha.col(i) /= c.alpha.col(i).sum();
  }
  c.Z = c.alpha.transpose() * c.P;
  c.pred = c.Z * p.readout;
  return c;
}

}  // namespace

GatParams init_gat(Index f_in, Index f_out, std::uint64_t seed, double sigma) {
  if (f_in < 1 || f_out < 1) fail(ErrorKind::Config, "GAT dimensions must be >= 1");
  std::mt19937_64 rng(seed);
  GatParams p;
  p.W = gaussian_matrix(f_out, f_in, sigma, rng);
  p.a = gaussian_matrix(2 * f_out, 1, sigma, rng);
  p.readout = gaussian_matrix(f_out, 1, sigma, rng);
  return p;
}

GatForward gat_forward(const GatParams& params, const Matrix& features) {
  auto c = forward_cached(params, features);
  return {std::move(c.pred), AttentionGraph{std::move(c.alpha)}};
}

double gat_loss(const GatParams& params, const Matrix& features, const Vector& targets) {
  const auto c = forward_cached(params, features);
  return (c.pred - targets).squaredNorm() / static_cast<double>(targets.size());
}

double gat_backward(const GatParams& params, const Matrix& features, const Vector& targets,
                    GatGradients& grads, double scale) {
  const auto c = forward_cached(params, features);
  const Index n = features.rows();
  const Index f = params.f_out();
  if (targets.size() != n) fail(ErrorKind::Shape, "GAT target length differs from node count");

  const Vector resid = c.pred - targets;
  const double loss = resid.squaredNorm() / static_cast<double>(n);
  const Vector dpred = (2.0 * scale / static_cast<double>(n)) * resid;

  if (grads.W.size() == 0) {
    grads.W = Matrix::Zero(params.W.rows(), params.W.cols());
    grads.a = Vector::Zero(params.a.size());
    grads.readout = Vector::Zero(params.readout.size());
  }

  grads.readout.noalias() += c.Z.transpose() * dpred;
  const Matrix dZ = dpred * params.readout.transpose();
  Matrix dP = c.alpha * dZ;
  const Matrix dalpha = c.P * dZ.transpose();

  Matrix du(n, n);
  for (Index i = 0; i < n; ++i) {
    const double inner = c.alpha.col(i).dot(dalpha.col(i));
    du.col(i) = c.alpha.col(i).array() * (dalpha.col(i).array() - inner);
  }
  du = du.cwiseProduct(c.u.unaryExpr([](double x) { return x > 0.0 ? 1.0 : kLeakySlope; }));

  const Vector ds = du.rowwise().sum();
  const Vector dd = du.colwise().sum().transpose();
  grads.a.head(f).noalias() += c.P.transpose() * ds;
  grads.a.tail(f).noalias() += c.P.transpose() * dd;
  dP.noalias() += ds * params.a.head(f).transpose();
  dP.noalias() += dd * params.a.tail(f).transpose();
  grads.W.noalias() += dP.transpose() * features;
  return loss;
}

GatTrainResult train_gat(const SeriesMatrix& m, const WindowSpec& spec,
                         const std::vector<WindowIndex>& windows, const GatTrainConfig& cfg,
                         const GatStepObserver& observer) {
  if (!m.is_normalized) fail(ErrorKind::State, "GAT training expects a normalized series");
  if (windows.empty()) fail(ErrorKind::Config, "GAT training needs at least one window");
  if (cfg.batch_size < 1 || cfg.epochs < 0 || !(cfg.lr > 0.0))
    fail(ErrorKind::Config, "invalid GAT training configuration");

  const Index n = m.cols();
  GatTrainResult result;
  result.params = init_gat(spec.t_in, cfg.f_out, cfg.seed);
  GatParams& p = result.params;

  auto features_of = [&](WindowIndex w) -> Matrix { return window_input(m, spec, w).transpose(); };
  auto targets_of = [&](WindowIndex w) -> Vector { return m.values.row(w.t).transpose(); };

  if (cfg.epochs == 0) {
    result.attention.alpha = Matrix::Zero(n, n);
    const std::size_t count = std::min<std::size_t>(windows.size(), static_cast<std::size_t>(cfg.batch_size));
    for (std::size_t k = 0; k < count; ++k)
      result.attention.alpha += gat_forward(p, features_of(windows[k])).attention.alpha;
    result.attention.alpha /= static_cast<double>(count);
    return result;
  }

  Index step = 0;
  const auto total = static_cast<Index>(windows.size());
  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    const bool last_epoch = epoch + 1 == cfg.epochs;
    Matrix attention_sum = Matrix::Zero(n, n);
    Index batches = 0;
    double loss_sum = 0.0;
    for (Index start = 0; start < total; start += cfg.batch_size) {
      const Index stop = std::min(total, start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      GatGradients g;
      Matrix batch_attention = Matrix::Zero(n, n);
      double batch_loss = 0.0;
      for (Index k = start; k < stop; ++k) {
        const auto w = windows[static_cast<std::size_t>(k)];
        const Matrix feats = features_of(w);
        batch_loss += scale * gat_backward(p, feats, targets_of(w), g, scale);
        if (last_epoch || observer)
          batch_attention += scale * gat_forward(p, feats).attention.alpha;
      }
      if (!std::isfinite(batch_loss)) {
        std::ostringstream msg;
        msg << "GAT loss diverged at epoch " << epoch << " step " << step
            << "; try a smaller learning rate";
        fail(ErrorKind::Training, msg.str());
      }
      if (last_epoch) attention_sum += batch_attention;
      loss_sum += batch_loss;
      ++batches;

      p.W -= cfg.lr * g.W;
      p.a -= cfg.lr * g.a;
      p.readout -= cfg.lr * g.readout;
      if (observer) observer(step, AttentionGraph{batch_attention});
      ++step;
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
    if (last_epoch) result.attention.alpha = attention_sum / static_cast<double>(batches);
  }
  return result;
}

Vector influence_scores(const AttentionGraph& g, const VariableSet& targets) {
  if (targets.empty()) fail(ErrorKind::Config, "influence needs at least one target variable");
  const Index n = g.alpha.rows();
  Vector scores = Vector::Zero(n);
  for (Index i : targets) {
    if (i < 0 || i >= n) fail(ErrorKind::Config, "target variable index out of range");
    scores += g.alpha.col(i);
  }
  return scores;
}

VariableSet select_poisoned_variables(const Vector& scores, double alpha_p,
                                      const VariableSet& targets) {
  const Index n = scores.size();
  if (!(alpha_p > 0.0 && alpha_p <= 1.0)) fail(ErrorKind::Config, "alpha_P must lie in (0, 1]");
  std::vector<Index> candidates;
  for (Index j = 0; j < n; ++j)
    if (std::find(targets.begin(), targets.end(), j) == targets.end()) candidates.push_back(j);
  if (candidates.empty())
    fail(ErrorKind::Infeasible, "every variable is a target; nothing left to poison");

  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](Index x, Index y) { return scores[x] > scores[y]; });
  Index k = static_cast<Index>(std::llround(alpha_p * static_cast<double>(n)));
  k = std::clamp<Index>(k, 1, static_cast<Index>(candidates.size()));
  return VariableSet(candidates.begin(), candidates.begin() + k);
}

void write_attention_csv(const AttentionGraph& g, const std::vector<std::string>& names,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << std::setprecision(17) << "source";
  for (const auto& name : names) out << ',' << name;
  out << '\n';
  for (Index j = 0; j < g.alpha.rows(); ++j) {
    out << names[static_cast<std::size_t>(j)];
    for (Index i = 0; i < g.alpha.cols(); ++i) out << ',' << g.alpha(j, i);
    out << '\n';
  }
}

}  // namespace badtime
