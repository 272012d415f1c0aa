#include "badtime/simsearch.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace badtime {

PoisonBudget poison_budget(double alpha_t, double gamma, Index n_train) {
  if (!(alpha_t > 0.0 && alpha_t <= 1.0)) fail(ErrorKind::Config, "alpha_T must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail(ErrorKind::Config, "gamma must lie in [0, 1]");
  PoisonBudget b;
  b.total = static_cast<Index>(std::llround(alpha_t * static_cast<double>(n_train)));
  if (b.total < 1) {
    std::ostringstream msg;
    msg << "alpha_T * n_train = " << alpha_t * static_cast<double>(n_train)
        << " rounds to zero poisoned windows";
    fail(ErrorKind::Config, msg.str());
  }
  b.similar = static_cast<Index>(std::floor(gamma * static_cast<double>(b.total)));
  b.different = b.total - b.similar;
  return b;
}

Vector sliding_dot_products(const Eigen::Ref<const Vector>& series,
                            const Eigen::Ref<const Vector>& query) {
  const Index n = series.size();
  const Index len = query.size();
  if (len < 1 || len > n) fail(ErrorKind::Length, "query longer than series");

  Index fft_size = 1;
  while (fft_size < n + len) fft_size <<= 1;

  std::vector<double> a(static_cast<std::size_t>(fft_size), 0.0);
  std::vector<double> b(static_cast<std::size_t>(fft_size), 0.0);
  for (Index i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = series[i];
  for (Index k = 0; k < len; ++k) b[static_cast<std::size_t>(k)] = query[len - 1 - k];

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> fa, fb;
  fft.fwd(fa, a);
  fft.fwd(fb, b);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  std::vector<double> conv;
  fft.inv(conv, fa);

  // conv[i + len - 1] = sum_k series[i + k] * query[k]
  Vector out(n - len + 1);
  for (Index i = 0; i < out.size(); ++i) out[i] = conv[static_cast<std::size_t>(i + len - 1)];
  return out;
}

DistanceProfile distance_profile(const SeriesMatrix& m, const Matrix& pattern,
                                 const VariableSet& targets,
                                 const std::vector<WindowIndex>& anchors,
                                 const WindowSpec& spec) {
  if (targets.empty()) fail(ErrorKind::Config, "target variable set is empty");
  if (pattern.cols() != static_cast<Index>(targets.size())) {
    std::ostringstream msg;
    msg << "pattern has " << pattern.cols() << " columns for " << targets.size()
        << " target variables";
    fail(ErrorKind::Shape, msg.str());
  }
  const Index len = pattern.rows();
  if (len < 1 || len > spec.t_out) {
    std::ostringstream msg;
    msg << "pattern length " << len << " outside [1, t_out=" << spec.t_out << "]";
    fail(ErrorKind::Length, msg.str());
  }
  const Index T = m.rows();
  for (const auto& w : anchors)
    if (w.t < 0 || w.t + len > T) fail(ErrorKind::Length, "anchor label span leaves the series");

  // Squared distance at every offset, accumulated across target columns.
  Vector sq = Vector::Zero(T - len + 1);
  Vector energy = Vector::Zero(T - len + 1);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const Index v = targets[k];
    if (v < 0 || v >= m.cols()) fail(ErrorKind::Config, "target variable index out of range");
    const Vector x = m.values.col(v);
    const Vector p = pattern.col(static_cast<Index>(k));
    const Vector qt = sliding_dot_products(x, p);

    Vector prefix(T + 1);
    prefix[0] = 0.0;
    for (Index i = 0; i < T; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];
    const double pp = p.squaredNorm();
    for (Index i = 0; i < sq.size(); ++i) {
      sq[i] += (prefix[i + len] - prefix[i]) - 2.0 * qt[i] + pp;
      energy[i] += (prefix[i + len] - prefix[i]) + pp;
    }
  }
  // Exact matches cancel to rounding noise; snap them to zero so ties stay ties.
  for (Index i = 0; i < sq.size(); ++i)
    if (sq[i] <= 1e-10 * energy[i]) sq[i] = 0.0;

  DistanceProfile out;
  out.anchors.reserve(anchors.size());
  out.distances.reserve(anchors.size());
  for (const auto& w : anchors) {
    out.anchors.push_back(w.t);
    out.distances.push_back(std::sqrt(std::max(sq[w.t], 0.0)));
  }
  return out;
}

std::vector<Index> anchors_by_distance(const DistanceProfile& profile) {
  std::vector<std::size_t> order(profile.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (profile.distances[a] != profile.distances[b])
      return profile.distances[a] < profile.distances[b];
    return profile.anchors[a] < profile.anchors[b];
  });
  std::vector<Index> out;
  out.reserve(order.size());
  for (auto i : order) out.push_back(profile.anchors[i]);
  return out;
}

std::vector<Index> select_poisoned_timestamps(const DistanceProfile& profile,
                                              const SelectionConfig& cfg, Index n_train) {
  if (profile.size() == 0) fail(ErrorKind::Infeasible, "distance profile is empty");
  if (cfg.exclusion_radius < 0) fail(ErrorKind::Config, "exclusion radius must be >= 0");
  const auto budget = poison_budget(cfg.alpha_t, cfg.gamma, n_train);

  std::vector<std::size_t> ascending(profile.size());
  std::iota(ascending.begin(), ascending.end(), 0);
  std::sort(ascending.begin(), ascending.end(), [&](std::size_t a, std::size_t b) {
    if (profile.distances[a] != profile.distances[b])
      return profile.distances[a] < profile.distances[b];
    return profile.anchors[a] < profile.anchors[b];
  });
  std::vector<std::size_t> descending(ascending);
  std::stable_sort(descending.begin(), descending.end(), [&](std::size_t a, std::size_t b) {
    if (profile.distances[a] != profile.distances[b])
      return profile.distances[a] > profile.distances[b];
    return profile.anchors[a] < profile.anchors[b];
  });

  std::vector<Index> chosen;
  auto admissible = [&](Index anchor) {
    for (Index c : chosen) {
      const Index gap = anchor > c ? anchor - c : c - anchor;
      if (gap == 0 || gap < cfg.exclusion_radius) return false;
    }
    return true;
  };
  auto take = [&](const std::vector<std::size_t>& order, Index want) {
    Index got = 0;
    for (std::size_t i = 0; i < order.size() && got < want; ++i) {
      const Index a = profile.anchors[order[i]];
      if (admissible(a)) {
        chosen.push_back(a);
        ++got;
      }
    }
    return got;
  };

  const Index got_sim = take(ascending, budget.similar);
  const Index got_diff = take(descending, budget.different);
  if (got_sim + got_diff < budget.total) {
    std::ostringstream msg;
    msg << "only " << got_sim + got_diff << " of " << budget.total
        << " poisoned windows satisfy exclusion radius " << cfg.exclusion_radius;
    fail(ErrorKind::Infeasible, msg.str());
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

Index nearest_window_anchor(const SeriesMatrix& m, const Matrix& pattern,
                            const VariableSet& targets,
                            const std::vector<WindowIndex>& anchors, const WindowSpec& spec) {
  if (anchors.empty()) fail(ErrorKind::Infeasible, "no candidate anchors");
  const auto profile = distance_profile(m, pattern, targets, anchors, spec);
  return anchors_by_distance(profile).front();
}

void write_profile_csv(const DistanceProfile& profile, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << "anchor,distance\n" << std::setprecision(17);
  for (std::size_t i = 0; i < profile.size(); ++i)
    out << profile.anchors[i] << ',' << profile.distances[i] << '\n';
}

}  // namespace badtime
