#pragma once

#include "badtime/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace badtime {

/// Pearson correlation of two equal-length sequences. Zero when either
/// side has no variance.
template <typename DerivedX, typename DerivedY>
double pearson(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedY>& y) {
  if (x.size() != y.size()) fail(ErrorKind::Shape, "pearson: length mismatch");
  if (x.size() < 2) fail(ErrorKind::Length, "pearson: need at least two samples");
  const auto n = static_cast<double>(x.size());
  const double mx = x.derived().sum() / n;
  const double my = y.derived().sum() / n;
  const auto dx = x.derived().array() - mx;
  const auto dy = y.derived().array() - my;
  const double sxx = dx.square().sum();
  const double syy = dy.square().sum();
  if (!(sxx > 0.0) || !(syy > 0.0)) return 0.0;
  const double r = (dx * dy).sum() / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

struct LagResult {
  Index lag = 0;
  double score = 0.0;
  bool degenerate = false;  // every lag scored the same
};

/// Lag in [lag_min, lag_max] maximizing the summed correlation between
/// the first `rows` rows of `source` and the targets shifted by that lag.
LagResult optimal_lag(const SeriesMatrix& m, Index source, const VariableSet& targets,
                      Index lag_min, Index lag_max, Index rows);

/// Poisoned variable -> lag and achieved correlation.
struct LagTable {
  std::map<Index, Index> lags;
  std::map<Index, double> correlations;

  Index lag(Index variable) const;
};

LagTable build_lag_table(const SeriesMatrix& m, const VariableSet& poisoned,
                         const VariableSet& targets, Index lag_min, Index lag_max, Index rows);

struct Interval {
  Index begin = 0;
  Index end = 0;  // exclusive

  Index length() const { return end - begin; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Absolute rows a trigger segment occupies in a window whose input starts
/// at `window_start`: [window_start + t_in - lag, ... + segment_length).
Interval insertion_interval(Index window_start, Index t_in, Index lag, Index trigger_length,
                            Index n_segments);

void write_lag_csv(const LagTable& table, const std::vector<std::string>& names,
                   const std::string& path);

}  // namespace badtime
