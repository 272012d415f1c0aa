#include "badtime/lagalign.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace badtime {

LagResult optimal_lag(const SeriesMatrix& m, Index source, const VariableSet& targets,
                      Index lag_min, Index lag_max, Index rows) {
  if (targets.empty()) fail(ErrorKind::Config, "lag search needs target variables");
  if (lag_min < 1 || lag_max < lag_min) {
    std::ostringstream msg;
    msg << "invalid lag range [" << lag_min << ", " << lag_max << "]";
    fail(ErrorKind::Config, msg.str());
  }
  if (rows > m.rows()) fail(ErrorKind::Config, "lag search rows exceed series length");
  if (rows <= lag_max + 2) {
    std::ostringstream msg;
    msg << "lag search over " << rows << " rows needs more than " << lag_max + 2;
    fail(ErrorKind::InsufficientData, msg.str());
  }

  LagResult best;
  best.lag = lag_min;
  best.score = -std::numeric_limits<double>::infinity();
  double first = 0.0;
  bool all_equal = true;
  for (Index lag = lag_min; lag <= lag_max; ++lag) {
    const auto lead = m.values.col(source).head(rows - lag);
    double score = 0.0;
    for (Index v : targets) score += pearson(lead, m.values.col(v).segment(lag, rows - lag));
    if (lag == lag_min)
      first = score;
    else if (score != first)
      all_equal = false;
    if (score > best.score) {
      best.score = score;
      best.lag = lag;
    }
  }
  best.degenerate = all_equal;
  return best;
}

Index LagTable::lag(Index variable) const {
  auto it = lags.find(variable);
  if (it == lags.end()) fail(ErrorKind::Internal, "no lag recorded for poisoned variable");
  return it->second;
}

LagTable build_lag_table(const SeriesMatrix& m, const VariableSet& poisoned,
                         const VariableSet& targets, Index lag_min, Index lag_max, Index rows) {
  LagTable table;
  for (Index v : poisoned) {
    const auto r = optimal_lag(m, v, targets, lag_min, lag_max, rows);
    table.lags[v] = r.lag;
    table.correlations[v] = r.score;
  }
  return table;
}

Interval insertion_interval(Index window_start, Index t_in, Index lag, Index trigger_length,
                            Index n_segments) {
  if (n_segments < 1 || trigger_length % n_segments != 0)
    fail(ErrorKind::Config, "trigger length must divide evenly across poisoned variables");
  const Index seg = trigger_length / n_segments;
  Interval iv{window_start + t_in - lag, window_start + t_in - lag + seg};
  if (iv.begin < window_start || iv.end > window_start + t_in) {
    std::ostringstream msg;
    msg << "trigger segment [" << iv.begin << ", " << iv.end << ") escapes input span ["
        << window_start << ", " << window_start + t_in << ") for lag " << lag;
    fail(ErrorKind::Internal, msg.str());
  }
  return iv;
}

void write_lag_csv(const LagTable& table, const std::vector<std::string>& names,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << "variable,lag,score\n" << std::setprecision(17);
  for (const auto& [v, lag] : table.lags)
    out << names[static_cast<std::size_t>(v)] << ',' << lag << ',' << table.correlations.at(v)
        << '\n';
}

}  // namespace badtime
