#pragma once

#include "badtime/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace badtime {

struct NormStats {
  double mean = 0.0;
  double std = 1.0;
};

/// A multivariate series: one row per timestamp, one column per variable.
struct SeriesMatrix {
  Matrix values;
  std::vector<std::string> variable_names;
  std::vector<NormStats> norm_stats;
  bool is_normalized = false;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }

  /// Column index for a variable name, or nullopt.
  std::optional<Index> find(const std::string& name) const;
};

struct WindowSpec {
  Index t_in = 96;
  Index t_out = 96;
  Index stride = 1;

  void validate() const;
};

/// A sliding-window sample. `t` is the anchor: the input span is
/// [t - t_in, t) and the label span is [t, t + t_out).
struct WindowIndex {
  Index t = 0;

  Index input_begin(const WindowSpec& spec) const { return t - spec.t_in; }
  Index label_end(const WindowSpec& spec) const { return t + spec.t_out; }

  friend bool operator==(const WindowIndex&, const WindowIndex&) = default;
};

struct WindowSplit {
  std::vector<WindowIndex> train;
  std::vector<WindowIndex> valid;
};

/// Reads a header-first CSV. A column named `date_column` (or "date" when
/// not given and present) is checked for monotonicity and dropped.
SeriesMatrix load_csv(const std::string& path,
                      const std::optional<std::string>& date_column = std::nullopt);

/// Same as load_csv but from an in-memory string; `source` labels errors.
SeriesMatrix parse_csv(const std::string& text,
                       const std::optional<std::string>& date_column = std::nullopt,
                       const std::string& source = "<memory>");

void write_csv(const SeriesMatrix& m, const std::string& path);

/// Z-scores each column with population statistics fitted on the first
/// `fit_rows` rows (all rows when omitted). Constant columns map to zero and
/// record std = 1.
SeriesMatrix zscore_normalize(const SeriesMatrix& m,
                              std::optional<Index> fit_rows = std::nullopt);

SeriesMatrix denormalize(const SeriesMatrix& m);

std::vector<WindowIndex> make_windows(const SeriesMatrix& m, const WindowSpec& spec);
std::vector<WindowIndex> make_windows(Index series_length, const WindowSpec& spec);

/// Chronological split. The first ceil(ratio * count) windows are train
/// candidates; any train window whose label span reaches into the rows
/// consumed by validation inputs is dropped.
WindowSplit train_valid_split(const std::vector<WindowIndex>& windows, double ratio,
                              const WindowSpec& spec);

/// One past the last row touched by any training window (its label end).
Index training_rows(const std::vector<WindowIndex>& train, const WindowSpec& spec);

inline auto window_input(const SeriesMatrix& m, const WindowSpec& spec, WindowIndex w) {
  return m.values.middleRows(w.input_begin(spec), spec.t_in);
}

inline auto window_label(const SeriesMatrix& m, const WindowSpec& spec, WindowIndex w) {
  return m.values.middleRows(w.t, spec.t_out);
}

/// Order-sensitive FNV-1a hash over the raw bytes of the values.
std::uint64_t checksum(const Matrix& values);

}  // namespace badtime
