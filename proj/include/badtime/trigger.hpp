#pragma once

#include "badtime/lagalign.hpp"
#include "badtime/simsearch.hpp"

#include <string>
#include <vector>

namespace badtime {

enum class PatternKind { Constant, Ramp, Sine, File };

struct PatternSpec {
  PatternKind kind = PatternKind::Constant;
  double level = 0.0;      // constant
  double from = 0.0;       // ramp start
  double to = 1.0;         // ramp end
  double amplitude = 1.0;  // sine
  double cycles = 1.0;     // sine periods over the pattern
  std::string path;        // file

  /// Parses "constant:L", "ramp:A:B", "sine:AMP:K" or "file:PATH".
  static PatternSpec parse(const std::string& text);
  std::string to_string() const;
};

/// Target output the backdoor should produce on the target variables.
struct TargetPattern {
  Matrix values;  // t_pin x |targets|
  std::string generator;

  Index length() const { return values.rows(); }
};

/// t_pin = round(mu * t_out), clamped to [1, t_out].
Index pattern_length(Index t_out, double mu);

TargetPattern make_pattern(const PatternSpec& spec, Index t_out, double mu, Index n_targets);

/// Puzzle trigger: column j is the segment injected into poisoned variable j.
struct TriggerMatrix {
  Matrix segments;  // seg_len x |poisoned|

  Index segment_length() const { return segments.rows(); }
  Index n_segments() const { return segments.cols(); }
  Index total_length() const { return segments.size(); }
};

struct PoisonPlan {
  VariableSet targets;
  VariableSet poisoned;
  LagTable lags;
  std::vector<Index> poison_anchors;  // sorted
  TargetPattern pattern;
  TriggerMatrix trigger;
  double lambda = 0.8;
  Index t_in = 96;
  Index trigger_anchor = 0;  // the label-nearest anchor the trigger was copied from
  Vector range_min;          // per poisoned variable, training rows only
  Vector range_max;

  /// Window-relative start row of segment j.
  Index segment_offset(std::size_t j) const;
  bool is_poisoned(Index anchor) const;
  void validate() const;
};

/// Trigger length rho * t_in floored to a multiple of the segment count.
Index trigger_length(Index t_in, double rho, Index n_segments);

/// Lag search range [seg_len, t_in] keeps every segment inside the input.
inline Index min_lag(Index trigger_length, Index n_segments) {
  return (trigger_length + n_segments - 1) / n_segments;
}

struct TriggerInit {
  TriggerMatrix trigger;
  Index anchor = 0;
};

/// Copies segment j from rows [t* - lag_j, t* - lag_j + seg_len) of
/// poisoned variable j, where t* is the candidate anchor whose label head is
/// closest to the pattern. Falls back through up to five nearest anchors.
TriggerInit init_trigger(const SeriesMatrix& m, const TargetPattern& pattern,
                         const VariableSet& targets, const VariableSet& poisoned,
                         const LagTable& lags, Index trigger_length,
                         const std::vector<WindowIndex>& candidates, const WindowSpec& spec);

/// Blends the trigger into a copy of a t_in x N window input.
Matrix inject_trigger(const Matrix& input, const PoisonPlan& plan);

/// Replaces rows [0, t_pin) of the target columns with the pattern.
Matrix poison_label(const Matrix& label, const TargetPattern& pattern, const VariableSet& targets);

void write_trigger_csv(const PoisonPlan& plan, const std::vector<std::string>& names,
                       const std::string& path);

/// Reads segments written by write_trigger_csv. The comment header must
/// name the same poisoned variables as `plan`.
TriggerMatrix read_trigger_csv(const std::string& path, const PoisonPlan& plan,
                               const std::vector<std::string>& names);

}  // namespace badtime
