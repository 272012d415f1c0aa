#pragma once

#include "badtime/dataset.hpp"

#include <string>
#include <vector>

namespace badtime {

/// Euclidean distance between each anchor's label head and a target pattern.
struct DistanceProfile {
  std::vector<Index> anchors;
  std::vector<double> distances;

  std::size_t size() const { return anchors.size(); }
};

struct SelectionConfig {
  double alpha_t = 0.05;  // poisoning ratio
  double gamma = 0.5;     // share of the budget taken from the most similar labels
  Index exclusion_radius = 0;
};

struct PoisonBudget {
  Index total = 0;
  Index similar = 0;
  Index different = 0;
};

PoisonBudget poison_budget(double alpha_t, double gamma, Index n_train);

/// Sliding dot products of `series` against `query` at every offset
/// 0..len(series)-len(query), via FFT cross-correlation.
Vector sliding_dot_products(const Eigen::Ref<const Vector>& series,
                            const Eigen::Ref<const Vector>& query);

/// MASS-style distance profile. Distances at each anchor cover rows
/// [t, t + pattern.rows()) of the target columns, aggregated into a single
/// Euclidean norm over all cells.
DistanceProfile distance_profile(const SeriesMatrix& m, const Matrix& pattern,
                                 const VariableSet& targets,
                                 const std::vector<WindowIndex>& anchors,
                                 const WindowSpec& spec);

/// Hybrid selection: the closest `similar` anchors then the farthest
/// `different` anchors, greedily enforcing a minimum anchor gap. The result
/// is sorted by anchor.
std::vector<Index> select_poisoned_timestamps(const DistanceProfile& profile,
                                              const SelectionConfig& cfg, Index n_train);

/// Anchors ordered by distance (ties to the smaller anchor).
std::vector<Index> anchors_by_distance(const DistanceProfile& profile);

Index nearest_window_anchor(const SeriesMatrix& m, const Matrix& pattern,
                            const VariableSet& targets,
                            const std::vector<WindowIndex>& anchors, const WindowSpec& spec);

void write_profile_csv(const DistanceProfile& profile, const std::string& path);

}  // namespace badtime
