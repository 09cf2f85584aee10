#pragma once

#include <cstdint>
#include <vector>

#include "rbl/dissimilarity.hpp"
#include "rbl/intensity.hpp"

namespace rbl {

/// One measurement between target landmark `target` and anchor `anchor`.
/// For Adoa edges the spec's third_anchor indexes the anchor set.
struct MeasurementEdge {
  int target{0};
  int anchor{0};
  DissimilaritySpec spec;
  NoiseModel noise;
};

/// A localization scene: the body shape, the true pose, the anchor
/// positions (world frame), and the measurement graph.
struct Scenario {
  Conformation targets{3, 0};  // body conformation C1
  Conformation anchors{3, 0};  // anchor positions
  Pose pose;
  std::vector<MeasurementEdge> edges;
  GeometryTolerances tolerances;
  IntensityOptions intensity_options;

  int num_targets() const { return static_cast<int>(targets.cols()); }
  int num_anchors() const { return static_cast<int>(anchors.cols()); }

  Conformation target_positions() const { return apply_pose(pose, targets); }
  Vec3 target_position(int n) const {
    return pose.rotation.matrix() * targets.col(n) + pose.translation;
  }

  /// Resolved third-node position for Adoa edges, empty otherwise.
  std::optional<Vec3> third_node(const MeasurementEdge& edge) const;

  /// True (noise-free) dissimilarity of an edge at the scenario pose.
  double edge_g(const MeasurementEdge& edge) const;

  /// Throws ValidationError on out-of-range indices or empty conformations.
  void validate() const;
};

/// All target x anchor edges of one measurement class, in (target-major)
/// index order. For Adoa, `adoa_third` >= 0 pins the third anchor; -1 picks
/// the next anchor cyclically (requires at least two anchors).
std::vector<MeasurementEdge> complete_edges(int n_targets, int n_anchors,
                                            const DissimilaritySpec& spec,
                                            const NoiseModel& noise,
                                            int adoa_third = -1);

/// Seeded uniform subsample without replacement keeping
/// round(fraction * n) edges; the survivors keep their original order.
std::vector<MeasurementEdge> subset_edges(
    const std::vector<MeasurementEdge>& edges, double fraction,
    std::uint64_t seed);

}  // namespace rbl
