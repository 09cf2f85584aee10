#include "rbl/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "rbl/parallel.hpp"

namespace rbl {

std::optional<Vec3> Scenario::third_node(const MeasurementEdge& edge) const {
  if (edge.spec.kind != Dissimilarity::Adoa) return {};
  if (!edge.spec.third_anchor) {
    throw Error(ErrorCode::ValidationError,
                "Adoa edge is missing its third anchor");
  }
  return anchors.col(*edge.spec.third_anchor);
}

double Scenario::edge_g(const MeasurementEdge& edge) const {
  return eval_g(edge.spec, target_position(edge.target),
                anchors.col(edge.anchor), third_node(edge), tolerances);
}

void Scenario::validate() const {
  if (targets.cols() < 1) {
    throw Error(ErrorCode::ValidationError, "targets: conformation is empty");
  }
  if (anchors.cols() < 1) {
    throw Error(ErrorCode::ValidationError, "anchors: conformation is empty");
  }
  if (!targets.allFinite() || !anchors.allFinite()) {
    throw Error(ErrorCode::ValidationError,
                "conformation entries must be finite");
  }
  for (const auto& edge : edges) {
    if (edge.target < 0 || edge.target >= num_targets()) {
      throw Error(ErrorCode::ValidationError, "edge target index out of range");
    }
    if (edge.anchor < 0 || edge.anchor >= num_anchors()) {
      throw Error(ErrorCode::ValidationError, "edge anchor index out of range");
    }
    if (edge.spec.kind == Dissimilarity::Adoa) {
      if (!edge.spec.third_anchor || *edge.spec.third_anchor < 0 ||
          *edge.spec.third_anchor >= num_anchors()) {
        throw Error(ErrorCode::ValidationError,
                    "Adoa third-anchor index out of range");
      }
      if (*edge.spec.third_anchor == edge.anchor) {
        throw Error(ErrorCode::ValidationError,
                    "Adoa third anchor must differ from the edge anchor");
      }
    }
    edge.noise.validate();
  }
}

std::vector<MeasurementEdge> complete_edges(int n_targets, int n_anchors,
                                            const DissimilaritySpec& spec,
                                            const NoiseModel& noise,
                                            int adoa_third) {
  if (spec.kind == Dissimilarity::Adoa && n_anchors < 2) {
    throw Error(ErrorCode::ValidationError,
                "Adoa edges need at least two anchors");
  }
  std::vector<MeasurementEdge> edges;
  edges.reserve(static_cast<std::size_t>(n_targets) * n_anchors);
  for (int n = 0; n < n_targets; ++n) {
    for (int a = 0; a < n_anchors; ++a) {
      MeasurementEdge edge{n, a, spec, noise};
      if (spec.kind == Dissimilarity::Adoa) {
        edge.spec.third_anchor =
            adoa_third >= 0 && adoa_third != a ? adoa_third
                                               : (a + 1) % n_anchors;
      }
      edges.push_back(edge);
    }
  }
  return edges;
}

std::vector<MeasurementEdge> subset_edges(
    const std::vector<MeasurementEdge>& edges, double fraction,
    std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw Error(ErrorCode::ValidationError,
                "connectivity fraction must lie in (0, 1]");
  }
  const std::size_t n = edges.size();
  const auto keep = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(n)));
  if (keep >= n) return edges;

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  // Portable Fisher-Yates so the subset depends only on (seed, fraction, n).
  std::uint64_t state = seed;
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = splitmix64(state) % (i + 1);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());

  std::vector<MeasurementEdge> out;
  out.reserve(keep);
  for (std::size_t i : idx) out.push_back(edges[i]);
  return out;
}

}  // namespace rbl
