#pragma once

#include <string>

#include "rbl/estimators.hpp"

namespace rbl {

/// One measurement class: a dissimilarity kind plus its noise model,
/// expanded into all target x anchor edges when the scenario is built.
struct EdgeClassConfig {
  Dissimilarity kind{Dissimilarity::Distance};
  AoaFrame frame;         // Aoa only
  int third_anchor{-1};   // Adoa only; -1 picks the next anchor cyclically
  NoiseModel noise;
};

/// Parsed experiment description: geometry, measurement classes, sweep axis
/// and Monte Carlo controls. Angles are degrees in the file, radians here.
struct ScenarioConfig {
  Conformation targets{3, 0};
  Conformation anchors{3, 0};
  EulerAngles angles;
  Vec3 translation{Vec3::Zero()};
  std::vector<EdgeClassConfig> edge_classes;
  double fraction{1.0};
  std::uint64_t subset_seed{1};
  std::string sweep_parameter;       // sigma|omega|kappa|m|alpha|beta
  std::vector<double> sweep_values;  // strictly increasing
  std::size_t trials{1000};
  std::uint64_t seed{1};
  GeometryTolerances tolerances;
  IntensityOptions intensity;
  std::vector<Estimator> estimators;  // empty = defaults by connectivity

  /// Throws ValidationError naming the violated invariant.
  void validate() const;

  /// Configured estimators, or the connectivity-based default: the MDS
  /// chains on complete graphs, NLS refinement otherwise.
  std::vector<Estimator> resolved_estimators() const;
};

/// Reads and validates a config file (JSON tree of key-value pairs and
/// numeric arrays). Throws ParseError (with file/position) or
/// ValidationError.
ScenarioConfig parse_config(const std::string& path);

/// Same, from an in-memory string; `origin` labels error messages.
ScenarioConfig parse_config_text(const std::string& text,
                                 const std::string& origin);

/// The built-in demo configuration: unit-cube body, +-10 m anchor cube,
/// translation [-3, 0.5, 7], angles [10, 20, 45] degrees, Normal distance
/// edges swept over sigma.
ScenarioConfig default_config();

/// Expands the config into a concrete scenario. When `sweep_value` is set,
/// the sweep parameter of every matching noise model is overridden first.
Scenario build_scenario(const ScenarioConfig& config,
                        std::optional<double> sweep_value = {});

}  // namespace rbl
