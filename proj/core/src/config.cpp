#include "rbl/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rbl {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::ValidationError, what);
}

Conformation parse_conformation(const json& node, const std::string& name) {
  if (!node.is_array() || node.size() != 3) {
    invalid(name + ": expected 3 coordinate rows");
  }
  const std::size_t cols = node[0].is_array() ? node[0].size() : 0;
  if (cols < 1) invalid(name + ": conformation is empty");
  Conformation c(3, cols);
  for (int i = 0; i < 3; ++i) {
    if (!node[i].is_array() || node[i].size() != cols) {
      invalid(name + ": rows must have equal length");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      c(i, j) = node[i][j].get<double>();
    }
  }
  if (!c.allFinite()) invalid(name + ": entries must be finite");
  return c;
}

Vec3 parse_vec3(const json& node, const std::string& name) {
  if (!node.is_array() || node.size() != 3) {
    invalid(name + ": expected 3 numbers");
  }
  return Vec3(node[0].get<double>(), node[1].get<double>(),
              node[2].get<double>());
}

NoiseModel parse_noise(const json& node) {
  if (!node.is_object() || !node.contains("model")) {
    invalid("edge noise: missing model");
  }
  const std::string model = node["model"].get<std::string>();
  if (model == "normal") {
    return NoiseModel::normal(node.at("sigma").get<double>());
  }
  if (model == "normal_pathloss") {
    return NoiseModel::normal_pathloss(node.at("alpha").get<double>(),
                                       node.at("beta").get<double>());
  }
  if (model == "vonmises") {
    return NoiseModel::von_mises(node.at("omega").get<double>());
  }
  if (model == "nakagami") {
    return NoiseModel::nakagami(node.at("m").get<double>());
  }
  if (model == "gamma") {
    return NoiseModel::gamma_dist(node.at("kappa").get<double>());
  }
  invalid("edge noise: unknown model '" + model + "'");
}

Dissimilarity parse_kind(const std::string& kind) {
  if (kind == "distance") return Dissimilarity::Distance;
  if (kind == "squared_distance") return Dissimilarity::SquaredDistance;
  if (kind == "aoa") return Dissimilarity::Aoa;
  if (kind == "adoa") return Dissimilarity::Adoa;
  invalid("edge kind: unknown dissimilarity '" + kind + "'");
}

Estimator parse_estimator(const std::string& name) {
  if (name == "mds_procrustes") return Estimator::MdsProcrustes;
  if (name == "mds_ls") return Estimator::MdsUnconstrainedLs;
  if (name == "nls") return Estimator::NlsRefine;
  invalid("estimators: unknown estimator '" + name + "'");
}

NakagamiIntensityMode parse_nakagami_mode(const std::string& name) {
  if (name == "closed_form_a") return NakagamiIntensityMode::ClosedFormA;
  if (name == "closed_form_b") return NakagamiIntensityMode::ClosedFormB;
  if (name == "calibrated") return NakagamiIntensityMode::Calibrated;
  if (name == "strict") return NakagamiIntensityMode::Strict;
  invalid("intensity.nakagami: unknown mode '" + name + "'");
}

GammaIntensityMode parse_gamma_mode(const std::string& name) {
  if (name == "closed_form") return GammaIntensityMode::ClosedForm;
  if (name == "mean_coupled") return GammaIntensityMode::MeanCoupled;
  invalid("intensity.gamma: unknown mode '" + name + "'");
}

VonMisesIntensityMode parse_von_mises_mode(const std::string& name) {
  if (name == "closed_form") return VonMisesIntensityMode::ClosedForm;
  if (name == "exact") return VonMisesIntensityMode::Exact;
  invalid("intensity.vonmises: unknown mode '" + name + "'");
}

ScenarioConfig from_json(const json& root) {
  ScenarioConfig config;
  if (!root.contains("targets")) invalid("targets: missing");
  if (!root.contains("anchors")) invalid("anchors: missing");
  config.targets = parse_conformation(root["targets"], "targets");
  config.anchors = parse_conformation(root["anchors"], "anchors");

  if (root.contains("angles_deg")) {
    const Vec3 deg = parse_vec3(root["angles_deg"], "angles_deg");
    config.angles = EulerAngles::from_degrees(deg(0), deg(1), deg(2));
  }
  if (root.contains("translation")) {
    config.translation = parse_vec3(root["translation"], "translation");
  }

  if (!root.contains("edges") || !root["edges"].is_array() ||
      root["edges"].empty()) {
    invalid("edges: at least one measurement class is required");
  }
  for (const auto& node : root["edges"]) {
    EdgeClassConfig cls;
    cls.kind = parse_kind(node.at("kind").get<std::string>());
    cls.noise = parse_noise(node.at("noise"));
    if (cls.kind == Dissimilarity::Aoa && node.contains("frame")) {
      cls.frame.plane_normal =
          parse_vec3(node["frame"].at("a"), "frame.a").normalized();
      cls.frame.reference =
          parse_vec3(node["frame"].at("b"), "frame.b").normalized();
      cls.frame.validate();
    }
    if (cls.kind == Dissimilarity::Adoa && node.contains("third_anchor")) {
      const auto& third = node["third_anchor"];
      cls.third_anchor =
          third.is_string() ? -1 : third.get<int>();  // "next" or index
    }
    config.edge_classes.push_back(cls);
  }

  config.fraction = root.value("fraction", 1.0);
  config.subset_seed = root.value("subset_seed", std::uint64_t{1});
  if (root.contains("sweep")) {
    config.sweep_parameter = root["sweep"].at("parameter").get<std::string>();
    config.sweep_values =
        root["sweep"].at("values").get<std::vector<double>>();
  }
  config.trials = root.value("trials", std::size_t{1000});
  config.seed = root.value("seed", std::uint64_t{1});
  if (root.contains("tolerances")) {
    const auto& tols = root["tolerances"];
    config.tolerances.geometry =
        tols.value("geometry", config.tolerances.geometry);
    config.tolerances.angle = tols.value("angle", config.tolerances.angle);
  }
  if (root.contains("intensity")) {
    const auto& opts = root["intensity"];
    if (opts.contains("nakagami")) {
      config.intensity.nakagami =
          parse_nakagami_mode(opts["nakagami"].get<std::string>());
    }
    if (opts.contains("gamma")) {
      config.intensity.gamma =
          parse_gamma_mode(opts["gamma"].get<std::string>());
    }
    if (opts.contains("vonmises")) {
      config.intensity.von_mises =
          parse_von_mises_mode(opts["vonmises"].get<std::string>());
    }
  }
  if (root.contains("estimators")) {
    for (const auto& node : root["estimators"]) {
      config.estimators.push_back(parse_estimator(node.get<std::string>()));
    }
  }
  config.validate();
  return config;
}

// Does this noise model expose the given sweep parameter?
bool apply_sweep(NoiseModel& noise, const std::string& parameter,
                 double value) {
  if (parameter == "sigma" && noise.kind == NoiseKind::Normal) {
    noise.sigma = value;
    return true;
  }
  if (parameter == "omega" && noise.kind == NoiseKind::VonMises) {
    noise.omega = value;
    return true;
  }
  if (parameter == "kappa" && noise.kind == NoiseKind::Gamma) {
    noise.kappa = value;
    return true;
  }
  if (parameter == "m" && noise.kind == NoiseKind::Nakagami) {
    noise.m = value;
    return true;
  }
  if (noise.kind == NoiseKind::NormalPathloss) {
    if (parameter == "alpha") {
      noise.alpha = value;
      return true;
    }
    if (parameter == "beta") {
      noise.beta = value;
      return true;
    }
  }
  return false;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (targets.cols() < 1) invalid("targets: conformation is empty");
  if (anchors.cols() < 1) invalid("anchors: conformation is empty");
  if (!targets.allFinite() || !anchors.allFinite()) {
    invalid("conformations: entries must be finite");
  }
  if (edge_classes.empty()) invalid("edges: empty");
  for (const auto& cls : edge_classes) cls.noise.validate();
  if (!(fraction > 0.0) || fraction > 1.0) {
    invalid("connectivity fraction: must lie in (0, 1]");
  }
  if (!sweep_parameter.empty()) {
    if (sweep_values.empty()) invalid("sweep grid: empty");
    for (std::size_t i = 1; i < sweep_values.size(); ++i) {
      if (!(sweep_values[i] > sweep_values[i - 1])) {
        invalid("sweep grid: values must be strictly increasing");
      }
    }
    NoiseModel probe;
    bool any = false;
    for (const auto& cls : edge_classes) {
      probe = cls.noise;
      any = any || apply_sweep(probe, sweep_parameter, sweep_values.front());
    }
    if (!any) {
      invalid("sweep parameter: '" + sweep_parameter +
              "' does not match any edge noise model");
    }
  }
}

std::vector<Estimator> ScenarioConfig::resolved_estimators() const {
  if (!estimators.empty()) return estimators;
  if (fraction >= 1.0) {
    return {Estimator::MdsProcrustes, Estimator::MdsUnconstrainedLs};
  }
  return {Estimator::NlsRefine};
}

ScenarioConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, path + ": cannot open file");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

ScenarioConfig parse_config_text(const std::string& text,
                                 const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, origin + ": " + e.what());
  }
  try {
    return from_json(root);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, origin + ": " + e.what());
  }
}

ScenarioConfig default_config() {
  ScenarioConfig config;
  config.targets.resize(3, 8);
  config.targets << -0.5, 0.5, 0.5, -0.5, -0.5, 0.5, -0.5, 0.5,
                    -0.5, -0.5, 0.5, 0.5, -0.5, -0.5, 0.5, 0.5,
                    -0.5, -0.5, -0.5, -0.5, 0.5, 0.5, 0.5, 0.5;
  config.anchors = 20.0 * config.targets;  // +-10 m cube
  config.angles = EulerAngles::from_degrees(10.0, 20.0, 45.0);
  config.translation = Vec3(-3.0, 0.5, 7.0);
  EdgeClassConfig cls;
  cls.kind = Dissimilarity::Distance;
  cls.noise = NoiseModel::normal(0.1);
  config.edge_classes.push_back(cls);
  config.sweep_parameter = "sigma";
  config.sweep_values = {0.01,   0.016681, 0.027826, 0.046416, 0.077426,
                         0.12915, 0.21544, 0.35938,  0.59948,  1.0};
  config.trials = 1000;
  config.seed = 20250101;
  config.subset_seed = 7;
  return config;
}

Scenario build_scenario(const ScenarioConfig& config,
                        std::optional<double> sweep_value) {
  config.validate();
  Scenario scenario;
  scenario.targets = config.targets;
  scenario.anchors = config.anchors;
  scenario.pose.rotation = rotation_from_euler(config.angles);
  scenario.pose.translation = config.translation;
  scenario.tolerances = config.tolerances;
  scenario.intensity_options = config.intensity;

  const int n_t = static_cast<int>(config.targets.cols());
  const int n_a = static_cast<int>(config.anchors.cols());
  for (const auto& cls : config.edge_classes) {
    NoiseModel noise = cls.noise;
    if (sweep_value) {
      apply_sweep(noise, config.sweep_parameter, *sweep_value);
      noise.validate();
    }
    DissimilaritySpec spec;
    switch (cls.kind) {
      case Dissimilarity::Distance:
        spec = DissimilaritySpec::distance();
        break;
      case Dissimilarity::SquaredDistance:
        spec = DissimilaritySpec::squared_distance();
        break;
      case Dissimilarity::Aoa:
        spec = DissimilaritySpec::aoa(cls.frame);
        break;
      case Dissimilarity::Adoa:
        spec = DissimilaritySpec::adoa(cls.third_anchor);
        break;
    }
    const auto edges =
        complete_edges(n_t, n_a, spec, noise, cls.third_anchor);
    scenario.edges.insert(scenario.edges.end(), edges.begin(), edges.end());
  }
  scenario.edges =
      subset_edges(scenario.edges, config.fraction, config.subset_seed);
  scenario.validate();
  return scenario;
}

}  // namespace rbl
