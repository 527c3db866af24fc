#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "distrep/cohort.hpp"
#include "distrep/crossval.hpp"
#include "distrep/curve.hpp"
#include "distrep/errors.hpp"
#include "distrep/ingest.hpp"
#include "distrep/sofr.hpp"

namespace distrep {

struct InputConfig {
  std::string epochs;
  std::string outcomes;
  EpochWindow window;
  std::size_t min_epochs = 60;
};

struct SyntheticConfig {
  std::string preset = "custom";  // custom | null | table1-analog
  std::size_t n_per_group = 100;
  std::size_t epochs_per_subject = 720;
  ExpWeibullParams group0{20.0, 1.0, 1.0};
  ExpWeibullParams group1{20.0, 1.0, 1.0};
  OutcomeModel outcome;
};

struct RunConfig {
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;  // 0 -> hardware default
  std::string out = ".";
  std::optional<InputConfig> input;
  std::optional<SyntheticConfig> synthetic;
  std::vector<DataTransform> transforms = {DataTransform::Raw};
  std::vector<RepresentationKind> representations = all_representations();
  std::vector<OutcomeType> outcomes = {OutcomeType::Binary, OutcomeType::Continuous};
  GridSpec grid;
  BasisSpec basis;
  std::vector<double> lambda_grid = log_lambda_grid();
  CvSpec cv;
  bool pool_folds = true;
  SmoothCriterion criterion = SmoothCriterion::Gcv;
  HazardOptions hazard;
  std::optional<Link> link_override;
};

namespace detail {

using json = nlohmann::json;

inline void require_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (allowed.find(key) == allowed.end())
      throw config_error("unknown config key '" + key + "' in " + where);
}

template <class T>
T json_get(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "' has the wrong type");
  }
}

inline RepresentationKind parse_kind(const std::string& name) {
  if (name == "density") return RepresentationKind::Density;
  if (name == "survival") return RepresentationKind::Survival;
  if (name == "hazard") return RepresentationKind::Hazard;
  if (name == "quantile") return RepresentationKind::Quantile;
  if (name == "ttt") return RepresentationKind::TTT;
  if (name == "scalar_mean") return RepresentationKind::ScalarMean;
  throw config_error("unknown representation '" + name + "'");
}

inline ExpWeibullParams parse_group(const json& obj, const std::string& where) {
  require_keys(obj, {"scale", "shape", "power"}, where);
  ExpWeibullParams p;
  p.scale = json_get<double>(obj, "scale", 20.0);
  p.shape = json_get<double>(obj, "shape", 1.0);
  p.power = json_get<double>(obj, "power", 1.0);
  return p;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& root) {
  using detail::json_get;
  using detail::require_keys;
  RunConfig cfg;
  require_keys(root,
               {"seed", "threads", "out", "input", "synthetic", "transform", "representations",
                "outcomes", "grid", "basis", "lambda", "cv", "fit"},
               "top level");

  if (!root.contains("seed")) throw config_error("config requires a 'seed'");
  cfg.seed = json_get<std::uint64_t>(root, "seed", 0);
  cfg.seed_set = true;
  cfg.threads = json_get<int>(root, "threads", 0);
  cfg.out = json_get<std::string>(root, "out", ".");

  if (root.contains("input")) {
    const auto& in = root.at("input");
    require_keys(in, {"epochs", "outcomes", "window_start_minute", "window_end_minute", "min_epochs"},
                 "input");
    InputConfig ic;
    ic.epochs = json_get<std::string>(in, "epochs", "");
    ic.outcomes = json_get<std::string>(in, "outcomes", "");
    ic.window.start_minute = json_get<int>(in, "window_start_minute", 480);
    ic.window.end_minute = json_get<int>(in, "window_end_minute", 1200);
    ic.min_epochs = json_get<std::size_t>(in, "min_epochs", 60);
    if (ic.epochs.empty() || ic.outcomes.empty())
      throw config_error("input requires both 'epochs' and 'outcomes' paths");
    if (ic.window.start_minute < 0 || ic.window.end_minute > 1440 ||
        ic.window.start_minute >= ic.window.end_minute)
      throw config_error("input window must satisfy 0 <= start < end <= 1440");
    cfg.input = ic;
  }

  if (root.contains("synthetic")) {
    const auto& syn = root.at("synthetic");
    require_keys(syn, {"preset", "n_per_group", "epochs_per_subject", "group0", "group1", "outcome"},
                 "synthetic");
    SyntheticConfig sc;
    sc.preset = json_get<std::string>(syn, "preset", "custom");
    if (sc.preset != "custom" && sc.preset != "null" && sc.preset != "table1-analog")
      throw config_error("unknown synthetic preset '" + sc.preset + "'");
    const long long npg = json_get<long long>(syn, "n_per_group", 100);
    const long long eps = json_get<long long>(syn, "epochs_per_subject", 720);
    if (npg < 1 || npg > 10'000'000)
      throw config_error("synthetic n_per_group must lie in [1, 1e7]");
    if (eps < 2 || eps > 10'000'000)
      throw config_error("synthetic epochs_per_subject must lie in [2, 1e7]");
    sc.n_per_group = static_cast<std::size_t>(npg);
    sc.epochs_per_subject = static_cast<std::size_t>(eps);
    if (syn.contains("group0")) sc.group0 = detail::parse_group(syn.at("group0"), "synthetic.group0");
    if (syn.contains("group1")) sc.group1 = detail::parse_group(syn.at("group1"), "synthetic.group1");
    if (syn.contains("outcome")) {
      const auto& oc = syn.at("outcome");
      require_keys(oc, {"group_effect", "logmean_effect", "noise_sd"}, "synthetic.outcome");
      sc.outcome.group_effect = json_get<double>(oc, "group_effect", 2.0);
      sc.outcome.logmean_effect = json_get<double>(oc, "logmean_effect", 1.0);
      sc.outcome.noise_sd = json_get<double>(oc, "noise_sd", 0.5);
    }
    cfg.synthetic = sc;
  }

  const std::string transform = json_get<std::string>(root, "transform", "raw");
  if (transform == "raw")
    cfg.transforms = {DataTransform::Raw};
  else if (transform == "log1")
    cfg.transforms = {DataTransform::Log1};
  else if (transform == "both")
    cfg.transforms = {DataTransform::Raw, DataTransform::Log1};
  else
    throw config_error("transform must be raw, log1 or both");

  if (root.contains("representations")) {
    cfg.representations.clear();
    for (const auto& item : root.at("representations"))
      cfg.representations.push_back(detail::parse_kind(item.get<std::string>()));
    if (cfg.representations.empty())
      throw config_error("representations must name at least one representation");
  }

  if (root.contains("outcomes")) {
    cfg.outcomes.clear();
    for (const auto& item : root.at("outcomes")) {
      const std::string name = item.get<std::string>();
      if (name == "binary")
        cfg.outcomes.push_back(OutcomeType::Binary);
      else if (name == "continuous")
        cfg.outcomes.push_back(OutcomeType::Continuous);
      else
        throw config_error("unknown outcome '" + name + "'");
    }
    if (cfg.outcomes.empty()) throw config_error("outcomes must name at least one outcome");
  }

  if (root.contains("grid")) {
    const auto& g = root.at("grid");
    require_keys(g, {"sample_space_points", "sample_space_upper", "quantile_levels"}, "grid");
    cfg.grid.sample_space_points = json_get<int>(g, "sample_space_points", 100);
    cfg.grid.sample_space_upper = json_get<double>(g, "sample_space_upper", 0.99);
    cfg.grid.quantile_levels = json_get<int>(g, "quantile_levels", 100);
    validate(cfg.grid);
  }

  if (root.contains("basis")) {
    const auto& b = root.at("basis");
    require_keys(b, {"num_basis", "degree"}, "basis");
    cfg.basis.num_basis = json_get<int>(b, "num_basis", 10);
    cfg.basis.degree = json_get<int>(b, "degree", 3);
    validate(cfg.basis);
  }

  if (root.contains("lambda")) {
    const auto& l = root.at("lambda");
    require_keys(l, {"min", "max", "count"}, "lambda");
    cfg.lambda_grid = log_lambda_grid(json_get<double>(l, "min", 1e-6),
                                      json_get<double>(l, "max", 1e6),
                                      json_get<int>(l, "count", 50));
  }

  if (root.contains("cv")) {
    const auto& c = root.at("cv");
    require_keys(c, {"folds", "replications", "stratified", "pool_folds"}, "cv");
    cfg.cv.folds = json_get<int>(c, "folds", 5);
    cfg.cv.replications = json_get<int>(c, "replications", 100);
    cfg.cv.stratified = json_get<bool>(c, "stratified", true);
    cfg.pool_folds = json_get<bool>(c, "pool_folds", true);
    validate(cfg.cv);
  }
  cfg.cv.seed = cfg.seed;

  if (root.contains("fit")) {
    const auto& f = root.at("fit");
    require_keys(f, {"link", "criterion", "hazard_estimator", "hazard_floor"}, "fit");
    if (f.contains("link")) {
      const std::string link = f.at("link").get<std::string>();
      if (link == "identity")
        cfg.link_override = Link::Identity;
      else if (link == "logit")
        cfg.link_override = Link::Logit;
      else
        throw config_error("fit.link must be identity or logit");
    }
    const std::string crit = json_get<std::string>(f, "criterion", "gcv");
    if (crit == "gcv")
      cfg.criterion = SmoothCriterion::Gcv;
    else if (crit == "aic")
      cfg.criterion = SmoothCriterion::Aic;
    else
      throw config_error("fit.criterion must be gcv or aic");
    const std::string hz = json_get<std::string>(f, "hazard_estimator", "ratio");
    if (hz == "ratio")
      cfg.hazard.estimator = HazardEstimator::Ratio;
    else if (hz == "binned")
      cfg.hazard.estimator = HazardEstimator::BinnedIncrements;
    else
      throw config_error("fit.hazard_estimator must be ratio or binned");
    cfg.hazard.survival_floor = json_get<double>(f, "hazard_floor", 1e-3);
    if (!(cfg.hazard.survival_floor > 0.0))
      throw config_error("fit.hazard_floor must be positive");
  }

  // link overrides must stay consistent with the requested outcomes
  if (cfg.link_override) {
    for (OutcomeType o : cfg.outcomes) {
      if (*cfg.link_override == Link::Logit && o == OutcomeType::Continuous)
        throw config_error("fit.link logit is incompatible with the continuous outcome");
      if (*cfg.link_override == Link::Identity && o == OutcomeType::Binary)
        throw config_error("fit.link identity is incompatible with the binary outcome");
    }
  }

  if (!cfg.input && !cfg.synthetic)
    throw config_error("config needs an 'input' or 'synthetic' section");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  nlohmann::json root;
  try {
    in >> root;
  } catch (const std::exception& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  return parse_config(root);
}

inline ModelConfig make_model_config(const RunConfig& cfg) {
  ModelConfig model;
  model.grid = cfg.grid;
  model.basis = cfg.basis;
  model.lambda_grid = cfg.lambda_grid;
  model.criterion = cfg.criterion;
  model.hazard = cfg.hazard;
  model.pool_folds = cfg.pool_folds;
  model.threads = cfg.threads;
  return model;
}

// Resolves the synthetic design, including the mean-matched analog preset.
inline CohortDesign resolve_design(const SyntheticConfig& sc) {
  CohortDesign design;
  design.epochs_per_subject = sc.epochs_per_subject;
  design.outcome = sc.outcome;
  design.group0 = {sc.n_per_group, sc.group0};
  design.group1 = {sc.n_per_group, sc.group1};
  if (sc.preset == "null") {
    design.group0.params = hazard_shape_params(HazardShape::Constant);
    design.group1.params = hazard_shape_params(HazardShape::Constant);
  } else if (sc.preset == "table1-analog") {
    // group A decreasing-hazard, group B a unimodal-hazard member rescaled so
    // the analytic means agree
    design.group0.params = hazard_shape_params(HazardShape::Decreasing);
    const ExpWeibullParams unimodal = hazard_shape_params(HazardShape::Unimodal);
    const double target = ew_mean(design.group0.params);
    const double scale = solve_mean_matched_scale(target, unimodal.shape, unimodal.power);
    design.group1.params = {scale, unimodal.shape, unimodal.power};
  }
  return design;
}

}  // namespace distrep
