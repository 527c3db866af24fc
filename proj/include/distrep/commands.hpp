#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "distrep/config.hpp"
#include "distrep/crossval.hpp"
#include "distrep/errors.hpp"
#include "distrep/ingest.hpp"

namespace distrep {

namespace detail {

class StageTimer {
 public:
  explicit StageTimer(std::string name)
      : name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start_)
                             .count();
    std::fprintf(stderr, "[%s] done in %.2fs\n", name_.c_str(), elapsed);
  }

 private:
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

inline std::filesystem::path out_path(const RunConfig& cfg, const std::string& file) {
  std::filesystem::create_directories(cfg.out);
  return std::filesystem::path(cfg.out) / file;
}

// half-point EDSS consistent with the designed binary group
inline double synthetic_edss(int group, double continuous, double group_effect) {
  const double residual = continuous - group_effect * group;
  double raw = group ? 5.5 + residual : 2.0 + residual;
  raw = group ? std::clamp(raw, 4.0, 10.0) : std::clamp(raw, 0.0, 3.5);
  return std::round(raw * 2.0) / 2.0;
}

}  // namespace detail

// Cohort from input files when configured, otherwise an in-memory draw of the
// synthetic design (deterministic by seed).
inline std::vector<SubjectSample> load_cohort(const RunConfig& cfg) {
  if (cfg.input) {
    const auto epochs = load_epochs(cfg.input->epochs, cfg.input->window);
    const auto outcomes = load_outcomes(cfg.input->outcomes);
    return join_outcomes(epochs, outcomes, cfg.input->min_epochs);
  }
  if (cfg.synthetic) return simulate_cohort(resolve_design(*cfg.synthetic), cfg.seed);
  throw config_error("no input files and no synthetic design configured");
}

inline void cmd_simulate(const RunConfig& cfg) {
  detail::StageTimer timer("simulate");
  if (!cfg.synthetic) throw config_error("simulate needs a 'synthetic' section");
  const CohortDesign design = resolve_design(*cfg.synthetic);
  const auto cohort = simulate_cohort(design, cfg.seed);

  write_epochs_csv(detail::out_path(cfg, "epochs.csv").string(), cohort);
  std::vector<std::pair<std::string, double>> rows;
  rows.reserve(cohort.size());
  for (const auto& s : cohort)
    rows.emplace_back(s.subject_id,
                      detail::synthetic_edss(*s.outcome_binary, *s.outcome_continuous,
                                             design.outcome.group_effect));
  write_outcomes_csv(detail::out_path(cfg, "outcomes.csv").string(), rows);
  std::fprintf(stderr, "[simulate] %zu subjects, %zu epochs each\n", cohort.size(),
               design.epochs_per_subject);
}

inline void cmd_represent(const RunConfig& cfg) {
  detail::StageTimer timer("represent");
  const auto cohort = load_cohort(cfg);
  for (DataTransform t : cfg.transforms) {
    const auto data = apply_transform(cohort, t);
    for (RepresentationKind kind : cfg.representations) {
      const auto curves = represent_cohort(data, cfg.grid, kind, cfg.hazard);
      std::vector<std::string> ids;
      for (const auto& s : data) ids.push_back(s.subject_id);
      const std::string base = std::string(kind_name(kind)) + "_" + transform_name(t);
      write_curves_csv(detail::out_path(cfg, "curves_" + base + ".csv").string(), ids, curves);

      // per-group pointwise means
      std::map<int, std::pair<std::vector<double>, std::size_t>> acc;
      for (std::size_t i = 0; i < data.size(); ++i) {
        const int g = data[i].outcome_binary.value_or(0);
        auto& slot = acc[g];
        if (slot.first.empty()) slot.first.assign(curves[i].values.size(), 0.0);
        for (std::size_t j = 0; j < curves[i].values.size(); ++j)
          slot.first[j] += curves[i].values[j];
        slot.second += 1;
      }
      std::vector<std::string> group_ids;
      std::vector<Curve> barycenters;
      for (auto& [g, slot] : acc) {
        Curve mean = curves.front();
        for (std::size_t j = 0; j < slot.first.size(); ++j)
          mean.values[j] = slot.first[j] / static_cast<double>(slot.second);
        group_ids.push_back("group" + std::to_string(g));
        barycenters.push_back(std::move(mean));
      }
      write_curves_csv(detail::out_path(cfg, "barycenter_" + base + ".csv").string(), group_ids,
                       barycenters);
    }
  }
}

inline void cmd_fit(const RunConfig& cfg) {
  detail::StageTimer timer("fit");
  const auto cohort = load_cohort(cfg);
  const ModelConfig model = make_model_config(cfg);
  for (OutcomeType outcome : cfg.outcomes) {
    for (DataTransform t : cfg.transforms) {
      for (RepresentationKind kind : cfg.representations) {
        const FittedRepresentation fr = fit_representation(cohort, kind, outcome, model, t);
        if (fr.fit.separated)
          throw numeric_error(std::string("complete separation fitting ") + kind_name(kind));
        const std::string base = std::string(kind_name(kind)) + "_" + transform_name(t) + "_" +
                                 outcome_name(outcome);

        nlohmann::ordered_json report;
        report["representation"] = kind_name(kind);
        report["transform"] = transform_name(t);
        report["outcome"] = outcome_name(outcome);
        report["link"] = link_name(fr.fit.link);
        report["lambda"] = fr.fit.smoothing;
        report["gcv"] = fr.fit.gcv;
        report["aic"] = fr.fit.aic;
        report["edf"] = fr.fit.edf;
        report["deviance"] = fr.fit.deviance;
        report["dispersion"] = fr.fit.dispersion;
        report["converged"] = fr.fit.converged;
        report["iterations"] = fr.fit.iterations;
        report["intercept"] = fr.fit.intercept;
        report["coefficients"] = std::vector<double>(fr.fit.coef.data(),
                                                     fr.fit.coef.data() + fr.fit.coef.size());
        nlohmann::ordered_json path = nlohmann::ordered_json::array();
        for (const auto& ls : fr.path)
          path.push_back({{"lambda", ls.lambda},
                          {"gcv", ls.gcv},
                          {"aic", ls.aic},
                          {"edf", ls.edf},
                          {"converged", ls.converged}});
        report["gcv_path"] = path;
        std::ofstream json_out(detail::out_path(cfg, "fit_" + base + ".json"));
        json_out << report.dump(2) << "\n";

        if (kind != RepresentationKind::ScalarMean) {
          const std::vector<double> zgrid = [&] {
            std::vector<double> z(201);
            for (int i = 0; i <= 200; ++i) z[i] = static_cast<double>(i) / 200.0;
            return z;
          }();
          const CoefCurve cc = coef_curve(fr.fit, cfg.basis, zgrid);
          std::ofstream csv(detail::out_path(cfg, "coef_" + base + ".csv"));
          csv << "z,estimate,lower95,upper95\n";
          for (std::size_t g = 0; g < cc.grid.size(); ++g)
            csv << detail::format_double(cc.grid[g]) << ',' << detail::format_double(cc.estimate[g]) << ','
                << detail::format_double(cc.lower95[g]) << ',' << detail::format_double(cc.upper95[g]) << '\n';
        }
      }
    }
  }
}

// Summary CSV over (kind, transform, outcome) cells; failed cells are
// preserved as NA rows and reported.
inline int cmd_crossval(const RunConfig& cfg) {
  detail::StageTimer timer("crossval");
  const auto cohort = load_cohort(cfg);
  ModelConfig model = make_model_config(cfg);
  CvSpec cv = cfg.cv;
  cv.seed = cfg.seed;

  std::ofstream csv(detail::out_path(cfg, "cv_report.csv"));
  csv << "representation,transform,outcome,metric,mean,lo95,hi95\n";
  int failures = 0;
  for (OutcomeType outcome : cfg.outcomes) {
    const char* metric = outcome == OutcomeType::Binary ? "cvAUC" : "cvR2";
    for (DataTransform t : cfg.transforms) {
      const auto data = apply_transform(cohort, t);
      for (RepresentationKind kind : cfg.representations) {
        csv << kind_name(kind) << ',' << transform_name(t) << ',' << outcome_name(outcome) << ','
            << metric << ',';
        try {
          const CvReport report = crossvalidate(data, kind, outcome, cv, model, t);
          csv << detail::format_double(report.metric_mean) << ',' << detail::format_double(report.lo95) << ','
              << detail::format_double(report.hi95) << '\n';
        } catch (const std::exception& e) {
          ++failures;
          csv << "NA,NA,NA\n";
          std::fprintf(stderr, "[crossval] cell %s/%s/%s failed: %s\n", kind_name(kind),
                       transform_name(t), outcome_name(outcome), e.what());
        }
      }
    }
  }
  return failures;
}

inline void cmd_biomarkers(const RunConfig& cfg) {
  detail::StageTimer timer("biomarkers");
  const auto cohort = load_cohort(cfg);
  const ModelConfig model = make_model_config(cfg);
  for (OutcomeType outcome : cfg.outcomes) {
    for (DataTransform t : cfg.transforms) {
      std::vector<FittedRepresentation> fits;
      for (RepresentationKind kind : cfg.representations)
        fits.push_back(fit_representation(cohort, kind, outcome, model, t));
      const BiomarkerTable table = biomarkers(cohort, fits, model);
      const std::string base = std::string(outcome_name(outcome)) + "_" + transform_name(t);

      std::ofstream csv(detail::out_path(cfg, "biomarkers_" + base + ".csv"));
      csv << "subject_id";
      for (RepresentationKind kind : table.kinds) csv << ",dbm_" << kind_name(kind);
      csv << '\n';
      for (Eigen::Index i = 0; i < table.scores.rows(); ++i) {
        csv << table.subject_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < table.scores.cols(); ++c)
          csv << ',' << detail::format_double(table.scores(i, c));
        csv << '\n';
      }

      const Eigen::MatrixXd rho = spearman_matrix(table);
      std::ofstream sp(detail::out_path(cfg, "spearman_" + base + ".csv"));
      sp << "representation";
      for (RepresentationKind kind : table.kinds) sp << ',' << kind_name(kind);
      sp << '\n';
      for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        sp << kind_name(table.kinds[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < rho.cols(); ++j)
          sp << ',' << (std::isnan(rho(i, j)) ? std::string("NA") : detail::format_double(rho(i, j)));
        sp << '\n';
      }
    }
  }
}

}  // namespace distrep
