#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "distrep/bspline.hpp"
#include "distrep/cohort.hpp"
#include "distrep/curve.hpp"
#include "distrep/errors.hpp"
#include "distrep/estimators.hpp"
#include "distrep/metrics.hpp"
#include "distrep/rng.hpp"
#include "distrep/sofr.hpp"
#include "distrep/threading.hpp"

namespace distrep {

enum class OutcomeType { Binary, Continuous };

inline const char* outcome_name(OutcomeType o) {
  return o == OutcomeType::Binary ? "binary" : "continuous";
}

struct CvSpec {
  int folds = 5;
  int replications = 100;
  std::uint64_t seed = 0;
  bool stratified = true;  // binary outcomes only
};

inline void validate(const CvSpec& s) {
  if (s.folds < 2) throw config_error("cv spec: folds must be >= 2");
  if (s.replications < 1) throw config_error("cv spec: replications must be >= 1");
}

struct CvReport {
  RepresentationKind kind = RepresentationKind::ScalarMean;
  DataTransform transform = DataTransform::Raw;
  OutcomeType outcome = OutcomeType::Binary;
  double metric_mean = 0.0;
  double lo95 = 0.0;
  double hi95 = 0.0;
  std::vector<double> per_replication;
};

// Everything the per-fold model fitting needs.
struct ModelConfig {
  GridSpec grid;
  BasisSpec basis;
  std::vector<double> lambda_grid = log_lambda_grid();
  SmoothCriterion criterion = SmoothCriterion::Gcv;
  HazardOptions hazard;
  bool pool_folds = true;  // pooled held-out metric vs mean of per-fold metrics
  int threads = 1;
};

namespace detail {

inline Eigen::VectorXd outcome_vector(const std::vector<SubjectSample>& samples,
                                      OutcomeType outcome) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (outcome == OutcomeType::Binary) {
      if (!samples[i].outcome_binary)
        throw data_error("subject " + samples[i].subject_id + ": missing binary outcome");
      y(static_cast<Eigen::Index>(i)) = *samples[i].outcome_binary;
    } else {
      if (!samples[i].outcome_continuous)
        throw data_error("subject " + samples[i].subject_id + ": missing continuous outcome");
      y(static_cast<Eigen::Index>(i)) = *samples[i].outcome_continuous;
    }
  }
  return y;
}

// fold id per subject; stratified assignment deals each class round-robin
inline std::vector<int> make_folds(std::size_t n, int folds, const std::vector<int>* labels,
                                   KeyedRng& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[rng.next_below(i)]);
  std::vector<int> fold(n, 0);
  if (labels == nullptr) {
    for (std::size_t pos = 0; pos < n; ++pos)
      fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    return fold;
  }
  int counter[2] = {0, 0};
  for (std::size_t pos = 0; pos < n; ++pos) {
    const int cls = (*labels)[order[pos]];
    fold[order[pos]] = counter[cls] % folds;
    ++counter[cls];
  }
  return fold;
}

inline bool training_degenerate(const std::vector<int>& fold, const std::vector<int>& labels,
                                int folds) {
  for (int f = 0; f < folds; ++f) {
    int pos = 0, neg = 0;
    for (std::size_t i = 0; i < fold.size(); ++i)
      if (fold[i] != f) (labels[i] ? pos : neg) += 1;
    if (pos == 0 || neg == 0) return true;
  }
  return false;
}

}  // namespace detail

// Design matrices for one fold: grids and curves come from the training
// subjects only; held-out curves are evaluated on the training grid.
struct FoldDesign {
  std::vector<double> xgrid;
  std::vector<double> pgrid;
  Eigen::MatrixXd w_train;
  Eigen::MatrixXd w_test;
};

inline FoldDesign build_fold_design(const std::vector<SubjectSample>& samples,
                                    const std::vector<SortedSample>& sorted,
                                    const std::vector<std::size_t>& train_idx,
                                    const std::vector<std::size_t>& test_idx,
                                    RepresentationKind kind, const ModelConfig& model) {
  FoldDesign out;
  std::vector<SubjectSample> train_samples;
  train_samples.reserve(train_idx.size());
  for (std::size_t i : train_idx) train_samples.push_back(samples[i]);
  auto grids = pooled_grid(train_samples, model.grid);
  out.xgrid = std::move(grids.first);
  out.pgrid = std::move(grids.second);

  if (kind == RepresentationKind::ScalarMean) {
    out.w_train.resize(static_cast<Eigen::Index>(train_idx.size()), 1);
    out.w_test.resize(static_cast<Eigen::Index>(test_idx.size()), 1);
    for (std::size_t r = 0; r < train_idx.size(); ++r)
      out.w_train(static_cast<Eigen::Index>(r), 0) = sample_mean(sorted[train_idx[r]].v);
    for (std::size_t r = 0; r < test_idx.size(); ++r)
      out.w_test(static_cast<Eigen::Index>(r), 0) = sample_mean(sorted[test_idx[r]].v);
    return out;
  }

  std::vector<Curve> curves;
  curves.reserve(train_idx.size() + test_idx.size());
  for (std::size_t i : train_idx)
    curves.push_back(
        estimate_representation(sorted[i], kind, out.xgrid, out.pgrid, model.hazard));
  for (std::size_t i : test_idx)
    curves.push_back(
        estimate_representation(sorted[i], kind, out.xgrid, out.pgrid, model.hazard));
  const Eigen::MatrixXd w = functional_weights(curves, model.basis);
  out.w_train = w.topRows(static_cast<Eigen::Index>(train_idx.size()));
  out.w_test = w.bottomRows(static_cast<Eigen::Index>(test_idx.size()));
  return out;
}

// Replicated k-fold cross-validation for one representation. Replications run
// on a worker pool; every random draw is keyed by (seed, replication), so the
// result does not depend on the worker count.
inline CvReport crossvalidate(const std::vector<SubjectSample>& samples,
                              RepresentationKind kind, OutcomeType outcome,
                              const CvSpec& cv, const ModelConfig& model,
                              DataTransform transform_tag = DataTransform::Raw) {
  validate(cv);
  if (samples.size() < static_cast<std::size_t>(cv.folds))
    throw data_error("crossvalidate: fewer subjects than folds");
  for (const auto& s : samples) validate(s);

  const std::size_t n = samples.size();
  const Eigen::VectorXd y = detail::outcome_vector(samples, outcome);
  const Link link = outcome == OutcomeType::Binary ? Link::Logit : Link::Identity;

  std::vector<int> labels;
  if (outcome == OutcomeType::Binary) {
    labels.resize(n);
    int pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(y(static_cast<Eigen::Index>(i)));
      pos += labels[i];
    }
    if (pos == 0 || static_cast<std::size_t>(pos) == n)
      throw data_error("crossvalidate: cohort has a single class");
  }

  std::vector<SortedSample> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = SortedSample::from(samples[i].values);

  const Eigen::MatrixXd penalty =
      kind == RepresentationKind::ScalarMean ? Eigen::MatrixXd::Zero(1, 1)
                                             : build_penalty(model.basis);

  std::vector<double> per_rep(static_cast<std::size_t>(cv.replications));
  parallel_for(static_cast<std::size_t>(cv.replications), model.threads, [&](std::size_t rep) {
    KeyedRng rng(cv.seed, rep);
    const bool stratify = outcome == OutcomeType::Binary && cv.stratified;
    std::vector<int> fold;
    for (int attempt = 0;; ++attempt) {
      fold = detail::make_folds(n, cv.folds, stratify ? &labels : nullptr, rng);
      if (outcome != OutcomeType::Binary || !detail::training_degenerate(fold, labels, cv.folds))
        break;
      if (!stratify) throw data_error("crossvalidate: degenerate fold (single class)");
      if (attempt >= 100)
        throw data_error("crossvalidate: could not stratify away degenerate folds");
    }

    std::vector<double> pooled_scores(n, 0.0);
    std::vector<double> fold_metrics;
    for (int f = 0; f < cv.folds; ++f) {
      std::vector<std::size_t> train_idx, test_idx;
      for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? test_idx : train_idx).push_back(i);
      if (test_idx.empty()) continue;
      try {

      const FoldDesign design = build_fold_design(samples, sorted, train_idx, test_idx, kind, model);
      Eigen::VectorXd y_train(static_cast<Eigen::Index>(train_idx.size()));
      for (std::size_t r = 0; r < train_idx.size(); ++r)
        y_train(static_cast<Eigen::Index>(r)) = y(static_cast<Eigen::Index>(train_idx[r]));

      FunctionalFit fit;
      if (kind == RepresentationKind::ScalarMean) {
        fit = fit_penalized(design.w_train, y_train, link, 0.0, penalty);
        // a separated scalar logit still orders held-out subjects by mean
        if (!fit.converged && !fit.separated)
          throw numeric_error("crossvalidate: scalar baseline fit failed");
      } else {
        fit = select_smoothing(design.w_train, y_train, link, model.lambda_grid, penalty,
                               model.criterion)
                  .fit;
      }
      const Eigen::VectorXd eta = linear_predictor(fit, design.w_test);
      for (std::size_t r = 0; r < test_idx.size(); ++r)
        pooled_scores[test_idx[r]] = eta(static_cast<Eigen::Index>(r));

      if (!model.pool_folds) {
        std::vector<double> sc(test_idx.size());
        for (std::size_t r = 0; r < test_idx.size(); ++r)
          sc[r] = eta(static_cast<Eigen::Index>(r));
        if (outcome == OutcomeType::Binary) {
          std::vector<int> lab(test_idx.size());
          for (std::size_t r = 0; r < test_idx.size(); ++r) lab[r] = labels[test_idx[r]];
          fold_metrics.push_back(auc(sc, lab));
        } else {
          std::vector<double> yt(test_idx.size());
          for (std::size_t r = 0; r < test_idx.size(); ++r)
            yt[r] = y(static_cast<Eigen::Index>(test_idx[r]));
          fold_metrics.push_back(r_squared(sc, yt));
        }
      }

      } catch (const data_error& e) {
        throw data_error("replication " + std::to_string(rep) + " fold " + std::to_string(f) +
                         ": " + e.what());
      } catch (const numeric_error& e) {
        throw numeric_error("replication " + std::to_string(rep) + " fold " +
                            std::to_string(f) + ": " + e.what());
      }
    }

    double metric;
    if (!model.pool_folds) {
      metric = 0.0;
      for (double m : fold_metrics) metric += m;
      metric /= static_cast<double>(fold_metrics.size());
    } else if (outcome == OutcomeType::Binary) {
      metric = auc(pooled_scores, labels);
    } else {
      std::vector<double> yy(n);
      for (std::size_t i = 0; i < n; ++i) yy[i] = y(static_cast<Eigen::Index>(i));
      metric = r_squared(pooled_scores, yy);
    }
    per_rep[rep] = metric;
  });

  CvReport report;
  report.kind = kind;
  report.outcome = outcome;
  report.transform = transform_tag;
  report.per_replication = per_rep;
  double mean = 0.0;
  for (double m : per_rep) mean += m;
  report.metric_mean = mean / static_cast<double>(per_rep.size());
  std::vector<double> s = per_rep;
  std::sort(s.begin(), s.end());
  report.lo95 = interpolated_quantile(s, 0.025);
  report.hi95 = interpolated_quantile(s, 0.975);
  return report;
}

inline const std::vector<RepresentationKind>& all_representations() {
  static const std::vector<RepresentationKind> kinds = {
      RepresentationKind::ScalarMean, RepresentationKind::TTT, RepresentationKind::Quantile,
      RepresentationKind::Density,    RepresentationKind::Survival,
      RepresentationKind::Hazard};
  return kinds;
}

// One CvReport per (kind, transform) cell.
inline std::vector<CvReport> crossval_table(const std::vector<SubjectSample>& samples,
                                            const std::vector<RepresentationKind>& kinds,
                                            const std::vector<DataTransform>& transforms,
                                            OutcomeType outcome, const CvSpec& cv,
                                            const ModelConfig& model) {
  std::vector<CvReport> out;
  for (DataTransform t : transforms) {
    const std::vector<SubjectSample> data = apply_transform(samples, t);
    for (RepresentationKind k : kinds)
      out.push_back(crossvalidate(data, k, outcome, cv, model, t));
  }
  return out;
}

inline std::vector<CvReport> compare_representations(const std::vector<SubjectSample>& samples,
                                                     OutcomeType outcome, const CvSpec& cv,
                                                     const ModelConfig& model) {
  return crossval_table(samples, all_representations(),
                        {DataTransform::Raw, DataTransform::Log1}, outcome, cv, model);
}

// A model fitted on the full cohort for one representation; the grids pin the
// domain the coefficient curve lives on.
struct FittedRepresentation {
  RepresentationKind kind = RepresentationKind::ScalarMean;
  DataTransform transform = DataTransform::Raw;
  FunctionalFit fit;
  std::vector<double> xgrid;
  std::vector<double> pgrid;
  std::vector<LambdaScore> path;  // smoothing search, empty for the scalar baseline
};

inline FittedRepresentation fit_representation(const std::vector<SubjectSample>& samples,
                                               RepresentationKind kind, OutcomeType outcome,
                                               const ModelConfig& model,
                                               DataTransform transform = DataTransform::Raw) {
  const std::vector<SubjectSample> data = apply_transform(samples, transform);
  for (const auto& s : data) validate(s);
  const Eigen::VectorXd y = detail::outcome_vector(data, outcome);
  const Link link = outcome == OutcomeType::Binary ? Link::Logit : Link::Identity;
  std::vector<SortedSample> sorted(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) sorted[i] = SortedSample::from(data[i].values);
  std::vector<std::size_t> all_idx(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) all_idx[i] = i;

  FittedRepresentation out;
  out.kind = kind;
  out.transform = transform;
  const FoldDesign design = build_fold_design(data, sorted, all_idx, {}, kind, model);
  out.xgrid = design.xgrid;
  out.pgrid = design.pgrid;
  if (kind == RepresentationKind::ScalarMean) {
    out.fit = fit_penalized(design.w_train, y, link, 0.0, Eigen::MatrixXd::Zero(1, 1));
  } else {
    auto selection = select_smoothing(design.w_train, y, link, model.lambda_grid,
                                      build_penalty(model.basis), model.criterion);
    out.fit = std::move(selection.fit);
    out.path = std::move(selection.path);
  }
  return out;
}

// Per-subject biomarker scores: quadrature of the subject curve against the
// fitted coefficient curve (mean times slope for the scalar baseline).
struct BiomarkerTable {
  std::vector<std::string> subject_ids;
  std::vector<RepresentationKind> kinds;
  Eigen::MatrixXd scores;  // n x kinds
};

inline BiomarkerTable biomarkers(const std::vector<SubjectSample>& samples,
                                 const std::vector<FittedRepresentation>& fits,
                                 const ModelConfig& model) {
  if (fits.empty()) throw data_error("biomarkers: no fitted representations");
  BiomarkerTable table;
  table.scores.resize(static_cast<Eigen::Index>(samples.size()),
                      static_cast<Eigen::Index>(fits.size()));
  for (const auto& s : samples) table.subject_ids.push_back(s.subject_id);

  for (std::size_t c = 0; c < fits.size(); ++c) {
    const auto& fr = fits[c];
    table.kinds.push_back(fr.kind);
    const std::vector<SubjectSample> data = apply_transform(samples, fr.transform);
    if (fr.kind == RepresentationKind::ScalarMean) {
      for (std::size_t i = 0; i < data.size(); ++i)
        table.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
            sample_mean(data[i].values) * fr.fit.coef(0);
      continue;
    }
    const std::vector<double>& grid =
        domain_of(fr.kind) == CurveDomain::SampleSpace ? fr.xgrid : fr.pgrid;
    if (grid.size() < 2) throw data_error("biomarkers: fitted representation grid missing");
    std::vector<double> zgrid(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g)
      zgrid[g] = model.basis.a + (model.basis.b - model.basis.a) * (grid[g] - grid.front()) /
                                     (grid.back() - grid.front());
    const CoefCurve cc = coef_curve(fr.fit, model.basis, zgrid);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Curve curve = estimate_representation(SortedSample::from(data[i].values), fr.kind,
                                                  fr.xgrid, fr.pgrid, model.hazard);
      double acc = 0.0;
      for (std::size_t g = 0; g < zgrid.size(); ++g) {
        double w;
        if (g == 0)
          w = 0.5 * (zgrid[1] - zgrid[0]);
        else if (g + 1 == zgrid.size())
          w = 0.5 * (zgrid[g] - zgrid[g - 1]);
        else
          w = 0.5 * (zgrid[g + 1] - zgrid[g - 1]);
        acc += w * curve.values[g] * cc.estimate[g];
      }
      table.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = acc;
    }
  }
  return table;
}

inline Eigen::MatrixXd spearman_matrix(const BiomarkerTable& table) {
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(table.scores.cols()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    cols[c].resize(static_cast<std::size_t>(table.scores.rows()));
    for (Eigen::Index i = 0; i < table.scores.rows(); ++i)
      cols[c][static_cast<std::size_t>(i)] = table.scores(i, static_cast<Eigen::Index>(c));
  }
  return spearman_matrix(cols);
}

}  // namespace distrep
