#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "distrep/errors.hpp"

namespace distrep {

// Average ranks (1-based); ties share the mean of their rank block.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && v[idx[j]] == v[idx[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j + 1);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = shared;
    i = j;
  }
  return ranks;
}

// Rank-based (Mann-Whitney) AUC; ties contribute one half.
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw data_error("auc: size mismatch");
  std::size_t n_pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw data_error("auc: labels must be 0/1");
    n_pos += static_cast<std::size_t>(l);
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw data_error("auc: degenerate fold (single class)");
  const auto ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 1) rank_sum += ranks[i];
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

// 1 - SSE/SST with SST centered at the held-out mean.
inline double r_squared(const std::vector<double>& pred, const std::vector<double>& y) {
  if (pred.size() != y.size()) throw data_error("r_squared: size mismatch");
  if (y.size() < 2) throw data_error("r_squared: need at least 2 observations");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sse += (y[i] - pred[i]) * (y[i] - pred[i]);
    sst += (y[i] - mean) * (y[i] - mean);
  }
  if (sst <= 0.0) throw data_error("r_squared: outcome has zero variance");
  return 1.0 - sse / sst;
}

// Spearman correlation with average-rank ties; NaN for a constant input.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw data_error("spearman: size mismatch");
  if (x.size() < 3) throw data_error("spearman: need at least 3 observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (rx[i] - mean) * (ry[i] - mean);
    dx += (rx[i] - mean) * (rx[i] - mean);
    dy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (dx <= 0.0 || dy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return num / std::sqrt(dx * dy);
}

// Pairwise Spearman matrix; constant columns leave NaN off-diagonal entries.
inline Eigen::MatrixXd spearman_matrix(const std::vector<std::vector<double>>& columns) {
  const std::size_t k = columns.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k),
                                                  static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double r = spearman(columns[i], columns[j]);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r;
      out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = r;
    }
  return out;
}

}  // namespace distrep
