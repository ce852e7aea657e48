#pragma once

// Diagonal-covariance Gaussian mixtures: the emission densities of every
// model layer, plus the seeded k-means used to initialize them.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "emorec/util.hpp"

namespace emorec {

class GaussianMixture {
 public:
  GaussianMixture() = default;

  GaussianMixture(std::vector<double> weights, std::vector<std::vector<double>> means,
                  std::vector<std::vector<double>> variances)
      : weights_(std::move(weights)), means_(std::move(means)), vars_(std::move(variances)) {
    if (weights_.empty() || weights_.size() != means_.size() || means_.size() != vars_.size())
      throw std::invalid_argument("GaussianMixture: inconsistent component counts");
    const std::size_t dim = means_.front().size();
    double sum = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      if (means_[k].size() != dim || vars_[k].size() != dim)
        throw std::invalid_argument("GaussianMixture: inconsistent dimensions");
      if (weights_[k] < 0.0) throw std::invalid_argument("GaussianMixture: negative weight");
      for (double v : vars_[k])
        if (!(v > 0.0)) throw std::invalid_argument("GaussianMixture: non-positive variance");
      sum += weights_[k];
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw std::invalid_argument("GaussianMixture: weights must sum to 1");
    rebuild_cache();
  }

  int num_components() const { return static_cast<int>(weights_.size()); }
  int dim() const { return means_.empty() ? 0 : static_cast<int>(means_.front().size()); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& mean(int k) const { return means_[static_cast<std::size_t>(k)]; }
  const std::vector<double>& variance(int k) const { return vars_[static_cast<std::size_t>(k)]; }

  // log N(x; mean_k, diag var_k) + log weight_k
  double component_log_pdf(int k, const std::vector<double>& x) const {
    const auto& mu = means_[static_cast<std::size_t>(k)];
    const auto& var = vars_[static_cast<std::size_t>(k)];
    double quad = 0.0;
    for (std::size_t d = 0; d < mu.size(); ++d) {
      const double diff = x[d] - mu[d];
      quad += diff * diff / var[d];
    }
    return log_weights_[static_cast<std::size_t>(k)] + log_norm_[static_cast<std::size_t>(k)] -
           0.5 * quad;
  }

  // log sum_k weight_k N(x; mean_k, var_k), via log-sum-exp
  double log_pdf(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dim())
      throw std::invalid_argument("GaussianMixture::log_pdf: dimension mismatch");
    double acc = kNegInf;
    for (int k = 0; k < num_components(); ++k) acc = log_sum_exp(acc, component_log_pdf(k, x));
    return acc;
  }

 private:
  void rebuild_cache() {
    log_weights_.resize(weights_.size());
    log_norm_.resize(weights_.size());
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      log_weights_[k] = weights_[k] > 0.0 ? std::log(weights_[k]) : kNegInf;
      double log_det = 0.0;
      for (double v : vars_[k]) log_det += std::log(v);
      log_norm_[k] = -0.5 * (static_cast<double>(vars_[k].size()) * std::log(2.0 * kPi) + log_det);
    }
  }

  std::vector<double> weights_;
  std::vector<std::vector<double>> means_;
  std::vector<std::vector<double>> vars_;
  std::vector<double> log_weights_;
  std::vector<double> log_norm_;
};

struct KmeansResult {
  std::vector<std::vector<double>> centers;
  std::vector<int> assignment;
};

namespace detail {

inline double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) acc += (a[d] - b[d]) * (a[d] - b[d]);
  return acc;
}

}  // namespace detail

// Seeded k-means with k-means++ initialization. Ties and empty clusters
// are resolved by index order so results are reproducible.
inline KmeansResult kmeans(const std::vector<std::vector<double>>& points, int k, Rng& rng,
                           int max_iters = 20) {
  const std::size_t n = points.size();
  if (k < 1 || n == 0 || static_cast<std::size_t>(k) > n)
    throw std::invalid_argument("kmeans: need 1 <= k <= n");
  KmeansResult res;
  res.centers.reserve(static_cast<std::size_t>(k));
  res.centers.push_back(points[rng.index(n)]);
  std::vector<double> dist2(n);
  while (static_cast<int>(res.centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = detail::sq_distance(points[i], res.centers.front());
      for (std::size_t c = 1; c < res.centers.size(); ++c)
        best = std::min(best, detail::sq_distance(points[i], res.centers[c]));
      dist2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += dist2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.index(n);
    }
    res.centers.push_back(points[pick]);
  }

  res.assignment.assign(n, 0);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best_c = 0;
      double best_d = detail::sq_distance(points[i], res.centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d = detail::sq_distance(points[i], res.centers[static_cast<std::size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best_c = c;
        }
      }
      if (res.assignment[i] != best_c) {
        res.assignment[i] = best_c;
        changed = true;
      }
    }
    std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                          std::vector<double>(points.front().size(), 0.0));
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[static_cast<std::size_t>(res.assignment[i])];
      for (std::size_t d = 0; d < points[i].size(); ++d)
        sums[static_cast<std::size_t>(res.assignment[i])][d] += points[i][d];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) {
        // repopulate from the point farthest from its own center
        std::size_t far_i = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = detail::sq_distance(
              points[i], res.centers[static_cast<std::size_t>(res.assignment[i])]);
          if (d > far_d) {
            far_d = d;
            far_i = i;
          }
        }
        res.centers[static_cast<std::size_t>(c)] = points[far_i];
        res.assignment[far_i] = c;
        changed = true;
      } else {
        for (std::size_t d = 0; d < sums[static_cast<std::size_t>(c)].size(); ++d)
          res.centers[static_cast<std::size_t>(c)][d] =
              sums[static_cast<std::size_t>(c)][d] / counts[static_cast<std::size_t>(c)];
      }
    }
    if (!changed) break;
  }
  return res;
}

}  // namespace emorec
