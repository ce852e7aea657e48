#pragma once

// Left-to-right continuous-density HMMs with Gaussian-mixture emissions.
// State 0 is the fixed entry state; allowed transitions are self-loops and
// single forward steps. Scoring runs entirely in the log domain.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "emorec/gmm.hpp"
#include "emorec/observation.hpp"
#include "emorec/util.hpp"

namespace emorec {

struct Hmm {
  int num_states = 0;
  int feature_dim = 0;
  std::vector<double> log_trans;  // num_states^2 row-major, log domain
  std::vector<GaussianMixture> states;

  double log_a(int i, int j) const {
    return log_trans[static_cast<std::size_t>(i) * num_states + static_cast<std::size_t>(j)];
  }
  void set_log_a(int i, int j, double v) {
    log_trans[static_cast<std::size_t>(i) * num_states + static_cast<std::size_t>(j)] = v;
  }
  bool transition_allowed(int i, int j) const { return j == i || j == i + 1; }
};

namespace detail {

inline void check_scoring_input(const Hmm& hmm, const ObservationSequence& obs,
                                const char* who) {
  if (obs.empty()) throw std::invalid_argument(std::string(who) + ": empty observation sequence");
  if (obs.dim() != hmm.feature_dim)
    throw std::invalid_argument(std::string(who) + ": feature dimension mismatch");
}

// log emission matrix, T x N
inline std::vector<double> log_emissions(const Hmm& hmm, const ObservationSequence& obs) {
  const std::size_t big_t = obs.size();
  const std::size_t n = static_cast<std::size_t>(hmm.num_states);
  std::vector<double> log_b(big_t * n);
  for (std::size_t t = 0; t < big_t; ++t)
    for (std::size_t j = 0; j < n; ++j)
      log_b[t * n + j] = hmm.states[j].log_pdf(obs.vectors[t]);
  return log_b;
}

}  // namespace detail

// log P(O | model) by the log-domain forward recursion, summed over all
// reachable end states so short sequences still score finitely.
inline double forward_log_likelihood(const Hmm& hmm, const ObservationSequence& obs) {
  detail::check_scoring_input(hmm, obs, "forward_log_likelihood");
  const int n = hmm.num_states;
  const std::size_t big_t = obs.size();
  const std::vector<double> log_b = detail::log_emissions(hmm, obs);

  std::vector<double> cur(static_cast<std::size_t>(n), kNegInf);
  cur[0] = log_b[0];
  std::vector<double> nxt(static_cast<std::size_t>(n));
  for (std::size_t t = 1; t < big_t; ++t) {
    for (int j = 0; j < n; ++j) {
      double acc = kNegInf;
      for (int i = 0; i < n; ++i) {
        const double a = hmm.log_a(i, j);
        if (a == kNegInf || cur[static_cast<std::size_t>(i)] == kNegInf) continue;
        acc = log_sum_exp(acc, cur[static_cast<std::size_t>(i)] + a);
      }
      nxt[static_cast<std::size_t>(j)] =
          acc == kNegInf ? kNegInf : acc + log_b[t * static_cast<std::size_t>(n) + j];
    }
    cur.swap(nxt);
  }
  return log_sum_exp(cur);
}

struct ViterbiResult {
  std::vector<int> path;  // state index per frame, starts at 0, unit steps
  double log_score = kNegInf;
};

// Most likely state path; ties prefer the lower state index.
inline ViterbiResult viterbi(const Hmm& hmm, const ObservationSequence& obs) {
  detail::check_scoring_input(hmm, obs, "viterbi");
  const int n = hmm.num_states;
  const std::size_t big_t = obs.size();
  const std::vector<double> log_b = detail::log_emissions(hmm, obs);

  std::vector<double> score(big_t * static_cast<std::size_t>(n), kNegInf);
  std::vector<int> back(big_t * static_cast<std::size_t>(n), -1);
  score[0] = log_b[0];
  for (std::size_t t = 1; t < big_t; ++t) {
    for (int j = 0; j < n; ++j) {
      double best = kNegInf;
      int best_i = -1;
      for (int i = 0; i < n; ++i) {
        const double a = hmm.log_a(i, j);
        const double prev = score[(t - 1) * static_cast<std::size_t>(n) + i];
        if (a == kNegInf || prev == kNegInf) continue;
        const double cand = prev + a;
        if (cand > best) {
          best = cand;
          best_i = i;
        }
      }
      if (best_i >= 0) {
        score[t * static_cast<std::size_t>(n) + j] =
            best + log_b[t * static_cast<std::size_t>(n) + j];
        back[t * static_cast<std::size_t>(n) + j] = best_i;
      }
    }
  }

  ViterbiResult res;
  int end_state = 0;
  res.log_score = score[(big_t - 1) * static_cast<std::size_t>(n)];
  for (int j = 1; j < n; ++j) {
    const double s = score[(big_t - 1) * static_cast<std::size_t>(n) + j];
    if (s > res.log_score) {
      res.log_score = s;
      end_state = j;
    }
  }
  res.path.resize(big_t);
  res.path[big_t - 1] = end_state;
  for (std::size_t t = big_t - 1; t > 0; --t)
    res.path[t - 1] = back[t * static_cast<std::size_t>(n) + res.path[t]];
  return res;
}

struct TrainOptions {
  int num_states = 9;
  int num_mixtures = 10;
  int max_iters = 20;
  double rel_tol = 1e-4;
  std::uint64_t seed = 1;
  double var_floor_scale = 1e-3;  // fraction of global per-dimension variance
  double var_floor_abs = 1e-4;    // lower bound when a dimension is near-constant
};

struct TrainStats {
  // total log-likelihood measured at the start of each iteration
  std::vector<double> log_likelihood;
};

namespace detail {

// Uniform-segmentation + seeded k-means initialization.
inline Hmm init_model(const std::vector<ObservationSequence>& data, const TrainOptions& opt,
                      const std::vector<double>& var_floor) {
  const int n = opt.num_states;
  const int dim = data.front().dim();
  Hmm hmm;
  hmm.num_states = n;
  hmm.feature_dim = dim;
  hmm.log_trans.assign(static_cast<std::size_t>(n) * n, kNegInf);
  for (int i = 0; i < n; ++i) {
    if (i + 1 < n) {
      hmm.set_log_a(i, i, std::log(0.5));
      hmm.set_log_a(i, i + 1, std::log(0.5));
    } else {
      hmm.set_log_a(i, i, 0.0);
    }
  }

  std::vector<std::vector<std::vector<double>>> pools(static_cast<std::size_t>(n));
  for (const auto& seq : data) {
    const int big_t = static_cast<int>(seq.size());
    for (int s = 0; s < n; ++s) {
      const int lo = s * big_t / n;
      const int hi = (s + 1) * big_t / n;
      for (int t = lo; t < hi; ++t)
        pools[static_cast<std::size_t>(s)].push_back(seq.vectors[static_cast<std::size_t>(t)]);
    }
  }

  hmm.states.resize(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    auto& pool = pools[static_cast<std::size_t>(s)];
    const int k = std::min<int>(opt.num_mixtures, static_cast<int>(pool.size()));
    Rng rng(derive_seed(opt.seed, 0x1000 + static_cast<std::uint64_t>(s)));
    const KmeansResult km = kmeans(pool, k, rng);
    std::vector<double> weights(static_cast<std::size_t>(k), 0.0);
    std::vector<std::vector<double>> means(static_cast<std::size_t>(k),
                                           std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    std::vector<std::vector<double>> vars(static_cast<std::size_t>(k),
                                          std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const auto c = static_cast<std::size_t>(km.assignment[i]);
      ++counts[c];
      for (int d = 0; d < dim; ++d) means[c][static_cast<std::size_t>(d)] += pool[i][static_cast<std::size_t>(d)];
    }
    for (int c = 0; c < k; ++c)
      for (int d = 0; d < dim; ++d)
        means[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] /=
            std::max(1, counts[static_cast<std::size_t>(c)]);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const auto c = static_cast<std::size_t>(km.assignment[i]);
      for (int d = 0; d < dim; ++d) {
        const double diff = pool[i][static_cast<std::size_t>(d)] -
                            means[c][static_cast<std::size_t>(d)];
        vars[c][static_cast<std::size_t>(d)] += diff * diff;
      }
    }
    for (int c = 0; c < k; ++c) {
      weights[static_cast<std::size_t>(c)] =
          static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(pool.size());
      for (int d = 0; d < dim; ++d) {
        double v = vars[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] /
                   std::max(1, counts[static_cast<std::size_t>(c)]);
        vars[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] =
            std::max(v, var_floor[static_cast<std::size_t>(d)]);
      }
    }
    // guard against zero-weight clusters from k-means degeneracies
    double wsum = 0.0;
    for (auto& w : weights) {
      w = std::max(w, 1e-10);
      wsum += w;
    }
    for (auto& w : weights) w /= wsum;
    hmm.states[static_cast<std::size_t>(s)] =
        GaussianMixture(std::move(weights), std::move(means), std::move(vars));
  }
  return hmm;
}

struct Accumulators {
  // linear-domain sufficient statistics
  std::vector<double> trans_num;              // N x N
  std::vector<double> trans_den;              // N
  std::vector<std::vector<double>> occ;       // per state: per component
  std::vector<std::vector<std::vector<double>>> sum_x;   // state x comp x dim
  std::vector<std::vector<std::vector<double>>> sum_x2;  // state x comp x dim

  Accumulators(const Hmm& hmm) {
    const auto n = static_cast<std::size_t>(hmm.num_states);
    trans_num.assign(n * n, 0.0);
    trans_den.assign(n, 0.0);
    occ.resize(n);
    sum_x.resize(n);
    sum_x2.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
      const auto k = static_cast<std::size_t>(hmm.states[s].num_components());
      const auto d = static_cast<std::size_t>(hmm.feature_dim);
      occ[s].assign(k, 0.0);
      sum_x[s].assign(k, std::vector<double>(d, 0.0));
      sum_x2[s].assign(k, std::vector<double>(d, 0.0));
    }
  }
};

// One forward-backward pass; returns the utterance log-likelihood and
// adds its statistics to acc.
inline double accumulate_utterance(const Hmm& hmm, const ObservationSequence& obs,
                                   Accumulators& acc) {
  const int n = hmm.num_states;
  const std::size_t big_t = obs.size();
  const std::size_t ns = static_cast<std::size_t>(n);
  const std::vector<double> log_b = log_emissions(hmm, obs);

  std::vector<double> alpha(big_t * ns, kNegInf);
  alpha[0] = log_b[0];
  for (std::size_t t = 1; t < big_t; ++t) {
    for (int j = 0; j < n; ++j) {
      double s = kNegInf;
      for (int i = 0; i < n; ++i) {
        const double a = hmm.log_a(i, j);
        const double prev = alpha[(t - 1) * ns + static_cast<std::size_t>(i)];
        if (a == kNegInf || prev == kNegInf) continue;
        s = log_sum_exp(s, prev + a);
      }
      alpha[t * ns + static_cast<std::size_t>(j)] =
          s == kNegInf ? kNegInf : s + log_b[t * ns + static_cast<std::size_t>(j)];
    }
  }
  double ll = kNegInf;
  for (int j = 0; j < n; ++j) ll = log_sum_exp(ll, alpha[(big_t - 1) * ns + static_cast<std::size_t>(j)]);

  std::vector<double> beta(big_t * ns, 0.0);  // log beta_T(j) = 0: free end state
  for (std::size_t t = big_t - 1; t > 0; --t) {
    for (int i = 0; i < n; ++i) {
      double s = kNegInf;
      for (int j = 0; j < n; ++j) {
        const double a = hmm.log_a(i, j);
        if (a == kNegInf) continue;
        const double nxt = beta[t * ns + static_cast<std::size_t>(j)] +
                           log_b[t * ns + static_cast<std::size_t>(j)];
        if (nxt == kNegInf) continue;
        s = log_sum_exp(s, a + nxt);
      }
      beta[(t - 1) * ns + static_cast<std::size_t>(i)] = s;
    }
  }

  for (std::size_t t = 0; t < big_t; ++t) {
    for (int j = 0; j < n; ++j) {
      const double lg = alpha[t * ns + static_cast<std::size_t>(j)] +
                        beta[t * ns + static_cast<std::size_t>(j)] - ll;
      if (lg == kNegInf) continue;
      const double gamma = std::exp(lg);
      if (gamma <= 0.0) continue;
      if (t + 1 < big_t) acc.trans_den[static_cast<std::size_t>(j)] += gamma;
      // split state occupancy over mixture components
      const auto& mix = hmm.states[static_cast<std::size_t>(j)];
      const double log_mix = log_b[t * ns + static_cast<std::size_t>(j)];
      for (int k = 0; k < mix.num_components(); ++k) {
        const double lw = lg + mix.component_log_pdf(k, obs.vectors[t]) - log_mix;
        const double g = std::exp(lw);
        if (g <= 0.0) continue;
        acc.occ[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] += g;
        auto& sx = acc.sum_x[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
        auto& sx2 = acc.sum_x2[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
        const auto& x = obs.vectors[t];
        for (std::size_t d = 0; d < x.size(); ++d) {
          sx[d] += g * x[d];
          sx2[d] += g * x[d] * x[d];
        }
      }
    }
    if (t + 1 >= big_t) break;
    for (int i = 0; i < n; ++i) {
      const double a_t = alpha[t * ns + static_cast<std::size_t>(i)];
      if (a_t == kNegInf) continue;
      for (int j = 0; j < n; ++j) {
        const double a = hmm.log_a(i, j);
        if (a == kNegInf) continue;
        const double lxi = a_t + a + log_b[(t + 1) * ns + static_cast<std::size_t>(j)] +
                           beta[(t + 1) * ns + static_cast<std::size_t>(j)] - ll;
        const double xi = std::exp(lxi);
        if (xi > 0.0)
          acc.trans_num[static_cast<std::size_t>(i) * ns + static_cast<std::size_t>(j)] += xi;
      }
    }
  }
  return ll;
}

inline void maximize(Hmm& hmm, const Accumulators& acc, const std::vector<double>& var_floor) {
  const int n = hmm.num_states;
  const auto ns = static_cast<std::size_t>(n);
  for (int i = 0; i < n; ++i) {
    if (acc.trans_den[static_cast<std::size_t>(i)] <= 0.0) continue;  // state never left
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j)
      if (hmm.transition_allowed(i, j))
        row_sum += acc.trans_num[static_cast<std::size_t>(i) * ns + static_cast<std::size_t>(j)];
    if (row_sum <= 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (!hmm.transition_allowed(i, j)) continue;
      const double p =
          acc.trans_num[static_cast<std::size_t>(i) * ns + static_cast<std::size_t>(j)] / row_sum;
      hmm.set_log_a(i, j, p > 0.0 ? std::log(p) : kNegInf);
    }
  }

  for (int s = 0; s < n; ++s) {
    const auto& occ = acc.occ[static_cast<std::size_t>(s)];
    double occ_total = 0.0;
    for (double o : occ) occ_total += o;
    if (occ_total <= 1e-10) continue;  // unoccupied state keeps its mixture
    const auto& old = hmm.states[static_cast<std::size_t>(s)];
    const int k = old.num_components();
    const int dim = hmm.feature_dim;
    std::vector<double> weights(static_cast<std::size_t>(k));
    std::vector<std::vector<double>> means(static_cast<std::size_t>(k));
    std::vector<std::vector<double>> vars(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
      const double o = occ[static_cast<std::size_t>(c)];
      weights[static_cast<std::size_t>(c)] = std::max(o / occ_total, 1e-10);
      if (o > 1e-8) {
        means[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(dim));
        vars[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d) {
          const double mu = acc.sum_x[static_cast<std::size_t>(s)][static_cast<std::size_t>(c)]
                                     [static_cast<std::size_t>(d)] / o;
          const double ex2 = acc.sum_x2[static_cast<std::size_t>(s)][static_cast<std::size_t>(c)]
                                       [static_cast<std::size_t>(d)] / o;
          means[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] = mu;
          vars[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] =
              std::max(ex2 - mu * mu, var_floor[static_cast<std::size_t>(d)]);
        }
      } else {
        // vanishing occupancy: keep previous parameters
        means[static_cast<std::size_t>(c)] = old.mean(c);
        vars[static_cast<std::size_t>(c)] = old.variance(c);
      }
    }
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    for (auto& w : weights) w /= wsum;
    hmm.states[static_cast<std::size_t>(s)] =
        GaussianMixture(std::move(weights), std::move(means), std::move(vars));
  }
}

}  // namespace detail

// Baum-Welch maximum-likelihood training over a pooled utterance set.
// Deterministic for a fixed seed; the left-to-right zero pattern is
// preserved exactly across re-estimation.
inline Hmm baum_welch_train(const std::vector<ObservationSequence>& data, const TrainOptions& opt,
                            TrainStats* stats = nullptr) {
  if (data.empty()) throw std::invalid_argument("baum_welch_train: empty data collection");
  if (opt.num_states < 1) throw std::invalid_argument("baum_welch_train: num_states must be >= 1");
  if (opt.num_mixtures < 1)
    throw std::invalid_argument("baum_welch_train: num_mixtures must be >= 1");
  const int dim = data.front().dim();
  for (const auto& seq : data) {
    if (seq.dim() != dim)
      throw std::invalid_argument("baum_welch_train: inconsistent feature dimensions");
    if (static_cast<int>(seq.size()) < opt.num_states)
      throw std::invalid_argument("baum_welch_train: sequence '" + seq.utterance_id +
                                  "' shorter than num_states");
  }

  // variance floor from the global per-dimension spread
  std::vector<double> g_sum(static_cast<std::size_t>(dim), 0.0);
  std::vector<double> g_sum2(static_cast<std::size_t>(dim), 0.0);
  std::size_t g_n = 0;
  for (const auto& seq : data)
    for (const auto& x : seq.vectors) {
      ++g_n;
      for (int d = 0; d < dim; ++d) {
        g_sum[static_cast<std::size_t>(d)] += x[static_cast<std::size_t>(d)];
        g_sum2[static_cast<std::size_t>(d)] += x[static_cast<std::size_t>(d)] * x[static_cast<std::size_t>(d)];
      }
    }
  std::vector<double> var_floor(static_cast<std::size_t>(dim));
  for (int d = 0; d < dim; ++d) {
    const double mu = g_sum[static_cast<std::size_t>(d)] / static_cast<double>(g_n);
    const double gv = g_sum2[static_cast<std::size_t>(d)] / static_cast<double>(g_n) - mu * mu;
    var_floor[static_cast<std::size_t>(d)] = std::max(opt.var_floor_scale * gv, opt.var_floor_abs);
  }

  Hmm hmm = detail::init_model(data, opt, var_floor);
  double prev_ll = kNegInf;
  for (int iter = 0; iter < opt.max_iters; ++iter) {
    detail::Accumulators acc(hmm);
    double total_ll = 0.0;
    for (const auto& seq : data) total_ll += detail::accumulate_utterance(hmm, seq, acc);
    if (stats) stats->log_likelihood.push_back(total_ll);
    if (iter > 0) {
      const double improvement = (total_ll - prev_ll) / std::max(std::abs(prev_ll), 1e-300);
      if (improvement < opt.rel_tol) break;
    }
    prev_ll = total_ll;
    detail::maximize(hmm, acc, var_floor);
  }
  return hmm;
}

}  // namespace emorec
