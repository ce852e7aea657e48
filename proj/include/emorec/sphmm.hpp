#pragma once

// Suprasegmental layer: prosodic summary observations derived from a
// trained acoustic model's state alignment, a small left-to-right chain
// over them, and the weighted log-score fusion of the two layers.

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "emorec/hmm.hpp"
#include "emorec/observation.hpp"
#include "emorec/util.hpp"

namespace emorec {

// Per-region prosodic summary. Slopes are measured per second on the log
// tracks; an empty region stays all-zero with duration_fraction 0.
struct SummaryVector {
  static constexpr int kDim = 6;

  double mean_log_f0 = 0.0;       // over voiced frames; 0 when none
  double f0_slope = 0.0;          // d(log f0)/dt, voiced frames
  double voiced_fraction = 0.0;
  double mean_log_energy = 0.0;
  double energy_slope = 0.0;      // d(log energy)/dt
  double duration_fraction = 0.0;

  std::vector<double> as_vector() const {
    return {mean_log_f0, f0_slope, voiced_fraction, mean_log_energy, energy_slope,
            duration_fraction};
  }
};

struct SummaryVectorSequence {
  std::string utterance_id;
  std::vector<SummaryVector> regions;  // one per suprasegmental state, temporal order

  std::size_t size() const { return regions.size(); }

  ObservationSequence as_observations() const {
    ObservationSequence obs;
    obs.utterance_id = utterance_id;
    obs.vectors.reserve(regions.size());
    for (const auto& r : regions) obs.vectors.push_back(r.as_vector());
    return obs;
  }
};

// The prosodic chain sits on top of an acoustic model whose state count is
// an exact multiple of the chain length (default 3 regions over 9 states).
struct SuprasegmentalHmm {
  Hmm chain;

  int num_states() const { return chain.num_states; }
};

struct FusionWeight {
  double alpha = 0.5;

  FusionWeight() = default;
  explicit FusionWeight(double a) : alpha(a) {
    if (!(a >= 0.0 && a <= 1.0))
      throw std::invalid_argument("FusionWeight: alpha must be in [0, 1]");
  }
};

enum class AlphaRegime {
  kAcousticOnly,
  kAcousticBiased,
  kUnbiased,
  kProsodicBiased,
  kProsodicOnly,
};

inline AlphaRegime classify_alpha_regime(FusionWeight w) {
  if (w.alpha == 0.0) return AlphaRegime::kAcousticOnly;
  if (w.alpha == 1.0) return AlphaRegime::kProsodicOnly;
  if (w.alpha == 0.5) return AlphaRegime::kUnbiased;
  return w.alpha < 0.5 ? AlphaRegime::kAcousticBiased : AlphaRegime::kProsodicBiased;
}

inline const char* to_string(AlphaRegime r) {
  switch (r) {
    case AlphaRegime::kAcousticOnly: return "acoustic-only";
    case AlphaRegime::kAcousticBiased: return "acoustic-biased";
    case AlphaRegime::kUnbiased: return "unbiased";
    case AlphaRegime::kProsodicBiased: return "prosodic-biased";
    case AlphaRegime::kProsodicOnly: return "prosodic-only";
  }
  return "?";
}

// Viterbi-align the utterance to the acoustic states, group the states
// into contiguous blocks, and summarize the prosodic track per block.
inline SummaryVectorSequence to_suprasegmental(const Hmm& acoustic,
                                               const ObservationSequence& obs,
                                               const ProsodicTrack& prosody,
                                               int num_supra_states = 3) {
  if (obs.size() != prosody.size())
    throw std::invalid_argument("to_suprasegmental: observation/prosody length mismatch");
  if (num_supra_states < 1 || acoustic.num_states % num_supra_states != 0)
    throw std::invalid_argument(
        "to_suprasegmental: acoustic state count must be a multiple of the region count");
  const int group = acoustic.num_states / num_supra_states;
  const ViterbiResult vit = viterbi(acoustic, obs);
  const std::size_t big_t = obs.size();

  SummaryVectorSequence seq;
  seq.utterance_id = obs.utterance_id;
  seq.regions.resize(static_cast<std::size_t>(num_supra_states));
  for (int r = 0; r < num_supra_states; ++r) {
    std::vector<double> t_voiced, log_f0, t_all, log_energy;
    std::size_t count = 0;
    for (std::size_t t = 0; t < big_t; ++t) {
      if (vit.path[t] / group != r) continue;
      ++count;
      const double time_s = static_cast<double>(t) * prosody.frame_period_s;
      const auto& frame = prosody.frames[t];
      t_all.push_back(time_s);
      log_energy.push_back(frame.log_energy);
      if (frame.voiced) {
        t_voiced.push_back(time_s);
        log_f0.push_back(std::log(frame.f0_hz));
      }
    }
    if (count == 0) continue;  // zero summary vector, duration 0
    auto& sv = seq.regions[static_cast<std::size_t>(r)];
    if (!log_f0.empty()) {
      double m = 0.0;
      for (double v : log_f0) m += v;
      sv.mean_log_f0 = m / static_cast<double>(log_f0.size());
      sv.f0_slope = ols_slope(t_voiced, log_f0);
    }
    sv.voiced_fraction = static_cast<double>(log_f0.size()) / static_cast<double>(count);
    double me = 0.0;
    for (double v : log_energy) me += v;
    sv.mean_log_energy = me / static_cast<double>(count);
    sv.energy_slope = ols_slope(t_all, log_energy);
    sv.duration_fraction = static_cast<double>(count) / static_cast<double>(big_t);
  }
  return seq;
}

// Fit the prosodic chain on summary sequences derived from an already
// trained acoustic model. opt.num_states is the region count.
inline SuprasegmentalHmm train_suprasegmental(
    const std::vector<std::pair<ObservationSequence, ProsodicTrack>>& data, const Hmm& acoustic,
    const TrainOptions& opt, TrainStats* stats = nullptr) {
  if (data.empty()) throw std::invalid_argument("train_suprasegmental: empty data");
  std::vector<ObservationSequence> summaries;
  summaries.reserve(data.size());
  for (const auto& [obs, prosody] : data)
    summaries.push_back(
        to_suprasegmental(acoustic, obs, prosody, opt.num_states).as_observations());
  SuprasegmentalHmm psi;
  psi.chain = baum_welch_train(summaries, opt, stats);
  return psi;
}

inline double supra_log_likelihood(const SuprasegmentalHmm& psi,
                                   const SummaryVectorSequence& summary) {
  return forward_log_likelihood(psi.chain, summary.as_observations());
}

// Length-normalized weighted combination of the two layers' scores.
inline double fused_combine(double acoustic_score, double prosodic_score, FusionWeight w) {
  return (1.0 - w.alpha) * acoustic_score + w.alpha * prosodic_score;
}

// (1 - alpha) * logP(O|lambda)/T + alpha * logP(summary|psi)/R.
// Each term is normalized by its own observation count so the weight
// trades off quantities of comparable scale.
inline double fused_log_score(const Hmm& lambda, const SuprasegmentalHmm& psi,
                              const ObservationSequence& obs, const ProsodicTrack& prosody,
                              FusionWeight w) {
  const double acoustic =
      forward_log_likelihood(lambda, obs) / static_cast<double>(obs.size());
  const SummaryVectorSequence summary =
      to_suprasegmental(lambda, obs, prosody, psi.num_states());
  const double prosodic =
      supra_log_likelihood(psi, summary) / static_cast<double>(psi.num_states());
  return fused_combine(acoustic, prosodic, w);
}

}  // namespace emorec
