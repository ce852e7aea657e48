#pragma once

// Two-stage recognizer: a binary gender stage over acoustic models feeds
// a gender-dependent emotion stage scored by acoustic/prosodic fusion.
// Also provides the gender-pooled and oracle-gender reference recognizers.

#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "emorec/dataset.hpp"
#include "emorec/hmm.hpp"
#include "emorec/sphmm.hpp"
#include "emorec/util.hpp"

namespace emorec {

inline const std::vector<std::string>& gender_labels() {
  static const std::vector<std::string> labels = {"female", "male"};
  return labels;
}

struct GenderModels {
  std::map<std::string, Hmm> models;  // exactly "female" and "male"
};

struct EmotionModel {
  Hmm acoustic;
  SuprasegmentalHmm supra;
};

struct EmotionModelSet {
  // gender -> emotion -> model pair; every cell populated
  std::map<std::string, std::map<std::string, EmotionModel>> cells;

  std::vector<std::string> emotions() const {
    std::vector<std::string> out;
    if (cells.empty()) return out;
    for (const auto& [emotion, model] : cells.begin()->second) out.push_back(emotion);
    return out;
  }
};

struct PooledEmotionModels {
  std::map<std::string, EmotionModel> models;  // emotion -> model pair
};

// argmax result over a candidate set; ties resolve to the
// lexicographically first label and are flagged
struct ScoredLabel {
  std::string label;
  std::map<std::string, double> scores;
  bool tie = false;
};

struct ClassificationResult {
  std::string gender;
  std::string emotion;
  std::map<std::string, double> gender_scores;
  std::map<std::string, double> emotion_scores;
  bool gender_tie = false;
  bool emotion_tie = false;
};

struct PipelineTrainConfig {
  TrainOptions acoustic;        // acoustic layer sizes and EM control
  int supra_states = 3;
  int supra_mixtures = 3;
  std::ostream* log = nullptr;  // utterance accounting, tie notices

  TrainOptions supra_options() const {
    TrainOptions opt = acoustic;
    opt.num_states = supra_states;
    opt.num_mixtures = supra_mixtures;
    return opt;
  }
};

namespace detail {

inline ScoredLabel argmax_label(const std::map<std::string, double>& scores) {
  ScoredLabel out;
  out.scores = scores;
  double best = kNegInf;
  for (const auto& [label, score] : scores) best = std::max(best, score);
  int at_best = 0;
  for (const auto& [label, score] : scores) {  // lexicographic map order
    if (score == best) {
      if (at_best == 0) out.label = label;
      ++at_best;
    }
  }
  out.tie = at_best > 1;
  return out;
}

inline std::vector<ObservationSequence> observations_of(const Dataset& data) {
  std::vector<ObservationSequence> out;
  out.reserve(data.size());
  for (const auto& u : data) out.push_back(u.obs);
  return out;
}

inline std::vector<std::pair<ObservationSequence, ProsodicTrack>> pairs_of(const Dataset& data) {
  std::vector<std::pair<ObservationSequence, ProsodicTrack>> out;
  out.reserve(data.size());
  for (const auto& u : data) out.emplace_back(u.obs, u.prosody);
  return out;
}

}  // namespace detail

// One acoustic model per gender, trained on that gender's utterances
// pooled across emotions.
inline GenderModels train_gender_models(const Dataset& train, const PipelineTrainConfig& cfg) {
  GenderModels out;
  for (const auto& gender : gender_labels()) {
    Dataset subset;
    for (const auto& u : train)
      if (u.meta.gender == gender) subset.push_back(u);
    if (subset.empty())
      throw std::invalid_argument("train_gender_models: no training utterances for gender '" +
                                  gender + "'");
    if (cfg.log)
      *cfg.log << "[train] gender model " << gender << ": " << subset.size() << " utterances\n";
    TrainOptions opt = cfg.acoustic;
    opt.seed = derive_seed(cfg.acoustic.seed, fnv1a("gender:" + gender));
    out.models[gender] = baum_welch_train(detail::observations_of(subset), opt);
  }
  return out;
}

// First stage: argmax over the two per-gender forward log-likelihoods,
// each normalized per frame.
inline ScoredLabel identify_gender(const GenderModels& models, const ObservationSequence& obs) {
  if (models.models.size() != 2)
    throw std::invalid_argument("identify_gender: need exactly two gender models");
  std::map<std::string, double> scores;
  for (const auto& [gender, hmm] : models.models)
    scores[gender] = forward_log_likelihood(hmm, obs) / static_cast<double>(obs.size());
  return detail::argmax_label(scores);
}

// One (acoustic, suprasegmental) pair per (gender, emotion) cell; the
// prosodic chain is trained on top of the freshly trained acoustic model.
inline EmotionModelSet train_emotion_models(const Dataset& train,
                                            const std::vector<std::string>& emotions,
                                            const PipelineTrainConfig& cfg) {
  if (emotions.size() < 2)
    throw std::invalid_argument("train_emotion_models: need at least two emotions");
  EmotionModelSet set;
  for (const auto& gender : gender_labels()) {
    for (const auto& emotion : emotions) {
      Dataset subset;
      for (const auto& u : train)
        if (u.meta.gender == gender && u.meta.emotion == emotion) subset.push_back(u);
      if (subset.empty())
        throw std::invalid_argument("train_emotion_models: empty cell (" + gender + ", " +
                                    emotion + ")");
      if (cfg.log)
        *cfg.log << "[train] emotion cell (" << gender << ", " << emotion
                 << "): " << subset.size() << " utterances\n";
      EmotionModel model;
      TrainOptions ac = cfg.acoustic;
      ac.seed = derive_seed(cfg.acoustic.seed, fnv1a("emotion:" + gender + ":" + emotion));
      model.acoustic = baum_welch_train(detail::observations_of(subset), ac);
      TrainOptions su = cfg.supra_options();
      su.seed = derive_seed(cfg.acoustic.seed, fnv1a("supra:" + gender + ":" + emotion));
      model.supra = train_suprasegmental(detail::pairs_of(subset), model.acoustic, su);
      set.cells[gender][emotion] = std::move(model);
    }
  }
  return set;
}

// Gender-independent reference models: both genders' utterances pooled
// per emotion, same topology and sizes as the per-gender cells.
inline PooledEmotionModels train_pooled_emotion_models(const Dataset& train,
                                                       const std::vector<std::string>& emotions,
                                                       const PipelineTrainConfig& cfg) {
  PooledEmotionModels pooled;
  for (const auto& emotion : emotions) {
    Dataset subset;
    for (const auto& u : train)
      if (u.meta.emotion == emotion) subset.push_back(u);
    if (subset.empty())
      throw std::invalid_argument("train_pooled_emotion_models: no utterances for emotion '" +
                                  emotion + "'");
    if (cfg.log)
      *cfg.log << "[train] pooled emotion " << emotion << ": " << subset.size()
               << " utterances\n";
    EmotionModel model;
    TrainOptions ac = cfg.acoustic;
    ac.seed = derive_seed(cfg.acoustic.seed, fnv1a("pooled:" + emotion));
    model.acoustic = baum_welch_train(detail::observations_of(subset), ac);
    TrainOptions su = cfg.supra_options();
    su.seed = derive_seed(cfg.acoustic.seed, fnv1a("pooled-supra:" + emotion));
    model.supra = train_suprasegmental(detail::pairs_of(subset), model.acoustic, su);
    pooled.models[emotion] = std::move(model);
  }
  return pooled;
}

// Both halves of the fused emotion score for one candidate model, each
// normalized per observation. The same combination is reused by the
// weighting-factor sweep so cached and direct paths agree bit-for-bit.
struct EmotionScoreComponents {
  double acoustic = 0.0;
  double prosodic = 0.0;
};

inline EmotionScoreComponents emotion_score_components(const EmotionModel& model,
                                                       const ObservationSequence& obs,
                                                       const ProsodicTrack& prosody) {
  EmotionScoreComponents comp;
  comp.acoustic =
      forward_log_likelihood(model.acoustic, obs) / static_cast<double>(obs.size());
  const SummaryVectorSequence summary =
      to_suprasegmental(model.acoustic, obs, prosody, model.supra.num_states());
  comp.prosodic = supra_log_likelihood(model.supra, summary) /
                  static_cast<double>(model.supra.num_states());
  return comp;
}

// Second stage: argmax of the fused score over the given gender's
// emotion models.
inline ScoredLabel identify_emotion(const EmotionModelSet& set, const std::string& gender,
                                    const ObservationSequence& obs, const ProsodicTrack& prosody,
                                    FusionWeight w) {
  const auto cell = set.cells.find(gender);
  if (cell == set.cells.end())
    throw std::invalid_argument("identify_emotion: unknown gender label '" + gender + "'");
  std::map<std::string, double> scores;
  for (const auto& [emotion, model] : cell->second) {
    const EmotionScoreComponents comp = emotion_score_components(model, obs, prosody);
    scores[emotion] = fused_combine(comp.acoustic, comp.prosodic, w);
  }
  return detail::argmax_label(scores);
}

// Acoustic-only variant: per-frame-normalized forward likelihoods only.
inline ScoredLabel identify_emotion_hmm_only(const EmotionModelSet& set,
                                             const std::string& gender,
                                             const ObservationSequence& obs) {
  const auto cell = set.cells.find(gender);
  if (cell == set.cells.end())
    throw std::invalid_argument("identify_emotion_hmm_only: unknown gender label '" + gender +
                                "'");
  std::map<std::string, double> scores;
  for (const auto& [emotion, model] : cell->second)
    scores[emotion] =
        forward_log_likelihood(model.acoustic, obs) / static_cast<double>(obs.size());
  return detail::argmax_label(scores);
}

// Gender-dependent recognizer: the identified gender selects the emotion
// model bank. A wrong first-stage decision is propagated, not corrected.
inline ClassificationResult run_two_stage(const GenderModels& genders,
                                          const EmotionModelSet& set,
                                          const ObservationSequence& obs,
                                          const ProsodicTrack& prosody, FusionWeight w) {
  ClassificationResult res;
  const ScoredLabel g = identify_gender(genders, obs);
  res.gender = g.label;
  res.gender_scores = g.scores;
  res.gender_tie = g.tie;
  const ScoredLabel e = identify_emotion(set, g.label, obs, prosody, w);
  res.emotion = e.label;
  res.emotion_scores = e.scores;
  res.emotion_tie = e.tie;
  return res;
}

// Gender-independent recognizer over the pooled models.
inline ScoredLabel run_without_gender(const PooledEmotionModels& pooled,
                                      const ObservationSequence& obs,
                                      const ProsodicTrack& prosody, FusionWeight w) {
  if (pooled.models.empty())
    throw std::invalid_argument("run_without_gender: no pooled models");
  std::map<std::string, double> scores;
  for (const auto& [emotion, model] : pooled.models) {
    const EmotionScoreComponents comp = emotion_score_components(model, obs, prosody);
    scores[emotion] = fused_combine(comp.acoustic, comp.prosodic, w);
  }
  return detail::argmax_label(scores);
}

// Reference recognizer with ground-truth gender; never consults the
// gender models.
inline ScoredLabel run_with_oracle_gender(const EmotionModelSet& set,
                                          const std::string& true_gender,
                                          const ObservationSequence& obs,
                                          const ProsodicTrack& prosody, FusionWeight w) {
  return identify_emotion(set, true_gender, obs, prosody, w);
}

}  // namespace emorec
