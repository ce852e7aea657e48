#pragma once

// Seeded synthetic corpora with controllable gender/emotion separability,
// in two tiers: rendered waveforms exercising the full frontend, and
// direct feature draws for fast, noise-controlled experiments.
//
// Emotion classes come in cross-gender collision pairs: within a pair the
// two emotions share every contour parameter and differ only in the pitch
// offset, by exactly the female/male base gap. A male utterance of one
// pair member is therefore observationally identical to a female
// utterance of the other, so recognizers that discard gender face a
// structural ambiguity while gender-dependent ones do not.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "emorec/audio.hpp"
#include "emorec/dataset.hpp"
#include "emorec/manifest.hpp"
#include "emorec/observation.hpp"
#include "emorec/util.hpp"

namespace emorec {

struct EmotionSynthParams {
  double f0_offset_hz = 0.0;   // added to the gender base pitch
  double f0_range_hz = 10.0;   // rise-fall contour amplitude
  double energy_scale = 1.0;   // linear gain
  double spectral_tilt = 0.0;  // brightness; the spectral emotion channel
  double rate_factor = 1.0;    // speaking rate; duration = base / rate
};

struct SynthSpec {
  std::vector<std::string> emotions = {"neutral", "anger",   "sadness",
                                       "happiness", "disgust", "fear"};
  std::map<std::string, EmotionSynthParams> emotion_params = default_emotion_params();

  double male_base_f0 = 120.0;
  double female_base_f0 = 210.0;

  int speakers_per_gender = 6;
  int train_speakers_per_gender = 4;
  int num_sentences = 4;
  int train_sentences = 2;
  int session1_repeats = 2;
  int session2_repeats = 1;

  std::uint64_t seed = 1;
  double separability = 1.0;  // 0 collapses all emotions onto one process
  double base_duration_s = 0.45;
  int sample_rate = kTargetSampleRate;
  int base_frames = 60;  // feature-tier utterance length before rate/jitter

  // Pair mates share range/scale/tilt/rate; their pitch offsets differ by
  // female_base - male_base so the pairs collide across genders while
  // staying at least 20 Hz apart within a gender.
  static std::map<std::string, EmotionSynthParams> default_emotion_params() {
    return {
        {"anger", {80.0, 20.0, 1.35, 0.30, 0.90}},
        {"sadness", {-10.0, 20.0, 1.35, 0.30, 0.90}},
        {"happiness", {60.0, 14.0, 1.10, 0.15, 1.00}},
        {"disgust", {-30.0, 14.0, 1.10, 0.15, 1.00}},
        {"fear", {40.0, 9.0, 0.85, -0.10, 1.10}},
        {"neutral", {-50.0, 9.0, 0.85, -0.10, 1.10}},
    };
  }

  void validate() const {
    if (emotions.size() < 2) throw std::invalid_argument("SynthSpec: need >= 2 emotions");
    if (!(separability >= 0.0 && separability <= 1.0))
      throw std::invalid_argument("SynthSpec: separability must be in [0, 1]");
    if (male_base_f0 <= 0.0 || female_base_f0 <= 0.0 || sample_rate <= 0 ||
        base_duration_s <= 0.0)
      throw std::invalid_argument("SynthSpec: rates and durations must be positive");
    if (train_speakers_per_gender < 1 || train_speakers_per_gender >= speakers_per_gender)
      throw std::invalid_argument("SynthSpec: need 1 <= train speakers < speakers per gender");
    if (train_sentences < 1 || train_sentences >= num_sentences)
      throw std::invalid_argument("SynthSpec: need 1 <= train sentences < sentences");
    if (session1_repeats < 1 || session2_repeats < 0)
      throw std::invalid_argument("SynthSpec: bad repeat counts");
    for (const auto& e : emotions)
      if (!emotion_params.count(e))
        throw std::invalid_argument("SynthSpec: missing parameters for emotion '" + e + "'");
  }
};

inline SynthSpec separable_preset(std::uint64_t seed = 1) {
  SynthSpec s;
  s.seed = seed;
  return s;
}

// Emotion information carried by pitch and energy only; the spectral
// channel is flattened so acoustic-only scoring is near chance.
inline SynthSpec prosody_only_preset(std::uint64_t seed = 1) {
  SynthSpec s;
  s.seed = seed;
  for (auto& [name, p] : s.emotion_params) p.spectral_tilt = 0.0;
  return s;
}

// All emotions share one generating process; only gender stays separable.
inline SynthSpec chance_preset(std::uint64_t seed = 1) {
  SynthSpec s;
  s.seed = seed;
  s.separability = 0.0;
  s.speakers_per_gender = 11;
  s.train_speakers_per_gender = 6;
  s.session1_repeats = 3;
  s.session2_repeats = 3;
  return s;
}

// The full recording-protocol shape: 15 speakers per gender of whom 10
// train, 8 sentences of which the first 4 train, 5+4 session repeats.
inline SynthSpec paper_shape_preset(std::uint64_t seed = 1) {
  SynthSpec s;
  s.seed = seed;
  s.speakers_per_gender = 15;
  s.train_speakers_per_gender = 10;
  s.num_sentences = 8;
  s.train_sentences = 4;
  s.session1_repeats = 5;
  s.session2_repeats = 4;
  s.base_duration_s = 0.35;
  return s;
}

inline SynthSpec synth_preset(const std::string& name, std::uint64_t seed = 1) {
  if (name == "separable") return separable_preset(seed);
  if (name == "prosody-only") return prosody_only_preset(seed);
  if (name == "chance") return chance_preset(seed);
  if (name == "paper-shape") return paper_shape_preset(seed);
  throw std::invalid_argument("unknown synth preset: " + name);
}

namespace detail {

struct EffectiveParams {
  double f0_offset, f0_range, energy_scale, tilt, rate;
};

// separability interpolates each emotion between the shared neutral
// process (0) and its full parameter set (1)
inline EffectiveParams effective_params(const SynthSpec& spec, const std::string& emotion) {
  const EmotionSynthParams& p = spec.emotion_params.at(emotion);
  const double sep = spec.separability;
  return {sep * p.f0_offset_hz, sep * p.f0_range_hz, 1.0 + sep * (p.energy_scale - 1.0),
          sep * p.spectral_tilt, 1.0 + sep * (p.rate_factor - 1.0)};
}

struct SpeakerParams {
  double f0_jitter_hz = 0.0;
  double energy_jitter_log = 0.0;
  double formant_u[3] = {0.0, 0.0, 0.0};
  std::vector<double> feature_offset;  // feature-tier per-dimension shift
};

inline SpeakerParams speaker_params(const SynthSpec& spec, const std::string& speaker_id,
                                    int feature_dim) {
  Rng rng(derive_seed(spec.seed, fnv1a("speaker:" + speaker_id)));
  SpeakerParams sp;
  sp.f0_jitter_hz = rng.uniform(-3.0, 3.0);
  sp.energy_jitter_log = rng.uniform(-0.03, 0.03);
  for (double& u : sp.formant_u) u = rng.uniform(-1.0, 1.0);
  sp.feature_offset.resize(static_cast<std::size_t>(feature_dim));
  for (double& o : sp.feature_offset) o = 0.15 * rng.normal();
  return sp;
}

inline double tri01(double x) { return 1.0 - std::abs(2.0 * x - 1.0); }

// duration jitter depends on speaker/sentence/repeat but not emotion, so
// utterance length remains monotone in the speaking-rate factor
inline double length_jitter(const SynthSpec& spec, const std::string& speaker_id,
                            const std::string& sentence_id, const std::string& session,
                            int repeat) {
  Rng rng(derive_seed(spec.seed, fnv1a("length:" + speaker_id + ":" + sentence_id + ":" +
                                       session + ":" + std::to_string(repeat))));
  return rng.uniform(0.9, 1.1);
}

}  // namespace detail

// Manifest enumeration is a pure function of the spec. Rows outside the
// speaker-and-sentence-disjoint protocol carry split "unused".
inline DatasetManifest build_manifest(const SynthSpec& spec) {
  spec.validate();
  DatasetManifest manifest;
  for (const std::string gender : {"female", "male"}) {
    for (int sp = 0; sp < spec.speakers_per_gender; ++sp) {
      char speaker_buf[16];
      std::snprintf(speaker_buf, sizeof(speaker_buf), "%c%02d", gender[0], sp);
      for (int sent = 0; sent < spec.num_sentences; ++sent) {
        const std::string sentence_id = "s" + std::to_string(sent);
        for (int session = 1; session <= 2; ++session) {
          const int repeats = session == 1 ? spec.session1_repeats : spec.session2_repeats;
          for (int rep = 0; rep < repeats; ++rep) {
            for (const auto& emotion : spec.emotions) {
              ManifestRow row;
              row.speaker_id = speaker_buf;
              row.gender = gender;
              row.emotion = emotion;
              row.sentence_id = sentence_id;
              row.session = std::to_string(session);
              const bool train_sp = sp < spec.train_speakers_per_gender;
              const bool train_sent = sent < spec.train_sentences;
              row.split = train_sp && train_sent ? "train"
                          : (!train_sp && !train_sent ? "test" : "unused");
              row.path = "wav/" + row.speaker_id + "_" + sentence_id + "_ses" + row.session +
                         "_r" + std::to_string(rep) + "_" + emotion + ".wav";
              manifest.rows.push_back(std::move(row));
            }
          }
        }
      }
    }
  }
  return manifest;
}

namespace detail {

// repeat index from the "..._ses<n>_r<k>_<emotion>.wav" path layout
inline int repeat_of(const ManifestRow& row) {
  const auto ses = row.path.find("_ses");
  const auto r_pos = row.path.find("_r", ses + 1);
  return std::stoi(row.path.substr(r_pos + 2));
}

// Impulse-train-plus-noise source, per-speaker resonant filter, per-emotion
// pitch/energy contours.
inline AudioClip render_utterance(const SynthSpec& spec, const ManifestRow& row, int repeat) {
  const EffectiveParams p = effective_params(spec, row.emotion);
  const SpeakerParams sp = speaker_params(spec, row.speaker_id, 16);
  Rng rng(derive_seed(spec.seed, fnv1a("wav:" + row.path)));

  const double base_f0 = row.gender == "male" ? spec.male_base_f0 : spec.female_base_f0;
  const double jit = length_jitter(spec, row.speaker_id, row.sentence_id, row.session, repeat);
  const double duration = spec.base_duration_s * jit / p.rate;
  const int n = std::max(1, static_cast<int>(std::lround(duration * spec.sample_rate)));

  // glottal source
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  double phase = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t01 = static_cast<double>(k) / std::max(1, n - 1);
    const double f0 = base_f0 + sp.f0_jitter_hz + p.f0_offset + p.f0_range * tri01(t01);
    phase += f0 / spec.sample_rate;
    if (phase >= 1.0) {
      phase -= 1.0;
      x[static_cast<std::size_t>(k)] += 1.0;
    }
    x[static_cast<std::size_t>(k)] += 0.05 * (rng.uniform() - 0.5);
  }

  // Vocal tract: per-speaker resonances scaled up for female speakers.
  // Formants glide upward over the utterance — a corpus-wide articulation
  // trajectory the left-to-right states align on — with small
  // per-sentence deviations standing in for text variation.
  Rng sentence_rng(derive_seed(spec.seed, fnv1a("sentence:" + row.sentence_id)));
  double glide_a[3], glide_b[3];
  for (int i = 0; i < 3; ++i) {
    glide_a[i] = -1.0 + 0.3 * sentence_rng.uniform(-1.0, 1.0);
    glide_b[i] = 1.0 + 0.3 * sentence_rng.uniform(-1.0, 1.0);
  }
  const double scale = row.gender == "male" ? 1.0 : 1.25;
  const double centers[3] = {500.0, 1400.0, 2600.0};
  const double speaker_dev[3] = {60.0 * sp.formant_u[0], 120.0 * sp.formant_u[1],
                                 150.0 * sp.formant_u[2]};
  const double glide_amp[3] = {90.0, 200.0, 150.0};
  for (int i = 0; i < 3; ++i) {
    const double r = 0.96;
    double y1 = 0.0, y2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double t01 = static_cast<double>(k) / std::max(1, n - 1);
      const double f =
          (centers[i] + speaker_dev[i] + glide_amp[i] * (glide_a[i] + (glide_b[i] - glide_a[i]) * t01)) *
          scale;
      const double c = 2.0 * r * std::cos(2.0 * kPi * f / spec.sample_rate);
      const double y = x[static_cast<std::size_t>(k)] + c * y1 - r * r * y2;
      y2 = y1;
      y1 = y;
      x[static_cast<std::size_t>(k)] = y;
    }
  }

  // Spectral tilt (first-order FIR): the per-emotion brightness offset
  // rides on a shared dark-to-bright ramp that anchors the left-to-right
  // alignment in time.
  {
    double prev = 0.0;
    for (int k = 0; k < n; ++k) {
      const double t01 = static_cast<double>(k) / std::max(1, n - 1);
      const double tilt = 0.45 * (2.0 * t01 - 1.0) + p.tilt;
      const double cur = x[static_cast<std::size_t>(k)];
      x[static_cast<std::size_t>(k)] = cur - tilt * prev;
      prev = cur;
    }
  }

  // normalize to a fixed reference level, then apply the energy contour
  double rms = 0.0;
  for (double v : x) rms += v * v;
  rms = std::sqrt(rms / n);
  const double gain = rms > 0.0 ? 0.05 / rms : 0.0;
  const double level = p.energy_scale * std::exp(sp.energy_jitter_log);
  const int fade = std::min(n / 4, spec.sample_rate / 100);  // 10 ms edges
  for (int k = 0; k < n; ++k) {
    const double t01 = static_cast<double>(k) / std::max(1, n - 1);
    double g = gain * level * (0.8 + 0.4 * tri01(t01));
    if (k < fade) g *= static_cast<double>(k) / fade;
    if (n - 1 - k < fade) g *= static_cast<double>(n - 1 - k) / fade;
    x[static_cast<std::size_t>(k)] *= g;
  }
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > 0.98)
    for (double& v : x) v *= 0.98 / peak;

  AudioClip clip;
  clip.sample_rate = spec.sample_rate;
  clip.samples = std::move(x);
  return clip;
}

}  // namespace detail

// Renders the corpus under out_dir and writes out_dir/manifest.csv.
// Audio is rendered for the train and test rows; "unused" rows appear in
// the manifest only. With render_audio false, only the manifest is
// written.
inline std::string generate_corpus(const SynthSpec& spec, const std::string& out_dir,
                                   bool render_audio = true) {
  const DatasetManifest manifest = build_manifest(spec);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  if (render_audio) {
    fs::create_directories(fs::path(out_dir) / "wav");
    for (const auto& row : manifest.rows) {
      if (row.split != "train" && row.split != "test") continue;
      const AudioClip clip = detail::render_utterance(spec, row, detail::repeat_of(row));
      write_wav((fs::path(out_dir) / row.path).string(), clip);
    }
  }
  const std::string manifest_path = (fs::path(out_dir) / "manifest.csv").string();
  write_manifest(manifest_path, manifest);
  return manifest_path;
}

struct FeatureCorpus {
  DatasetManifest manifest;
  Dataset data;  // train and test rows, manifest order
};

namespace detail {

inline Utterance draw_feature_utterance(const SynthSpec& spec, const ManifestRow& row,
                                        int repeat) {
  const EffectiveParams p = effective_params(spec, row.emotion);
  const SpeakerParams sp = speaker_params(spec, row.speaker_id, 16);
  Rng rng(derive_seed(spec.seed, fnv1a("feat:" + row.path)));

  const double base_f0 = row.gender == "male" ? spec.male_base_f0 : spec.female_base_f0;
  const double jit = length_jitter(spec, row.speaker_id, row.sentence_id, row.session, repeat);
  const int frames = std::max(12, static_cast<int>(std::lround(spec.base_frames * jit / p.rate)));
  const double gender_marker = row.gender == "male" ? 2.0 : -2.0;

  Utterance u;
  u.meta = row;
  u.obs.utterance_id = row.path;
  u.obs.vectors.resize(static_cast<std::size_t>(frames));
  u.prosody.frame_period_s = 0.005;
  u.prosody.frames.resize(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    const double t01 = static_cast<double>(t) / std::max(1, frames - 1);
    std::vector<double> v(16);
    for (int d = 0; d < 8; ++d) v[static_cast<std::size_t>(d)] = sp.feature_offset[static_cast<std::size_t>(d)] + rng.normal();
    v[0] += gender_marker;
    // monotone articulation ramp: the temporal structure the left-to-right
    // states align on, shared by every class
    v[1] += 6.0 * (t01 - 0.5);
    v[2] += p.tilt * 3.0;
    v[3] += p.tilt * 1.5;
    for (int d = 8; d < 16; ++d)
      v[static_cast<std::size_t>(d)] = sp.feature_offset[static_cast<std::size_t>(d)] + 0.3 * rng.normal();
    u.obs.vectors[static_cast<std::size_t>(t)] = std::move(v);

    auto& pf = u.prosody.frames[static_cast<std::size_t>(t)];
    pf.voiced = true;
    pf.f0_hz = std::max(
        30.0, base_f0 + sp.f0_jitter_hz + p.f0_offset + p.f0_range * tri01(t01) + 2.0 * rng.normal());
    pf.log_energy = std::log(p.energy_scale) + sp.energy_jitter_log + 0.2 * tri01(t01) +
                    0.08 * rng.normal();
  }
  return u;
}

}  // namespace detail

// Feature-tier corpus: observation vectors drawn directly from the
// per-(gender, emotion) processes, bypassing the audio frontend.
inline FeatureCorpus generate_feature_corpus(const SynthSpec& spec) {
  FeatureCorpus corpus;
  corpus.manifest = build_manifest(spec);
  for (const auto& row : corpus.manifest.rows) {
    if (row.split != "train" && row.split != "test") continue;
    corpus.data.push_back(detail::draw_feature_utterance(spec, row, detail::repeat_of(row)));
  }
  return corpus;
}

}  // namespace emorec
