#pragma once

// Cepstral and prosodic feature extraction. Each frame yields 8 static
// cepstra C(1..8) from a mel filterbank plus 8 regression deltas; a
// parallel track carries per-frame pitch and log-energy for the
// suprasegmental layer.

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "emorec/audio.hpp"
#include "emorec/fft.hpp"
#include "emorec/observation.hpp"
#include "emorec/util.hpp"

namespace emorec {

inline constexpr double kEnergyFloor = 1e-10;

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filters linear in mel, equally spaced from 0 to Nyquist.
struct MelFilterbank {
  int num_channels = 24;
  int fft_size = 512;
  int sample_rate = kTargetSampleRate;
  std::vector<std::vector<double>> weights;  // channel x (fft_size/2 + 1)
  std::vector<double> center_hz;

  static MelFilterbank make(int num_channels, int fft_size, int sample_rate) {
    if (num_channels < 2) throw std::invalid_argument("MelFilterbank: need >= 2 channels");
    if (!is_power_of_two(fft_size))
      throw std::invalid_argument("MelFilterbank: fft_size must be a power of two");
    MelFilterbank fb;
    fb.num_channels = num_channels;
    fb.fft_size = fft_size;
    fb.sample_rate = sample_rate;
    const int bins = fft_size / 2 + 1;
    const double mel_max = hz_to_mel(sample_rate / 2.0);
    std::vector<double> edges(static_cast<std::size_t>(num_channels) + 2);
    for (int k = 0; k < num_channels + 2; ++k)
      edges[k] = mel_max * static_cast<double>(k) / (num_channels + 1);
    fb.center_hz.resize(num_channels);
    for (int m = 0; m < num_channels; ++m) fb.center_hz[m] = mel_to_hz(edges[m + 1]);
    fb.weights.assign(num_channels, std::vector<double>(bins, 0.0));
    for (int m = 0; m < num_channels; ++m) {
      const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
      for (int b = 0; b < bins; ++b) {
        const double mel = hz_to_mel(static_cast<double>(b) * sample_rate / fft_size);
        if (mel > lo && mel <= mid)
          fb.weights[m][b] = (mel - lo) / (mid - lo);
        else if (mel > mid && mel < hi)
          fb.weights[m][b] = (hi - mel) / (hi - mid);
      }
    }
    return fb;
  }
};

// Y(m) = max(sum_b |FFT|^2 * weight, floor); strictly positive.
inline std::vector<double> filterbank_energies(const std::vector<double>& windowed_frame,
                                               const MelFilterbank& fb) {
  if (static_cast<int>(windowed_frame.size()) > fb.fft_size)
    throw std::invalid_argument("filterbank_energies: frame longer than fft_size");
  const std::vector<double> power = power_spectrum(windowed_frame, fb.fft_size);
  std::vector<double> energies(static_cast<std::size_t>(fb.num_channels));
  for (int m = 0; m < fb.num_channels; ++m) {
    double acc = 0.0;
    const auto& w = fb.weights[m];
    for (std::size_t b = 0; b < power.size(); ++b) acc += power[b] * w[b];
    energies[m] = std::max(acc, kEnergyFloor);
  }
  return energies;
}

// C(n) = sum_{m=1..M} log(Y(m)) * cos(pi*n*(m - 1/2)/M) for n = 1..num_coeffs
inline std::vector<double> mfcc(const std::vector<double>& filterbank_out, int num_coeffs) {
  const int channels = static_cast<int>(filterbank_out.size());
  if (num_coeffs < 1 || num_coeffs >= channels)
    throw std::invalid_argument("mfcc: need 1 <= num_coeffs < filterbank channels");
  std::vector<double> log_energy(filterbank_out.size());
  for (int m = 0; m < channels; ++m) {
    if (!(filterbank_out[m] > 0.0))
      throw std::invalid_argument("mfcc: non-positive filterbank output");
    log_energy[m] = std::log(filterbank_out[m]);
  }
  std::vector<double> cepstra(static_cast<std::size_t>(num_coeffs));
  for (int n = 1; n <= num_coeffs; ++n) {
    double acc = 0.0;
    for (int m = 1; m <= channels; ++m)
      acc += log_energy[m - 1] * std::cos(kPi * n * (m - 0.5) / channels);
    cepstra[n - 1] = acc;
  }
  return cepstra;
}

// Regression delta d_t = sum_k k*(c_{t+k} - c_{t-k}) / (2*sum_k k^2) with
// edge frames replicated beyond the sequence ends.
inline std::vector<std::vector<double>> delta(const std::vector<std::vector<double>>& statics,
                                              int half_window) {
  if (statics.empty()) throw std::invalid_argument("delta: empty sequence");
  if (half_window < 1) throw std::invalid_argument("delta: half_window must be >= 1");
  const int t_max = static_cast<int>(statics.size()) - 1;
  const std::size_t dim = statics.front().size();
  double denom = 0.0;
  for (int k = 1; k <= half_window; ++k) denom += static_cast<double>(k) * k;
  denom *= 2.0;
  std::vector<std::vector<double>> deltas(statics.size(), std::vector<double>(dim, 0.0));
  for (int t = 0; t <= t_max; ++t) {
    for (int k = 1; k <= half_window; ++k) {
      const auto& ahead = statics[static_cast<std::size_t>(std::min(t + k, t_max))];
      const auto& behind = statics[static_cast<std::size_t>(std::max(t - k, 0))];
      for (std::size_t d = 0; d < dim; ++d)
        deltas[t][d] += k * (ahead[d] - behind[d]);
    }
    for (std::size_t d = 0; d < dim; ++d) deltas[t][d] /= denom;
  }
  return deltas;
}

inline double frame_log_energy(const std::vector<double>& frame) {
  double e = 0.0;
  for (double x : frame) e += x * x;
  return std::log(std::max(e, kEnergyFloor));
}

struct F0Estimate {
  bool voiced = false;
  double f0_hz = 0.0;
};

// Normalized-autocorrelation pitch search over lags [rate/f0_max, rate/f0_min];
// a frame is voiced when the best peak exceeds the threshold.
inline F0Estimate estimate_f0(const std::vector<double>& frame, int sample_rate, double f0_min,
                              double f0_max, double voicing_threshold = 0.3) {
  if (!(f0_min > 0.0) || !(f0_min < f0_max) || !(f0_max < sample_rate / 2.0))
    throw std::invalid_argument("estimate_f0: need 0 < f0_min < f0_max < rate/2");
  const int n = static_cast<int>(frame.size());
  int lag_min = static_cast<int>(std::ceil(sample_rate / f0_max));
  int lag_max = static_cast<int>(std::floor(sample_rate / f0_min));
  lag_min = std::max(lag_min, 1);
  lag_max = std::min(lag_max, n - 2);
  if (lag_min > lag_max) return {};

  std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
  for (int t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + frame[t] * frame[t];
  const double total = prefix[n];
  if (total <= kEnergyFloor) return {};

  std::vector<double> corr(static_cast<std::size_t>(lag_max) + 1, 0.0);
  double best_value = 0.0;
  int best_lag = 0;
  for (int lag = lag_min; lag <= lag_max; ++lag) {
    double num = 0.0;
    for (int t = 0; t + lag < n; ++t) num += frame[t] * frame[t + lag];
    const double e_head = prefix[n - lag];          // energy of x[0 .. n-1-lag]
    const double e_tail = total - prefix[lag];      // energy of x[lag .. n-1]
    const double denom = std::sqrt(e_head * e_tail);
    if (denom <= 0.0) continue;
    corr[static_cast<std::size_t>(lag)] = num / denom;
    if (corr[static_cast<std::size_t>(lag)] > best_value) {
      best_value = corr[static_cast<std::size_t>(lag)];
      best_lag = lag;
    }
  }
  if (best_lag == 0 || best_value <= voicing_threshold) return {};
  // Multiples of the true period score nearly as high as the period
  // itself; take the shortest local peak close to the global one.
  for (int lag = lag_min; lag < best_lag; ++lag) {
    const double r = corr[static_cast<std::size_t>(lag)];
    if (r < 0.88 * best_value) continue;
    const double left = lag > lag_min ? corr[static_cast<std::size_t>(lag) - 1] : 0.0;
    const double right = lag < lag_max ? corr[static_cast<std::size_t>(lag) + 1] : 0.0;
    if (r >= left && r >= right) {
      best_lag = lag;
      break;
    }
  }
  return {true, static_cast<double>(sample_rate) / best_lag};
}

struct FeatureConfig {
  double frame_length_ms = 30.0;
  double frame_shift_ms = 5.0;
  bool pre_emphasis_enabled = true;
  double pre_emphasis_coeff = 0.97;
  int mel_channels = 24;
  int fft_size = 512;
  int num_cepstra = 8;
  int delta_half_window = 2;
  double f0_min_hz = 60.0;
  double f0_max_hz = 400.0;
  double voicing_threshold = 0.3;
};

// Full frontend for one utterance: cepstra+deltas and the prosodic track.
// Pitch and energy are measured on the un-emphasized raw frames.
inline std::pair<ObservationSequence, ProsodicTrack> extract_features(
    const AudioClip& clip, const FeatureConfig& cfg, const std::string& utterance_id) {
  const int len = frame_samples(cfg.frame_length_ms, clip.sample_rate);
  const int shift = frame_samples(cfg.frame_shift_ms, clip.sample_rate);
  const auto raw_frames = split_frames(clip.samples, len, shift);

  const AudioClip emphasized =
      cfg.pre_emphasis_enabled ? pre_emphasis(clip, cfg.pre_emphasis_coeff) : clip;
  const FrameSequence windowed =
      frame_and_window(emphasized, cfg.frame_length_ms, cfg.frame_shift_ms);

  const MelFilterbank fb = MelFilterbank::make(cfg.mel_channels, cfg.fft_size, clip.sample_rate);
  std::vector<std::vector<double>> statics(windowed.size());
  for (std::size_t t = 0; t < windowed.size(); ++t)
    statics[t] = mfcc(filterbank_energies(windowed.frames[t], fb), cfg.num_cepstra);
  const auto deltas = delta(statics, cfg.delta_half_window);

  ObservationSequence obs;
  obs.utterance_id = utterance_id;
  obs.vectors.resize(statics.size());
  for (std::size_t t = 0; t < statics.size(); ++t) {
    obs.vectors[t] = statics[t];
    obs.vectors[t].insert(obs.vectors[t].end(), deltas[t].begin(), deltas[t].end());
  }

  ProsodicTrack track;
  track.frame_period_s = cfg.frame_shift_ms / 1000.0;
  track.frames.resize(raw_frames.size());
  for (std::size_t t = 0; t < raw_frames.size(); ++t) {
    const F0Estimate f0 = estimate_f0(raw_frames[t], clip.sample_rate, cfg.f0_min_hz,
                                      cfg.f0_max_hz, cfg.voicing_threshold);
    track.frames[t].voiced = f0.voiced;
    track.frames[t].f0_hz = f0.f0_hz;
    track.frames[t].log_energy = frame_log_energy(raw_frames[t]);
  }
  return {std::move(obs), std::move(track)};
}

inline ObservationSequence extract_observations(const AudioClip& clip, const FeatureConfig& cfg,
                                                const std::string& utterance_id) {
  return extract_features(clip, cfg, utterance_id).first;
}

// Text dump: version line, utterance id line, then one comma-separated
// record per frame at 17 significant digits (bit-exact round trip).
inline void write_feature_dump(std::ostream& out, const ObservationSequence& obs) {
  out << "# emorec-features v1\n";
  out << "utterance " << obs.utterance_id << "\n";
  for (const auto& v : obs.vectors) {
    for (std::size_t d = 0; d < v.size(); ++d) {
      if (d) out << ",";
      out << format_g17(v[d]);
    }
    out << "\n";
  }
}

inline void write_feature_dump(const std::string& path, const ObservationSequence& obs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_feature_dump: cannot open: " + path);
  write_feature_dump(out, obs);
}

inline ObservationSequence read_feature_dump(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "# emorec-features v1")
    throw std::runtime_error("read_feature_dump: bad or missing version line");
  if (!std::getline(in, line) || line.rfind("utterance ", 0) != 0)
    throw std::runtime_error("read_feature_dump: missing utterance header");
  ObservationSequence obs;
  obs.utterance_id = line.substr(10);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (!obs.vectors.empty() && v.size() != obs.vectors.front().size())
      throw std::runtime_error("read_feature_dump: inconsistent record width");
    obs.vectors.push_back(std::move(v));
  }
  return obs;
}

inline ObservationSequence read_feature_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_feature_dump: cannot open: " + path);
  return read_feature_dump(in);
}

}  // namespace emorec
