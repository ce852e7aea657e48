#pragma once

// PCM ingestion and frame blocking. Input is 16 kHz mono 16-bit RIFF/WAVE;
// anything else is rejected rather than silently converted.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "emorec/util.hpp"

namespace emorec {

inline constexpr int kTargetSampleRate = 16000;

struct AudioClip {
  std::vector<double> samples;  // amplitudes in [-1, 1]
  int sample_rate = kTargetSampleRate;

  std::size_t size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate; }
};

struct FrameSequence {
  std::vector<std::vector<double>> frames;
  double frame_length_ms = 30.0;
  double frame_shift_ms = 5.0;
  int sample_rate = kTargetSampleRate;

  std::size_t size() const { return frames.size(); }
};

inline int frame_samples(double ms, int sample_rate) {
  return static_cast<int>(std::lround(ms * sample_rate / 1000.0));
}

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void write_u32le(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

inline void write_u16le(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

}  // namespace detail

// Reads a 16-bit PCM mono 16 kHz WAV file. Samples are scaled to [-1, 1]
// by dividing by 32768. Throws std::runtime_error naming the offending
// field on any format mismatch.
inline AudioClip load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_wav: cannot open file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0)
    throw std::runtime_error("load_wav: missing RIFF header: " + path);
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("load_wav: not a WAVE form: " + path);

  bool have_fmt = false;
  std::uint16_t audio_format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t chunk_size = detail::read_u32le(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size())
      throw std::runtime_error("load_wav: truncated chunk: " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw std::runtime_error("load_wav: fmt chunk too small: " + path);
      audio_format = detail::read_u16le(bytes.data() + body);
      channels = detail::read_u16le(bytes.data() + body + 2);
      rate = detail::read_u32le(bytes.data() + body + 4);
      bits = detail::read_u16le(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt) throw std::runtime_error("load_wav: missing fmt chunk: " + path);
  if (data == nullptr) throw std::runtime_error("load_wav: missing data chunk: " + path);
  if (audio_format != 1)
    throw std::runtime_error("load_wav: audio_format " + std::to_string(audio_format) +
                             ", expected 1 (PCM): " + path);
  if (channels != 1)
    throw std::runtime_error("load_wav: channels " + std::to_string(channels) +
                             ", expected mono: " + path);
  if (bits != 16)
    throw std::runtime_error("load_wav: bits_per_sample " + std::to_string(bits) +
                             ", expected 16: " + path);
  if (rate != kTargetSampleRate)
    throw std::runtime_error("load_wav: sample_rate " + std::to_string(rate) + ", expected " +
                             std::to_string(kTargetSampleRate) + ": " + path);
  const std::size_t count = data_size / 2;
  if (count == 0) throw std::runtime_error("load_wav: empty data chunk: " + path);

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::int16_t s =
        static_cast<std::int16_t>(detail::read_u16le(data + 2 * i));
    clip.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return clip;
}

// Writes 16-bit PCM mono. Values are quantized with round-to-nearest and
// clamped to the int16 range.
inline void write_wav(const std::string& path, const AudioClip& clip) {
  std::vector<unsigned char> out;
  const std::uint32_t data_size = static_cast<std::uint32_t>(clip.samples.size() * 2);
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::write_u32le(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  detail::write_u32le(out, 16);
  detail::write_u16le(out, 1);  // PCM
  detail::write_u16le(out, 1);  // mono
  detail::write_u32le(out, static_cast<std::uint32_t>(clip.sample_rate));
  detail::write_u32le(out, static_cast<std::uint32_t>(clip.sample_rate * 2));
  detail::write_u16le(out, 2);   // block align
  detail::write_u16le(out, 16);  // bits
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::write_u32le(out, data_size);
  for (double x : clip.samples) {
    long q = std::lround(x * 32768.0);
    q = std::max(-32768L, std::min(32767L, q));
    detail::write_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_wav: cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write_wav: write failed: " + path);
}

// y[0] = x[0]; y[t] = x[t] - coeff * x[t-1]
inline AudioClip pre_emphasis(const AudioClip& clip, double coeff) {
  if (coeff < 0.0 || coeff >= 1.0)
    throw std::invalid_argument("pre_emphasis: coeff must be in [0, 1)");
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.resize(clip.samples.size());
  if (clip.samples.empty()) return out;
  out.samples[0] = clip.samples[0];
  for (std::size_t t = 1; t < clip.samples.size(); ++t)
    out.samples[t] = clip.samples[t] - coeff * clip.samples[t - 1];
  return out;
}

inline std::vector<double> hamming_window(int length) {
  std::vector<double> w(length);
  if (length == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int k = 0; k < length; ++k)
    w[k] = 0.54 - 0.46 * std::cos(2.0 * kPi * k / (length - 1));
  return w;
}

// Raw frame blocking without windowing; frame i starts at sample i * shift.
inline std::vector<std::vector<double>> split_frames(const std::vector<double>& samples,
                                                     int frame_len, int frame_shift) {
  if (frame_len <= 0 || frame_shift <= 0 || frame_shift > frame_len)
    throw std::invalid_argument("split_frames: need frame_len >= frame_shift > 0");
  if (static_cast<int>(samples.size()) < frame_len)
    throw std::invalid_argument("split_frames: clip shorter than one frame");
  const std::size_t count =
      (samples.size() - static_cast<std::size_t>(frame_len)) / static_cast<std::size_t>(frame_shift) + 1;
  std::vector<std::vector<double>> frames(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t start = i * static_cast<std::size_t>(frame_shift);
    frames[i].assign(samples.begin() + static_cast<std::ptrdiff_t>(start),
                     samples.begin() + static_cast<std::ptrdiff_t>(start + frame_len));
  }
  return frames;
}

// Frame blocking followed by elementwise Hamming windowing.
inline FrameSequence frame_and_window(const AudioClip& clip, double frame_length_ms,
                                      double frame_shift_ms) {
  if (frame_shift_ms <= 0.0 || frame_length_ms < frame_shift_ms)
    throw std::invalid_argument("frame_and_window: need frame_length_ms >= frame_shift_ms > 0");
  const int len = frame_samples(frame_length_ms, clip.sample_rate);
  const int shift = frame_samples(frame_shift_ms, clip.sample_rate);
  FrameSequence seq;
  seq.frame_length_ms = frame_length_ms;
  seq.frame_shift_ms = frame_shift_ms;
  seq.sample_rate = clip.sample_rate;
  seq.frames = split_frames(clip.samples, len, shift);
  const std::vector<double> w = hamming_window(len);
  for (auto& frame : seq.frames)
    for (int k = 0; k < len; ++k) frame[k] *= w[k];
  return seq;
}

}  // namespace emorec
