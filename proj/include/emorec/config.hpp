#pragma once

// Run-wide configuration with the standard defaults: 9 acoustic states
// with 10 mixtures, 3 suprasegmental states, fusion weight 0.5, 30 ms
// frames every 5 ms. Every field is overridable from the command line.

#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include "emorec/features.hpp"
#include "emorec/hmm.hpp"
#include "emorec/util.hpp"

namespace emorec {

struct RunConfig {
  FeatureConfig features;

  int num_states = 9;
  int acoustic_mixtures = 10;
  int supra_states = 3;
  int supra_mixtures = 3;
  int max_iters = 20;
  double rel_tol = 1e-4;
  std::uint64_t seed = 1;
  double alpha = 0.5;
  int jobs = 1;

  std::string manifest_path;
  std::string model_dir;
  std::string report_dir;

  TrainOptions acoustic_options() const {
    TrainOptions opt;
    opt.num_states = num_states;
    opt.num_mixtures = acoustic_mixtures;
    opt.max_iters = max_iters;
    opt.rel_tol = rel_tol;
    opt.seed = seed;
    return opt;
  }

  // flat key=value view, used for report echoes and the model-dir metadata
  std::map<std::string, std::string> echo() const {
    std::map<std::string, std::string> kv;
    kv["frame_length_ms"] = format_g17(features.frame_length_ms);
    kv["frame_shift_ms"] = format_g17(features.frame_shift_ms);
    kv["pre_emphasis_enabled"] = features.pre_emphasis_enabled ? "1" : "0";
    kv["pre_emphasis_coeff"] = format_g17(features.pre_emphasis_coeff);
    kv["mel_channels"] = std::to_string(features.mel_channels);
    kv["fft_size"] = std::to_string(features.fft_size);
    kv["num_cepstra"] = std::to_string(features.num_cepstra);
    kv["delta_half_window"] = std::to_string(features.delta_half_window);
    kv["f0_min_hz"] = format_g17(features.f0_min_hz);
    kv["f0_max_hz"] = format_g17(features.f0_max_hz);
    kv["voicing_threshold"] = format_g17(features.voicing_threshold);
    kv["num_states"] = std::to_string(num_states);
    kv["acoustic_mixtures"] = std::to_string(acoustic_mixtures);
    kv["supra_states"] = std::to_string(supra_states);
    kv["supra_mixtures"] = std::to_string(supra_mixtures);
    kv["max_iters"] = std::to_string(max_iters);
    kv["rel_tol"] = format_g17(rel_tol);
    kv["seed"] = std::to_string(seed);
    kv["alpha"] = format_g17(alpha);
    return kv;
  }

  void apply(const std::map<std::string, std::string>& kv) {
    const auto get = [&](const char* key) -> const std::string* {
      const auto it = kv.find(key);
      return it == kv.end() ? nullptr : &it->second;
    };
    if (const auto* v = get("frame_length_ms")) features.frame_length_ms = std::stod(*v);
    if (const auto* v = get("frame_shift_ms")) features.frame_shift_ms = std::stod(*v);
    if (const auto* v = get("pre_emphasis_enabled")) features.pre_emphasis_enabled = *v != "0";
    if (const auto* v = get("pre_emphasis_coeff")) features.pre_emphasis_coeff = std::stod(*v);
    if (const auto* v = get("mel_channels")) features.mel_channels = std::stoi(*v);
    if (const auto* v = get("fft_size")) features.fft_size = std::stoi(*v);
    if (const auto* v = get("num_cepstra")) features.num_cepstra = std::stoi(*v);
    if (const auto* v = get("delta_half_window")) features.delta_half_window = std::stoi(*v);
    if (const auto* v = get("f0_min_hz")) features.f0_min_hz = std::stod(*v);
    if (const auto* v = get("f0_max_hz")) features.f0_max_hz = std::stod(*v);
    if (const auto* v = get("voicing_threshold")) features.voicing_threshold = std::stod(*v);
    if (const auto* v = get("num_states")) num_states = std::stoi(*v);
    if (const auto* v = get("acoustic_mixtures")) acoustic_mixtures = std::stoi(*v);
    if (const auto* v = get("supra_states")) supra_states = std::stoi(*v);
    if (const auto* v = get("supra_mixtures")) supra_mixtures = std::stoi(*v);
    if (const auto* v = get("max_iters")) max_iters = std::stoi(*v);
    if (const auto* v = get("rel_tol")) rel_tol = std::stod(*v);
    if (const auto* v = get("seed")) seed = std::stoull(*v);
    if (const auto* v = get("alpha")) alpha = std::stod(*v);
    if (const auto* v = get("jobs")) jobs = std::stoi(*v);
  }
};

// Flat key=value configuration file; '#' starts a comment line. Keys use
// the same names as the model-dir metadata and report config echoes.
inline std::map<std::string, std::string> read_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_flat_config: cannot open: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("read_flat_config: expected key=value at line " +
                               std::to_string(line_no) + " of " + path);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace emorec
