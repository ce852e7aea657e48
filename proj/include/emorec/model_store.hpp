#pragma once

// On-disk layout for a trained system: per-model text files plus a
// metadata file carrying the training configuration and emotion list so
// evaluation reuses the exact frontend settings.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "emorec/config.hpp"
#include "emorec/model_io.hpp"
#include "emorec/pipeline.hpp"

namespace emorec {

inline constexpr const char* kMetaFormatVersion = "emorec-meta v1";

struct TrainedSystem {
  GenderModels genders;
  EmotionModelSet emotions;
  PooledEmotionModels pooled;
  std::vector<std::string> emotion_list;
};

inline void save_models(const TrainedSystem& system, const RunConfig& cfg,
                        const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream meta(fs::path(dir) / "models.meta");
    if (!meta) throw std::runtime_error("save_models: cannot write models.meta");
    meta << "# " << kMetaFormatVersion << "\n";
    std::string emotions;
    for (const auto& e : system.emotion_list) {
      if (!emotions.empty()) emotions += ",";
      emotions += e;
    }
    meta << "emotions=" << emotions << "\n";
    for (const auto& [key, value] : cfg.echo()) meta << key << "=" << value << "\n";
  }
  for (const auto& [gender, hmm] : system.genders.models)
    save_acoustic((fs::path(dir) / ("gender_" + gender + ".hmm")).string(), hmm);
  for (const auto& [gender, bank] : system.emotions.cells)
    for (const auto& [emotion, model] : bank) {
      const std::string stem = "emotion_" + gender + "_" + emotion;
      save_acoustic((fs::path(dir) / (stem + ".acoustic.hmm")).string(), model.acoustic);
      save_suprasegmental((fs::path(dir) / (stem + ".supra.hmm")).string(), model.supra);
    }
  for (const auto& [emotion, model] : system.pooled.models) {
    const std::string stem = "pooled_" + emotion;
    save_acoustic((fs::path(dir) / (stem + ".acoustic.hmm")).string(), model.acoustic);
    save_suprasegmental((fs::path(dir) / (stem + ".supra.hmm")).string(), model.supra);
  }
}

inline std::map<std::string, std::string> load_meta(const std::string& dir) {
  std::ifstream meta(std::filesystem::path(dir) / "models.meta");
  if (!meta) throw std::runtime_error("load_meta: cannot open models.meta in " + dir);
  std::string line;
  if (!std::getline(meta, line) || line != std::string("# ") + kMetaFormatVersion)
    throw std::runtime_error("load_meta: unsupported metadata version");
  std::map<std::string, std::string> kv;
  while (std::getline(meta, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("load_meta: malformed line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

inline TrainedSystem load_models(const std::string& dir) {
  namespace fs = std::filesystem;
  const auto kv = load_meta(dir);
  const auto it = kv.find("emotions");
  if (it == kv.end()) throw std::runtime_error("load_models: metadata lacks emotion list");
  TrainedSystem system;
  std::stringstream ss(it->second);
  std::string emotion;
  while (std::getline(ss, emotion, ',')) system.emotion_list.push_back(emotion);

  for (const auto& gender : gender_labels())
    system.genders.models[gender] =
        load_acoustic((fs::path(dir) / ("gender_" + gender + ".hmm")).string());
  for (const auto& gender : gender_labels())
    for (const auto& e : system.emotion_list) {
      const std::string stem = "emotion_" + gender + "_" + e;
      EmotionModel model;
      model.acoustic = load_acoustic((fs::path(dir) / (stem + ".acoustic.hmm")).string());
      model.supra = load_suprasegmental((fs::path(dir) / (stem + ".supra.hmm")).string());
      system.emotions.cells[gender][e] = std::move(model);
    }
  for (const auto& e : system.emotion_list) {
    const std::string stem = "pooled_" + e;
    EmotionModel model;
    model.acoustic = load_acoustic((fs::path(dir) / (stem + ".acoustic.hmm")).string());
    model.supra = load_suprasegmental((fs::path(dir) / (stem + ".supra.hmm")).string());
    system.pooled.models[e] = std::move(model);
  }
  return system;
}

}  // namespace emorec
