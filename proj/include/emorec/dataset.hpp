#pragma once

// In-memory dataset: manifest metadata joined with extracted features.

#include <stdexcept>
#include <string>
#include <vector>

#include "emorec/audio.hpp"
#include "emorec/features.hpp"
#include "emorec/manifest.hpp"
#include "emorec/observation.hpp"
#include "emorec/util.hpp"

namespace emorec {

struct Utterance {
  ManifestRow meta;
  ObservationSequence obs;
  ProsodicTrack prosody;
};

using Dataset = std::vector<Utterance>;

inline Dataset filter_split(const Dataset& data, const std::string& split) {
  Dataset out;
  for (const auto& u : data)
    if (u.meta.split == split) out.push_back(u);
  return out;
}

// Loads WAVs referenced by the manifest (paths relative to base_dir) and
// runs the frontend. Rows whose split is neither train nor test are
// skipped. Parallel over utterances; output order matches the manifest.
inline Dataset load_dataset(const DatasetManifest& manifest, const std::string& base_dir,
                            const FeatureConfig& cfg, int jobs = 1) {
  std::vector<const ManifestRow*> wanted;
  for (const auto& r : manifest.rows)
    if (r.split == "train" || r.split == "test") wanted.push_back(&r);
  Dataset data(wanted.size());
  parallel_for(wanted.size(), jobs, [&](std::size_t i) {
    const ManifestRow& row = *wanted[i];
    const std::string full = base_dir.empty() ? row.path : base_dir + "/" + row.path;
    const AudioClip clip = load_wav(full);
    auto [obs, prosody] = extract_features(clip, cfg, row.path);
    data[i].meta = row;
    data[i].obs = std::move(obs);
    data[i].prosody = std::move(prosody);
  });
  return data;
}

}  // namespace emorec
