#pragma once

// Carrier types for per-utterance feature streams.

#include <cstddef>
#include <string>
#include <vector>

namespace emorec {

// Ordered sequence of fixed-dimension feature vectors for one utterance.
// The default frontend produces 16 dimensions: 8 static cepstra followed
// by their 8 regression deltas.
struct ObservationSequence {
  std::string utterance_id;
  std::vector<std::vector<double>> vectors;

  std::size_t size() const { return vectors.size(); }
  bool empty() const { return vectors.empty(); }
  int dim() const { return vectors.empty() ? 0 : static_cast<int>(vectors.front().size()); }
};

struct ProsodicFrame {
  bool voiced = false;
  double f0_hz = 0.0;  // valid only when voiced
  double log_energy = 0.0;
};

// Frame-synchronous pitch/energy track; same length as the observation
// sequence it accompanies. frame_period_s converts frame indices to time
// for slope features.
struct ProsodicTrack {
  std::vector<ProsodicFrame> frames;
  double frame_period_s = 0.005;

  std::size_t size() const { return frames.size(); }
};

}  // namespace emorec
