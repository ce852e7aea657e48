#pragma once

// Versioned text serialization for the model layers. All parameters are
// written at 17 significant digits so a save/load round trip reproduces
// scores. Transitions are stored in the probability domain; disallowed
// left-to-right entries are exact zeros.
//
// Layout:
//   emorec-model v1
//   layer <acoustic|suprasegmental>
//   num_states N
//   feature_dim D
//   transitions        (N rows of N probabilities)
//   state <i> components <K>
//   component <k> weight <w>
//   mean <D values>
//   variance <D values>
//   end

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "emorec/hmm.hpp"
#include "emorec/sphmm.hpp"
#include "emorec/util.hpp"

namespace emorec {

inline constexpr const char* kModelFormatVersion = "emorec-model v1";

namespace detail {

inline void write_row(std::ostream& out, const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out << " ";
    out << format_g17(v[i]);
  }
  out << "\n";
}

inline std::vector<double> read_row(std::istream& in, std::size_t expected, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(std::string("model load: missing ") + what);
  std::istringstream ss(line);
  std::vector<double> v;
  double x;
  while (ss >> x) v.push_back(x);
  if (v.size() != expected)
    throw std::runtime_error(std::string("model load: bad width for ") + what);
  return v;
}

inline std::string expect_token(std::istream& in, const std::string& token) {
  std::string word;
  if (!(in >> word) || word != token)
    throw std::runtime_error("model load: expected '" + token + "', got '" + word + "'");
  return word;
}

}  // namespace detail

inline void save_hmm(std::ostream& out, const Hmm& hmm, const std::string& layer) {
  out << kModelFormatVersion << "\n";
  out << "layer " << layer << "\n";
  out << "num_states " << hmm.num_states << "\n";
  out << "feature_dim " << hmm.feature_dim << "\n";
  out << "transitions\n";
  for (int i = 0; i < hmm.num_states; ++i) {
    std::vector<double> row(static_cast<std::size_t>(hmm.num_states));
    for (int j = 0; j < hmm.num_states; ++j) {
      const double la = hmm.log_a(i, j);
      row[static_cast<std::size_t>(j)] = la == kNegInf ? 0.0 : std::exp(la);
    }
    detail::write_row(out, row);
  }
  for (int s = 0; s < hmm.num_states; ++s) {
    const auto& mix = hmm.states[static_cast<std::size_t>(s)];
    out << "state " << s << " components " << mix.num_components() << "\n";
    for (int k = 0; k < mix.num_components(); ++k) {
      out << "component " << k << " weight " << format_g17(mix.weights()[static_cast<std::size_t>(k)])
          << "\n";
      out << "mean ";
      detail::write_row(out, mix.mean(k));
      out << "variance ";
      detail::write_row(out, mix.variance(k));
    }
  }
  out << "end\n";
}

inline void save_hmm(const std::string& path, const Hmm& hmm, const std::string& layer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_hmm: cannot open for writing: " + path);
  save_hmm(out, hmm, layer);
}

struct LoadedModel {
  Hmm hmm;
  std::string layer;
};

inline LoadedModel load_hmm(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kModelFormatVersion)
    throw std::runtime_error("load_hmm: unsupported model format version");
  LoadedModel loaded;
  detail::expect_token(in, "layer");
  in >> loaded.layer;
  detail::expect_token(in, "num_states");
  in >> loaded.hmm.num_states;
  detail::expect_token(in, "feature_dim");
  in >> loaded.hmm.feature_dim;
  if (loaded.hmm.num_states < 1 || loaded.hmm.feature_dim < 1)
    throw std::runtime_error("load_hmm: invalid model sizes");
  detail::expect_token(in, "transitions");
  std::getline(in, line);  // consume end of line
  const int n = loaded.hmm.num_states;
  loaded.hmm.log_trans.assign(static_cast<std::size_t>(n) * n, kNegInf);
  for (int i = 0; i < n; ++i) {
    const auto row = detail::read_row(in, static_cast<std::size_t>(n), "transition row");
    for (int j = 0; j < n; ++j)
      loaded.hmm.set_log_a(i, j, row[static_cast<std::size_t>(j)] > 0.0
                                     ? std::log(row[static_cast<std::size_t>(j)])
                                     : kNegInf);
  }
  loaded.hmm.states.resize(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    detail::expect_token(in, "state");
    int idx = -1, k = 0;
    in >> idx;
    detail::expect_token(in, "components");
    in >> k;
    if (idx != s || k < 1) throw std::runtime_error("load_hmm: malformed state header");
    std::vector<double> weights(static_cast<std::size_t>(k));
    std::vector<std::vector<double>> means(static_cast<std::size_t>(k));
    std::vector<std::vector<double>> vars(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
      detail::expect_token(in, "component");
      int ci = -1;
      in >> ci;
      if (ci != c) throw std::runtime_error("load_hmm: component index out of order");
      detail::expect_token(in, "weight");
      in >> weights[static_cast<std::size_t>(c)];
      detail::expect_token(in, "mean");
      std::getline(in, line);
      {
        std::istringstream ss(line);
        double x;
        while (ss >> x) means[static_cast<std::size_t>(c)].push_back(x);
      }
      detail::expect_token(in, "variance");
      std::getline(in, line);
      {
        std::istringstream ss(line);
        double x;
        while (ss >> x) vars[static_cast<std::size_t>(c)].push_back(x);
      }
      if (static_cast<int>(means[static_cast<std::size_t>(c)].size()) != loaded.hmm.feature_dim ||
          static_cast<int>(vars[static_cast<std::size_t>(c)].size()) != loaded.hmm.feature_dim)
        throw std::runtime_error("load_hmm: component width mismatch");
    }
    loaded.hmm.states[static_cast<std::size_t>(s)] =
        GaussianMixture(std::move(weights), std::move(means), std::move(vars));
  }
  detail::expect_token(in, "end");
  return loaded;
}

inline LoadedModel load_hmm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_hmm: cannot open: " + path);
  return load_hmm(in);
}

inline void save_acoustic(const std::string& path, const Hmm& hmm) {
  save_hmm(path, hmm, "acoustic");
}

inline Hmm load_acoustic(const std::string& path) {
  LoadedModel m = load_hmm(path);
  if (m.layer != "acoustic")
    throw std::runtime_error("load_acoustic: wrong layer tag in " + path);
  return std::move(m.hmm);
}

inline void save_suprasegmental(const std::string& path, const SuprasegmentalHmm& psi) {
  save_hmm(path, psi.chain, "suprasegmental");
}

inline SuprasegmentalHmm load_suprasegmental(const std::string& path) {
  LoadedModel m = load_hmm(path);
  if (m.layer != "suprasegmental")
    throw std::runtime_error("load_suprasegmental: wrong layer tag in " + path);
  return SuprasegmentalHmm{std::move(m.hmm)};
}

}  // namespace emorec
