#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <utility>
#include <vector>

#include "emorec/sphmm.hpp"
#include "oracles.hpp"

using namespace emorec;

namespace {

// 3-state chain whose states strongly prefer values near their index, so
// a monotone 1-D ramp aligns to even thirds.
Hmm ramp_acoustic() {
  Hmm hmm;
  hmm.num_states = 3;
  hmm.feature_dim = 1;
  hmm.log_trans.assign(9, kNegInf);
  hmm.set_log_a(0, 0, std::log(0.5));
  hmm.set_log_a(0, 1, std::log(0.5));
  hmm.set_log_a(1, 1, std::log(0.5));
  hmm.set_log_a(1, 2, std::log(0.5));
  hmm.set_log_a(2, 2, 0.0);
  for (int s = 0; s < 3; ++s)
    hmm.states.push_back(GaussianMixture({1.0}, {{static_cast<double>(s)}}, {{0.05}}));
  return hmm;
}

// one-state-only chain: every frame stays in the entry state
Hmm stuck_acoustic() {
  Hmm hmm;
  hmm.num_states = 3;
  hmm.feature_dim = 1;
  hmm.log_trans.assign(9, kNegInf);
  hmm.set_log_a(0, 0, 0.0);
  hmm.set_log_a(1, 1, std::log(0.5));
  hmm.set_log_a(1, 2, std::log(0.5));
  hmm.set_log_a(2, 2, 0.0);
  for (int s = 0; s < 3; ++s)
    hmm.states.push_back(GaussianMixture({1.0}, {{0.0}}, {{1.0}}));
  return hmm;
}

ObservationSequence ramp_obs(int frames) {
  ObservationSequence obs;
  obs.utterance_id = "ramp";
  for (int t = 0; t < frames; ++t)
    obs.vectors.push_back({2.999 * t / (frames - 1) - 0.4999});  // thirds near 0,1,2
  return obs;
}

ProsodicTrack constant_track(int frames, double f0, double log_energy) {
  ProsodicTrack track;
  track.frame_period_s = 0.005;
  track.frames.assign(static_cast<std::size_t>(frames), ProsodicFrame{true, f0, log_energy});
  return track;
}

}  // namespace

TEST_CASE("degenerate alignment leaves later regions empty") {
  const Hmm acoustic = stuck_acoustic();
  const int frames = 12;
  Rng rng(3);
  const ObservationSequence obs = oracle::random_obs(rng, frames, 1);
  const SummaryVectorSequence seq =
      to_suprasegmental(acoustic, obs, constant_track(frames, 150.0, 0.5), 3);
  REQUIRE(seq.size() == 3);
  REQUIRE(seq.regions[0].duration_fraction == 1.0);
  for (int r = 1; r < 3; ++r) {
    REQUIRE(seq.regions[static_cast<std::size_t>(r)].duration_fraction == 0.0);
    REQUIRE(seq.regions[static_cast<std::size_t>(r)].mean_log_f0 == 0.0);
    REQUIRE(seq.regions[static_cast<std::size_t>(r)].mean_log_energy == 0.0);
  }
}

TEST_CASE("constant prosody with a balanced alignment") {
  const Hmm acoustic = ramp_acoustic();
  const int frames = 12;
  const ObservationSequence obs = ramp_obs(frames);
  const SummaryVectorSequence seq =
      to_suprasegmental(acoustic, obs, constant_track(frames, 150.0, -1.25), 3);
  for (const auto& region : seq.regions) {
    REQUIRE(region.duration_fraction > 0.0);
    REQUIRE_THAT(region.mean_log_f0, Catch::Matchers::WithinAbs(std::log(150.0), 1e-12));
    REQUIRE_THAT(region.mean_log_energy, Catch::Matchers::WithinAbs(-1.25, 1e-12));
    REQUIRE(region.f0_slope == 0.0);
    REQUIRE(region.energy_slope == 0.0);
    REQUIRE(region.voiced_fraction == 1.0);
  }
}

TEST_CASE("summaries match an independent recomputation from the alignment") {
  const Hmm acoustic = ramp_acoustic();
  Rng rng(7);
  const int frames = 30;
  ObservationSequence obs = ramp_obs(frames);
  for (auto& v : obs.vectors) v[0] += 0.05 * rng.normal();
  ProsodicTrack track;
  track.frame_period_s = 0.005;
  for (int t = 0; t < frames; ++t) {
    ProsodicFrame f;
    f.voiced = rng.uniform() < 0.8;
    f.f0_hz = 140.0 + 10.0 * rng.normal();
    f.log_energy = -1.0 + 0.2 * rng.normal();
    track.frames.push_back(f);
  }
  const SummaryVectorSequence seq = to_suprasegmental(acoustic, obs, track, 3);

  const ViterbiResult vit = viterbi(acoustic, obs);
  for (int r = 0; r < 3; ++r) {
    std::vector<double> tv, lf0, ta, le;
    int count = 0, voiced = 0;
    for (int t = 0; t < frames; ++t) {
      if (vit.path[static_cast<std::size_t>(t)] != r) continue;
      ++count;
      ta.push_back(t * 0.005);
      le.push_back(track.frames[static_cast<std::size_t>(t)].log_energy);
      if (track.frames[static_cast<std::size_t>(t)].voiced) {
        ++voiced;
        tv.push_back(t * 0.005);
        lf0.push_back(std::log(track.frames[static_cast<std::size_t>(t)].f0_hz));
      }
    }
    REQUIRE(count > 0);
    const auto& region = seq.regions[static_cast<std::size_t>(r)];
    double mf0 = 0.0;
    for (double v : lf0) mf0 += v;
    if (!lf0.empty()) mf0 /= static_cast<double>(lf0.size());
    double mle = 0.0;
    for (double v : le) mle += v;
    mle /= static_cast<double>(count);
    REQUIRE_THAT(region.mean_log_f0, Catch::Matchers::WithinAbs(mf0, 1e-9));
    REQUIRE_THAT(region.mean_log_energy, Catch::Matchers::WithinAbs(mle, 1e-9));
    REQUIRE_THAT(region.voiced_fraction,
                 Catch::Matchers::WithinAbs(static_cast<double>(voiced) / count, 1e-12));
    REQUIRE_THAT(region.duration_fraction,
                 Catch::Matchers::WithinAbs(static_cast<double>(count) / frames, 1e-12));
    REQUIRE_THAT(region.f0_slope, Catch::Matchers::WithinAbs(ols_slope(tv, lf0), 1e-9));
    REQUIRE_THAT(region.energy_slope, Catch::Matchers::WithinAbs(ols_slope(ta, le), 1e-9));
  }

  double total = 0.0;
  for (const auto& region : seq.regions) total += region.duration_fraction;
  REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("to_suprasegmental validates its input") {
  const Hmm acoustic = ramp_acoustic();
  const ObservationSequence obs = ramp_obs(9);
  REQUIRE_THROWS_AS(to_suprasegmental(acoustic, obs, constant_track(5, 100.0, 0.0), 3),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(to_suprasegmental(acoustic, obs, constant_track(9, 100.0, 0.0), 2),
                    std::invalid_argument);
}

namespace {

std::vector<std::pair<ObservationSequence, ProsodicTrack>> fixed_summary_corpus(int utterances) {
  // every utterance aligns to even thirds with distinct prosody per third
  std::vector<std::pair<ObservationSequence, ProsodicTrack>> data;
  for (int u = 0; u < utterances; ++u) {
    const int frames = 12;
    ObservationSequence obs = ramp_obs(frames);
    obs.utterance_id = "u" + std::to_string(u);
    ProsodicTrack track;
    track.frame_period_s = 0.005;
    for (int t = 0; t < frames; ++t) {
      const int third = std::min(2, 3 * t / frames);
      ProsodicFrame f;
      f.voiced = true;
      f.f0_hz = 100.0 + 40.0 * third;
      f.log_energy = -1.0 + 0.5 * third;
      track.frames.push_back(f);
    }
    data.emplace_back(std::move(obs), std::move(track));
  }
  return data;
}

}  // namespace

TEST_CASE("training on identical summaries concentrates and forces transitions") {
  const Hmm acoustic = ramp_acoustic();
  const auto data = fixed_summary_corpus(8);
  TrainOptions opt;
  opt.num_states = 3;
  opt.num_mixtures = 1;
  opt.max_iters = 10;
  opt.seed = 5;
  const SuprasegmentalHmm psi = train_suprasegmental(data, acoustic, opt);

  REQUIRE_THAT(std::exp(psi.chain.log_a(0, 1)), Catch::Matchers::WithinAbs(1.0, 1e-9));
  REQUIRE_THAT(std::exp(psi.chain.log_a(1, 2)), Catch::Matchers::WithinAbs(1.0, 1e-9));

  const SummaryVectorSequence s = to_suprasegmental(acoustic, data[0].first, data[0].second, 3);
  // point-mass fit: every variance at its floor
  for (int r = 0; r < 3; ++r) {
    const auto& mix = psi.chain.states[static_cast<std::size_t>(r)];
    const auto vec = s.regions[static_cast<std::size_t>(r)].as_vector();
    for (int d = 0; d < SummaryVector::kDim; ++d)
      REQUIRE_THAT(mix.mean(0)[static_cast<std::size_t>(d)],
                   Catch::Matchers::WithinAbs(vec[static_cast<std::size_t>(d)], 1e-9));
  }

  // forced-path closed form: per-state mode densities plus the two
  // transition terms (which are log 1 = 0 here)
  double expected = 0.0;
  for (int r = 0; r < 3; ++r)
    expected += psi.chain.states[static_cast<std::size_t>(r)].log_pdf(
        s.regions[static_cast<std::size_t>(r)].as_vector());
  expected += psi.chain.log_a(0, 1) + psi.chain.log_a(1, 2);
  REQUIRE_THAT(supra_log_likelihood(psi, s), Catch::Matchers::WithinAbs(expected, 1e-9));

  // repeated evaluation is bit-stable
  REQUIRE(supra_log_likelihood(psi, s) == supra_log_likelihood(psi, s));
}

TEST_CASE("supra likelihood equals enumeration over the three-state chain") {
  Rng rng(11);
  const Hmm chain = oracle::random_ltr_hmm(rng, 3, SummaryVector::kDim, 1);
  SuprasegmentalHmm psi{chain};
  SummaryVectorSequence s;
  s.regions.resize(3);
  for (auto& region : s.regions) {
    region.mean_log_f0 = rng.uniform(4.0, 6.0);
    region.f0_slope = rng.uniform(-1.0, 1.0);
    region.voiced_fraction = rng.uniform();
    region.mean_log_energy = rng.uniform(-2.0, 0.0);
    region.energy_slope = rng.uniform(-1.0, 1.0);
    region.duration_fraction = 1.0 / 3;
  }
  REQUIRE_THAT(supra_log_likelihood(psi, s),
               Catch::Matchers::WithinAbs(oracle::enumerated_forward(chain, s.as_observations()),
                                          1e-9));
}

TEST_CASE("two-cluster summaries are recovered by a two-mixture chain") {
  const Hmm acoustic = ramp_acoustic();
  std::vector<std::pair<ObservationSequence, ProsodicTrack>> data;
  Rng rng(13);
  for (int u = 0; u < 40; ++u) {
    const int frames = 12;
    const double cluster_f0 = (u % 2 == 0) ? 110.0 : 190.0;
    ObservationSequence obs = ramp_obs(frames);
    obs.utterance_id = "u" + std::to_string(u);
    ProsodicTrack track;
    track.frame_period_s = 0.005;
    for (int t = 0; t < frames; ++t) {
      ProsodicFrame f;
      f.voiced = true;
      f.f0_hz = cluster_f0 + 1.5 * rng.normal();
      f.log_energy = -1.0;
      track.frames.push_back(f);
    }
    data.emplace_back(std::move(obs), std::move(track));
  }
  TrainOptions opt;
  opt.num_states = 3;
  opt.num_mixtures = 2;
  opt.max_iters = 15;
  opt.seed = 9;
  const SuprasegmentalHmm psi = train_suprasegmental(data, acoustic, opt);
  for (int r = 0; r < 3; ++r) {
    const auto& mix = psi.chain.states[static_cast<std::size_t>(r)];
    REQUIRE(mix.num_components() == 2);
    std::vector<double> f0_means = {mix.mean(0)[0], mix.mean(1)[0]};
    std::sort(f0_means.begin(), f0_means.end());
    REQUIRE_THAT(f0_means[0], Catch::Matchers::WithinAbs(std::log(110.0), 0.1));
    REQUIRE_THAT(f0_means[1], Catch::Matchers::WithinAbs(std::log(190.0), 0.1));
  }
}

TEST_CASE("training rejects empty data") {
  TrainOptions opt;
  REQUIRE_THROWS_AS(train_suprasegmental({}, ramp_acoustic(), opt), std::invalid_argument);
}

TEST_CASE("fusion endpoints are exact and the middle is the mean") {
  const Hmm acoustic = ramp_acoustic();
  const auto data = fixed_summary_corpus(6);
  TrainOptions opt;
  opt.num_states = 3;
  opt.num_mixtures = 1;
  opt.max_iters = 6;
  opt.seed = 3;
  const SuprasegmentalHmm psi = train_suprasegmental(data, acoustic, opt);
  const auto& [obs, track] = data[2];

  const double l_ac = forward_log_likelihood(acoustic, obs) / static_cast<double>(obs.size());
  const double l_pr =
      supra_log_likelihood(psi, to_suprasegmental(acoustic, obs, track, 3)) / 3.0;

  REQUIRE(fused_log_score(acoustic, psi, obs, track, FusionWeight(0.0)) == l_ac);
  REQUIRE(fused_log_score(acoustic, psi, obs, track, FusionWeight(1.0)) == l_pr);
  REQUIRE_THAT(fused_log_score(acoustic, psi, obs, track, FusionWeight(0.5)),
               Catch::Matchers::WithinAbs(0.5 * (l_ac + l_pr), 1e-12));

  for (int i = 0; i <= 10; ++i) {
    const double alpha = i / 10.0;
    REQUIRE_THAT(fused_log_score(acoustic, psi, obs, track, FusionWeight(alpha)),
                 Catch::Matchers::WithinAbs(l_ac + alpha * (l_pr - l_ac), 1e-12));
  }
}

TEST_CASE("fusion weight validation and regimes") {
  REQUIRE_THROWS_AS(FusionWeight(-0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(FusionWeight(1.1), std::invalid_argument);
  REQUIRE(classify_alpha_regime(FusionWeight(0.0)) == AlphaRegime::kAcousticOnly);
  REQUIRE(classify_alpha_regime(FusionWeight(0.25)) == AlphaRegime::kAcousticBiased);
  REQUIRE(classify_alpha_regime(FusionWeight(0.5)) == AlphaRegime::kUnbiased);
  REQUIRE(classify_alpha_regime(FusionWeight(0.9)) == AlphaRegime::kProsodicBiased);
  REQUIRE(classify_alpha_regime(FusionWeight(1.0)) == AlphaRegime::kProsodicOnly);
  REQUIRE(std::string(to_string(AlphaRegime::kUnbiased)) == "unbiased");
}
