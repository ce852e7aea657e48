// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Criteria 1-5 check the numeric core against
// independent oracles; 6-7 replicate the experimental protocol on seeded
// synthetic corpora; 8 checks the significance test; 9 drives the
// command-line tool end to end; 10 checks the corpus accounting.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "emorec/emorec.hpp"
#include "emorec/model_store.hpp"
#include "oracles.hpp"

using namespace emorec;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail = "") {
  std::printf("%s criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", index, name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run_criterion(int index, const std::string& name, const std::function<bool(std::string&)>& fn) {
  std::string detail;
  bool pass = false;
  try {
    pass = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(index, name, pass, detail);
}

double elapsed_s(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- shared corpora and trained systems -------------------------------

struct System {
  Dataset train, test;
  std::vector<std::string> emotions;
  GenderModels genders;
  EmotionModelSet set;
  PooledEmotionModels pooled;
};

System train_system(const SynthSpec& spec) {
  System sys;
  const FeatureCorpus corpus = generate_feature_corpus(spec);
  sys.train = filter_split(corpus.data, "train");
  sys.test = filter_split(corpus.data, "test");
  sys.emotions = {"anger", "disgust", "fear", "happiness", "neutral", "sadness"};
  PipelineTrainConfig cfg;
  cfg.acoustic.num_states = 9;
  cfg.acoustic.num_mixtures = 2;
  cfg.acoustic.max_iters = 12;
  cfg.acoustic.seed = 11;
  cfg.supra_states = 3;
  cfg.supra_mixtures = 1;
  sys.genders = train_gender_models(sys.train, cfg);
  sys.set = train_emotion_models(sys.train, sys.emotions, cfg);
  sys.pooled = train_pooled_emotion_models(sys.train, sys.emotions, cfg);
  return sys;
}

// ---- criteria ----------------------------------------------------------

bool forward_oracle_equivalence(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(10000 + seed);
    const int states = 1 + static_cast<int>(rng.index(3));
    const int dim = 1 + static_cast<int>(rng.index(2));
    const int frames = 1 + static_cast<int>(rng.index(5));
    const Hmm hmm = oracle::random_ltr_hmm(rng, states, dim, 1 + static_cast<int>(rng.index(2)));
    const ObservationSequence obs = oracle::random_obs(rng, frames, dim);
    const double diff =
        std::abs(forward_log_likelihood(hmm, obs) - oracle::enumerated_forward(hmm, obs));
    worst = std::max(worst, diff);
  }
  const double seconds = elapsed_s(start);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "200 models, max |diff| = %.3g, %.2f s", worst, seconds);
  detail = buf;
  return worst <= 1e-9 && seconds < 30.0;
}

bool viterbi_oracle_equivalence(std::string& detail) {
  double worst = 0.0;
  int path_mismatches = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(20000 + seed);
    const int states = 1 + static_cast<int>(rng.index(3));
    const int dim = 1 + static_cast<int>(rng.index(2));
    const int frames = 1 + static_cast<int>(rng.index(5));
    const Hmm hmm = oracle::random_ltr_hmm(rng, states, dim, 1 + static_cast<int>(rng.index(2)));
    const ObservationSequence obs = oracle::random_obs(rng, frames, dim);
    const ViterbiResult got = viterbi(hmm, obs);
    const auto [path, score] = oracle::enumerated_viterbi(hmm, obs);
    if (got.path != path) ++path_mismatches;
    worst = std::max(worst, std::abs(got.log_score - score));
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "200 models, %d path mismatches, max score |diff| = %.3g",
                path_mismatches, worst);
  detail = buf;
  return path_mismatches == 0 && worst <= 1e-9;
}

bool em_monotonicity(std::string& detail) {
  int runs = 0;
  double worst_drop = 0.0;
  // acoustic runs over random generative corpora
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    Rng rng(30000 + seed);
    const int dim = 2;
    std::vector<ObservationSequence> data;
    for (int u = 0; u < 10; ++u) data.push_back(oracle::random_obs(rng, 24, dim));
    // inject loose cluster structure so mixtures have something to fit
    for (auto& seq : data)
      for (std::size_t t = 0; t < seq.size(); ++t)
        seq.vectors[t][0] += 3.0 * static_cast<double>(t) / static_cast<double>(seq.size());
    TrainOptions opt;
    opt.num_states = 2 + static_cast<int>(seed % 2);
    opt.num_mixtures = 1 + static_cast<int>(seed % 2);
    opt.max_iters = 12;
    opt.rel_tol = 0.0;
    opt.seed = 77 + seed;
    TrainStats stats;
    baum_welch_train(data, opt, &stats);
    ++runs;
    for (std::size_t i = 1; i < stats.log_likelihood.size(); ++i)
      worst_drop = std::max(worst_drop, stats.log_likelihood[i - 1] - stats.log_likelihood[i]);
  }
  // suprasegmental runs on feature-tier utterances
  const SynthSpec spec = separable_preset(31);
  const FeatureCorpus corpus = generate_feature_corpus(spec);
  PipelineTrainConfig cfg;
  cfg.acoustic.num_states = 9;
  cfg.acoustic.num_mixtures = 1;
  cfg.acoustic.max_iters = 6;
  cfg.acoustic.seed = 3;
  Dataset train = filter_split(corpus.data, "train");
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Dataset subset;
    const std::string gender = seed % 2 == 0 ? "male" : "female";
    const std::string emotion = spec.emotions[seed % spec.emotions.size()];
    for (const auto& u : train)
      if (u.meta.gender == gender && u.meta.emotion == emotion) subset.push_back(u);
    std::vector<ObservationSequence> seqs;
    for (const auto& u : subset) seqs.push_back(u.obs);
    TrainOptions ac = cfg.acoustic;
    ac.seed = 100 + seed;
    const Hmm acoustic = baum_welch_train(seqs, ac);
    std::vector<std::pair<ObservationSequence, ProsodicTrack>> pairs;
    for (const auto& u : subset) pairs.emplace_back(u.obs, u.prosody);
    TrainOptions su;
    su.num_states = 3;
    su.num_mixtures = 2;
    su.max_iters = 12;
    su.rel_tol = 0.0;
    su.seed = 200 + seed;
    TrainStats stats;
    train_suprasegmental(pairs, acoustic, su, &stats);
    ++runs;
    for (std::size_t i = 1; i < stats.log_likelihood.size(); ++i)
      worst_drop = std::max(worst_drop, stats.log_likelihood[i - 1] - stats.log_likelihood[i]);
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d training runs, worst per-iteration drop = %.3g", runs,
                worst_drop);
  detail = buf;
  return runs == 20 && worst_drop <= 1e-6;
}

bool mfcc_correctness(std::string& detail) {
  Rng rng(40000);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> y(24);
    for (auto& v : y) v = std::exp(rng.uniform(-3.0, 3.0));
    const auto got = mfcc(y, 8);
    for (int n = 1; n <= 8; ++n) {
      double want = 0.0;
      for (int m = 1; m <= 24; ++m)
        want += std::log(y[static_cast<std::size_t>(m - 1)]) * std::cos(kPi * n * (m - 0.5) / 24.0);
      worst = std::max(worst, std::abs(got[static_cast<std::size_t>(n - 1)] - want));
    }
  }
  double worst_const = 0.0;
  for (double c : mfcc(std::vector<double>(24, 2.5), 8))
    worst_const = std::max(worst_const, std::abs(c));
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |diff| = %.3g, constant-input max |C| = %.3g", worst,
                worst_const);
  detail = buf;
  return worst <= 1e-12 && worst_const <= 1e-12;
}

bool fusion_identities(const System& sys, std::string& detail) {
  int checked = 0, exact_failures = 0, affine_failures = 0, reduction_mismatches = 0;
  for (const auto& u : sys.test) {
    if (checked >= 100) break;
    ++checked;
    const auto& model = sys.set.cells.at(u.meta.gender).at(u.meta.emotion);
    const double l_ac =
        forward_log_likelihood(model.acoustic, u.obs) / static_cast<double>(u.obs.size());
    const SummaryVectorSequence summary =
        to_suprasegmental(model.acoustic, u.obs, u.prosody, model.supra.num_states());
    const double l_pr = supra_log_likelihood(model.supra, summary) /
                        static_cast<double>(model.supra.num_states());
    if (fused_log_score(model.acoustic, model.supra, u.obs, u.prosody, FusionWeight(0.0)) != l_ac)
      ++exact_failures;
    if (fused_log_score(model.acoustic, model.supra, u.obs, u.prosody, FusionWeight(1.0)) != l_pr)
      ++exact_failures;
    for (int i = 0; i <= 10; ++i) {
      const double alpha = i / 10.0;
      const double fused =
          fused_log_score(model.acoustic, model.supra, u.obs, u.prosody, FusionWeight(alpha));
      if (std::abs(fused - (l_ac + alpha * (l_pr - l_ac))) > 1e-12) ++affine_failures;
    }
    const ScoredLabel zero =
        identify_emotion(sys.set, u.meta.gender, u.obs, u.prosody, FusionWeight(0.0));
    const ScoredLabel acoustic_only = identify_emotion_hmm_only(sys.set, u.meta.gender, u.obs);
    if (zero.label != acoustic_only.label || zero.scores != acoustic_only.scores)
      ++reduction_mismatches;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%d utterances; endpoint failures %d, affine failures %d, reduction mismatches %d",
                checked, exact_failures, affine_failures, reduction_mismatches);
  detail = buf;
  return checked >= 100 && exact_failures == 0 && affine_failures == 0 &&
         reduction_mismatches == 0;
}

bool protocol_replication(const System& sys, std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const EvaluationReport rep =
      evaluate(sys.genders, sys.set, sys.pooled, sys.test, FusionWeight(0.5), 2);
  const double a1 = rep.approaches[kGenderDependent].average_accuracy;
  const double a2 = rep.approaches[kWithoutGender].average_accuracy;
  const double a3 = rep.approaches[kOracleGender].average_accuracy;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "gender %.2f%%, approaches %.2f / %.2f / %.2f, %.1f s",
                rep.gender_accuracy, a1, a2, a3, elapsed_s(start));
  detail = buf;
  return rep.gender_accuracy >= 98.0 && a1 >= 90.0 && a1 >= a3 && a3 >= a2 &&
         elapsed_s(start) < 300.0;
}

bool sweep_shape(std::string& detail) {
  const System sys = train_system(prosody_only_preset(7));
  const auto curve = alpha_sweep(sys.genders, sys.set, sys.test, default_alpha_grid(), 2);
  const double at_zero = curve.front().second;
  const double at_one = curve.back().second;
  double peak = 0.0;
  for (const auto& [alpha, acc] : curve) peak = std::max(peak, acc);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "accuracy %.2f%% at 0, %.2f%% at 1, peak %.2f%%", at_zero,
                at_one, peak);
  detail = buf;
  return at_one > at_zero && at_one >= peak;
}

bool significance_test(std::string& detail) {
  const SignificanceResult forced = students_t(5.0, 3.0, 1.0, 1.0, 2);
  if (std::abs(forced.t_value - 2.0) > 1e-9 || std::abs(forced.sd_pooled - 1.0) > 1e-9 ||
      !forced.significant || forced.critical_value != 1.645) {
    detail = "forced case failed";
    return false;
  }
  // hand-computed: (10-7)/sqrt((4+1)/4) = 3/1.1180339887498949
  const SignificanceResult hand = students_t(10.0, 7.0, 2.0, 1.0, 4);
  if (std::abs(hand.sd_pooled - std::sqrt(5.0 / 4.0)) > 1e-9 ||
      std::abs(hand.t_value - 3.0 / std::sqrt(5.0 / 4.0)) > 1e-9) {
    detail = "hand-computed case failed";
    return false;
  }
  const SignificanceResult zero = students_t(6.0, 6.0, 0.0, 0.0, 5);
  if (zero.t_value != 0.0 || zero.significant) {
    detail = "degenerate case failed";
    return false;
  }
  Rng rng(50000);
  for (int trial = 0; trial < 100; ++trial) {
    const double mx = rng.uniform(0.0, 100.0), my = rng.uniform(0.0, 100.0);
    const double sx = rng.uniform(0.1, 10.0), sy = rng.uniform(0.1, 10.0);
    const int n = 1 + static_cast<int>(rng.index(30));
    const SignificanceResult fwd = students_t(mx, my, sx, sy, n);
    const SignificanceResult rev = students_t(my, mx, sx, sy, n);
    if (std::abs(fwd.t_value + rev.t_value) > 1e-9) {
      detail = "antisymmetry violated";
      return false;
    }
    const double c = rng.uniform(0.5, 20.0);
    const SignificanceResult scaled = students_t(c * mx, c * my, c * sx, c * sy, n);
    if (std::abs(scaled.t_value - fwd.t_value) > 1e-9 * std::max(1.0, std::abs(fwd.t_value))) {
      detail = "scale invariance violated";
      return false;
    }
  }
  detail = "forced, hand-computed, degenerate, and 100 random cases";
  return true;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

bool cli_determinism(std::string& detail) {
  const char* cli = std::getenv("EMOREC_CLI");
  if (cli == nullptr) {
    detail = "EMOREC_CLI not set";
    return false;
  }
  const fs::path dir = fs::temp_directory_path() / "emorec_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto run = [&](const std::string& args) {
    const std::string cmd =
        std::string(cli) + " " + args + " >" + (dir / "log.txt").string() + " 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str())) == 0;
  };
  const fs::path corpus = dir / "corpus";
  if (!run("synth --preset separable --seed 9 --out " + corpus.string() +
           " --speakers-per-gender 3 --train-speakers 2 --sentences 2 --train-sentences 1 "
           "--session1-repeats 2 --session2-repeats 1 --duration 0.3")) {
    detail = "synth failed";
    return false;
  }
  const std::string train_flags = " --manifest " + (corpus / "manifest.csv").string() +
                                  " --num-states 3 --acoustic-mixtures 1 --supra-mixtures 1 "
                                  "--max-iters 6 --seed 5";
  if (!run("train --model-dir " + (dir / "models_a").string() + train_flags) ||
      !run("train --model-dir " + (dir / "models_b").string() + train_flags)) {
    detail = "train failed";
    return false;
  }
  std::size_t model_files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "models_a")) {
    ++model_files;
    if (slurp(entry.path()) != slurp(dir / "models_b" / entry.path().filename())) {
      detail = "model file differs: " + entry.path().filename().string();
      return false;
    }
  }
  const std::string eval_flags = " --manifest " + (corpus / "manifest.csv").string() +
                                 " --model-dir " + (dir / "models_a").string() + " --alpha 0.5";
  if (!run("evaluate --report-dir " + (dir / "report_a").string() + eval_flags) ||
      !run("evaluate --report-dir " + (dir / "report_b").string() + eval_flags)) {
    detail = "evaluate failed";
    return false;
  }
  std::size_t report_files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "report_a")) {
    ++report_files;
    if (slurp(entry.path()) != slurp(dir / "report_b" / entry.path().filename())) {
      detail = "report file differs: " + entry.path().filename().string();
      return false;
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%zu model files and %zu report files byte-identical",
                model_files, report_files);
  detail = buf;
  return model_files > 0 && report_files > 0;
}

bool corpus_accounting(std::string& detail) {
  const SynthSpec spec = paper_shape_preset(7);
  const DatasetManifest manifest = build_manifest(spec);
  const bool rows_ok = manifest.rows.size() == 12960;
  bool gender_ok = manifest.count("train", "male") == 2160 &&
                   manifest.count("train", "female") == 2160;
  bool cells_ok = true;
  for (const std::string gender : {"male", "female"})
    for (const auto& emotion : spec.emotions)
      cells_ok = cells_ok && manifest.count("train", gender, emotion) == 360;
  const bool eval_ok = manifest.count("test") == 2160;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%zu rows; per-gender train %zu; per-cell train %zu; test %zu",
                manifest.rows.size(), manifest.count("train", "male"),
                manifest.count("train", "male", "anger"), manifest.count("test"));
  detail = buf;
  return rows_ok && gender_ok && cells_ok && eval_ok;
}

}  // namespace

int main() {
  std::printf("emorec acceptance suite\n");

  run_criterion(1, "forward likelihood matches exhaustive path enumeration",
                forward_oracle_equivalence);
  run_criterion(2, "decoded path matches exhaustive maximization", viterbi_oracle_equivalence);
  run_criterion(3, "training log-likelihood is non-decreasing", em_monotonicity);
  run_criterion(4, "cepstra match the direct double-loop formula", mfcc_correctness);

  const System separable = train_system(separable_preset(7));
  run_criterion(5, "fusion endpoint/affine identities and acoustic-only reduction",
                [&](std::string& d) { return fusion_identities(separable, d); });
  run_criterion(6, "two-stage protocol replication on the separable corpus",
                [&](std::string& d) { return protocol_replication(separable, d); });
  run_criterion(7, "weight sweep peaks at the prosody-only endpoint", sweep_shape);
  run_criterion(8, "significance test arithmetic and invariances", significance_test);
  run_criterion(9, "repeated training and evaluation are byte-identical", cli_determinism);
  run_criterion(10, "recording-protocol corpus accounting", corpus_accounting);

  if (g_failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", g_failures);
  return 1;
}
