#pragma once

// Scoring against a test split: the three recognizer variants side by
// side, confusion matrices, the significance test, the weighting-factor
// sweep, and the versioned report files.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "emorec/pipeline.hpp"
#include "emorec/util.hpp"

namespace emorec {

inline constexpr const char* kReportFormatVersion = "emorec-report v1";

// Approach indices follow the comparison layout: 1 gender-dependent,
// 2 without gender information, 3 with correct gender information.
enum ApproachIndex { kGenderDependent = 0, kWithoutGender = 1, kOracleGender = 2 };

inline const char* approach_name(int idx) {
  switch (idx) {
    case kGenderDependent: return "gender_dependent";
    case kWithoutGender: return "without_gender";
    case kOracleGender: return "oracle_gender";
  }
  return "?";
}

struct ApproachResult {
  std::map<std::string, double> per_gender_accuracy;  // percent, by true gender
  double average_accuracy = 0.0;                      // percent, 100 * trace / total
  std::vector<std::vector<int>> confusion;            // [true][predicted]

  bool operator==(const ApproachResult&) const = default;
};

struct EvaluationReport {
  std::string schema = kReportFormatVersion;
  double gender_accuracy = 0.0;  // percent
  int utterance_count = 0;
  std::vector<std::string> emotions;
  std::vector<ApproachResult> approaches;  // size 3
  std::map<std::string, std::string> config_echo;
  std::vector<std::pair<double, double>> alpha_curve;  // optional (alpha, accuracy %)

  bool operator==(const EvaluationReport&) const = default;
};

// Per-utterance decisions; kept out of the report so the report files
// stay compact, used for per-speaker accuracy samples.
struct UtteranceOutcome {
  std::string utterance_id;
  std::string speaker_id;
  std::string true_gender;
  std::string true_emotion;
  std::string predicted_gender;
  std::string predicted[3];
  bool gender_tie = false;
  bool emotion_tie = false;
};

// Runs all three approaches over every test utterance. Classification is
// parallel over utterances; aggregation order is fixed by utterance index.
inline EvaluationReport evaluate(const GenderModels& genders, const EmotionModelSet& set,
                                 const PooledEmotionModels& pooled, const Dataset& test,
                                 FusionWeight w, int jobs = 1,
                                 std::vector<UtteranceOutcome>* details = nullptr) {
  if (test.empty()) throw std::invalid_argument("evaluate: empty test split");
  const std::vector<std::string> emotions = set.emotions();
  std::map<std::string, std::size_t> emotion_index;
  for (std::size_t i = 0; i < emotions.size(); ++i) emotion_index[emotions[i]] = i;

  std::vector<UtteranceOutcome> outcomes(test.size());
  parallel_for(test.size(), jobs, [&](std::size_t i) {
    const Utterance& u = test[i];
    UtteranceOutcome& o = outcomes[i];
    o.utterance_id = u.obs.utterance_id;
    o.speaker_id = u.meta.speaker_id;
    o.true_gender = u.meta.gender;
    o.true_emotion = u.meta.emotion;
    const ClassificationResult two_stage = run_two_stage(genders, set, u.obs, u.prosody, w);
    o.predicted_gender = two_stage.gender;
    o.gender_tie = two_stage.gender_tie;
    o.emotion_tie = two_stage.emotion_tie;
    o.predicted[kGenderDependent] = two_stage.emotion;
    o.predicted[kWithoutGender] = run_without_gender(pooled, u.obs, u.prosody, w).label;
    // when the gender stage was right the oracle decision coincides
    o.predicted[kOracleGender] =
        two_stage.gender == u.meta.gender
            ? two_stage.emotion
            : run_with_oracle_gender(set, u.meta.gender, u.obs, u.prosody, w).label;
  });

  EvaluationReport report;
  report.utterance_count = static_cast<int>(test.size());
  report.emotions = emotions;
  report.approaches.assign(3, ApproachResult{});
  for (auto& a : report.approaches)
    a.confusion.assign(emotions.size(), std::vector<int>(emotions.size(), 0));

  int gender_correct = 0;
  std::map<std::string, int> gender_total;
  std::vector<std::map<std::string, int>> gender_hits(3);
  for (const auto& o : outcomes) {
    if (o.predicted_gender == o.true_gender) ++gender_correct;
    ++gender_total[o.true_gender];
    const std::size_t ti = emotion_index.at(o.true_emotion);
    for (int a = 0; a < 3; ++a) {
      const std::size_t pi = emotion_index.at(o.predicted[a]);
      ++report.approaches[static_cast<std::size_t>(a)].confusion[ti][pi];
      if (ti == pi) ++gender_hits[static_cast<std::size_t>(a)][o.true_gender];
    }
  }
  report.gender_accuracy = 100.0 * gender_correct / static_cast<double>(test.size());
  for (int a = 0; a < 3; ++a) {
    auto& res = report.approaches[static_cast<std::size_t>(a)];
    int trace = 0;
    for (std::size_t e = 0; e < emotions.size(); ++e) trace += res.confusion[e][e];
    res.average_accuracy = 100.0 * trace / static_cast<double>(test.size());
    for (const auto& [gender, total] : gender_total)
      res.per_gender_accuracy[gender] =
          100.0 * gender_hits[static_cast<std::size_t>(a)][gender] / static_cast<double>(total);
  }
  if (details) *details = std::move(outcomes);
  return report;
}

struct SignificanceResult {
  double mean_x = 0.0, mean_y = 0.0;
  double sd_x = 0.0, sd_y = 0.0;
  int n = 0;
  double sd_pooled = 0.0;
  double t_value = 0.0;
  double critical_value = 1.645;
  bool significant = false;
};

// t = (mean_x - mean_y) / sd_pooled with sd_pooled = sqrt((sd_x^2 + sd_y^2)/n).
// One-tailed: significant iff t exceeds the critical value.
inline SignificanceResult students_t(double mean_x, double mean_y, double sd_x, double sd_y,
                                     int n, double critical_value = 1.645) {
  if (n < 1) throw std::invalid_argument("students_t: n must be >= 1");
  if (sd_x < 0.0 || sd_y < 0.0)
    throw std::invalid_argument("students_t: standard deviations must be >= 0");
  SignificanceResult r;
  r.mean_x = mean_x;
  r.mean_y = mean_y;
  r.sd_x = sd_x;
  r.sd_y = sd_y;
  r.n = n;
  r.critical_value = critical_value;
  if (sd_x == 0.0 && sd_y == 0.0) {
    if (mean_x != mean_y)
      throw std::domain_error("students_t: zero pooled deviation with unequal means");
    r.sd_pooled = 0.0;
    r.t_value = 0.0;
  } else {
    r.sd_pooled = std::sqrt((sd_x * sd_x + sd_y * sd_y) / static_cast<double>(n));
    r.t_value = (mean_x - mean_y) / r.sd_pooled;
  }
  r.significant = r.t_value > r.critical_value;
  return r;
}

// Accuracy samples for the significance test: per-speaker accuracy (%) of
// one approach, in speaker order.
inline std::vector<std::pair<std::string, double>> per_speaker_accuracies(
    const std::vector<UtteranceOutcome>& outcomes, int approach) {
  std::map<std::string, std::pair<int, int>> counts;  // speaker -> (correct, total)
  for (const auto& o : outcomes) {
    auto& c = counts[o.speaker_id];
    if (o.predicted[approach] == o.true_emotion) ++c.first;
    ++c.second;
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [speaker, c] : counts)
    out.emplace_back(speaker, 100.0 * c.first / static_cast<double>(c.second));
  return out;
}

inline std::pair<double, double> mean_and_sd(const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("mean_and_sd: empty sample");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  if (samples.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(samples.size() - 1))};
}

// Gender-dependent accuracy as a function of the fusion weight. The score
// halves are computed once per (utterance, emotion) and recombined with
// the same expression the recognizer uses, so each grid row equals a full
// evaluation at that weight.
inline std::vector<std::pair<double, double>> alpha_sweep(const GenderModels& genders,
                                                          const EmotionModelSet& set,
                                                          const Dataset& test,
                                                          const std::vector<double>& alphas,
                                                          int jobs = 1) {
  if (alphas.empty()) throw std::invalid_argument("alpha_sweep: empty alpha grid");
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0))
      throw std::invalid_argument("alpha_sweep: alpha out of range [0, 1]");
  if (test.empty()) throw std::invalid_argument("alpha_sweep: empty test split");

  const std::vector<std::string> emotions = set.emotions();
  struct CachedScores {
    std::string true_emotion;
    std::vector<EmotionScoreComponents> per_emotion;
  };
  std::vector<CachedScores> cache(test.size());
  parallel_for(test.size(), jobs, [&](std::size_t i) {
    const Utterance& u = test[i];
    const ScoredLabel g = identify_gender(genders, u.obs);
    const auto& bank = set.cells.at(g.label);
    cache[i].true_emotion = u.meta.emotion;
    cache[i].per_emotion.reserve(emotions.size());
    for (const auto& emotion : emotions)
      cache[i].per_emotion.push_back(
          emotion_score_components(bank.at(emotion), u.obs, u.prosody));
  });

  std::vector<std::pair<double, double>> curve;
  curve.reserve(alphas.size());
  for (double a : alphas) {
    const FusionWeight w(a);
    int correct = 0;
    for (const auto& c : cache) {
      std::map<std::string, double> scores;
      for (std::size_t e = 0; e < emotions.size(); ++e)
        scores[emotions[e]] = fused_combine(c.per_emotion[e].acoustic, c.per_emotion[e].prosodic, w);
      if (detail::argmax_label(scores).label == c.true_emotion) ++correct;
    }
    curve.emplace_back(a, 100.0 * correct / static_cast<double>(test.size()));
  }
  return curve;
}

inline std::vector<double> default_alpha_grid() {
  return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
}

namespace detail {

inline nlohmann::ordered_json approach_to_json(const ApproachResult& a) {
  nlohmann::ordered_json j;
  j["per_gender_accuracy"] = a.per_gender_accuracy;
  j["average_accuracy"] = a.average_accuracy;
  j["confusion"] = a.confusion;
  return j;
}

inline ApproachResult approach_from_json(const nlohmann::json& j) {
  ApproachResult a;
  a.per_gender_accuracy = j.at("per_gender_accuracy").get<std::map<std::string, double>>();
  a.average_accuracy = j.at("average_accuracy").get<double>();
  a.confusion = j.at("confusion").get<std::vector<std::vector<int>>>();
  return a;
}

}  // namespace detail

// Version line, column header, then one alpha,accuracy row per grid point.
inline void write_alpha_curve(const std::string& path,
                              const std::vector<std::pair<double, double>>& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_alpha_curve: cannot write " + path);
  out << "# " << kReportFormatVersion << "\n";
  out << "alpha,accuracy_percent\n";
  for (const auto& [alpha, acc] : curve)
    out << format_g17(alpha) << "," << format_g17(acc) << "\n";
}

// Writes the report bundle into out_dir:
//   report.json           machine-readable summary (parses back losslessly)
//   report.txt            human-readable summary
//   confusion_approach{1,2,3}.txt
//   alpha_curve.csv       only when the report carries sweep rows
inline void emit_report(const EvaluationReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  nlohmann::ordered_json j;
  j["schema"] = report.schema;
  j["gender_accuracy"] = report.gender_accuracy;
  j["utterance_count"] = report.utterance_count;
  j["emotions"] = report.emotions;
  for (int a = 0; a < 3; ++a)
    j["approaches"][approach_name(a)] =
        detail::approach_to_json(report.approaches[static_cast<std::size_t>(a)]);
  j["config"] = report.config_echo;
  if (!report.alpha_curve.empty()) j["alpha_curve"] = report.alpha_curve;
  {
    std::ofstream out(fs::path(out_dir) / "report.json");
    if (!out) throw std::runtime_error("emit_report: cannot write report.json");
    out << j.dump(2) << "\n";
  }

  {
    std::ofstream out(fs::path(out_dir) / "report.txt");
    if (!out) throw std::runtime_error("emit_report: cannot write report.txt");
    out << "# " << report.schema << "\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "gender identification accuracy: %.2f%%\n",
                  report.gender_accuracy);
    out << buf << "test utterances: " << report.utterance_count << "\n\n";
    out << "emotion identification accuracy (%):\n";
    for (int a = 0; a < 3; ++a) {
      const auto& res = report.approaches[static_cast<std::size_t>(a)];
      std::snprintf(buf, sizeof(buf), "  approach %d (%s): average %.2f", a + 1,
                    approach_name(a), res.average_accuracy);
      out << buf;
      for (const auto& [gender, acc] : res.per_gender_accuracy) {
        std::snprintf(buf, sizeof(buf), ", %s %.2f", gender.c_str(), acc);
        out << buf;
      }
      out << "\n";
    }
  }

  for (int a = 0; a < 3; ++a) {
    const auto& res = report.approaches[static_cast<std::size_t>(a)];
    std::ofstream out(fs::path(out_dir) /
                      ("confusion_approach" + std::to_string(a + 1) + ".txt"));
    if (!out) throw std::runtime_error("emit_report: cannot write confusion table");
    out << "# " << report.schema << "\n";
    out << "# rows: true emotion, columns: predicted (" << approach_name(a) << ")\n";
    out << "emotion";
    for (const auto& e : report.emotions) out << "," << e;
    out << "\n";
    for (std::size_t i = 0; i < report.emotions.size(); ++i) {
      out << report.emotions[i];
      for (std::size_t k = 0; k < report.emotions.size(); ++k) out << "," << res.confusion[i][k];
      out << "\n";
    }
  }

  if (!report.alpha_curve.empty())
    write_alpha_curve((fs::path(out_dir) / "alpha_curve.csv").string(), report.alpha_curve);
}

inline EvaluationReport load_report(const std::string& dir) {
  std::ifstream in(std::filesystem::path(dir) / "report.json");
  if (!in) throw std::runtime_error("load_report: cannot open report.json in " + dir);
  nlohmann::json j;
  in >> j;
  EvaluationReport report;
  report.schema = j.at("schema").get<std::string>();
  if (report.schema != kReportFormatVersion)
    throw std::runtime_error("load_report: unsupported schema '" + report.schema + "'");
  report.gender_accuracy = j.at("gender_accuracy").get<double>();
  report.utterance_count = j.at("utterance_count").get<int>();
  report.emotions = j.at("emotions").get<std::vector<std::string>>();
  report.approaches.resize(3);
  for (int a = 0; a < 3; ++a)
    report.approaches[static_cast<std::size_t>(a)] =
        detail::approach_from_json(j.at("approaches").at(approach_name(a)));
  report.config_echo = j.at("config").get<std::map<std::string, std::string>>();
  if (j.contains("alpha_curve"))
    report.alpha_curve = j.at("alpha_curve").get<std::vector<std::pair<double, double>>>();
  return report;
}

// Parses a curve file written by emit_report.
inline std::vector<std::pair<double, double>> load_alpha_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_alpha_curve: cannot open: " + path);
  std::string line;
  std::vector<std::pair<double, double>> curve;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != "alpha,accuracy_percent")
        throw std::runtime_error("load_alpha_curve: unexpected header: " + line);
      saw_header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("load_alpha_curve: malformed row: " + line);
    curve.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return curve;
}

}  // namespace emorec
