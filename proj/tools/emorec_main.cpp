// emorec command-line tool: corpus synthesis, training, evaluation, the
// fusion-weight sweep, and the significance test.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "emorec/emorec.hpp"
#include "emorec/model_store.hpp"

namespace {

namespace fs = std::filesystem;
using namespace emorec;

void add_frontend_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--frame-length-ms", cfg.features.frame_length_ms,
                  "Analysis frame length in ms")
      ->capture_default_str();
  cmd->add_option("--frame-shift-ms", cfg.features.frame_shift_ms, "Frame shift in ms")
      ->capture_default_str();
  cmd->add_option("--pre-emphasis-coeff", cfg.features.pre_emphasis_coeff,
                  "Pre-emphasis coefficient")
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  cmd->add_flag("!--no-pre-emphasis", cfg.features.pre_emphasis_enabled,
                "Disable pre-emphasis");
  cmd->add_option("--mel-channels", cfg.features.mel_channels, "Mel filterbank channels")
      ->capture_default_str();
  cmd->add_option("--fft-size", cfg.features.fft_size, "FFT size (power of two)")
      ->capture_default_str();
  cmd->add_option("--num-cepstra", cfg.features.num_cepstra, "Static cepstra per frame")
      ->capture_default_str();
  cmd->add_option("--delta-half-window", cfg.features.delta_half_window,
                  "Delta regression half-window")
      ->capture_default_str();
  cmd->add_option("--f0-min", cfg.features.f0_min_hz, "Pitch search floor in Hz")
      ->capture_default_str();
  cmd->add_option("--f0-max", cfg.features.f0_max_hz, "Pitch search ceiling in Hz")
      ->capture_default_str();
  cmd->add_option("--voicing-threshold", cfg.features.voicing_threshold,
                  "Normalized-autocorrelation voicing threshold")
      ->capture_default_str();
}

void add_model_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--num-states", cfg.num_states, "Acoustic model states")
      ->capture_default_str();
  cmd->add_option("--acoustic-mixtures", cfg.acoustic_mixtures,
                  "Mixture components per acoustic state")
      ->capture_default_str();
  cmd->add_option("--supra-states", cfg.supra_states, "Suprasegmental states")
      ->capture_default_str();
  cmd->add_option("--supra-mixtures", cfg.supra_mixtures,
                  "Mixture components per suprasegmental state")
      ->capture_default_str();
  cmd->add_option("--max-iters", cfg.max_iters, "Training iteration cap")
      ->capture_default_str();
  cmd->add_option("--rel-tol", cfg.rel_tol, "Training relative-improvement stop")
      ->capture_default_str();
}

// Values from --config apply beneath command-line flags: a key is skipped
// when the matching flag (same name, dashes for underscores) was given.
void apply_config_file(const CLI::App* cmd, const std::string& path, RunConfig& cfg) {
  if (path.empty()) return;
  std::map<std::string, std::string> kv = read_flat_config(path);
  std::map<std::string, std::string> wanted;
  for (const auto& [key, value] : kv) {
    std::string flag = "--" + key;
    for (auto& c : flag)
      if (c == '_') c = '-';
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    if (opt != nullptr && opt->count() > 0) continue;
    wanted[key] = value;
  }
  cfg.apply(wanted);
}

Dataset load_split(const RunConfig& cfg, const std::string& split) {
  const DatasetManifest manifest = read_manifest(cfg.manifest_path);
  const std::string base = fs::path(cfg.manifest_path).parent_path().string();
  const Dataset all = load_dataset(manifest, base, cfg.features, cfg.jobs);
  Dataset subset = filter_split(all, split);
  if (subset.empty())
    throw std::runtime_error("manifest has no '" + split + "' rows: " + cfg.manifest_path);
  return subset;
}

int cmd_train(RunConfig& cfg, bool allow_split_overlap) {
  const DatasetManifest manifest = read_manifest(cfg.manifest_path);
  const SplitValidation valid = validate_split_disjoint(manifest);
  if (!valid.ok && !allow_split_overlap)
    throw std::runtime_error("train/test split overlap (" + valid.message +
                             "); pass --allow-split-overlap to proceed");
  const Dataset train = load_split(cfg, "train");

  PipelineTrainConfig pipeline_cfg;
  pipeline_cfg.acoustic = cfg.acoustic_options();
  pipeline_cfg.supra_states = cfg.supra_states;
  pipeline_cfg.supra_mixtures = cfg.supra_mixtures;
  pipeline_cfg.log = &std::cerr;

  std::vector<std::string> emotions;
  {
    std::set<std::string> unique;
    for (const auto& u : train) unique.insert(u.meta.emotion);
    emotions.assign(unique.begin(), unique.end());
  }

  TrainedSystem system;
  system.emotion_list = emotions;
  system.genders = train_gender_models(train, pipeline_cfg);
  system.emotions = train_emotion_models(train, emotions, pipeline_cfg);
  system.pooled = train_pooled_emotion_models(train, emotions, pipeline_cfg);
  save_models(system, cfg, cfg.model_dir);
  std::cout << "models written to " << cfg.model_dir << "\n";
  return 0;
}

RunConfig config_from_meta(const RunConfig& cli_cfg) {
  RunConfig cfg = cli_cfg;
  cfg.apply(load_meta(cli_cfg.model_dir));  // frontend must match training
  cfg.alpha = cli_cfg.alpha;
  cfg.jobs = cli_cfg.jobs;
  return cfg;
}

int cmd_evaluate(const RunConfig& cli_cfg) {
  RunConfig cfg = config_from_meta(cli_cfg);
  cfg.manifest_path = cli_cfg.manifest_path;
  const TrainedSystem system = load_models(cli_cfg.model_dir);
  const Dataset test = load_split(cfg, "test");
  std::vector<UtteranceOutcome> outcomes;
  EvaluationReport report = evaluate(system.genders, system.emotions, system.pooled, test,
                                     FusionWeight(cfg.alpha), cfg.jobs, &outcomes);
  std::size_t gender_ties = 0, emotion_ties = 0;
  for (const auto& o : outcomes) {
    gender_ties += o.gender_tie ? 1 : 0;
    emotion_ties += o.emotion_tie ? 1 : 0;
  }
  if (gender_ties > 0 || emotion_ties > 0)
    std::cerr << "[evaluate] tie-broken decisions: gender=" << gender_ties
              << " emotion=" << emotion_ties << "\n";
  report.config_echo = cfg.echo();
  report.config_echo["manifest"] = cfg.manifest_path;
  emit_report(report, cli_cfg.report_dir);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", report.gender_accuracy);
  std::cout << "gender_accuracy " << buf << "\n";
  for (int a = 0; a < 3; ++a) {
    std::snprintf(buf, sizeof(buf), "%.4f",
                  report.approaches[static_cast<std::size_t>(a)].average_accuracy);
    std::cout << "approach" << a + 1 << "_average " << buf << "\n";
  }
  return 0;
}

int cmd_alpha_sweep(const RunConfig& cli_cfg, const std::vector<double>& alphas,
                    const std::string& out_file) {
  RunConfig cfg = config_from_meta(cli_cfg);
  cfg.manifest_path = cli_cfg.manifest_path;
  const TrainedSystem system = load_models(cli_cfg.model_dir);
  const Dataset test = load_split(cfg, "test");
  const auto curve = alpha_sweep(system.genders, system.emotions, test, alphas, cfg.jobs);
  if (!out_file.empty()) {
    if (const auto parent = fs::path(out_file).parent_path(); !parent.empty())
      fs::create_directories(parent);
    write_alpha_curve(out_file, curve);
    std::cout << out_file << "\n";
  }
  for (const auto& [alpha, acc] : curve) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f %.4f", alpha, acc);
    std::cout << buf << "\n";
  }
  return 0;
}

int cmd_ttest(double mx, double my, double sx, double sy, int n, double critical) {
  const SignificanceResult r = students_t(mx, my, sx, sy, n, critical);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "t %.9g\nsd_pooled %.9g\ncritical %.9g\n", r.t_value,
                r.sd_pooled, r.critical_value);
  std::cout << buf << (r.significant ? "significant" : "not significant") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage speech emotion recognition toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
  std::string synth_preset_name = "separable";
  std::string synth_out;
  std::uint64_t synth_seed = 1;
  bool manifest_only = false;
  SynthSpec defaults;
  synth->add_option("--preset", synth_preset_name,
                    "Corpus preset: separable, prosody-only, chance, paper-shape")
      ->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Root seed")->capture_default_str();
  synth->add_flag("--manifest-only", manifest_only, "Write only the manifest, no audio");
  auto* sp_opt = synth->add_option("--speakers-per-gender", defaults.speakers_per_gender);
  auto* tsp_opt = synth->add_option("--train-speakers", defaults.train_speakers_per_gender);
  auto* sent_opt = synth->add_option("--sentences", defaults.num_sentences);
  auto* tsent_opt = synth->add_option("--train-sentences", defaults.train_sentences);
  auto* r1_opt = synth->add_option("--session1-repeats", defaults.session1_repeats);
  auto* r2_opt = synth->add_option("--session2-repeats", defaults.session2_repeats);
  auto* sep_opt =
      synth->add_option("--separability", defaults.separability)->check(CLI::Range(0.0, 1.0));
  auto* dur_opt = synth->add_option("--duration", defaults.base_duration_s);

  // train
  RunConfig train_cfg;
  bool allow_split_overlap = false;
  auto* train = app.add_subcommand("train", "Train gender, emotion, and pooled models");
  std::string train_config_path;
  train->add_option("--config", train_config_path, "Flat key=value configuration file");
  train->add_option("--manifest", train_cfg.manifest_path, "Dataset manifest CSV")->required();
  train->add_option("--model-dir", train_cfg.model_dir, "Output model directory")->required();
  train->add_option("--seed", train_cfg.seed, "Root seed")->capture_default_str();
  train->add_option("--jobs", train_cfg.jobs, "Worker threads")->capture_default_str();
  train->add_flag("--allow-split-overlap", allow_split_overlap,
                  "Accept manifests whose splits share speakers or sentences");
  add_model_flags(train, train_cfg);
  add_frontend_flags(train, train_cfg);

  // evaluate
  RunConfig eval_cfg;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score the test split, write reports");
  std::string eval_config_path;
  evaluate_cmd->add_option("--config", eval_config_path, "Flat key=value configuration file");
  evaluate_cmd->add_option("--manifest", eval_cfg.manifest_path, "Dataset manifest CSV")
      ->required();
  evaluate_cmd->add_option("--model-dir", eval_cfg.model_dir, "Trained model directory")
      ->required();
  evaluate_cmd->add_option("--report-dir", eval_cfg.report_dir, "Report output directory")
      ->required();
  evaluate_cmd->add_option("--alpha", eval_cfg.alpha, "Fusion weight in [0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  evaluate_cmd->add_option("--jobs", eval_cfg.jobs, "Worker threads")->capture_default_str();

  // alpha-sweep
  RunConfig sweep_cfg;
  std::string sweep_out = "alpha_curve.csv";
  std::vector<double> sweep_alphas = default_alpha_grid();
  std::string sweep_alphas_arg;
  auto* sweep = app.add_subcommand("alpha-sweep", "Accuracy versus the fusion weight");
  std::string sweep_config_path;
  sweep->add_option("--config", sweep_config_path, "Flat key=value configuration file");
  sweep->add_option("--manifest", sweep_cfg.manifest_path, "Dataset manifest CSV")->required();
  sweep->add_option("--model-dir", sweep_cfg.model_dir, "Trained model directory")->required();
  sweep->add_option("--out", sweep_out, "Curve output file")->capture_default_str();
  sweep->add_option("--alphas", sweep_alphas_arg,
                    "Comma-separated weights (default 0.0,0.1,...,1.0)");
  sweep->add_option("--jobs", sweep_cfg.jobs, "Worker threads")->capture_default_str();

  // ttest
  double mx = 0, my = 0, sx = 0, sy = 0, critical = 1.645;
  int n = 0;
  auto* ttest = app.add_subcommand("ttest", "Significance test on two accuracy samples");
  ttest->add_option("--mx", mx, "Mean of sample x")->required();
  ttest->add_option("--my", my, "Mean of sample y")->required();
  ttest->add_option("--sx", sx, "Standard deviation of sample x")->required();
  ttest->add_option("--sy", sy, "Standard deviation of sample y")->required();
  ttest->add_option("--n", n, "Sample size")->required();
  ttest->add_option("--critical", critical, "Critical value")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      SynthSpec spec = synth_preset(synth_preset_name, synth_seed);
      if (sp_opt->count()) spec.speakers_per_gender = defaults.speakers_per_gender;
      if (tsp_opt->count()) spec.train_speakers_per_gender = defaults.train_speakers_per_gender;
      if (sent_opt->count()) spec.num_sentences = defaults.num_sentences;
      if (tsent_opt->count()) spec.train_sentences = defaults.train_sentences;
      if (r1_opt->count()) spec.session1_repeats = defaults.session1_repeats;
      if (r2_opt->count()) spec.session2_repeats = defaults.session2_repeats;
      if (sep_opt->count()) spec.separability = defaults.separability;
      if (dur_opt->count()) spec.base_duration_s = defaults.base_duration_s;
      const std::string manifest_path = generate_corpus(spec, synth_out, !manifest_only);
      std::cout << manifest_path << "\n";
      return 0;
    }
    if (train->parsed()) {
      apply_config_file(train, train_config_path, train_cfg);
      return cmd_train(train_cfg, allow_split_overlap);
    }
    if (evaluate_cmd->parsed()) {
      apply_config_file(evaluate_cmd, eval_config_path, eval_cfg);
      return cmd_evaluate(eval_cfg);
    }
    if (sweep->parsed()) {
      apply_config_file(sweep, sweep_config_path, sweep_cfg);
      if (!sweep_alphas_arg.empty()) {
        sweep_alphas.clear();
        std::stringstream ss(sweep_alphas_arg);
        std::string cell;
        while (std::getline(ss, cell, ',')) sweep_alphas.push_back(std::stod(cell));
      }
      return cmd_alpha_sweep(sweep_cfg, sweep_alphas, sweep_out);
    }
    if (ttest->parsed()) return cmd_ttest(mx, my, sx, sy, n, critical);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
