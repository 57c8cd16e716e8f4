// Command-line front end: corpus generation and import, training,
// finetuning, evaluation, throughput benchmarking, comparison tables and
// skeleton rendering.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
// failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "posecast/posecast.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace posecast;

namespace {

struct CommonOpts {
  std::uint64_t seed = 0;
  std::string config_path;
  bool deterministic = false;
};

// Output paths resolve against POSECAST_OUT_ROOT unless absolute.
fs::path resolve_out(const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return p;
  const char* root = std::getenv("POSECAST_OUT_ROOT");
  if (root && *root) return fs::path(root) / p;
  return p;
}

// Config files are JSON with a schema-versioned top-level key and one section
// per subcommand. Command-line flags override file values.
json load_config_section(const std::string& path, const std::string& command) {
  if (path.empty()) return json::object();
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  if (j.value("schema", "") != "posecast.runconfig.v1")
    throw ConfigError("config file " + path +
                      " missing schema key 'posecast.runconfig.v1'");
  if (!j.contains(command)) return json::object();
  return j[command];
}

// Applies config-file values to options the user did not pass on the command
// line.
struct ConfigApplier {
  CLI::App* cmd;
  json section;

  template <typename T>
  void operator()(const std::string& flag, T& var) const {
    const std::string key = flag.substr(flag.find_first_not_of('-'));
    if (cmd->count(flag) > 0) return;
    if (!section.contains(key)) return;
    try {
      var = section[key].get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config value for '" + key + "': " + e.what());
    }
  }
};

std::vector<double> parse_horizons(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (...) {
      throw ConfigError("bad horizon value '" + tok + "'");
    }
  }
  if (out.empty()) throw ConfigError("no horizons given");
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (...) {
      throw ConfigError("bad index value '" + tok + "'");
    }
  }
  return out;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  f << content;
}

void write_json_file(const fs::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<MotionSequence> load_corpus_or_fail(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw DataError("corpus directory not found: " + dir.string());
  auto seqs = load_sequences(dir);
  if (seqs.empty()) throw DataError("corpus is empty: " + dir.string());
  return seqs;
}

bool is_paired_dir(const fs::path& dir) {
  return fs::exists(dir / "manifest.json");
}

std::unique_ptr<Forecaster> make_model(const std::string& selector, int t_out) {
  if (selector == "repeat_last") return std::make_unique<RepeatLastFrame>(t_out);
  if (selector == "last_delta") return std::make_unique<LastDeltaAverage>(t_out);
  if (!fs::exists(selector))
    throw ConfigError("unknown model '" + selector +
                      "' (expected repeat_last, last_delta or a checkpoint path)");
  const auto info = peek_checkpoint(selector);
  if (info.kind == "motion_conformer") {
    auto model = load_conformer_checkpoint(selector);
    if (model.config().t_out != t_out)
      throw ConfigError("checkpoint t_out " + std::to_string(model.config().t_out) +
                        " does not match requested t_out " + std::to_string(t_out));
    return std::make_unique<ConformerForecaster>(std::move(model));
  }
  if (info.kind == "ridge") {
    auto model = load_ridge_checkpoint(selector);
    if (model.t_out != t_out)
      throw ConfigError("ridge checkpoint t_out mismatch");
    return std::make_unique<RidgeForecaster>(std::move(model));
  }
  throw ConfigError("checkpoint " + selector + " holds unknown model kind");
}

std::vector<ForecastWindow> corpus_windows(const std::vector<MotionSequence>& seqs,
                                           const WindowSpec& spec, bool merge,
                                           bool centered) {
  std::vector<ForecastWindow> out;
  for (const auto& s : seqs) {
    std::vector<ForecastWindow> w =
        merge ? make_merged_windows(s, spec,
                                    centered ? MergeCentering::kSharedMidHip
                                             : MergeCentering::kNone)
              : make_windows(s, spec);
    if (!merge && centered)
      for (auto& x : w) x = center_window(x);
    out.insert(out.end(), w.begin(), w.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int cmd_synth(const CommonOpts& common, CLI::App* cmd, std::string out_dir,
              int count, int frames, double fps, int persons, MotionParams params,
              bool statics) {
  ConfigApplier cfg{cmd, load_config_section(common.config_path, "synth")};
  cfg("--out", out_dir);
  cfg("--count", count);
  cfg("--frames", frames);
  cfg("--fps", fps);
  cfg("--persons", persons);
  cfg("--speed-min", params.speed_min_mmps);
  cfg("--speed-max", params.speed_max_mmps);
  cfg("--swing-min", params.swing_min_rad);
  cfg("--swing-max", params.swing_max_rad);
  if (out_dir.empty()) throw ConfigError("synth: --out is required");
  if (statics) params = MotionParams::statics();
  auto corpus = synth_corpus(common.seed, count, fps, frames, persons, params);
  save_sequences(corpus, resolve_out(out_dir));
  std::cout << "wrote " << corpus.size() << " sequences to "
            << resolve_out(out_dir).string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// import
// ---------------------------------------------------------------------------

int cmd_import(const CommonOpts& common, CLI::App* cmd, std::string in_dir,
               std::string out_dir, std::string mapping_str, double fill_threshold,
               int downsample_factor, std::string noise_kind, double noise_std,
               double noise_clip, std::string pair_out) {
  ConfigApplier cfg{cmd, load_config_section(common.config_path, "import")};
  cfg("--in", in_dir);
  cfg("--out", out_dir);
  cfg("--mapping", mapping_str);
  cfg("--fill-threshold", fill_threshold);
  cfg("--downsample", downsample_factor);
  if (in_dir.empty()) throw ConfigError("import: --in is required");
  auto seqs = load_corpus_or_fail(in_dir);

  if (fill_threshold >= 0.0)
    for (auto& s : seqs) s = fill_invalid_frames(s, fill_threshold);
  if (downsample_factor > 1)
    for (auto& s : seqs) s = downsample(s, downsample_factor);
  if (!mapping_str.empty()) {
    const auto mapping = parse_int_list(mapping_str);
    const JointLayout target = default_layout_13();
    for (auto& s : seqs) s = select_joints(s, target, mapping);
  }

  if (noise_kind == "gaussian" || noise_kind == "estimator") {
    if (pair_out.empty())
      throw ConfigError("import: --pair-out is required with --noise-kind");
    PairedCorpus paired;
    if (noise_kind == "gaussian") {
      NoiseSpec spec;
      spec.std_mm = noise_std;
      spec.clip_mm = noise_clip;
      spec.seed = common.seed;
      paired = build_noisy_benchmark(seqs, spec);
    } else {
      paired.clean = seqs;
      paired.provenance = NoiseProvenance::kEstimatorImport;
      for (std::size_t i = 0; i < seqs.size(); ++i) {
        EstimatorNoiseSpec es;
        es.seed = detail::splitmix64(common.seed ^ (0x51ed270b7a2fd9ULL + i));
        paired.noisy.push_back(
            fill_invalid_frames(add_estimator_noise(seqs[i], es), 0.1));
      }
      paired.validate();
    }
    save_paired_corpus(paired, resolve_out(pair_out));
    std::cout << "wrote paired corpus (" << paired.clean.size() << " pairs, mean displacement "
              << display_metric(mean_displacement_mm(paired)) << " mm) to "
              << resolve_out(pair_out).string() << "\n";
    return 0;
  }
  if (!noise_kind.empty() && noise_kind != "none")
    throw ConfigError("import: unknown --noise-kind '" + noise_kind + "'");

  if (out_dir.empty()) throw ConfigError("import: --out is required");
  save_sequences(seqs, resolve_out(out_dir));
  std::cout << "wrote " << seqs.size() << " sequences to "
            << resolve_out(out_dir).string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct ModelFlags {
  std::string preset = "toy";
  int d_model = -1, n_blocks = -1, n_heads = -1, conv_kernel = -1, ff_expansion = -1;
  double dropout = -1.0;
  std::string reduction_position;

  nn::ModelConfig build(int joints, int t_in, int t_out) const {
    nn::ModelConfig c;
    if (preset == "toy")
      c = nn::toy_config();
    else if (preset == "paper")
      c = nn::paper_scale_config();
    else
      throw ConfigError("unknown preset '" + preset + "' (toy or paper)");
    c.joints = joints;
    c.t_out = t_out;
    if (t_in % t_out != 0)
      throw ConfigError("t_in must be a multiple of t_out for the conformer");
    c.reduction_factor = t_in / t_out;
    c.t_in = t_in;
    if (d_model > 0) c.d_model = d_model;
    if (n_blocks > 0) c.n_blocks = n_blocks;
    if (n_heads > 0) c.n_heads = n_heads;
    if (conv_kernel > 0) c.conv_kernel = conv_kernel;
    if (ff_expansion > 0) c.ff_expansion = ff_expansion;
    if (dropout >= 0.0) c.dropout = dropout;
    if (!reduction_position.empty())
      c.reduction_position = nn::reduction_position_from_string(reduction_position);
    c.validate();
    return c;
  }
};

json train_config_to_json(const TrainConfig& tc) {
  return json{{"learning_rate", tc.learning_rate},
              {"batch_size", tc.batch_size},
              {"epochs", tc.epochs},
              {"seed", tc.seed},
              {"grad_clip_norm", tc.grad_clip_norm},
              {"geo_aug", tc.geo_aug.enabled},
              {"spec_aug", tc.spec_aug.enabled},
              {"input_noise", tc.input_noise.enabled}};
}

int cmd_train(const CommonOpts& common, CLI::App* cmd, std::string data_dir,
              std::string out_dir, std::string model_kind, ModelFlags mf,
              TrainConfig tc, double lambda, int t_in, int t_out, int stride,
              bool merge, bool ablation, std::string resume) {
  ConfigApplier cfg{cmd, load_config_section(common.config_path, "train")};
  cfg("--data", data_dir);
  cfg("--out", out_dir);
  cfg("--model", model_kind);
  cfg("--preset", mf.preset);
  cfg("--d-model", mf.d_model);
  cfg("--blocks", mf.n_blocks);
  cfg("--heads", mf.n_heads);
  cfg("--kernel", mf.conv_kernel);
  cfg("--ff", mf.ff_expansion);
  cfg("--dropout", mf.dropout);
  cfg("--reduction-position", mf.reduction_position);
  cfg("--lr", tc.learning_rate);
  cfg("--batch", tc.batch_size);
  cfg("--epochs", tc.epochs);
  cfg("--lambda", lambda);
  cfg("--t-in", t_in);
  cfg("--t-out", t_out);
  cfg("--stride", stride);
  if (data_dir.empty() || out_dir.empty())
    throw ConfigError("train: --data and --out are required");
  tc.seed = common.seed;

  const fs::path out = resolve_out(out_dir);
  fs::create_directories(out);
  auto seqs = load_corpus_or_fail(data_dir);
  if (t_in <= 0) t_in = 2 * t_out;
  WindowSpec ws{t_in, t_out, stride};
  auto split = split_corpus(seqs, common.seed);
  if (split.train.empty() || split.val.empty())
    throw DataError("train: corpus too small for a train/val split");
  auto train_w = corpus_windows(split.train, ws, merge, /*centered=*/true);
  auto val_w = corpus_windows(split.val, ws, merge, /*centered=*/true);
  if (train_w.empty() || val_w.empty())
    throw DataError("train: sequences too short for the window spec");
  const int joints = train_w.front().joints();

  json run;
  run["schema"] = "posecast.runconfig.v1";
  run["train"] = {{"data", data_dir},         {"model", model_kind},
                  {"t_in", t_in},             {"t_out", t_out},
                  {"stride", stride},         {"seed", common.seed},
                  {"merge", merge},           {"config", train_config_to_json(tc)}};

  if (model_kind == "ridge") {
    RidgeModel model = ridge_fit(train_w, lambda);
    save_ridge_checkpoint(model, out / "checkpoint.pckp");
    run["train"]["lambda"] = lambda;
    write_json_file(out / "run_config.json", run);
    std::cout << "ridge fitted on " << train_w.size() << " windows, weights "
              << model.weights.rows() << "x" << model.weights.cols() << "\n";
    return 0;
  }
  if (model_kind != "conformer")
    throw ConfigError("train: unknown --model '" + model_kind + "'");

  if (ablation) {
    const nn::ModelConfig mc = mf.build(joints, t_in, t_out);
    auto ab = run_spec_aug_ablation<float>(mc, common.seed, train_w, val_w, tc);
    write_history_csv(out / "history_specaug_on.csv", ab.enabled.history);
    write_history_csv(out / "history_specaug_off.csv", ab.disabled.history);
    json summary = {{"val_mpjpe_1000_specaug_on", ab.final_val_mpjpe_enabled},
                    {"val_mpjpe_1000_specaug_off", ab.final_val_mpjpe_disabled},
                    {"delta", ab.delta()}};
    write_json_file(out / "ablation.json", summary);
    write_json_file(out / "run_config.json", run);
    std::cout << "specaug on: " << display_metric(ab.final_val_mpjpe_enabled)
              << " mm, off: " << display_metric(ab.final_val_mpjpe_disabled)
              << " mm, delta: " << ab.delta() << " mm\n";
    return 0;
  }

  int start_epoch = 0;
  std::unique_ptr<nn::MotionConformer<float>> model;
  if (!resume.empty()) {
    model = std::make_unique<nn::MotionConformer<float>>(
        load_conformer_checkpoint(resume, &start_epoch));
    if (model->config().joints != joints || model->config().t_in != t_in ||
        model->config().t_out != t_out)
      throw ConfigError("train: resume checkpoint shape does not match data");
  } else {
    model = std::make_unique<nn::MotionConformer<float>>(mf.build(joints, t_in, t_out),
                                                         common.seed);
  }
  auto result = train(*model, train_w, val_w, tc, start_epoch);
  save_checkpoint(*model, out / "checkpoint.pckp", start_epoch + tc.epochs);
  write_history_csv(out / "history.csv", result.history);
  write_json_file(out / "run_config.json", run);
  if (result.diverged) {
    std::cerr << "training diverged; last finite checkpoint retained\n";
    return 4;
  }
  std::cout << "trained " << model->param_count() << " parameters for " << tc.epochs
            << " epochs; final val mpjpe@1000 "
            << (result.history.empty()
                    ? std::string("-")
                    : display_metric(result.history.back().val_mpjpe_1000))
            << " mm\n";
  return 0;
}

// ---------------------------------------------------------------------------
// finetune
// ---------------------------------------------------------------------------

int cmd_finetune(const CommonOpts& common, CLI::App* cmd, std::string base,
                 std::string data_dir, std::string out_dir, TrainConfig tc,
                 int stride, std::string horizons_str, double noise_std,
                 double noise_clip, bool noise_targets) {
  ConfigApplier cfg{cmd, load_config_section(common.config_path, "finetune")};
  cfg("--base", base);
  cfg("--data", data_dir);
  cfg("--out", out_dir);
  cfg("--lr", tc.learning_rate);
  cfg("--epochs", tc.epochs);
  if (base.empty())
    throw ConfigError("finetune: --base checkpoint is required");
  if (data_dir.empty() || out_dir.empty())
    throw ConfigError("finetune: --data and --out are required");
  tc.seed = common.seed;
  tc.spec_aug.enabled = false;  // finetuning default: no masking augmentation
  if (noise_std > 0.0) {
    tc.input_noise.enabled = true;
    tc.input_noise.std_mm = noise_std;
    tc.input_noise.clip_mm = noise_clip;
    tc.input_noise.also_targets = noise_targets;
  }

  int start_epoch = 0;
  nn::MotionConformer<float> model = load_conformer_checkpoint(base, &start_epoch);
  const auto& mc = model.config();
  WindowSpec ws{mc.t_in, mc.t_out, stride};
  const fs::path out = resolve_out(out_dir);
  fs::create_directories(out);

  if (is_paired_dir(data_dir)) {
    PairedCorpus corpus = load_paired_corpus(data_dir);
    if (!corpus.clean.empty() && corpus.clean.front().joints() != mc.joints)
      throw ConfigError("finetune: corpus joint count does not match checkpoint");
    HorizonSet horizons{parse_horizons(horizons_str), corpus.clean.front().fps};
    EvalOptions opts;
    opts.measure_throughput = !common.deterministic;
    auto result = finetune_unsupervised(model, corpus, ws, horizons, tc, opts);
    save_checkpoint(model, out / "checkpoint.pckp", start_epoch + tc.epochs);
    write_history_csv(out / "history.csv", result.training.history);
    write_json_file(out / "report_before_measurable.json",
                    report_to_json(result.before.measurable));
    write_json_file(out / "report_before_real.json", report_to_json(result.before.real));
    write_json_file(out / "report_after_measurable.json",
                    report_to_json(result.after.measurable));
    write_json_file(out / "report_after_real.json", report_to_json(result.after.real));
    std::cout << report_table({result.before.measurable, result.after.measurable,
                               result.before.real, result.after.real});
    return result.training.diverged ? 4 : 0;
  }

  auto seqs = load_corpus_or_fail(data_dir);
  if (seqs.front().joints() != mc.joints)
    throw ConfigError("finetune: corpus joint count does not match checkpoint");
  auto split = split_corpus(seqs, common.seed);
  if (split.train.empty() || split.val.empty())
    throw DataError("finetune: corpus too small for a train/val split");
  auto train_w = corpus_windows(split.train, ws, false, true);
  auto val_w = corpus_windows(split.val, ws, false, true);
  auto result = train(model, train_w, val_w, tc, start_epoch);
  save_checkpoint(model, out / "checkpoint.pckp", start_epoch + tc.epochs);
  write_history_csv(out / "history.csv", result.history);
  if (result.diverged) {
    std::cerr << "finetuning diverged; last finite checkpoint retained\n";
    return 4;
  }
  std::cout << "finetuned for " << tc.epochs << " epochs (resumed at epoch "
            << start_epoch << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval / bench
// ---------------------------------------------------------------------------

int cmd_eval(const CommonOpts& common, CLI::App* cmd, std::string data_dir,
             std::string model_sel, std::string out_dir, std::string horizons_str,
             int t_in, int t_out, int stride, bool merge, int fps_warmup,
             int fps_iters) {
  ConfigApplier cfg{cmd, load_config_section(common.config_path, "eval")};
  cfg("--data", data_dir);
  cfg("--model", model_sel);
  cfg("--out", out_dir);
  cfg("--horizons", horizons_str);
  cfg("--t-in", t_in);
  cfg("--t-out", t_out);
  cfg("--stride", stride);
  if (data_dir.empty() || model_sel.empty())
    throw ConfigError("eval: --data and --model are required");

  // Checkpoints carry their own window geometry.
  if (fs::exists(model_sel) && !fs::is_directory(model_sel)) {
    const auto info = peek_checkpoint(model_sel);
    if (info.kind == "motion_conformer") {
      const auto m = load_conformer_checkpoint(model_sel);
      t_in = m.config().t_in;
      t_out = m.config().t_out;
    } else if (info.kind == "ridge") {
      const auto m = load_ridge_checkpoint(model_sel);
      t_in = m.t_in;
      t_out = m.t_out;
    }
  }
  if (t_in <= 0) t_in = 2 * t_out;
  WindowSpec ws{t_in, t_out, stride};
  auto model = make_model(model_sel, t_out);
  EvalOptions opts;
  opts.measure_throughput = !common.deterministic;
  opts.fps.warmup = fps_warmup;
  opts.fps.iters = fps_iters;

  const fs::path out = out_dir.empty() ? fs::path() : resolve_out(out_dir);
  if (!out.empty()) fs::create_directories(out);

  if (is_paired_dir(data_dir)) {
    PairedCorpus corpus = load_paired_corpus(data_dir);
    HorizonSet horizons{parse_horizons(horizons_str), corpus.clean.front().fps};
    const DualReport dual = evaluate_dual(*model, corpus, ws, horizons, opts);
    std::cout << report_table({dual.measurable, dual.real});
    if (!out.empty()) {
      write_json_file(out / "report_measurable.json", report_to_json(dual.measurable));
      write_json_file(out / "report_real.json", report_to_json(dual.real));
    }
    return 0;
  }

  auto seqs = load_corpus_or_fail(data_dir);
  auto windows = corpus_windows(seqs, ws, merge, /*centered=*/false);
  if (windows.empty()) throw DataError("eval: no windows derivable from corpus");
  HorizonSet horizons{parse_horizons(horizons_str), seqs.front().fps};
  const MetricReport report = evaluate(*model, windows, horizons, opts);
  std::cout << report_table({report});
  if (!out.empty()) write_json_file(out / "report.json", report_to_json(report));
  return 0;
}

int cmd_bench(const CommonOpts& common, CLI::App* cmd, std::string data_dir,
              std::string model_sel, int t_in, int t_out, int warmup, int iters,
              std::string out_file) {
  ConfigApplier cfg{cmd, load_config_section(common.config_path, "bench")};
  cfg("--data", data_dir);
  cfg("--model", model_sel);
  cfg("--iters", iters);
  if (data_dir.empty() || model_sel.empty())
    throw ConfigError("bench: --data and --model are required");
  if (fs::exists(model_sel) && !fs::is_directory(model_sel)) {
    const auto info = peek_checkpoint(model_sel);
    if (info.kind == "motion_conformer") {
      const auto m = load_conformer_checkpoint(model_sel);
      t_in = m.config().t_in;
      t_out = m.config().t_out;
    } else if (info.kind == "ridge") {
      const auto m = load_ridge_checkpoint(model_sel);
      t_in = m.t_in;
      t_out = m.t_out;
    }
  }
  if (t_in <= 0) t_in = 2 * t_out;
  auto seqs = load_corpus_or_fail(data_dir);
  auto windows = corpus_windows(seqs, WindowSpec{t_in, t_out, 1}, false, false);
  if (windows.empty()) throw DataError("bench: no windows derivable from corpus");
  auto model = make_model(model_sel, t_out);
  const double fps = measure_fps(*model, windows.front(), warmup, iters);
  std::cout << "fps: " << fps << "\nfce_mm: " << fce(fps) << " (displays "
            << display_fce(fce(fps)) << ")\n";
  if (!out_file.empty())
    write_json_file(resolve_out(out_file), json{{"fps", fps}, {"fce_mm", fce(fps)}});
  return 0;
}

// ---------------------------------------------------------------------------
// compare / render
// ---------------------------------------------------------------------------

int cmd_compare(std::vector<std::string> report_files, std::string out_table,
                std::string out_csv) {
  if (report_files.empty()) throw ConfigError("compare: no report files given");
  std::vector<MetricReport> reports;
  for (const auto& f : report_files) {
    std::ifstream in(f);
    if (!in) throw DataError("compare: cannot open " + f);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw DataError("compare: " + f + " is not valid JSON: " + e.what());
    }
    reports.push_back(report_from_json(j));
  }
  sort_reports_worst_first(reports);
  disambiguate_names(reports);
  const std::string table = report_table(reports);
  std::cout << table;
  if (!out_table.empty()) write_text_file(resolve_out(out_table), table);
  if (!out_csv.empty()) write_text_file(resolve_out(out_csv), report_csv(reports));
  return 0;
}

int cmd_render(const CommonOpts& common, CLI::App* cmd, std::string data_dir,
               std::string model_sel, std::string out_dir, int seq_index,
               int window_index, int t_in, int t_out, int stride, int frames,
               double azimuth) {
  ConfigApplier cfg{cmd, load_config_section(common.config_path, "render")};
  cfg("--data", data_dir);
  cfg("--model", model_sel);
  cfg("--out", out_dir);
  if (data_dir.empty() || out_dir.empty())
    throw ConfigError("render: --data and --out are required");
  auto seqs = load_corpus_or_fail(data_dir);
  if (seq_index < 0 || seq_index >= static_cast<int>(seqs.size()))
    throw ConfigError("render: sequence index out of range");
  const MotionSequence& seq = seqs[seq_index];
  if (seq.layout.edges.empty())
    throw DataError("render: layout of '" + seq.name + "' provides no edges");
  if (!model_sel.empty() && fs::exists(model_sel) && !fs::is_directory(model_sel)) {
    const auto info = peek_checkpoint(model_sel);
    if (info.kind == "motion_conformer") {
      const auto m = load_conformer_checkpoint(model_sel);
      t_in = m.config().t_in;
      t_out = m.config().t_out;
    }
  }
  if (t_in <= 0) t_in = 2 * t_out;
  auto windows = make_windows(seq, WindowSpec{t_in, t_out, stride});
  if (window_index < 0 || window_index >= static_cast<int>(windows.size()))
    throw ConfigError("render: window index out of range");
  const ForecastWindow& w = windows[window_index];

  std::optional<PoseSeq> pred;
  if (!model_sel.empty()) {
    auto model = make_model(model_sel, t_out);
    const ForecastWindow c = center_window(w);
    PoseSeq p = model->predict(c.input);
    for (int t = 0; t < p.frames; ++t)
      for (int j = 0; j < p.joints; ++j)
        for (int k = 0; k < 3; ++k) p.at(t, j, k) += c.offset[k];
    pred = std::move(p);
  }
  RenderOptions opts;
  opts.azimuth_deg = azimuth;
  render_forecast(w.input, pred ? &*pred : nullptr, &w.target, seq.layout,
                  resolve_out(out_dir), frames, opts);
  std::cout << "wrote " << (resolve_out(out_dir) / "composite.ppm").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posecast: absolute 3D pose forecasting benchmark pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOpts common;
  app.add_option("--seed", common.seed, "RNG seed shared by all commands");
  app.add_option("--config", common.config_path, "JSON run-config file");
  app.add_flag("--deterministic", common.deterministic,
               "skip wall-clock measurements for reproducible reports");

  int exit_code = 0;

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic SMF corpus");
  std::string synth_out;
  int synth_count = 20, synth_frames = 150, synth_persons = 1;
  double synth_fps = 25.0;
  MotionParams params;
  bool synth_static = false;
  synth->add_option("--out", synth_out, "output corpus directory");
  synth->add_option("--count", synth_count, "number of sequences");
  synth->add_option("--frames", synth_frames, "frames per sequence");
  synth->add_option("--fps", synth_fps, "frame rate");
  synth->add_option("--persons", synth_persons, "persons per sequence");
  synth->add_option("--speed-min", params.speed_min_mmps, "min speed mm/s");
  synth->add_option("--speed-max", params.speed_max_mmps, "max speed mm/s");
  synth->add_option("--swing-min", params.swing_min_rad, "min limb swing rad");
  synth->add_option("--swing-max", params.swing_max_rad, "max limb swing rad");
  synth->add_flag("--static", synth_static, "zero velocity and oscillation");
  synth->callback([&] {
    exit_code = cmd_synth(common, synth, synth_out, synth_count, synth_frames,
                          synth_fps, synth_persons, params, synth_static);
  });

  // import
  auto* import = app.add_subcommand("import", "transform an SMF corpus");
  std::string import_in, import_out, import_mapping, import_noise_kind,
      import_pair_out;
  double import_fill = -1.0, import_noise_std = 25.0, import_noise_clip = 125.0;
  int import_downsample = 1;
  import->add_option("--in", import_in, "input corpus directory");
  import->add_option("--out", import_out, "output corpus directory");
  import->add_option("--mapping", import_mapping,
                     "comma-separated source joint indices for the 13-joint layout");
  import->add_option("--fill-threshold", import_fill,
                     "carry-forward frames with scores below this threshold");
  import->add_option("--downsample", import_downsample, "frame skip factor");
  import->add_option("--noise-kind", import_noise_kind,
                     "none|gaussian|estimator: build a paired noisy corpus");
  import->add_option("--noise-std", import_noise_std, "gaussian std mm");
  import->add_option("--noise-clip", import_noise_clip, "perturbation clip mm");
  import->add_option("--pair-out", import_pair_out, "paired corpus output directory");
  import->callback([&] {
    exit_code = cmd_import(common, import, import_in, import_out, import_mapping,
                           import_fill, import_downsample, import_noise_kind,
                           import_noise_std, import_noise_clip, import_pair_out);
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "train a forecaster");
  std::string train_data, train_out, train_model = "conformer", train_resume;
  ModelFlags mf;
  TrainConfig tc;
  double train_lambda = 100.0;
  int train_t_in = -1, train_t_out = 25, train_stride = 1;
  bool train_merge = false, train_ablation = false, train_no_geo = false,
       train_no_spec = false;
  train_cmd->add_option("--data", train_data, "SMF corpus directory");
  train_cmd->add_option("--out", train_out, "output directory");
  train_cmd->add_option("--model", train_model, "conformer|ridge");
  train_cmd->add_option("--preset", mf.preset, "toy|paper");
  train_cmd->add_option("--d-model", mf.d_model, "embedding width");
  train_cmd->add_option("--blocks", mf.n_blocks, "conformer block count");
  train_cmd->add_option("--heads", mf.n_heads, "attention heads");
  train_cmd->add_option("--kernel", mf.conv_kernel, "depthwise kernel width");
  train_cmd->add_option("--ff", mf.ff_expansion, "feed-forward expansion");
  train_cmd->add_option("--dropout", mf.dropout, "dropout probability");
  train_cmd->add_option("--reduction-position", mf.reduction_position, "start|end");
  train_cmd->add_option("--lr", tc.learning_rate, "learning rate");
  train_cmd->add_option("--batch", tc.batch_size, "batch size");
  train_cmd->add_option("--epochs", tc.epochs, "epochs");
  train_cmd->add_option("--grad-clip", tc.grad_clip_norm, "gradient norm clip");
  train_cmd->add_option("--lambda", train_lambda, "ridge coefficient");
  train_cmd->add_option("--t-in", train_t_in, "input frames (default 2*t_out)");
  train_cmd->add_option("--t-out", train_t_out, "output frames");
  train_cmd->add_option("--stride", train_stride, "window stride");
  train_cmd->add_flag("--merge-persons", train_merge,
                      "concatenate persons along the joint axis");
  train_cmd->add_flag("--no-geo-aug", train_no_geo, "disable rotation/scaling");
  train_cmd->add_flag("--no-spec-aug", train_no_spec, "disable masking augmentation");
  train_cmd->add_flag("--spec-aug-ablation", train_ablation,
                      "run both masking arms and report the delta");
  train_cmd->add_option("--resume", train_resume, "checkpoint to continue from");
  train_cmd->callback([&] {
    tc.geo_aug.enabled = !train_no_geo;
    tc.spec_aug.enabled = !train_no_spec;
    exit_code = cmd_train(common, train_cmd, train_data, train_out, train_model, mf,
                          tc, train_lambda, train_t_in, train_t_out, train_stride,
                          train_merge, train_ablation, train_resume);
  });

  // finetune
  auto* ft = app.add_subcommand("finetune", "continue training from a checkpoint");
  std::string ft_base, ft_data, ft_out, ft_horizons = "400,1000";
  TrainConfig ft_tc;
  ft_tc.learning_rate = 1e-4;  // a tenth of the training default
  ft_tc.epochs = 2;
  int ft_stride = 1;
  double ft_noise_std = 0.0, ft_noise_clip = 125.0;
  bool ft_noise_targets = false;
  ft->add_option("--base", ft_base, "base checkpoint (required)");
  ft->add_option("--data", ft_data, "SMF corpus or paired corpus directory");
  ft->add_option("--out", ft_out, "output directory");
  ft->add_option("--lr", ft_tc.learning_rate, "learning rate");
  ft->add_option("--epochs", ft_tc.epochs, "epochs");
  ft->add_option("--batch", ft_tc.batch_size, "batch size");
  ft->add_option("--stride", ft_stride, "window stride");
  ft->add_option("--horizons", ft_horizons, "report horizons ms");
  ft->add_option("--noise-std", ft_noise_std,
                 "train with gaussian input noise of this std (mm)");
  ft->add_option("--noise-clip", ft_noise_clip, "noise clip (mm)");
  ft->add_flag("--noise-targets", ft_noise_targets,
               "apply gaussian noise to targets as well");
  ft->callback([&] {
    exit_code = cmd_finetune(common, ft, ft_base, ft_data, ft_out, ft_tc, ft_stride,
                             ft_horizons, ft_noise_std, ft_noise_clip,
                             ft_noise_targets);
  });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a corpus");
  std::string eval_data, eval_model, eval_out, eval_horizons = "400,1000";
  int eval_t_in = -1, eval_t_out = 25, eval_stride = 1, eval_fps_warmup = 3,
      eval_fps_iters = 30;
  bool eval_merge = false;
  eval_cmd->add_option("--data", eval_data, "SMF corpus or paired corpus directory");
  eval_cmd->add_option("--model", eval_model,
                       "repeat_last|last_delta|<checkpoint path>");
  eval_cmd->add_option("--out", eval_out, "output directory for report JSON");
  eval_cmd->add_option("--horizons", eval_horizons, "comma-separated horizons ms");
  eval_cmd->add_option("--t-in", eval_t_in, "input frames (default 2*t_out)");
  eval_cmd->add_option("--t-out", eval_t_out, "output frames");
  eval_cmd->add_option("--stride", eval_stride, "window stride");
  eval_cmd->add_flag("--merge-persons", eval_merge,
                     "concatenate persons along the joint axis");
  eval_cmd->add_option("--fps-warmup", eval_fps_warmup, "untimed warmup passes");
  eval_cmd->add_option("--fps-iters", eval_fps_iters, "timed passes");
  eval_cmd->callback([&] {
    exit_code = cmd_eval(common, eval_cmd, eval_data, eval_model, eval_out,
                         eval_horizons, eval_t_in, eval_t_out, eval_stride,
                         eval_merge, eval_fps_warmup, eval_fps_iters);
  });

  // bench
  auto* bench = app.add_subcommand("bench", "measure forecasts per second");
  std::string bench_data, bench_model, bench_out;
  int bench_t_in = -1, bench_t_out = 25, bench_warmup = 3, bench_iters = 50;
  bench->add_option("--data", bench_data, "SMF corpus directory");
  bench->add_option("--model", bench_model, "model selector");
  bench->add_option("--t-in", bench_t_in, "input frames");
  bench->add_option("--t-out", bench_t_out, "output frames");
  bench->add_option("--warmup", bench_warmup, "untimed warmup passes");
  bench->add_option("--iters", bench_iters, "timed passes");
  bench->add_option("--out", bench_out, "JSON output file");
  bench->callback([&] {
    exit_code = cmd_bench(common, bench, bench_data, bench_model, bench_t_in,
                          bench_t_out, bench_warmup, bench_iters, bench_out);
  });

  // compare
  auto* compare = app.add_subcommand("compare", "merge report JSONs into a table");
  std::vector<std::string> compare_files;
  std::string compare_table, compare_csv;
  compare->add_option("reports", compare_files, "report JSON files");
  compare->add_option("--out-table", compare_table, "write the text table here");
  compare->add_option("--out-csv", compare_csv, "write the CSV here");
  compare->callback(
      [&] { exit_code = cmd_compare(compare_files, compare_table, compare_csv); });

  // render
  auto* render = app.add_subcommand("render", "render skeleton sequences to images");
  std::string render_data, render_model, render_out;
  int render_seq = 0, render_window = 0, render_t_in = -1, render_t_out = 25,
      render_stride = 1, render_frames = 0;
  double render_azimuth = 30.0;
  render->add_option("--data", render_data, "SMF corpus directory");
  render->add_option("--model", render_model, "optional model for predictions");
  render->add_option("--out", render_out, "output image directory");
  render->add_option("--seq", render_seq, "sequence index");
  render->add_option("--window", render_window, "window index");
  render->add_option("--t-in", render_t_in, "input frames");
  render->add_option("--t-out", render_t_out, "output frames");
  render->add_option("--stride", render_stride, "window stride");
  render->add_option("--frames", render_frames, "per-frame images to write");
  render->add_option("--azimuth", render_azimuth, "camera azimuth degrees");
  render->callback([&] {
    exit_code = cmd_render(common, render, render_data, render_model, render_out,
                           render_seq, render_window, render_t_in, render_t_out,
                           render_stride, render_frames, render_azimuth);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
