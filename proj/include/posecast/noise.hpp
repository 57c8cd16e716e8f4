#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "posecast/conformer_forecaster.hpp"
#include "posecast/errors.hpp"
#include "posecast/evaluate.hpp"
#include "posecast/rng.hpp"
#include "posecast/sequence.hpp"
#include "posecast/smf.hpp"
#include "posecast/train.hpp"
#include "posecast/transforms.hpp"
#include "posecast/window.hpp"

namespace posecast {

// Gaussian input-corruption process: independent zero-mean draws per
// coordinate, each perturbation clamped to +/- clip.
struct NoiseSpec {
  double std_mm = 25.0;
  double clip_mm = 125.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(std_mm > 0.0)) throw ConfigError("NoiseSpec: std must be > 0");
    if (clip_mm < std_mm) throw ConfigError("NoiseSpec: clip must be >= std");
  }
};

inline MotionSequence add_gaussian_noise(const MotionSequence& seq,
                                         const NoiseSpec& spec) {
  spec.validate();
  SeededRng rng(spec.seed);
  MotionSequence out = seq;
  for (auto& x : out.data) {
    const double d = std::clamp(rng.normal(0.0, spec.std_mm), -spec.clip_mm,
                                spec.clip_mm);
    x += d;
  }
  return out;
}

// Desk-scale emulation of pose-estimator output: a constant per-joint bias
// over the whole sequence (structural error, e.g. a consistently short limb)
// plus temporally correlated jitter, plus rare low-score frames with corrupted
// coordinates. Clearly synthetic; real estimator output is imported via SMF.
struct EstimatorNoiseSpec {
  double bias_std_mm = 18.0;
  double jitter_std_mm = 12.0;
  double jitter_corr = 0.9;  // AR(1) coefficient per frame
  double invalid_frame_prob = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (bias_std_mm < 0.0 || jitter_std_mm < 0.0)
      throw ConfigError("EstimatorNoiseSpec: negative noise scale");
    if (jitter_corr < 0.0 || jitter_corr >= 1.0)
      throw ConfigError("EstimatorNoiseSpec: jitter_corr must be in [0, 1)");
    if (invalid_frame_prob < 0.0 || invalid_frame_prob >= 1.0)
      throw ConfigError("EstimatorNoiseSpec: invalid_frame_prob must be in [0, 1)");
  }
};

inline MotionSequence add_estimator_noise(const MotionSequence& seq,
                                          const EstimatorNoiseSpec& spec) {
  spec.validate();
  SeededRng rng(spec.seed);
  MotionSequence out = seq;
  const int J = seq.joints();
  out.validity.assign(static_cast<std::size_t>(seq.frames) * seq.persons, 1.0);
  for (int p = 0; p < seq.persons; ++p) {
    std::vector<double> bias(static_cast<std::size_t>(J) * 3);
    for (auto& b : bias) b = rng.normal(0.0, spec.bias_std_mm);
    std::vector<double> ar(static_cast<std::size_t>(J) * 3, 0.0);
    const double innov = std::sqrt(1.0 - spec.jitter_corr * spec.jitter_corr);
    for (int f = 0; f < seq.frames; ++f) {
      for (std::size_t c = 0; c < ar.size(); ++c)
        ar[c] = spec.jitter_corr * ar[c] +
                innov * rng.normal(0.0, spec.jitter_std_mm);
      const bool invalid = rng.uniform() < spec.invalid_frame_prob;
      for (int j = 0; j < J; ++j)
        for (int k = 0; k < 3; ++k) {
          double& x = out.at(f, p, j, k);
          x += bias[static_cast<std::size_t>(j) * 3 + k] +
               ar[static_cast<std::size_t>(j) * 3 + k];
          if (invalid) x += rng.normal(0.0, 400.0);
        }
      out.score_at(f, p) = invalid ? rng.uniform(0.0, 0.05) : rng.uniform(0.5, 1.0);
    }
  }
  return out;
}

enum class NoiseProvenance { kGaussian, kEstimatorImport };

inline std::string to_string(NoiseProvenance p) {
  return p == NoiseProvenance::kGaussian ? "gaussian" : "estimator-import";
}

// Frame-aligned noisy/clean corpus pair.
struct PairedCorpus {
  std::vector<MotionSequence> noisy;
  std::vector<MotionSequence> clean;
  NoiseProvenance provenance = NoiseProvenance::kGaussian;
  std::optional<NoiseSpec> noise;

  void validate() const {
    if (noisy.size() != clean.size())
      throw DataError("PairedCorpus: sequence count mismatch");
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      const auto& n = noisy[i];
      const auto& c = clean[i];
      if (n.frames != c.frames || n.persons != c.persons ||
          n.joints() != c.joints() || n.fps != c.fps)
        throw DataError("PairedCorpus: pair '" + c.name + "' is misaligned");
    }
  }
};

// Synthetic path: corrupts each clean sequence with an independent stream
// derived from the spec seed and the sequence index.
inline PairedCorpus build_noisy_benchmark(const std::vector<MotionSequence>& clean,
                                          const NoiseSpec& spec) {
  spec.validate();
  PairedCorpus out;
  out.clean = clean;
  out.provenance = NoiseProvenance::kGaussian;
  out.noise = spec;
  out.noisy.reserve(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    NoiseSpec s = spec;
    s.seed = detail::splitmix64(spec.seed ^ (0x9e3779b97f4a7c15ULL + i));
    out.noisy.push_back(add_gaussian_noise(clean[i], s));
  }
  out.validate();
  return out;
}

// Import path: pairs externally produced (estimator) sequences with clean
// ground truth; low-score frames are repaired by carry-forward first.
inline PairedCorpus build_noisy_benchmark(const std::vector<MotionSequence>& clean,
                                          std::vector<MotionSequence> noisy_import,
                                          double validity_threshold = 0.1) {
  PairedCorpus out;
  out.clean = clean;
  out.provenance = NoiseProvenance::kEstimatorImport;
  out.noisy.reserve(noisy_import.size());
  for (auto& seq : noisy_import) {
    if (seq.has_validity())
      out.noisy.push_back(fill_invalid_frames(seq, validity_threshold));
    else
      out.noisy.push_back(std::move(seq));
  }
  out.validate();
  return out;
}

// Mean per-joint displacement between the noisy and clean halves over all
// frames; the corpus's "time-zero" input error.
inline double mean_displacement_mm(const PairedCorpus& corpus) {
  corpus.validate();
  double sum = 0.0;
  std::int64_t count = 0;
  for (std::size_t i = 0; i < corpus.clean.size(); ++i) {
    const auto& n = corpus.noisy[i];
    const auto& c = corpus.clean[i];
    for (int f = 0; f < c.frames; ++f)
      for (int p = 0; p < c.persons; ++p)
        for (int j = 0; j < c.joints(); ++j) {
          double d2 = 0.0;
          for (int k = 0; k < 3; ++k) {
            const double d = n.at(f, p, j, k) - c.at(f, p, j, k);
            d2 += d * d;
          }
          sum += std::sqrt(d2);
          ++count;
        }
  }
  return count ? sum / count : 0.0;
}

struct DualReport {
  MetricReport measurable;  // predictions vs. noisy targets
  MetricReport real;        // same predictions vs. clean ground truth
};

// Windows both corpus halves with one shared windowing, predicts from the
// noisy inputs, and scores the same predictions against both target sets.
inline DualReport evaluate_dual(const Forecaster& model, const PairedCorpus& corpus,
                                const WindowSpec& wspec, const HorizonSet& horizons,
                                const EvalOptions& opts = {}) {
  corpus.validate();
  std::vector<ForecastWindow> noisy_w, clean_w;
  for (std::size_t i = 0; i < corpus.noisy.size(); ++i) {
    auto wn = make_windows(corpus.noisy[i], wspec);
    auto wc = make_windows(corpus.clean[i], wspec);
    if (wn.size() != wc.size())
      throw DataError("evaluate_dual: shared windowing failed for pair " +
                      corpus.clean[i].name);
    noisy_w.insert(noisy_w.end(), wn.begin(), wn.end());
    clean_w.insert(clean_w.end(), wc.begin(), wc.end());
  }
  if (noisy_w.empty()) throw DataError("evaluate_dual: corpus yields no windows");
  const ForecastWindow& first = noisy_w.front();
  if (horizons.fps != first.fps)
    throw ConfigError("evaluate_dual: horizon fps does not match corpus fps");
  horizons.validate(first.t_out());

  DualReport out;
  const std::size_t nh = horizons.horizons_ms.size();
  auto init_report = [&](MetricReport& r, const std::string& label) {
    r.model_name = model.name() + label;
    r.param_count = model.param_count();
    r.horizons_ms = horizons.horizons_ms;
    r.mpjpe_mm.assign(nh, 0.0);
    r.vim_mm.assign(nh, 0.0);
    r.sample_count = static_cast<std::int64_t>(noisy_w.size());
  };
  init_report(out.measurable, " (measurable)");
  init_report(out.real, " (real)");

  for (std::size_t i = 0; i < noisy_w.size(); ++i) {
    const ForecastWindow c = center_window(noisy_w[i]);
    PoseSeq pred = model.predict(c.input);
    if (pred.frames != first.t_out() || pred.joints != first.joints())
      throw ConfigError("evaluate_dual: prediction shape mismatch");
    for (int t = 0; t < pred.frames; ++t)
      for (int j = 0; j < pred.joints; ++j)
        for (int k = 0; k < 3; ++k) pred.at(t, j, k) += c.offset[k];
    for (std::size_t h = 0; h < nh; ++h) {
      const int idx = horizons.frame_index(horizons.horizons_ms[h]);
      out.measurable.mpjpe_mm[h] += mpjpe(noisy_w[i].target, pred, idx);
      out.measurable.vim_mm[h] += vim(noisy_w[i].target, pred, idx);
      out.real.mpjpe_mm[h] += mpjpe(clean_w[i].target, pred, idx);
      out.real.vim_mm[h] += vim(clean_w[i].target, pred, idx);
    }
  }
  for (std::size_t h = 0; h < nh; ++h) {
    const double n = static_cast<double>(noisy_w.size());
    out.measurable.mpjpe_mm[h] /= n;
    out.measurable.vim_mm[h] /= n;
    out.real.mpjpe_mm[h] /= n;
    out.real.vim_mm[h] /= n;
  }
  if (opts.measure_throughput) {
    const double f = measure_fps(model, first, opts.fps.warmup, opts.fps.iters);
    for (MetricReport* r : {&out.measurable, &out.real}) {
      r->fps = f;
      r->fce_mm = fce(f);
      r->fade_mm.resize(nh);
      for (std::size_t h = 0; h < nh; ++h)
        r->fade_mm[h] = fade(r->mpjpe_mm[h], horizons.horizons_ms[h], f);
    }
  }
  out.measurable.validate();
  out.real.validate();
  return out;
}

// Splits noisy-corpus windows into train/val (tail tenth for validation).
inline void unsupervised_splits(const PairedCorpus& corpus, const WindowSpec& wspec,
                                std::vector<ForecastWindow>* train_w,
                                std::vector<ForecastWindow>* val_w) {
  std::vector<ForecastWindow> all;
  for (const auto& seq : corpus.noisy) {
    auto w = make_windows(seq, wspec);
    all.insert(all.end(), w.begin(), w.end());
  }
  if (all.size() < 2)
    throw DataError("finetune_unsupervised: corpus yields too few windows");
  for (auto& w : all) w = center_window(w);
  const std::size_t val_n = std::max<std::size_t>(1, all.size() / 10);
  train_w->assign(all.begin(), all.end() - val_n);
  val_w->assign(all.end() - val_n, all.end());
}

struct FinetuneResult {
  TrainResult training;
  DualReport before;
  DualReport after;
};

// Continues training with the noisy sequences as both inputs and targets; the
// clean half of the corpus is only read for the before/after reports.
inline FinetuneResult finetune_unsupervised(nn::MotionConformer<float>& model,
                                            const PairedCorpus& corpus,
                                            const WindowSpec& wspec,
                                            const HorizonSet& horizons,
                                            const TrainConfig& cfg,
                                            const EvalOptions& opts = {}) {
  FinetuneResult out;
  {
    ConformerForecaster before_model(model, "motion_conformer");
    out.before = evaluate_dual(before_model, corpus, wspec, horizons, opts);
  }
  std::vector<ForecastWindow> train_w, val_w;
  unsupervised_splits(corpus, wspec, &train_w, &val_w);
  out.training = train(model, train_w, val_w, cfg);
  {
    ConformerForecaster after_model(model, "motion_conformer (finetuned)");
    out.after = evaluate_dual(after_model, corpus, wspec, horizons, opts);
  }
  return out;
}

// Finetuning defaults: a tenth of the pretraining rate and no masking
// augmentation.
inline TrainConfig default_finetune_config(TrainConfig pretrain) {
  pretrain.learning_rate *= 0.1;
  pretrain.spec_aug.enabled = false;
  return pretrain;
}

// Paired corpus on disk: two SMF directories plus a manifest.
inline void save_paired_corpus(const PairedCorpus& corpus,
                               const std::filesystem::path& dir) {
  corpus.validate();
  save_sequences(corpus.noisy, dir / "noisy");
  save_sequences(corpus.clean, dir / "clean");
  nlohmann::json manifest;
  manifest["schema"] = "posecast.paired.v1";
  manifest["provenance"] = to_string(corpus.provenance);
  if (corpus.noise) {
    manifest["noise"] = {{"std_mm", corpus.noise->std_mm},
                         {"clip_mm", corpus.noise->clip_mm},
                         {"seed", corpus.noise->seed}};
  } else {
    manifest["noise"] = nullptr;
  }
  std::ofstream f(dir / "manifest.json");
  if (!f) throw DataError("save_paired_corpus: cannot write manifest");
  f << manifest.dump(2) << "\n";
}

inline PairedCorpus load_paired_corpus(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  {
    std::ifstream f(dir / "manifest.json");
    if (!f)
      throw DataError("load_paired_corpus: missing manifest in " + dir.string());
    try {
      f >> manifest;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("load_paired_corpus: corrupt manifest: ") + e.what());
    }
  }
  if (manifest.value("schema", "") != "posecast.paired.v1")
    throw DataError("load_paired_corpus: unknown manifest schema");
  PairedCorpus out;
  out.noisy = load_sequences(dir / "noisy");
  out.clean = load_sequences(dir / "clean");
  out.provenance = manifest.value("provenance", "") == "gaussian"
                       ? NoiseProvenance::kGaussian
                       : NoiseProvenance::kEstimatorImport;
  if (manifest.contains("noise") && !manifest["noise"].is_null()) {
    NoiseSpec spec;
    spec.std_mm = manifest["noise"].value("std_mm", 25.0);
    spec.clip_mm = manifest["noise"].value("clip_mm", 125.0);
    spec.seed = manifest["noise"].value("seed", 0ULL);
    out.noise = spec;
  }
  out.validate();
  return out;
}

}  // namespace posecast
