#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "posecast/noise.hpp"
#include "posecast/synth.hpp"

using namespace posecast;

namespace {

std::vector<MotionSequence> clean_corpus(int count, int frames,
                                         std::uint64_t seed = 3) {
  return synth_corpus(seed, count, 25.0, frames, 1);
}

nn::ModelConfig small_config() {
  nn::ModelConfig cfg;
  cfg.d_model = 24;
  cfg.n_blocks = 1;
  cfg.n_heads = 2;
  cfg.conv_kernel = 5;
  cfg.ff_expansion = 2;
  cfg.dropout = 0.0;
  cfg.t_in = 50;
  cfg.t_out = 25;
  cfg.joints = 13;
  return cfg;
}

}  // namespace

TEST_CASE("gaussian perturbations are clipped and have the right spread") {
  // About a million coordinates.
  auto seq = clean_corpus(1, 8600)[0];
  NoiseSpec spec;
  spec.seed = 11;
  const auto noisy = add_gaussian_noise(seq, spec);
  REQUIRE(noisy.data.size() == seq.data.size());
  double sq = 0.0;
  std::int64_t nonzero = 0;
  for (std::size_t i = 0; i < seq.data.size(); ++i) {
    const double d = noisy.data[i] - seq.data[i];
    REQUIRE(std::abs(d) <= 125.0);
    sq += d * d;
    if (d != 0.0) ++nonzero;
  }
  const double std_emp = std::sqrt(sq / seq.data.size());
  REQUIRE(std_emp == Catch::Approx(25.0).epsilon(0.03));
  // Perturbations are nonzero essentially everywhere.
  REQUIRE(nonzero == static_cast<std::int64_t>(seq.data.size()));
}

TEST_CASE("gaussian noise is deterministic per seed") {
  auto seq = clean_corpus(1, 50)[0];
  NoiseSpec spec;
  spec.seed = 21;
  REQUIRE(add_gaussian_noise(seq, spec).data == add_gaussian_noise(seq, spec).data);
  NoiseSpec other = spec;
  other.seed = 22;
  REQUIRE(add_gaussian_noise(seq, spec).data != add_gaussian_noise(seq, other).data);
}

TEST_CASE("noise spec invariants") {
  NoiseSpec bad;
  bad.std_mm = 0.0;
  REQUIRE_THROWS_AS(bad.validate(), ConfigError);
  bad.std_mm = 50.0;
  bad.clip_mm = 25.0;
  REQUIRE_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("gaussian benchmark pairs every clean sequence") {
  const auto clean = clean_corpus(10, 80);
  NoiseSpec spec;
  spec.seed = 5;
  const auto corpus = build_noisy_benchmark(clean, spec);
  REQUIRE(corpus.noisy.size() == 10);
  REQUIRE(corpus.provenance == NoiseProvenance::kGaussian);
  // Independent streams per sequence.
  REQUIRE(corpus.noisy[0].data != corpus.noisy[1].data);
  for (std::size_t i = 0; i < 10; ++i)
    REQUIRE(corpus.noisy[i].frames == clean[i].frames);
}

TEST_CASE("import path rejects misaligned pairs") {
  const auto clean = clean_corpus(2, 80);
  auto noisy = clean;
  noisy[1].frames = 79;
  noisy[1].data.resize(noisy[1].coord_count());
  REQUIRE_THROWS_AS(build_noisy_benchmark(clean, noisy), DataError);
}

TEST_CASE("import path repairs low-score frames before pairing") {
  const auto clean = clean_corpus(1, 60);
  auto noisy = clean;
  noisy[0].validity.assign(60, 0.9);
  noisy[0].validity[10] = 0.05;  // below the 0.1 threshold
  for (int j = 0; j < 13; ++j)
    for (int k = 0; k < 3; ++k) noisy[0].at(10, 0, j, k) = 9999.0;
  const auto corpus = build_noisy_benchmark(clean, noisy);
  REQUIRE(corpus.provenance == NoiseProvenance::kEstimatorImport);
  for (int j = 0; j < 13; ++j)
    REQUIRE(corpus.noisy[0].at(10, 0, j, 0) == corpus.noisy[0].at(9, 0, j, 0));
}

TEST_CASE("estimator-style noise is structured and deterministic") {
  const auto seq = clean_corpus(1, 100)[0];
  EstimatorNoiseSpec spec;
  spec.seed = 31;
  const auto a = add_estimator_noise(seq, spec);
  const auto b = add_estimator_noise(seq, spec);
  REQUIRE(a.data == b.data);
  REQUIRE(a.has_validity());
  // The constant per-joint bias makes the mean displacement clearly positive.
  PairedCorpus corpus;
  corpus.noisy = {a};
  corpus.clean = {seq};
  REQUIRE(mean_displacement_mm(corpus) > 5.0);
}

TEST_CASE("dual evaluation on a zero-noise corpus returns identical reports") {
  const auto clean = clean_corpus(2, 80);
  PairedCorpus corpus;
  corpus.clean = clean;
  corpus.noisy = clean;
  corpus.provenance = NoiseProvenance::kEstimatorImport;
  RepeatLastFrame model(25);
  HorizonSet horizons{{400.0, 1000.0}, 25.0};
  EvalOptions opts;
  opts.measure_throughput = false;
  const auto dual = evaluate_dual(model, corpus, WindowSpec{50, 25, 5}, horizons, opts);
  REQUIRE(dual.measurable.mpjpe_mm == dual.real.mpjpe_mm);
  REQUIRE(dual.measurable.vim_mm == dual.real.vim_mm);
}

TEST_CASE("a perfect oracle on noisy targets shows zero measurable, positive real") {
  const auto clean = clean_corpus(2, 80);
  NoiseSpec spec;
  spec.seed = 13;
  const auto corpus = build_noisy_benchmark(clean, spec);
  const WindowSpec ws{50, 25, 10};

  // Replays the centered noisy target for each window in evaluation order.
  std::vector<ForecastWindow> noisy_w;
  for (const auto& s : corpus.noisy) {
    auto w = make_windows(s, ws);
    noisy_w.insert(noisy_w.end(), w.begin(), w.end());
  }
  auto index = std::make_shared<std::size_t>(0);
  CallbackForecaster oracle("noisy_oracle", 25, [&, index](const PoseSeq&) {
    const auto c = center_window(noisy_w[(*index)++ % noisy_w.size()]);
    return c.target;
  });

  HorizonSet horizons{{1000.0}, 25.0};
  EvalOptions opts;
  opts.measure_throughput = false;
  const auto dual = evaluate_dual(oracle, corpus, ws, horizons, opts);
  REQUIRE(dual.measurable.mpjpe_mm[0] < 1e-9);
  REQUIRE(dual.real.mpjpe_mm[0] > 1.0);
}

TEST_CASE("real error is bounded below by measurable minus the perturbation") {
  const auto clean = clean_corpus(3, 80);
  NoiseSpec spec;
  spec.seed = 17;
  const auto corpus = build_noisy_benchmark(clean, spec);
  const WindowSpec ws{50, 25, 5};
  HorizonSet horizons{{1000.0}, 25.0};
  EvalOptions opts;
  opts.measure_throughput = false;
  LastDeltaAverage model(25);
  const auto dual = evaluate_dual(model, corpus, ws, horizons, opts);

  // Mean per-joint perturbation magnitude at the horizon frame of each
  // window's target, computed directly from the paired corpora.
  double perturbation = 0.0;
  std::int64_t count = 0;
  const int idx = horizons.frame_index(1000.0);
  for (std::size_t i = 0; i < corpus.clean.size(); ++i) {
    auto wn = make_windows(corpus.noisy[i], ws);
    auto wc = make_windows(corpus.clean[i], ws);
    for (std::size_t k = 0; k < wn.size(); ++k) {
      for (int j = 0; j < 13; ++j) {
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) {
          const double d = wn[k].target.at(idx, j, c) - wc[k].target.at(idx, j, c);
          d2 += d * d;
        }
        perturbation += std::sqrt(d2);
        ++count;
      }
    }
  }
  perturbation /= count;
  REQUIRE(dual.real.mpjpe_mm[0] >= dual.measurable.mpjpe_mm[0] - perturbation - 1e-9);
}

TEST_CASE("zero-epoch finetuning changes nothing and reports identically") {
  const auto clean = clean_corpus(2, 80);
  NoiseSpec spec;
  spec.seed = 23;
  const auto corpus = build_noisy_benchmark(clean, spec);
  nn::MotionConformer<float> model(small_config(), 7);
  const auto before_state = model.state();
  TrainConfig tc;
  tc.epochs = 0;
  EvalOptions opts;
  opts.measure_throughput = false;
  const auto result = finetune_unsupervised(model, corpus, WindowSpec{50, 25, 5},
                                            HorizonSet{{1000.0}, 25.0}, tc, opts);
  REQUIRE(model.state() == before_state);
  REQUIRE(result.before.measurable.mpjpe_mm == result.after.measurable.mpjpe_mm);
  REQUIRE(result.before.real.mpjpe_mm == result.after.real.mpjpe_mm);
}

TEST_CASE("unsupervised finetuning never reads the clean half during optimization") {
  const auto clean = clean_corpus(3, 80);
  NoiseSpec spec;
  spec.seed = 29;
  const auto corpus = build_noisy_benchmark(clean, spec);
  PairedCorpus poisoned = corpus;
  for (auto& s : poisoned.clean)
    std::fill(s.data.begin(), s.data.end(), 0.0);

  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 16;
  tc.seed = 5;
  tc.geo_aug.enabled = false;
  EvalOptions opts;
  opts.measure_throughput = false;
  const WindowSpec ws{50, 25, 5};
  const HorizonSet horizons{{1000.0}, 25.0};

  nn::MotionConformer<float> m1(small_config(), 11), m2(small_config(), 11);
  (void)finetune_unsupervised(m1, corpus, ws, horizons, tc, opts);
  (void)finetune_unsupervised(m2, poisoned, ws, horizons, tc, opts);
  // Identical final weights: the optimization consumed only the noisy half.
  REQUIRE(m1.state() == m2.state());
}

TEST_CASE("finetuning on a degenerate (clean) corpus is continued training") {
  const auto clean = clean_corpus(2, 80);
  PairedCorpus corpus;
  corpus.clean = clean;
  corpus.noisy = clean;
  corpus.provenance = NoiseProvenance::kEstimatorImport;
  nn::MotionConformer<float> model(small_config(), 13);
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 16;
  tc.geo_aug.enabled = false;
  EvalOptions opts;
  opts.measure_throughput = false;
  const auto result = finetune_unsupervised(model, corpus, WindowSpec{50, 25, 5},
                                            HorizonSet{{1000.0}, 25.0}, tc, opts);
  REQUIRE(!result.training.diverged);
  REQUIRE(result.training.history.size() == 1);
}

TEST_CASE("paired corpus round-trips through its on-disk layout") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "posecast_paired";
  fs::remove_all(dir);
  const auto clean = clean_corpus(2, 60);
  NoiseSpec spec;
  spec.std_mm = 30.0;
  spec.clip_mm = 150.0;
  spec.seed = 37;
  const auto corpus = build_noisy_benchmark(clean, spec);
  save_paired_corpus(corpus, dir);
  REQUIRE(fs::exists(dir / "manifest.json"));
  const auto loaded = load_paired_corpus(dir);
  REQUIRE(loaded.provenance == NoiseProvenance::kGaussian);
  REQUIRE(loaded.noise.has_value());
  REQUIRE(loaded.noise->std_mm == 30.0);
  REQUIRE(loaded.clean.size() == 2);
  // Round-trip through f32 storage preserves the loaded representation.
  const auto reloaded = load_paired_corpus(dir);
  REQUIRE(reloaded.noisy[0].data == loaded.noisy[0].data);
}

TEST_CASE("default finetune config derives from the pretraining config") {
  TrainConfig pre;
  pre.learning_rate = 2e-3;
  pre.spec_aug.enabled = true;
  const auto ft = default_finetune_config(pre);
  REQUIRE(ft.learning_rate == Catch::Approx(2e-4));
  REQUIRE(!ft.spec_aug.enabled);
}
