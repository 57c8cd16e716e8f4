#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "posecast/augment.hpp"
#include "posecast/errors.hpp"
#include "posecast/metrics.hpp"
#include "posecast/nn/conformer.hpp"
#include "posecast/nn/optimizer.hpp"
#include "posecast/window.hpp"

namespace posecast {

// Gaussian corruption of training inputs (robustness pretraining). Targets
// stay clean unless also_targets is set.
struct InputNoiseSpec {
  bool enabled = false;
  double std_mm = 25.0;
  double clip_mm = 125.0;
  bool also_targets = false;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 10;
  std::uint64_t seed = 0;
  GeoAugSpec geo_aug;
  SpecAugSpec spec_aug;
  InputNoiseSpec input_noise;
  double grad_clip_norm = 1.0;
  int warmup_steps = -1;  // < 0: min(100, total/10)
  double lr_min_ratio = 0.05;

  void validate() const {
    if (!(learning_rate >= 0.0)) throw ConfigError("TrainConfig: learning_rate < 0");
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size < 1");
    if (epochs < 0) throw ConfigError("TrainConfig: epochs < 0");
    if (grad_clip_norm < 0.0) throw ConfigError("TrainConfig: grad_clip_norm < 0");
    if (input_noise.enabled &&
        (!(input_noise.std_mm > 0.0) || input_noise.clip_mm < input_noise.std_mm))
      throw ConfigError("TrainConfig: invalid input noise parameters");
  }
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_mpjpe_1000 = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  bool diverged = false;
};

// Mean Euclidean joint error over all rows (frames) and joints, in the units
// of the tensors; the training loss is the time-averaged positional error.
template <typename S>
inline double pose_loss(const nn::Mat<S>& pred, const nn::Mat<S>& target, int joints,
                        nn::Mat<S>* grad = nullptr) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw ConfigError("pose_loss: shape mismatch");
  const Eigen::Index rows = pred.rows();
  const double count = static_cast<double>(rows) * joints;
  if (grad) grad->setZero(rows, pred.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (int j = 0; j < joints; ++j) {
      double d[3], n2 = 0.0;
      for (int k = 0; k < 3; ++k) {
        d[k] = static_cast<double>(pred(r, 3 * j + k)) - static_cast<double>(target(r, 3 * j + k));
        n2 += d[k] * d[k];
      }
      const double n = std::sqrt(n2);
      loss += n / count;
      if (grad && n > 0.0)
        for (int k = 0; k < 3; ++k)
          (*grad)(r, 3 * j + k) = static_cast<S>(d[k] / (n * count));
    }
  }
  return loss;
}

namespace train_detail {

template <typename S>
inline void window_to_rows(const PoseSeq& seq, nn::Mat<S>& out, Eigen::Index row0) {
  for (int t = 0; t < seq.frames; ++t)
    for (int c = 0; c < seq.joints * 3; ++c)
      out(row0 + t, c) = static_cast<S>(seq.v[static_cast<std::size_t>(t) * seq.joints * 3 + c]);
}

template <typename S>
inline void add_clipped_noise(nn::Mat<S>& m, const InputNoiseSpec& spec,
                              SeededRng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double d = std::clamp(rng.normal(0.0, spec.std_mm), -spec.clip_mm,
                                spec.clip_mm);
    m.data()[i] += static_cast<S>(d);
  }
}

}  // namespace train_detail

// Assembles one training batch. Geometric augmentation transforms input and
// target together; Gaussian input noise and masking touch the input rows only
// (targets too for noise when also_targets is set).
template <typename S>
inline void make_training_batch(const std::vector<ForecastWindow>& windows,
                                const std::vector<int>& indices,
                                const GeoAugSpec& geo, const SpecAugSpec& spec,
                                const InputNoiseSpec& noise, SeededRng& rng,
                                nn::Mat<S>& x, nn::Mat<S>& y) {
  const int b = static_cast<int>(indices.size());
  const ForecastWindow& first = windows[indices[0]];
  const int c = first.joints() * 3;
  x.resize(static_cast<Eigen::Index>(b) * first.t_in(), c);
  y.resize(static_cast<Eigen::Index>(b) * first.t_out(), c);
  nn::Mat<S> xi, yi;
  for (int i = 0; i < b; ++i) {
    const ForecastWindow* w = &windows[indices[i]];
    ForecastWindow aug;
    if (geo.enabled) {
      aug = geometric_augment(*w, geo.yaw_range, geo.scale_min, geo.scale_max, rng);
      w = &aug;
    }
    xi.resize(w->t_in(), c);
    train_detail::window_to_rows(w->input, xi, 0);
    if (noise.enabled) train_detail::add_clipped_noise(xi, noise, rng);
    if (spec.enabled) spec_augment_inplace(xi, spec, rng);
    x.middleRows(static_cast<Eigen::Index>(i) * w->t_in(), w->t_in()) = xi;
    if (noise.enabled && noise.also_targets) {
      yi.resize(w->t_out(), c);
      train_detail::window_to_rows(w->target, yi, 0);
      train_detail::add_clipped_noise(yi, noise, rng);
      y.middleRows(static_cast<Eigen::Index>(i) * w->t_out(), w->t_out()) = yi;
    } else {
      train_detail::window_to_rows(w->target, y, static_cast<Eigen::Index>(i) * w->t_out());
    }
  }
}

namespace train_detail {

// Validation loss and MPJPE at the 1000 ms horizon (or the last output frame
// when 1000 ms is out of range), computed in evaluation mode.
template <typename S>
inline void validate_pass(nn::MotionConformer<S>& model,
                          const std::vector<ForecastWindow>& val, int batch_size,
                          double fps, double* val_loss, double* val_mpjpe) {
  const auto& cfg = model.config();
  int h_index = static_cast<int>(std::llround(fps)) - 1;
  if (h_index < 0 || h_index >= cfg.t_out) h_index = cfg.t_out - 1;
  const int c = cfg.channels();
  double loss_sum = 0.0, mpjpe_sum = 0.0;
  std::int64_t samples = 0;
  nn::Mat<S> x, y;
  for (std::size_t pos = 0; pos < val.size(); pos += batch_size) {
    const int b = static_cast<int>(std::min<std::size_t>(batch_size, val.size() - pos));
    x.resize(static_cast<Eigen::Index>(b) * cfg.t_in, c);
    y.resize(static_cast<Eigen::Index>(b) * cfg.t_out, c);
    for (int i = 0; i < b; ++i) {
      window_to_rows(val[pos + i].input, x, static_cast<Eigen::Index>(i) * cfg.t_in);
      window_to_rows(val[pos + i].target, y, static_cast<Eigen::Index>(i) * cfg.t_out);
    }
    nn::Mat<S> pred = model.forward(x, b, /*train=*/false);
    loss_sum += pose_loss<S>(pred, y, cfg.joints) * b;
    for (int i = 0; i < b; ++i) {
      const Eigen::Index r = static_cast<Eigen::Index>(i) * cfg.t_out + h_index;
      double acc = 0.0;
      for (int j = 0; j < cfg.joints; ++j) {
        double n2 = 0.0;
        for (int k = 0; k < 3; ++k) {
          const double d = static_cast<double>(pred(r, 3 * j + k)) -
                           static_cast<double>(y(r, 3 * j + k));
          n2 += d * d;
        }
        acc += std::sqrt(n2);
      }
      mpjpe_sum += acc / cfg.joints;
    }
    samples += b;
  }
  *val_loss = loss_sum / samples;
  *val_mpjpe = mpjpe_sum / samples;
}

}  // namespace train_detail

// Gradient-based training with warmup/cosine learning rate, gradient-norm
// clipping, per-epoch history, and divergence rollback to the last finite
// epoch. Deterministic for a fixed seed (single-threaded, seeded shuffling,
// augmentation and dropout).
template <typename S>
inline TrainResult train(nn::MotionConformer<S>& model,
                         const std::vector<ForecastWindow>& train_windows,
                         const std::vector<ForecastWindow>& val_windows,
                         const TrainConfig& cfg, int start_epoch = 0) {
  cfg.validate();
  const auto& mc = model.config();
  if (train_windows.empty() || val_windows.empty())
    throw ConfigError("train: empty train or validation split");
  auto check = [&](const ForecastWindow& w) {
    if (w.t_in() != mc.t_in || w.t_out() != mc.t_out || w.joints() != mc.joints)
      throw ConfigError("train: window shape does not match model config");
    if (!w.centered) throw ConfigError("train: windows must be centered");
  };
  for (const auto& w : train_windows) check(w);
  for (const auto& w : val_windows) check(w);
  cfg.spec_aug.validate(mc.t_in, mc.channels());

  SeededRng root(cfg.seed);
  SeededRng shuffle_rng = root.fork(1);
  SeededRng aug_rng = root.fork(2);
  SeededRng drop_rng = root.fork(3);

  const int n = static_cast<int>(train_windows.size());
  const int steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const int total_steps = steps_per_epoch * cfg.epochs;
  nn::LrSchedule schedule;
  schedule.base_lr = cfg.learning_rate;
  schedule.total_steps = std::max(1, total_steps);
  schedule.warmup_steps =
      cfg.warmup_steps >= 0 ? cfg.warmup_steps : std::min(100, total_steps / 10);
  schedule.min_ratio = cfg.lr_min_ratio;

  nn::Adam<S> adam(model.params());
  TrainResult result;
  std::vector<S> last_good = model.state();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  nn::Mat<S> x, y, grad;
  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the seeded stream.
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[static_cast<int>(shuffle_rng.uniform_int(0, i))]);
    double loss_acc = 0.0;
    std::int64_t loss_count = 0;
    bool finite = true;
    for (int pos = 0; pos < n && finite; pos += cfg.batch_size) {
      std::vector<int> idx(order.begin() + pos,
                           order.begin() + std::min(n, pos + cfg.batch_size));
      make_training_batch<S>(train_windows, idx, cfg.geo_aug, cfg.spec_aug,
                             cfg.input_noise, aug_rng, x, y);
      try {
        nn::Mat<S> pred = model.forward(x, static_cast<int>(idx.size()), true, &drop_rng);
        const double loss = pose_loss<S>(pred, y, mc.joints, &grad);
        if (!std::isfinite(loss)) {
          finite = false;
          break;
        }
        model.zero_grad();
        model.backward(grad, static_cast<int>(idx.size()));
        nn::clip_grad_norm(model.params(), cfg.grad_clip_norm);
        if (cfg.learning_rate > 0.0) adam.step(model.params(), schedule.at(step));
        ++step;
        loss_acc += loss * idx.size();
        loss_count += idx.size();
      } catch (const NumericError&) {
        finite = false;
      }
    }
    if (!finite) {
      model.set_state(last_good);
      result.diverged = true;
      break;
    }
    EpochStats stats;
    stats.epoch = start_epoch + epoch + 1;
    stats.train_loss = loss_count ? loss_acc / loss_count : 0.0;
    try {
      train_detail::validate_pass(model, val_windows, cfg.batch_size,
                                  val_windows.front().fps, &stats.val_loss,
                                  &stats.val_mpjpe_1000);
    } catch (const NumericError&) {
      stats.val_loss = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isfinite(stats.val_loss)) {
      model.set_state(last_good);
      result.diverged = true;
      break;
    }
    result.history.push_back(stats);
    last_good = model.state();
  }
  return result;
}

inline void write_history_csv(const std::filesystem::path& path,
                              const std::vector<EpochStats>& history) {
  std::ofstream f(path);
  if (!f) throw DataError("write_history_csv: cannot write " + path.string());
  f << "epoch,train_loss,val_loss,val_mpjpe_1000\n";
  char buf[160];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g\n", h.epoch, h.train_loss,
                  h.val_loss, h.val_mpjpe_1000);
    f << buf;
  }
}

struct SpecAugAblation {
  TrainResult enabled;
  TrainResult disabled;
  double final_val_mpjpe_enabled = 0.0;
  double final_val_mpjpe_disabled = 0.0;
  double delta() const { return final_val_mpjpe_enabled - final_val_mpjpe_disabled; }
};

// Runs both arms (masking augmentation on/off) from one config and seed.
template <typename S>
inline SpecAugAblation run_spec_aug_ablation(const nn::ModelConfig& mc,
                                             std::uint64_t model_seed,
                                             const std::vector<ForecastWindow>& train_w,
                                             const std::vector<ForecastWindow>& val_w,
                                             const TrainConfig& cfg) {
  SpecAugAblation out;
  {
    nn::MotionConformer<S> model(mc, model_seed);
    TrainConfig c = cfg;
    c.spec_aug.enabled = true;
    out.enabled = train(model, train_w, val_w, c);
    if (!out.enabled.history.empty())
      out.final_val_mpjpe_enabled = out.enabled.history.back().val_mpjpe_1000;
  }
  {
    nn::MotionConformer<S> model(mc, model_seed);
    TrainConfig c = cfg;
    c.spec_aug.enabled = false;
    out.disabled = train(model, train_w, val_w, c);
    if (!out.disabled.history.empty())
      out.final_val_mpjpe_disabled = out.disabled.history.back().val_mpjpe_1000;
  }
  return out;
}

}  // namespace posecast
