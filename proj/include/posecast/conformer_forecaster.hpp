#pragma once

#include <mutex>
#include <string>
#include <utility>

#include "posecast/forecaster.hpp"
#include "posecast/nn/conformer.hpp"

namespace posecast {

// Forecaster adapter around a trained MotionConformer. Forward passes reuse
// internal layer caches, so concurrent callers are serialized by a mutex;
// the wrapped parameters are never modified.
class ConformerForecaster final : public Forecaster {
 public:
  explicit ConformerForecaster(nn::MotionConformer<float> model,
                               std::string name = "motion_conformer")
      : model_(std::move(model)), name_(std::move(name)) {}

  std::string name() const override { return name_; }
  std::optional<std::int64_t> param_count() const override {
    return model_.param_count();
  }
  int t_out() const override { return model_.config().t_out; }

  PoseSeq predict(const PoseSeq& input) const override {
    const auto& cfg = model_.config();
    if (input.frames != cfg.t_in || input.joints != cfg.joints)
      throw ConfigError("ConformerForecaster: input shape does not match config");
    nn::Mat<float> x(cfg.t_in, cfg.channels());
    for (int t = 0; t < cfg.t_in; ++t)
      for (int c = 0; c < cfg.channels(); ++c)
        x(t, c) = static_cast<float>(input.v[static_cast<std::size_t>(t) * cfg.channels() + c]);
    nn::Mat<float> y;
    {
      std::lock_guard<std::mutex> lock(mu_);
      y = model_.forward(x, 1, /*train=*/false);
    }
    PoseSeq out(cfg.t_out, cfg.joints);
    for (int t = 0; t < cfg.t_out; ++t)
      for (int c = 0; c < cfg.channels(); ++c)
        out.v[static_cast<std::size_t>(t) * cfg.channels() + c] = y(t, c);
    return out;
  }

  nn::MotionConformer<float>& model() { return model_; }
  const nn::MotionConformer<float>& model() const { return model_; }

 private:
  mutable nn::MotionConformer<float> model_;
  mutable std::mutex mu_;
  std::string name_;
};

}  // namespace posecast
