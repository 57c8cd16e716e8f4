#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "posecast/errors.hpp"
#include "posecast/pose.hpp"
#include "posecast/window.hpp"

namespace posecast {

// A forecaster maps an observed pose sequence [t_in][J][3] to a predicted
// future [t_out][J][3]. The evaluation protocol always hands models centered
// inputs; the two static baselines are translation-equivariant so centering
// does not change their output.
class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual std::string name() const = 0;
  virtual std::optional<std::int64_t> param_count() const { return std::nullopt; }
  virtual int t_out() const = 0;
  virtual PoseSeq predict(const PoseSeq& input) const = 0;
};

// Every output frame repeats the last observed frame.
inline PoseSeq repeat_last_frame(const ForecastWindow& w) {
  const int J = w.joints();
  PoseSeq out(w.t_out(), J);
  const int last = w.t_in() - 1;
  for (int t = 0; t < w.t_out(); ++t)
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < 3; ++k)
        out.at(t, j, k) = w.input.at(last, j, k);
  return out;
}

// Repeats the mean of the last input pose delta: a single 3-vector d (mean
// over joints of last minus previous frame) is added k times at output step k,
// so the pose shape of the last frame is kept while it keeps moving.
inline PoseSeq last_delta_average(const ForecastWindow& w) {
  if (w.t_in() < 2)
    throw ConfigError("last_delta_average: needs at least two input frames");
  const int J = w.joints();
  const int last = w.t_in() - 1;
  double d[3] = {0.0, 0.0, 0.0};
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < 3; ++k)
      d[k] += w.input.at(last, j, k) - w.input.at(last - 1, j, k);
  for (double& x : d) x /= J;
  PoseSeq out(w.t_out(), J);
  for (int t = 0; t < w.t_out(); ++t)
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < 3; ++k)
        out.at(t, j, k) = w.input.at(last, j, k) + (t + 1) * d[k];
  return out;
}

class RepeatLastFrame final : public Forecaster {
 public:
  explicit RepeatLastFrame(int t_out) : t_out_(t_out) {}
  std::string name() const override { return "repeat_last"; }
  int t_out() const override { return t_out_; }
  PoseSeq predict(const PoseSeq& input) const override {
    ForecastWindow w;
    w.input = input;
    w.target = PoseSeq(t_out_, input.joints);
    return repeat_last_frame(w);
  }

 private:
  int t_out_;
};

class LastDeltaAverage final : public Forecaster {
 public:
  explicit LastDeltaAverage(int t_out) : t_out_(t_out) {}
  std::string name() const override { return "last_delta"; }
  int t_out() const override { return t_out_; }
  PoseSeq predict(const PoseSeq& input) const override {
    ForecastWindow w;
    w.input = input;
    w.target = PoseSeq(t_out_, input.joints);
    return last_delta_average(w);
  }

 private:
  int t_out_;
};

// Adapter for ad-hoc forecasters (stubs, oracles, closures over other models).
class CallbackForecaster final : public Forecaster {
 public:
  using Fn = std::function<PoseSeq(const PoseSeq&)>;
  CallbackForecaster(std::string name, int t_out, Fn fn)
      : name_(std::move(name)), t_out_(t_out), fn_(std::move(fn)) {}
  std::string name() const override { return name_; }
  int t_out() const override { return t_out_; }
  PoseSeq predict(const PoseSeq& input) const override { return fn_(input); }

 private:
  std::string name_;
  int t_out_;
  Fn fn_;
};

}  // namespace posecast
