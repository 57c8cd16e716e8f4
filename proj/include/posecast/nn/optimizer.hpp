#pragma once

#include <cmath>
#include <vector>

#include "posecast/nn/core.hpp"

namespace posecast::nn {

// Global gradient norm across all parameter tensors.
template <typename S>
inline double grad_norm(const ParamList<S>& params) {
  double sq = 0.0;
  for (const auto& p : params)
    sq += p.grad->template cast<double>().squaredNorm();
  return std::sqrt(sq);
}

template <typename S>
inline void clip_grad_norm(ParamList<S>& params, double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = grad_norm(params);
  if (norm <= max_norm || norm == 0.0) return;
  const S scale = static_cast<S>(max_norm / norm);
  for (auto& p : params) *p.grad *= scale;
}

// Linear warmup to the base rate, then cosine decay to min_ratio * base.
struct LrSchedule {
  double base_lr = 1e-3;
  int warmup_steps = 0;
  int total_steps = 1;
  double min_ratio = 0.05;

  double at(int step) const {
    if (warmup_steps > 0 && step < warmup_steps)
      return base_lr * (step + 1) / warmup_steps;
    const int decay_steps = total_steps - warmup_steps;
    if (decay_steps <= 0) return base_lr;
    const double t = std::min(1.0, static_cast<double>(step - warmup_steps) / decay_steps);
    const double cos = 0.5 * (1.0 + std::cos(3.14159265358979323846 * t));
    return base_lr * (min_ratio + (1.0 - min_ratio) * cos);
  }
};

// Adam with bias correction; per-parameter moment buffers in the scalar type
// of the model.
template <typename S>
class Adam {
 public:
  S beta1 = S(0.9);
  S beta2 = S(0.999);
  S eps = S(1e-8);

  explicit Adam(const ParamList<S>& params) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
      m_.push_back(Mat<S>::Zero(p.value->rows(), p.value->cols()));
      v_.push_back(Mat<S>::Zero(p.value->rows(), p.value->cols()));
    }
  }

  void step(ParamList<S>& params, double lr) {
    ++t_;
    const S c1 = S(1) - static_cast<S>(std::pow(static_cast<double>(beta1), t_));
    const S c2 = S(1) - static_cast<S>(std::pow(static_cast<double>(beta2), t_));
    const S a = static_cast<S>(lr);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& m = m_[i];
      auto& v = v_[i];
      const auto& g = *params[i].grad;
      m = beta1 * m + (S(1) - beta1) * g;
      v = beta2 * v.array().matrix() + (S(1) - beta2) * g.cwiseProduct(g);
      const auto mhat = (m / c1).array();
      const auto vhat = (v / c2).array();
      params[i].value->array() -= a * mhat / (vhat.sqrt() + eps);
    }
  }

  int steps_taken() const { return t_; }

 private:
  std::vector<Mat<S>> m_, v_;
  int t_ = 0;
};

}  // namespace posecast::nn
