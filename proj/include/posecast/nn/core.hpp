#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "posecast/errors.hpp"
#include "posecast/rng.hpp"

namespace posecast::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Named view onto one parameter tensor and its gradient accumulator.
template <typename S>
struct ParamRef {
  std::string name;
  Mat<S>* value;
  Mat<S>* grad;
};

template <typename S>
using ParamList = std::vector<ParamRef<S>>;

template <typename S>
inline std::int64_t total_size(const ParamList<S>& params) {
  std::int64_t n = 0;
  for (const auto& p : params) n += p.value->size();
  return n;
}

template <typename S>
inline void zero_grads(ParamList<S>& params) {
  for (auto& p : params) p.grad->setZero();
}

template <typename S>
inline std::vector<S> flatten_values(const ParamList<S>& params) {
  std::vector<S> out;
  out.reserve(static_cast<std::size_t>(total_size(params)));
  for (const auto& p : params)
    out.insert(out.end(), p.value->data(), p.value->data() + p.value->size());
  return out;
}

template <typename S>
inline void unflatten_values(ParamList<S>& params, const std::vector<S>& flat) {
  if (static_cast<std::int64_t>(flat.size()) != total_size(params))
    throw ConfigError("unflatten_values: size mismatch");
  std::size_t off = 0;
  for (auto& p : params) {
    std::copy(flat.begin() + off, flat.begin() + off + p.value->size(), p.value->data());
    off += p.value->size();
  }
}

// Draws independent of the scalar type, so float and double instantiations of
// one config+seed share identical underlying values.
template <typename S>
inline void fill_uniform(Mat<S>& m, double lo, double hi, SeededRng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<S>(rng.uniform(lo, hi));
}

template <typename S>
inline void xavier_uniform(Mat<S>& m, int fan_in, int fan_out, SeededRng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  fill_uniform(m, -limit, limit, rng);
}

template <typename S>
inline S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

}  // namespace posecast::nn
