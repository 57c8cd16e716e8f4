#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "posecast/errors.hpp"
#include "posecast/forecaster.hpp"
#include "posecast/window.hpp"

namespace posecast {

// Closed-form ridge regressor from flattened input windows to flattened
// target windows. A constant-1 feature carries the bias; its weight row is
// not penalized. Operates on centered windows in raw millimeters.
struct RidgeModel {
  Eigen::MatrixXd weights;  // (d_in + 1) x d_out, bias row last
  double lambda = 0.0;
  int t_in = 0;
  int t_out = 0;
  int joints = 0;

  int d_in() const { return t_in * joints * 3; }
  int d_out() const { return t_out * joints * 3; }

  void validate() const {
    if (weights.rows() != d_in() + 1 || weights.cols() != d_out())
      throw ConfigError("RidgeModel: weight shape inconsistent with window spec");
    if (!weights.allFinite()) throw NumericError("RidgeModel: non-finite weights");
  }
};

namespace ridge_detail {

inline Eigen::RowVectorXd flatten_input(const ForecastWindow& w) {
  Eigen::RowVectorXd x(w.input.v.size());
  for (std::size_t i = 0; i < w.input.v.size(); ++i) x[i] = w.input.v[i];
  return x;
}

}  // namespace ridge_detail

// Solves W = (X^T X + lambda*I)^-1 X^T Y on flattened centered windows, with
// the appended bias feature left unpenalized.
inline RidgeModel ridge_fit(const std::vector<ForecastWindow>& train, double lambda) {
  if (train.empty()) throw ConfigError("ridge_fit: no training windows");
  if (lambda < 0.0) throw ConfigError("ridge_fit: lambda must be >= 0");
  const ForecastWindow& first = train.front();
  for (const auto& w : train) {
    if (!w.centered) throw ConfigError("ridge_fit: windows must be centered");
    if (w.t_in() != first.t_in() || w.t_out() != first.t_out() ||
        w.joints() != first.joints())
      throw ConfigError("ridge_fit: windows have mismatched shapes");
  }
  RidgeModel model;
  model.lambda = lambda;
  model.t_in = first.t_in();
  model.t_out = first.t_out();
  model.joints = first.joints();
  const int n = static_cast<int>(train.size());
  const int d_in = model.d_in();
  const int d_out = model.d_out();

  Eigen::MatrixXd X(n, d_in + 1);
  Eigen::MatrixXd Y(n, d_out);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d_in; ++c) X(i, c) = train[i].input.v[c];
    X(i, d_in) = 1.0;
    for (int c = 0; c < d_out; ++c) Y(i, c) = train[i].target.v[c];
  }

  Eigen::MatrixXd gram = X.transpose() * X;
  for (int c = 0; c < d_in; ++c) gram(c, c) += lambda;  // bias unpenalized
  Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success)
    throw NumericError("ridge_fit: normal equations decomposition failed");
  if (lambda == 0.0) {
    const auto d = solver.vectorD();
    const double max_pivot = d.cwiseAbs().maxCoeff();
    if (d.cwiseAbs().minCoeff() <= max_pivot * 1e-12)
      throw NumericError("ridge_fit: singular system (rank-deficient X at lambda = 0)");
  }
  model.weights = solver.solve(X.transpose() * Y);
  if (!model.weights.allFinite())
    throw NumericError("ridge_fit: singular system (rank-deficient X at this lambda)");
  return model;
}

inline PoseSeq ridge_predict(const RidgeModel& model, const ForecastWindow& w) {
  if (!w.centered) throw ConfigError("ridge_predict: window must be centered");
  if (w.t_in() != model.t_in || w.joints() != model.joints)
    throw ConfigError("ridge_predict: window shape does not match model");
  Eigen::RowVectorXd x(model.d_in() + 1);
  for (int c = 0; c < model.d_in(); ++c) x[c] = w.input.v[c];
  x[model.d_in()] = 1.0;
  const Eigen::RowVectorXd y = x * model.weights;
  PoseSeq out(model.t_out, model.joints);
  for (int c = 0; c < model.d_out(); ++c) out.v[c] = y[c];
  return out;
}

class RidgeForecaster final : public Forecaster {
 public:
  explicit RidgeForecaster(RidgeModel model) : model_(std::move(model)) {
    model_.validate();
  }
  std::string name() const override { return "ridge"; }
  int t_out() const override { return model_.t_out; }
  PoseSeq predict(const PoseSeq& input) const override {
    ForecastWindow w;
    w.input = input;
    w.target = PoseSeq(model_.t_out, input.joints);
    w.centered = true;  // evaluation protocol hands centered inputs
    return ridge_predict(model_, w);
  }
  const RidgeModel& model() const { return model_; }

 private:
  RidgeModel model_;
};

}  // namespace posecast
