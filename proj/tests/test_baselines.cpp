#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "posecast/forecaster.hpp"
#include "posecast/metrics.hpp"
#include "posecast/ridge.hpp"
#include "posecast/rng.hpp"
#include "posecast/synth.hpp"
#include "posecast/window.hpp"

using namespace posecast;

namespace {

std::vector<ForecastWindow> windows_from(const MotionParams& params, int seqs,
                                         int frames, std::uint64_t seed,
                                         bool centered = false) {
  auto corpus = synth_corpus(seed, seqs, 25.0, frames, 1, params);
  std::vector<ForecastWindow> out;
  for (const auto& s : corpus) {
    auto w = make_windows(s, WindowSpec{50, 25, 7});
    for (auto& x : w) out.push_back(centered ? center_window(x) : x);
  }
  return out;
}

// Independent normal-equations oracle: explicit inverse of (X'X + lambda*I)
// with the bias column unpenalized.
Eigen::MatrixXd ridge_oracle(const Eigen::MatrixXd& x_raw, const Eigen::MatrixXd& y,
                             double lambda) {
  Eigen::MatrixXd x(x_raw.rows(), x_raw.cols() + 1);
  x.leftCols(x_raw.cols()) = x_raw;
  x.rightCols(1).setOnes();
  Eigen::MatrixXd reg = Eigen::MatrixXd::Identity(x.cols(), x.cols()) * lambda;
  reg(x.cols() - 1, x.cols() - 1) = 0.0;
  return (x.transpose() * x + reg).inverse() * x.transpose() * y;
}

}  // namespace

TEST_CASE("repeat_last_frame copies the last input frame to every step") {
  const auto w = windows_from(MotionParams{}, 1, 80, 3)[0];
  const auto pred = repeat_last_frame(w);
  REQUIRE(pred.frames == 25);
  for (int t = 0; t < 25; ++t)
    for (int j = 0; j < 13; ++j)
      for (int k = 0; k < 3; ++k)
        REQUIRE(pred.at(t, j, k) == w.input.at(49, j, k));
}

TEST_CASE("repeat_last_frame is exact on a static corpus") {
  for (const auto& w : windows_from(MotionParams::statics(), 2, 80, 5)) {
    const auto pred = repeat_last_frame(w);
    for (int t : {0, 12, 24}) REQUIRE(mpjpe(w.target, pred, t) == 0.0);
  }
}

TEST_CASE("repeat_last_frame error grows as ||v||*k under constant velocity") {
  const double speed = 1250.0;  // mm/s -> 50 mm per frame at 25 fps
  const auto windows = windows_from(MotionParams::constant_velocity(speed), 2, 90, 7);
  for (const auto& w : windows) {
    const auto pred = repeat_last_frame(w);
    for (int k = 1; k <= 25; ++k)
      REQUIRE(mpjpe(w.target, pred, k - 1) ==
              Catch::Approx(50.0 * k).margin(1e-6));
  }
}

TEST_CASE("last_delta_average equals repeat_last_frame on static input") {
  const auto w = windows_from(MotionParams::statics(), 1, 80, 11)[0];
  REQUIRE(last_delta_average(w).v == repeat_last_frame(w).v);
}

TEST_CASE("last_delta_average is exact under constant velocity") {
  const auto windows =
      windows_from(MotionParams::constant_velocity(1000.0), 2, 90, 13);
  for (const auto& w : windows) {
    const auto pred = last_delta_average(w);
    REQUIRE(mpjpe(w.target, pred, 24) < 1e-6);
  }
}

TEST_CASE("last_delta_average hand example: mean of (2,0,0) and (4,0,0)") {
  ForecastWindow w;
  w.input = PoseSeq(2, 2);
  w.target = PoseSeq(3, 2);
  w.fps = 25.0;
  // Joint 0 moves +2 in x, joint 1 moves +4; mean delta is (3,0,0).
  w.input.at(1, 0, 0) = w.input.at(0, 0, 0) + 2.0;
  w.input.at(0, 1, 1) = 10.0;
  w.input.at(1, 1, 0) = w.input.at(0, 1, 0) + 4.0;
  w.input.at(1, 1, 1) = 10.0;
  const auto pred = last_delta_average(w);
  for (int k = 1; k <= 3; ++k) {
    REQUIRE(pred.at(k - 1, 0, 0) == Catch::Approx(2.0 + 3.0 * k));
    REQUIRE(pred.at(k - 1, 1, 0) == Catch::Approx(4.0 + 3.0 * k));
    REQUIRE(pred.at(k - 1, 1, 1) == 10.0);
  }
  SECTION("inter-joint offsets are identical in every output frame") {
    for (int t = 0; t < 3; ++t)
      for (int k = 0; k < 3; ++k)
        REQUIRE(pred.at(t, 0, k) - pred.at(t, 1, k) ==
                Catch::Approx(w.input.at(1, 0, k) - w.input.at(1, 1, k)));
  }
  SECTION("a single input frame is rejected") {
    ForecastWindow short_w = w;
    short_w.input = PoseSeq(1, 2);
    REQUIRE_THROWS_AS(last_delta_average(short_w), ConfigError);
  }
}

TEST_CASE("last_delta_average preserves pairwise joint distances of the last frame") {
  const auto w = windows_from(MotionParams{}, 1, 90, 17)[0];
  const auto pred = last_delta_average(w);
  for (int t = 0; t < pred.frames; ++t)
    for (int a = 0; a < 13; ++a)
      for (int b = a + 1; b < 13; ++b) {
        double dl = 0.0, dp = 0.0;
        for (int k = 0; k < 3; ++k) {
          const double x = w.input.at(49, a, k) - w.input.at(49, b, k);
          dl += x * x;
          const double y = pred.at(t, a, k) - pred.at(t, b, k);
          dp += y * y;
        }
        REQUIRE(std::sqrt(dp) == Catch::Approx(std::sqrt(dl)).margin(1e-9));
      }
}

TEST_CASE("static baselines are equivariant under rigid motion of the input") {
  const auto w = windows_from(MotionParams{}, 1, 90, 19)[0];
  const double a = 1.1, c = std::cos(a), s = std::sin(a);
  const std::array<double, 3> shift{300.0, -40.0, 120.0};
  auto transform_seq = [&](const PoseSeq& in) {
    PoseSeq out = in;
    for (int t = 0; t < in.frames; ++t)
      for (int j = 0; j < in.joints; ++j) {
        const double x = in.at(t, j, 0), y = in.at(t, j, 1), z = in.at(t, j, 2);
        out.at(t, j, 0) = c * x + s * z + shift[0];
        out.at(t, j, 1) = y + shift[1];
        out.at(t, j, 2) = -s * x + c * z + shift[2];
      }
    return out;
  };
  ForecastWindow tw = w;
  tw.input = transform_seq(w.input);
  for (auto fn : {repeat_last_frame, last_delta_average}) {
    const auto direct = transform_seq(fn(w));
    const auto moved = fn(tw);
    for (std::size_t i = 0; i < direct.v.size(); ++i)
      REQUIRE(moved.v[i] == Catch::Approx(direct.v[i]).margin(1e-9));
  }
}

TEST_CASE("ridge interpolates data generated by an exact linear map") {
  SeededRng rng(23);
  const int t_in = 3, t_out = 2, joints = 2;
  const int d_in = t_in * joints * 3, d_out = t_out * joints * 3;
  Eigen::MatrixXd map = Eigen::MatrixXd::Zero(d_in + 1, d_out);
  for (int i = 0; i <= d_in; ++i)
    for (int j = 0; j < d_out; ++j) map(i, j) = rng.uniform(-0.5, 0.5);
  std::vector<ForecastWindow> train;
  for (int n = 0; n < 40; ++n) {
    ForecastWindow w;
    w.input = PoseSeq(t_in, joints);
    w.target = PoseSeq(t_out, joints);
    w.fps = 25.0;
    w.centered = true;
    Eigen::RowVectorXd x(d_in + 1);
    for (int i = 0; i < d_in; ++i) {
      w.input.v[i] = rng.uniform(-100.0, 100.0);
      x[i] = w.input.v[i];
    }
    x[d_in] = 1.0;
    const Eigen::RowVectorXd y = x * map;
    for (int i = 0; i < d_out; ++i) w.target.v[i] = y[i];
    train.push_back(w);
  }
  const RidgeModel model = ridge_fit(train, 1e-12);
  for (const auto& w : train) {
    const auto pred = ridge_predict(model, w);
    for (int i = 0; i < d_out; ++i)
      REQUIRE(pred.v[i] == Catch::Approx(w.target.v[i]).epsilon(1e-6));
  }
}

TEST_CASE("huge lambda shrinks predictions toward the per-output training mean") {
  auto train = windows_from(MotionParams{}, 2, 80, 29, /*centered=*/true);
  const RidgeModel model = ridge_fit(train, 1e14);
  std::vector<double> mean(model.d_out(), 0.0);
  for (const auto& w : train)
    for (int i = 0; i < model.d_out(); ++i) mean[i] += w.target.v[i] / train.size();
  const auto pred = ridge_predict(model, train[0]);
  for (int i = 0; i < model.d_out(); ++i)
    REQUIRE(pred.v[i] == Catch::Approx(mean[i]).margin(1.0));
}

TEST_CASE("ridge weights match the explicit normal-equations oracle") {
  SeededRng rng(31);
  const int t_in = 2, joints = 1;  // 6 features, 5 samples
  std::vector<ForecastWindow> train;
  Eigen::MatrixXd X(5, 6), Y(5, 3);
  for (int n = 0; n < 5; ++n) {
    ForecastWindow w;
    w.input = PoseSeq(t_in, joints);
    w.target = PoseSeq(1, joints);
    w.fps = 25.0;
    w.centered = true;
    for (int i = 0; i < 6; ++i) {
      w.input.v[i] = rng.uniform(-10.0, 10.0);
      X(n, i) = w.input.v[i];
    }
    for (int i = 0; i < 3; ++i) {
      w.target.v[i] = rng.uniform(-10.0, 10.0);
      Y(n, i) = w.target.v[i];
    }
    train.push_back(w);
  }
  const double lambda = 3.5;
  const RidgeModel model = ridge_fit(train, lambda);
  const Eigen::MatrixXd oracle = ridge_oracle(X, Y, lambda);
  REQUIRE(model.weights.rows() == oracle.rows());
  for (Eigen::Index r = 0; r < oracle.rows(); ++r)
    for (Eigen::Index c = 0; c < oracle.cols(); ++c)
      REQUIRE(model.weights(r, c) == Catch::Approx(oracle(r, c)).epsilon(1e-6));

  SECTION("fit-then-predict matches the oracle's prediction") {
    Eigen::RowVectorXd x(7);
    x.head(6) = X.row(2);
    x[6] = 1.0;
    const Eigen::RowVectorXd y = x * oracle;
    const auto pred = ridge_predict(model, train[2]);
    for (int i = 0; i < 3; ++i)
      REQUIRE(pred.v[i] == Catch::Approx(y[i]).epsilon(1e-6));
  }
}

TEST_CASE("ridge prediction is affine: zero input yields the bias row") {
  auto train = windows_from(MotionParams{}, 1, 80, 37, /*centered=*/true);
  const RidgeModel model = ridge_fit(train, 100.0);
  ForecastWindow zero = train[0];
  std::fill(zero.input.v.begin(), zero.input.v.end(), 0.0);
  const auto pred = ridge_predict(model, zero);
  for (int i = 0; i < model.d_out(); ++i)
    REQUIRE(pred.v[i] == Catch::Approx(model.weights(model.d_in(), i)).margin(1e-9));

  SECTION("affine-map identity on combinations") {
    const auto& w1 = train[0];
    const auto& w2 = train[1 % train.size()];
    const double a = 0.3, b = 1.4;
    ForecastWindow combo = w1;
    for (std::size_t i = 0; i < combo.input.v.size(); ++i)
      combo.input.v[i] = a * w1.input.v[i] + b * w2.input.v[i];
    const auto p_combo = ridge_predict(model, combo);
    const auto p1 = ridge_predict(model, w1);
    const auto p2 = ridge_predict(model, w2);
    for (int i = 0; i < model.d_out(); ++i) {
      const double bias = model.weights(model.d_in(), i);
      const double expect = a * p1.v[i] + b * p2.v[i] - (a + b - 1.0) * bias;
      REQUIRE(p_combo.v[i] == Catch::Approx(expect).margin(1e-6));
    }
  }
}

TEST_CASE("training MSE is nondecreasing in lambda") {
  auto train = windows_from(MotionParams{}, 3, 80, 41, /*centered=*/true);
  double prev = -1.0;
  for (double lambda : {1e-6, 1e-2, 1.0, 1e2, 1e4, 1e8}) {
    const RidgeModel model = ridge_fit(train, lambda);
    double mse = 0.0;
    for (const auto& w : train) {
      const auto pred = ridge_predict(model, w);
      for (int i = 0; i < model.d_out(); ++i) {
        const double d = pred.v[i] - w.target.v[i];
        mse += d * d;
      }
    }
    REQUIRE(mse >= prev - 1e-6 * std::max(1.0, prev));
    prev = mse;
  }
}

TEST_CASE("rank-deficient X at lambda zero raises a numerical error") {
  // Two identical samples cannot determine the weights.
  auto base = windows_from(MotionParams{}, 1, 80, 43, /*centered=*/true);
  std::vector<ForecastWindow> train = {base[0], base[0]};
  REQUIRE_THROWS_AS(ridge_fit(train, 0.0), NumericError);
  REQUIRE_NOTHROW(ridge_fit(train, 1.0));
}

TEST_CASE("ridge contract errors") {
  auto train = windows_from(MotionParams{}, 1, 80, 47, /*centered=*/true);
  SECTION("uncentered windows rejected") {
    auto uncentered = windows_from(MotionParams{}, 1, 80, 47);
    REQUIRE_THROWS_AS(ridge_fit(uncentered, 1.0), ConfigError);
  }
  SECTION("shape mismatch at predict") {
    const RidgeModel model = ridge_fit(train, 1.0);
    ForecastWindow w = train[0];
    w.input = PoseSeq(49, 13);
    w.centered = true;
    REQUIRE_THROWS_AS(ridge_predict(model, w), ConfigError);
  }
  SECTION("empty training set") {
    REQUIRE_THROWS_AS(ridge_fit({}, 1.0), ConfigError);
  }
}
