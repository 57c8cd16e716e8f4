#pragma once

#include <string>
#include <vector>

#include "posecast/nn/core.hpp"

namespace posecast::nn {

// All layers cache what their backward pass needs during forward; backward
// accumulates parameter gradients and returns the gradient w.r.t. the input.
// Activations are (rows, channels) matrices; time-axis layers additionally
// take the per-sample sequence length.

template <typename S>
struct Dense {
  Mat<S> W, b;    // W: (in, out), b: (1, out)
  Mat<S> gW, gb;
  Mat<S> x_;

  void init(int in, int out, SeededRng& rng, bool zero = false) {
    W.resize(in, out);
    b.setZero(1, out);
    if (zero)
      W.setZero();
    else
      xavier_uniform(W, in, out, rng);
    gW.setZero(in, out);
    gb.setZero(1, out);
  }

  Mat<S> forward(const Mat<S>& x) {
    x_ = x;
    Mat<S> y = x * W;
    y.rowwise() += b.row(0);
    return y;
  }

  Mat<S> backward(const Mat<S>& gy) {
    gW.noalias() += x_.transpose() * gy;
    gb.row(0) += gy.colwise().sum();
    return gy * W.transpose();
  }

  void collect(const std::string& prefix, ParamList<S>& out) {
    out.push_back({prefix + ".W", &W, &gW});
    out.push_back({prefix + ".b", &b, &gb});
  }
};

template <typename S>
struct LayerNorm {
  static constexpr S kEps = S(1e-5);
  Mat<S> gamma, beta, ggamma, gbeta;
  Mat<S> xhat_;
  Mat<S> inv_std_;  // (rows, 1)

  void init(int channels) {
    gamma.setOnes(1, channels);
    beta.setZero(1, channels);
    ggamma.setZero(1, channels);
    gbeta.setZero(1, channels);
  }

  Mat<S> forward(const Mat<S>& x) {
    const Eigen::Index n = x.rows(), c = x.cols();
    xhat_.resize(n, c);
    inv_std_.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const S mu = x.row(i).mean();
      const S var = (x.row(i).array() - mu).square().mean();
      const S inv = S(1) / std::sqrt(var + kEps);
      inv_std_(i, 0) = inv;
      xhat_.row(i) = (x.row(i).array() - mu) * inv;
    }
    Mat<S> y = xhat_;
    y.array().rowwise() *= gamma.row(0).array();
    y.rowwise() += beta.row(0);
    return y;
  }

  Mat<S> backward(const Mat<S>& gy) {
    const Eigen::Index n = gy.rows(), c = gy.cols();
    ggamma.row(0) += (gy.array() * xhat_.array()).colwise().sum().matrix();
    gbeta.row(0) += gy.colwise().sum();
    Mat<S> gx(n, c);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto gxhat = (gy.row(i).array() * gamma.row(0).array()).eval();
      const S mean_g = gxhat.mean();
      const S mean_gx = (gxhat * xhat_.row(i).array()).mean();
      gx.row(i) = ((gxhat - mean_g - xhat_.row(i).array() * mean_gx) * inv_std_(i, 0)).matrix();
    }
    return gx;
  }

  void collect(const std::string& prefix, ParamList<S>& out) {
    out.push_back({prefix + ".gamma", &gamma, &ggamma});
    out.push_back({prefix + ".beta", &beta, &gbeta});
  }
};

template <typename S>
struct Swish {
  Mat<S> x_;

  Mat<S> forward(const Mat<S>& x) {
    x_ = x;
    return x.unaryExpr([](S v) { return v * sigmoid(v); });
  }

  Mat<S> backward(const Mat<S>& gy) const {
    Mat<S> gx = x_.unaryExpr([](S v) {
      const S s = sigmoid(v);
      return s * (S(1) + v * (S(1) - s));
    });
    return gx.cwiseProduct(gy);
  }
};

// Gated linear unit over channel halves: y = a * sigmoid(g), [a, g] = x.
template <typename S>
struct Glu {
  Mat<S> a_, sg_;

  Mat<S> forward(const Mat<S>& x) {
    const Eigen::Index c = x.cols() / 2;
    a_ = x.leftCols(c);
    sg_ = x.rightCols(c).unaryExpr([](S v) { return sigmoid(v); });
    return a_.cwiseProduct(sg_);
  }

  Mat<S> backward(const Mat<S>& gy) const {
    Mat<S> gx(gy.rows(), gy.cols() * 2);
    gx.leftCols(gy.cols()) = gy.cwiseProduct(sg_);
    gx.rightCols(gy.cols()) =
        gy.cwiseProduct(a_).cwiseProduct(sg_).cwiseProduct(
            (Mat<S>::Ones(sg_.rows(), sg_.cols()) - sg_));
    return gx;
  }
};

// Inverted dropout; identity in evaluation mode.
template <typename S>
struct Dropout {
  S p = S(0);
  Mat<S> mask_;
  bool active_ = false;

  Mat<S> forward(const Mat<S>& x, bool train, SeededRng* rng) {
    active_ = train && p > S(0);
    if (!active_) return x;
    const S keep = S(1) - p;
    mask_.resize(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < mask_.size(); ++i)
      mask_.data()[i] = rng->uniform() < static_cast<double>(p) ? S(0) : S(1) / keep;
    return x.cwiseProduct(mask_);
  }

  Mat<S> backward(const Mat<S>& gy) const {
    if (!active_) return gy;
    return gy.cwiseProduct(mask_);
  }
};

// Per-channel 1-D convolution along the time axis with explicit padding and
// stride. Weight row k holds the per-channel taps of kernel offset k.
template <typename S>
struct DepthwiseConv1d {
  int kernel = 1, stride = 1, pad_left = 0, pad_right = 0;
  Mat<S> W, b, gW, gb;  // W: (kernel, channels)
  Mat<S> x_;
  int t_in_ = 0;

  void init(int kernel_, int channels, int stride_, int pad_left_, int pad_right_,
            SeededRng& rng) {
    kernel = kernel_;
    stride = stride_;
    pad_left = pad_left_;
    pad_right = pad_right_;
    W.resize(kernel, channels);
    xavier_uniform(W, kernel, 1, rng);
    b.setZero(1, channels);
    gW.setZero(kernel, channels);
    gb.setZero(1, channels);
  }

  int t_out(int t_in) const {
    return (t_in + pad_left + pad_right - kernel) / stride + 1;
  }

  Mat<S> forward(const Mat<S>& x, int batch, int t_in) {
    x_ = x;
    t_in_ = t_in;
    const int to = t_out(t_in);
    Mat<S> y(static_cast<Eigen::Index>(batch) * to, x.cols());
    for (int bi = 0; bi < batch; ++bi) {
      for (int t = 0; t < to; ++t) {
        auto row = y.row(static_cast<Eigen::Index>(bi) * to + t);
        row = b.row(0);
        for (int k = 0; k < kernel; ++k) {
          const int src = t * stride + k - pad_left;
          if (src < 0 || src >= t_in) continue;
          row.array() +=
              x.row(static_cast<Eigen::Index>(bi) * t_in + src).array() * W.row(k).array();
        }
      }
    }
    return y;
  }

  Mat<S> backward(const Mat<S>& gy, int batch) {
    const int to = t_out(t_in_);
    Mat<S> gx = Mat<S>::Zero(x_.rows(), x_.cols());
    for (int bi = 0; bi < batch; ++bi) {
      for (int t = 0; t < to; ++t) {
        const auto g = gy.row(static_cast<Eigen::Index>(bi) * to + t);
        gb.row(0) += g;
        for (int k = 0; k < kernel; ++k) {
          const int src = t * stride + k - pad_left;
          if (src < 0 || src >= t_in_) continue;
          const auto xr = x_.row(static_cast<Eigen::Index>(bi) * t_in_ + src);
          gW.row(k).array() += xr.array() * g.array();
          gx.row(static_cast<Eigen::Index>(bi) * t_in_ + src).array() +=
              W.row(k).array() * g.array();
        }
      }
    }
    return gx;
  }

  void collect(const std::string& prefix, ParamList<S>& out) {
    out.push_back({prefix + ".W", &W, &gW});
    out.push_back({prefix + ".b", &b, &gb});
  }
};

// Scaled dot-product multi-head self-attention with learned projections.
template <typename S>
struct MultiHeadSelfAttention {
  int heads = 1;
  Dense<S> wq, wk, wv, wo;
  Mat<S> q_, k_, v_;
  std::vector<Mat<S>> attn_;  // batch*heads softmax matrices (T, T)
  int t_ = 0;

  void init(int d_model, int heads_, SeededRng& rng) {
    heads = heads_;
    wq.init(d_model, d_model, rng);
    wk.init(d_model, d_model, rng);
    wv.init(d_model, d_model, rng);
    wo.init(d_model, d_model, rng);
  }

  Mat<S> forward(const Mat<S>& x, int batch, int t) {
    t_ = t;
    const int d = static_cast<int>(x.cols());
    const int dh = d / heads;
    const S scale = S(1) / std::sqrt(static_cast<S>(dh));
    q_ = wq.forward(x);
    k_ = wk.forward(x);
    v_ = wv.forward(x);
    Mat<S> ctx(x.rows(), d);
    attn_.assign(static_cast<std::size_t>(batch) * heads, Mat<S>());
    for (int bi = 0; bi < batch; ++bi) {
      for (int h = 0; h < heads; ++h) {
        const auto qh = q_.block(static_cast<Eigen::Index>(bi) * t, h * dh, t, dh);
        const auto kh = k_.block(static_cast<Eigen::Index>(bi) * t, h * dh, t, dh);
        const auto vh = v_.block(static_cast<Eigen::Index>(bi) * t, h * dh, t, dh);
        Mat<S> scores = (qh * kh.transpose()) * scale;
        for (Eigen::Index r = 0; r < scores.rows(); ++r) {
          const S m = scores.row(r).maxCoeff();
          scores.row(r) = (scores.row(r).array() - m).exp();
          scores.row(r) /= scores.row(r).sum();
        }
        attn_[static_cast<std::size_t>(bi) * heads + h] = scores;
        ctx.block(static_cast<Eigen::Index>(bi) * t, h * dh, t, dh).noalias() =
            scores * vh;
      }
    }
    return wo.forward(ctx);
  }

  Mat<S> backward(const Mat<S>& gy, int batch) {
    const int d = static_cast<int>(gy.cols());
    const int dh = d / heads;
    const S scale = S(1) / std::sqrt(static_cast<S>(dh));
    Mat<S> gctx = wo.backward(gy);
    Mat<S> gq(q_.rows(), d), gk(k_.rows(), d), gv(v_.rows(), d);
    for (int bi = 0; bi < batch; ++bi) {
      for (int h = 0; h < heads; ++h) {
        const auto& a = attn_[static_cast<std::size_t>(bi) * heads + h];
        const auto gch = gctx.block(static_cast<Eigen::Index>(bi) * t_, h * dh, t_, dh);
        const auto qh = q_.block(static_cast<Eigen::Index>(bi) * t_, h * dh, t_, dh);
        const auto kh = k_.block(static_cast<Eigen::Index>(bi) * t_, h * dh, t_, dh);
        const auto vh = v_.block(static_cast<Eigen::Index>(bi) * t_, h * dh, t_, dh);
        Mat<S> ga = gch * vh.transpose();
        gv.block(static_cast<Eigen::Index>(bi) * t_, h * dh, t_, dh).noalias() =
            a.transpose() * gch;
        // Softmax backward per row: gs = a .* (ga - rowsum(ga .* a)).
        Mat<S> gs(a.rows(), a.cols());
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
          const S dot = (ga.row(r).array() * a.row(r).array()).sum();
          gs.row(r) = (a.row(r).array() * (ga.row(r).array() - dot)).matrix();
        }
        gs *= scale;
        gq.block(static_cast<Eigen::Index>(bi) * t_, h * dh, t_, dh).noalias() = gs * kh;
        gk.block(static_cast<Eigen::Index>(bi) * t_, h * dh, t_, dh).noalias() =
            gs.transpose() * qh;
      }
    }
    Mat<S> gx = wq.backward(gq);
    gx += wk.backward(gk);
    gx += wv.backward(gv);
    return gx;
  }

  void collect(const std::string& prefix, ParamList<S>& out) {
    wq.collect(prefix + ".wq", out);
    wk.collect(prefix + ".wk", out);
    wv.collect(prefix + ".wv", out);
    wo.collect(prefix + ".wo", out);
  }
};

}  // namespace posecast::nn
