#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "posecast/errors.hpp"
#include "posecast/nn/layers.hpp"

namespace posecast::nn {

enum class ReductionPosition { kStart, kEnd };

inline std::string to_string(ReductionPosition p) {
  return p == ReductionPosition::kStart ? "start" : "end";
}

inline ReductionPosition reduction_position_from_string(const std::string& s) {
  if (s == "start") return ReductionPosition::kStart;
  if (s == "end") return ReductionPosition::kEnd;
  throw ConfigError("reduction_position must be 'start' or 'end', got '" + s + "'");
}

struct ModelConfig {
  int d_model = 96;
  int n_blocks = 4;
  int n_heads = 4;
  int conv_kernel = 9;
  int ff_expansion = 4;
  double dropout = 0.1;
  int t_in = 50;
  int t_out = 25;
  int joints = 13;
  int reduction_factor = 2;
  ReductionPosition reduction_position = ReductionPosition::kEnd;

  int channels() const { return joints * 3; }

  void validate() const {
    if (d_model < 1 || n_blocks < 1 || n_heads < 1 || ff_expansion < 1)
      throw ConfigError("ModelConfig: sizes must be positive");
    if (d_model % n_heads != 0)
      throw ConfigError("ModelConfig: d_model must be divisible by n_heads");
    if (conv_kernel < 1 || conv_kernel % 2 == 0)
      throw ConfigError("ModelConfig: conv_kernel must be odd");
    if (dropout < 0.0 || dropout >= 1.0)
      throw ConfigError("ModelConfig: dropout must be in [0, 1)");
    if (t_in < 1 || t_out < 1 || joints < 1 || reduction_factor < 1)
      throw ConfigError("ModelConfig: window sizes must be positive");
    if (t_in != reduction_factor * t_out)
      throw ConfigError("ModelConfig: t_in must equal reduction_factor * t_out");
  }
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"d_model", c.d_model},
                     {"n_blocks", c.n_blocks},
                     {"n_heads", c.n_heads},
                     {"conv_kernel", c.conv_kernel},
                     {"ff_expansion", c.ff_expansion},
                     {"dropout", c.dropout},
                     {"t_in", c.t_in},
                     {"t_out", c.t_out},
                     {"joints", c.joints},
                     {"reduction_factor", c.reduction_factor},
                     {"reduction_position", to_string(c.reduction_position)}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  j.at("d_model").get_to(c.d_model);
  j.at("n_blocks").get_to(c.n_blocks);
  j.at("n_heads").get_to(c.n_heads);
  j.at("conv_kernel").get_to(c.conv_kernel);
  j.at("ff_expansion").get_to(c.ff_expansion);
  j.at("dropout").get_to(c.dropout);
  j.at("t_in").get_to(c.t_in);
  j.at("t_out").get_to(c.t_out);
  j.at("joints").get_to(c.joints);
  j.at("reduction_factor").get_to(c.reduction_factor);
  c.reduction_position =
      reduction_position_from_string(j.at("reduction_position").get<std::string>());
}

// Desk-scale default used throughout the tests.
inline ModelConfig toy_config(int joints = 13, int t_out = 25,
                              int reduction_factor = 2) {
  ModelConfig c;
  c.joints = joints;
  c.t_out = t_out;
  c.reduction_factor = reduction_factor;
  c.t_in = reduction_factor * t_out;
  return c;
}

// Larger preset in the spirit of the headline model size.
inline ModelConfig paper_scale_config(int joints = 13, int t_out = 25) {
  ModelConfig c = toy_config(joints, t_out);
  c.d_model = 256;
  c.n_blocks = 6;
  c.n_heads = 8;
  c.conv_kernel = 15;
  return c;
}

// Feed-forward module: pre-LN, widen, swish, project back; used as the two
// half-step branches of a conformer block.
template <typename S>
struct FeedForward {
  LayerNorm<S> ln;
  Dense<S> lin1, lin2;
  Swish<S> act;
  Dropout<S> drop1, drop2;

  void init(int d, int expansion, S dropout, SeededRng& rng) {
    ln.init(d);
    lin1.init(d, d * expansion, rng);
    lin2.init(d * expansion, d, rng);
    drop1.p = drop2.p = dropout;
  }

  Mat<S> forward(const Mat<S>& x, bool train, SeededRng* rng) {
    Mat<S> h = ln.forward(x);
    h = lin1.forward(h);
    h = act.forward(h);
    h = drop1.forward(h, train, rng);
    h = lin2.forward(h);
    return drop2.forward(h, train, rng);
  }

  Mat<S> backward(const Mat<S>& gy) {
    Mat<S> g = drop2.backward(gy);
    g = lin2.backward(g);
    g = drop1.backward(g);
    g = act.backward(g);
    g = lin1.backward(g);
    return ln.backward(g);
  }

  void collect(const std::string& prefix, ParamList<S>& out) {
    ln.collect(prefix + ".ln", out);
    lin1.collect(prefix + ".lin1", out);
    lin2.collect(prefix + ".lin2", out);
  }
};

// Convolution module: pre-LN, pointwise expand + GLU, depthwise conv over
// time, per-sample layer normalization (in place of batch-based
// normalization), swish, pointwise project.
template <typename S>
struct ConvModule {
  LayerNorm<S> ln;
  Dense<S> pw1, pw2;
  Glu<S> glu;
  DepthwiseConv1d<S> dw;
  LayerNorm<S> norm;
  Swish<S> act;
  Dropout<S> drop;

  void init(int d, int kernel, S dropout, SeededRng& rng) {
    ln.init(d);
    pw1.init(d, 2 * d, rng);
    dw.init(kernel, d, 1, (kernel - 1) / 2, (kernel - 1) / 2, rng);
    norm.init(d);
    pw2.init(d, d, rng);
    drop.p = dropout;
  }

  Mat<S> forward(const Mat<S>& x, int batch, int t, bool train, SeededRng* rng) {
    Mat<S> h = ln.forward(x);
    h = pw1.forward(h);
    h = glu.forward(h);
    h = dw.forward(h, batch, t);
    h = norm.forward(h);
    h = act.forward(h);
    h = pw2.forward(h);
    return drop.forward(h, train, rng);
  }

  Mat<S> backward(const Mat<S>& gy, int batch) {
    Mat<S> g = drop.backward(gy);
    g = pw2.backward(g);
    g = act.backward(g);
    g = norm.backward(g);
    g = dw.backward(g, batch);
    g = glu.backward(g);
    g = pw1.backward(g);
    return ln.backward(g);
  }

  void collect(const std::string& prefix, ParamList<S>& out) {
    ln.collect(prefix + ".ln", out);
    pw1.collect(prefix + ".pw1", out);
    dw.collect(prefix + ".dw", out);
    norm.collect(prefix + ".norm", out);
    pw2.collect(prefix + ".pw2", out);
  }
};

template <typename S>
struct ConformerBlock {
  FeedForward<S> ff1, ff2;
  LayerNorm<S> ln_attn;
  MultiHeadSelfAttention<S> mhsa;
  Dropout<S> attn_drop;
  ConvModule<S> conv;
  LayerNorm<S> ln_out;

  void init(const ModelConfig& cfg, SeededRng& rng) {
    const S dropout = static_cast<S>(cfg.dropout);
    ff1.init(cfg.d_model, cfg.ff_expansion, dropout, rng);
    ln_attn.init(cfg.d_model);
    mhsa.init(cfg.d_model, cfg.n_heads, rng);
    attn_drop.p = dropout;
    conv.init(cfg.d_model, cfg.conv_kernel, dropout, rng);
    ff2.init(cfg.d_model, cfg.ff_expansion, dropout, rng);
    ln_out.init(cfg.d_model);
  }

  Mat<S> forward(const Mat<S>& x, int batch, int t, bool train, SeededRng* rng) {
    Mat<S> h = x + S(0.5) * ff1.forward(x, train, rng);
    h += attn_drop.forward(mhsa.forward(ln_attn.forward(h), batch, t), train, rng);
    h += conv.forward(h, batch, t, train, rng);
    h += S(0.5) * ff2.forward(h, train, rng);
    return ln_out.forward(h);
  }

  Mat<S> backward(const Mat<S>& gy, int batch) {
    // Half-step residuals: the 0.5 scales the upstream gradient entering the
    // branch so parameter gradients pick it up too.
    Mat<S> g = ln_out.backward(gy);
    g += ff2.backward(Mat<S>(S(0.5) * g));
    g += conv.backward(g, batch);
    g += ln_attn.backward(mhsa.backward(attn_drop.backward(g), batch));
    g += ff1.backward(Mat<S>(S(0.5) * g));
    return g;
  }

  void collect(const std::string& prefix, ParamList<S>& out) {
    ff1.collect(prefix + ".ff1", out);
    ln_attn.collect(prefix + ".ln_attn", out);
    mhsa.collect(prefix + ".mhsa", out);
    conv.collect(prefix + ".conv", out);
    ff2.collect(prefix + ".ff2", out);
    ln_out.collect(prefix + ".ln_out", out);
  }
};

// Strided depthwise convolution plus a linear mix; shortens the time axis by
// the reduction factor while keeping the channel width.
template <typename S>
struct TimeReduction {
  DepthwiseConv1d<S> dw;
  Dense<S> mix;
  int factor = 1;

  void init(int d, int factor_, SeededRng& rng) {
    factor = factor_;
    dw.init(2 * factor_ - 1, d, factor_, factor_ - 1, 0, rng);
    mix.init(d, d, rng);
  }

  Mat<S> forward(const Mat<S>& x, int batch, int t) {
    return mix.forward(dw.forward(x, batch, t));
  }

  Mat<S> backward(const Mat<S>& gy, int batch) {
    return dw.backward(mix.backward(gy), batch);
  }

  void collect(const std::string& prefix, ParamList<S>& out) {
    dw.collect(prefix + ".dw", out);
    mix.collect(prefix + ".mix", out);
  }
};

// Sequence-to-sequence forecaster over flattened joint channels.
//
// input (B, t_in, J*3) centered mm
//   -> linear projection to d_model, plus learned absolute position embedding
//   -> conformer blocks (time reduction before or after, per config)
//   -> linear head back to J*3
// The head output is a residual added to the broadcast last input frame, so a
// zero-initialized head reproduces the repeat-last-frame baseline exactly.
template <typename S>
class MotionConformer {
 public:
  // Coordinates are scaled from millimeters to meters inside the network.
  static constexpr S kInputScale = S(0.001);

  MotionConformer(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg.validate();
    SeededRng rng(detail::splitmix64(seed ^ 0x6d6f74696f6e63ULL));
    input_proj_.init(cfg.channels(), cfg.d_model, rng);
    pos_emb_.resize(cfg.t_in, cfg.d_model);
    fill_uniform(pos_emb_, -0.02, 0.02, rng);
    gpos_emb_.setZero(cfg.t_in, cfg.d_model);
    blocks_.resize(cfg.n_blocks);
    for (auto& b : blocks_) b.init(cfg, rng);
    reduction_.init(cfg.d_model, cfg.reduction_factor, rng);
    head_.init(cfg.d_model, cfg.channels(), rng, /*zero=*/true);
    collect_params();
  }

  // The parameter registry points into this object's members and must be
  // rebuilt whenever the object changes identity.
  MotionConformer(const MotionConformer& o)
      : cfg_(o.cfg_), input_proj_(o.input_proj_), pos_emb_(o.pos_emb_),
        gpos_emb_(o.gpos_emb_), blocks_(o.blocks_), reduction_(o.reduction_),
        head_(o.head_) {
    collect_params();
  }
  MotionConformer(MotionConformer&& o) noexcept
      : cfg_(std::move(o.cfg_)), input_proj_(std::move(o.input_proj_)),
        pos_emb_(std::move(o.pos_emb_)), gpos_emb_(std::move(o.gpos_emb_)),
        blocks_(std::move(o.blocks_)), reduction_(std::move(o.reduction_)),
        head_(std::move(o.head_)) {
    collect_params();
  }
  MotionConformer& operator=(const MotionConformer& o) {
    if (this != &o) {
      cfg_ = o.cfg_;
      input_proj_ = o.input_proj_;
      pos_emb_ = o.pos_emb_;
      gpos_emb_ = o.gpos_emb_;
      blocks_ = o.blocks_;
      reduction_ = o.reduction_;
      head_ = o.head_;
      collect_params();
    }
    return *this;
  }
  MotionConformer& operator=(MotionConformer&& o) noexcept {
    cfg_ = std::move(o.cfg_);
    input_proj_ = std::move(o.input_proj_);
    pos_emb_ = std::move(o.pos_emb_);
    gpos_emb_ = std::move(o.gpos_emb_);
    blocks_ = std::move(o.blocks_);
    reduction_ = std::move(o.reduction_);
    head_ = std::move(o.head_);
    collect_params();
    return *this;
  }

  const ModelConfig& config() const { return cfg_; }

  // x: (B * t_in, J*3) in centered millimeters; returns (B * t_out, J*3).
  Mat<S> forward(const Mat<S>& x, int batch, bool train = false,
                 SeededRng* rng = nullptr) {
    if (x.rows() != static_cast<Eigen::Index>(batch) * cfg_.t_in ||
        x.cols() != cfg_.channels())
      throw ConfigError("MotionConformer: input shape mismatch");
    if (!x.allFinite())
      throw NumericError("MotionConformer: non-finite input");
    if (train && dropout_active() && rng == nullptr)
      throw ConfigError("MotionConformer: training forward needs an RNG");

    Mat<S> h = x * kInputScale;
    h = input_proj_.forward(h);
    for (int bi = 0; bi < batch; ++bi)
      h.middleRows(static_cast<Eigen::Index>(bi) * cfg_.t_in, cfg_.t_in) += pos_emb_;

    int t = cfg_.t_in;
    if (cfg_.reduction_position == ReductionPosition::kStart) {
      h = reduction_.forward(h, batch, t);
      t = cfg_.t_out;
    }
    for (auto& b : blocks_) h = b.forward(h, batch, t, train, rng);
    if (cfg_.reduction_position == ReductionPosition::kEnd) {
      h = reduction_.forward(h, batch, t);
      t = cfg_.t_out;
    }
    Mat<S> y = head_.forward(h);
    y /= kInputScale;
    for (int bi = 0; bi < batch; ++bi) {
      const auto last = x.row(static_cast<Eigen::Index>(bi) * cfg_.t_in + cfg_.t_in - 1);
      y.middleRows(static_cast<Eigen::Index>(bi) * cfg_.t_out, cfg_.t_out).rowwise() +=
          last;
    }
    if (!y.allFinite())
      throw NumericError("MotionConformer: non-finite output (numerical failure)");
    return y;
  }

  // gy: gradient w.r.t. the millimeter-scale output of the last forward.
  void backward(const Mat<S>& gy, int batch) {
    Mat<S> g = head_.backward(Mat<S>(gy / kInputScale));
    if (cfg_.reduction_position == ReductionPosition::kEnd)
      g = reduction_.backward(g, batch);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it)
      g = it->backward(g, batch);
    if (cfg_.reduction_position == ReductionPosition::kStart)
      g = reduction_.backward(g, batch);
    for (int bi = 0; bi < batch; ++bi)
      gpos_emb_ += g.middleRows(static_cast<Eigen::Index>(bi) * cfg_.t_in, cfg_.t_in);
    input_proj_.backward(g);
  }

  ParamList<S>& params() { return params_; }
  std::int64_t param_count() const { return total_size(params_); }
  void zero_grad() { zero_grads(params_); }

  std::vector<S> state() const { return flatten_values(params_); }
  void set_state(const std::vector<S>& flat) { unflatten_values(params_, flat); }

 private:
  bool dropout_active() const { return cfg_.dropout > 0.0; }

  void collect_params() {
    params_.clear();
    input_proj_.collect("input_proj", params_);
    params_.push_back({"pos_emb", &pos_emb_, &gpos_emb_});
    for (int i = 0; i < cfg_.n_blocks; ++i)
      blocks_[i].collect("block" + std::to_string(i), params_);
    reduction_.collect("reduction", params_);
    head_.collect("head", params_);
  }

  ModelConfig cfg_;
  Dense<S> input_proj_;
  Mat<S> pos_emb_, gpos_emb_;
  std::vector<ConformerBlock<S>> blocks_;
  TimeReduction<S> reduction_;
  Dense<S> head_;
  ParamList<S> params_;
};

// Parameter count is a pure function of the architecture config.
inline std::int64_t conformer_param_count(const ModelConfig& cfg) {
  return MotionConformer<float>(cfg, 0).param_count();
}

}  // namespace posecast::nn
