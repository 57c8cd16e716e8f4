#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "posecast/errors.hpp"
#include "posecast/nn/conformer.hpp"
#include "posecast/ridge.hpp"

namespace posecast {

// Checkpoint container: magic, format version, a JSON header (model kind,
// architecture config, epoch), then named parameter tensors. Conformer
// tensors are stored as 32-bit little-endian floats; ridge weights as 64-bit.
namespace ckpt_detail {

constexpr char kMagic[8] = {'P', 'O', 'S', 'E', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

struct Reader {
  const unsigned char* p;
  const unsigned char* end;
  std::string where;

  void need(std::size_t n) const {
    if (static_cast<std::size_t>(end - p) < n)
      throw DataError("checkpoint: truncated file " + where);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    p += 4;
    return v;
  }
  std::uint16_t u16() {
    need(2);
    const std::uint16_t v =
        static_cast<std::uint16_t>(p[0] | (static_cast<std::uint16_t>(p[1]) << 8));
    p += 2;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return *p++;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(p), n);
    p += n;
    return s;
  }
};

struct Tensor {
  std::uint8_t dtype = 0;  // 0: f32, 1: f64
  std::vector<std::uint32_t> dims;
  std::vector<double> values;
};

inline void write_file(const std::filesystem::path& path, const nlohmann::json& header,
                       const std::vector<std::pair<std::string, Tensor>>& tensors) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  const std::string hj = header.dump();
  put_u32(out, static_cast<std::uint32_t>(hj.size()));
  out += hj;
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    out.push_back(static_cast<char>(t.dtype));
    out.push_back(static_cast<char>(t.dims.size()));
    for (auto d : t.dims) put_u32(out, d);
    if (t.dtype == 0) {
      for (double v : t.values) {
        const std::uint32_t u = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        put_u32(out, u);
      }
    } else {
      for (double v : t.values) {
        const std::uint64_t u = std::bit_cast<std::uint64_t>(v);
        put_u32(out, static_cast<std::uint32_t>(u & 0xffffffffULL));
        put_u32(out, static_cast<std::uint32_t>(u >> 32));
      }
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("checkpoint: cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("checkpoint: short write to " + path.string());
}

struct File {
  nlohmann::json header;
  std::map<std::string, Tensor> tensors;
};

inline File read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("checkpoint: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  Reader r{bytes.data(), bytes.data() + bytes.size(), path.string()};
  const std::string magic = r.bytes(sizeof(kMagic));
  if (magic != std::string(kMagic, sizeof(kMagic)))
    throw DataError("checkpoint: bad magic in " + path.string());
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw DataError("checkpoint: unsupported format version " +
                    std::to_string(version) + " in " + path.string());
  File out;
  const std::uint32_t hlen = r.u32();
  try {
    out.header = nlohmann::json::parse(r.bytes(hlen));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint: corrupt header in " + path.string() + ": " + e.what());
  }
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = r.u16();
    const std::string name = r.bytes(name_len);
    Tensor t;
    t.dtype = r.u8();
    const std::uint8_t rank = r.u8();
    std::uint64_t n = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      t.dims.push_back(r.u32());
      n *= t.dims.back();
    }
    t.values.resize(n);
    if (t.dtype == 0) {
      for (std::uint64_t k = 0; k < n; ++k)
        t.values[k] = std::bit_cast<float>(r.u32());
    } else if (t.dtype == 1) {
      for (std::uint64_t k = 0; k < n; ++k) {
        const std::uint64_t lo = r.u32();
        const std::uint64_t hi = r.u32();
        t.values[k] = std::bit_cast<double>(lo | (hi << 32));
      }
    } else {
      throw DataError("checkpoint: unknown dtype in " + path.string());
    }
    out.tensors.emplace(name, std::move(t));
  }
  return out;
}

}  // namespace ckpt_detail

inline void save_checkpoint(nn::MotionConformer<float>& model,
                            const std::filesystem::path& path, int epoch = 0) {
  nlohmann::json header;
  header["format_version"] = ckpt_detail::kVersion;
  header["kind"] = "motion_conformer";
  header["config"] = model.config();
  header["epoch"] = epoch;
  std::vector<std::pair<std::string, ckpt_detail::Tensor>> tensors;
  for (const auto& p : model.params()) {
    ckpt_detail::Tensor t;
    t.dtype = 0;
    t.dims = {static_cast<std::uint32_t>(p.value->rows()),
              static_cast<std::uint32_t>(p.value->cols())};
    t.values.assign(p.value->data(), p.value->data() + p.value->size());
    tensors.emplace_back(p.name, std::move(t));
  }
  ckpt_detail::write_file(path, header, tensors);
}

struct CheckpointInfo {
  std::string kind;
  int epoch = 0;
};

inline CheckpointInfo peek_checkpoint(const std::filesystem::path& path) {
  const auto file = ckpt_detail::read_file(path);
  CheckpointInfo info;
  info.kind = file.header.value("kind", "");
  info.epoch = file.header.value("epoch", 0);
  return info;
}

// Rebuilds the model from the stored config; no external config needed.
inline nn::MotionConformer<float> load_conformer_checkpoint(
    const std::filesystem::path& path, int* epoch_out = nullptr) {
  const auto file = ckpt_detail::read_file(path);
  if (file.header.value("kind", "") != "motion_conformer")
    throw ConfigError("checkpoint: " + path.string() + " does not hold a motion_conformer");
  nn::ModelConfig cfg;
  try {
    cfg = file.header.at("config").get<nn::ModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint: bad config in " + path.string() + ": " + e.what());
  }
  nn::MotionConformer<float> model(cfg, 0);
  for (auto& p : model.params()) {
    const auto it = file.tensors.find(p.name);
    if (it == file.tensors.end())
      throw DataError("checkpoint: missing tensor '" + p.name + "' in " + path.string());
    const auto& t = it->second;
    if (t.dims.size() != 2 ||
        static_cast<Eigen::Index>(t.dims[0]) != p.value->rows() ||
        static_cast<Eigen::Index>(t.dims[1]) != p.value->cols())
      throw DataError("checkpoint: tensor '" + p.name + "' shape mismatch in " +
                      path.string());
    for (Eigen::Index i = 0; i < p.value->size(); ++i)
      p.value->data()[i] = static_cast<float>(t.values[i]);
  }
  if (epoch_out) *epoch_out = file.header.value("epoch", 0);
  return model;
}

inline void save_ridge_checkpoint(const RidgeModel& model,
                                  const std::filesystem::path& path) {
  nlohmann::json header;
  header["format_version"] = ckpt_detail::kVersion;
  header["kind"] = "ridge";
  header["config"] = {{"lambda", model.lambda},
                      {"t_in", model.t_in},
                      {"t_out", model.t_out},
                      {"joints", model.joints}};
  header["epoch"] = 0;
  ckpt_detail::Tensor t;
  t.dtype = 1;
  t.dims = {static_cast<std::uint32_t>(model.weights.rows()),
            static_cast<std::uint32_t>(model.weights.cols())};
  t.values.resize(model.weights.size());
  // Eigen::MatrixXd is column-major; store row-major for readability.
  std::size_t idx = 0;
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r)
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c)
      t.values[idx++] = model.weights(r, c);
  ckpt_detail::write_file(path, header, {{"weights", std::move(t)}});
}

inline RidgeModel load_ridge_checkpoint(const std::filesystem::path& path) {
  const auto file = ckpt_detail::read_file(path);
  if (file.header.value("kind", "") != "ridge")
    throw ConfigError("checkpoint: " + path.string() + " does not hold a ridge model");
  RidgeModel model;
  try {
    const auto& cfg = file.header.at("config");
    model.lambda = cfg.at("lambda").get<double>();
    model.t_in = cfg.at("t_in").get<int>();
    model.t_out = cfg.at("t_out").get<int>();
    model.joints = cfg.at("joints").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint: bad config in " + path.string() + ": " + e.what());
  }
  const auto it = file.tensors.find("weights");
  if (it == file.tensors.end())
    throw DataError("checkpoint: missing tensor 'weights' in " + path.string());
  const auto& t = it->second;
  if (t.dims.size() != 2 || static_cast<int>(t.dims[0]) != model.d_in() + 1 ||
      static_cast<int>(t.dims[1]) != model.d_out())
    throw DataError("checkpoint: ridge weight shape mismatch in " + path.string());
  model.weights.resize(model.d_in() + 1, model.d_out());
  std::size_t idx = 0;
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r)
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c)
      model.weights(r, c) = t.values[idx++];
  model.validate();
  return model;
}

}  // namespace posecast
