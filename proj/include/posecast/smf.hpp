#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "posecast/errors.hpp"
#include "posecast/sequence.hpp"

namespace posecast {

// SMF sequence format: per sequence a JSON header <stem>.json
//   {name, fps, persons, frames, joints, joint_names[], left_hip, right_hip,
//    edges[][2], has_validity}
// plus a blob <stem>.bin of 32-bit IEEE-754 little-endian values, frame-major
// then person then joint then x,y,z, followed (when has_validity) by
// frames*persons validity scores in the same encoding.

namespace smf_detail {

inline void put_f32_le(std::string& out, float f) {
  const std::uint32_t u = std::bit_cast<std::uint32_t>(f);
  out.push_back(static_cast<char>(u & 0xff));
  out.push_back(static_cast<char>((u >> 8) & 0xff));
  out.push_back(static_cast<char>((u >> 16) & 0xff));
  out.push_back(static_cast<char>((u >> 24) & 0xff));
}

inline float get_f32_le(const unsigned char* p) {
  const std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                          (static_cast<std::uint32_t>(p[1]) << 8) |
                          (static_cast<std::uint32_t>(p[2]) << 16) |
                          (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(u);
}

inline std::string sanitize_stem(const std::string& name) {
  std::string s;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')
      s.push_back(c);
    else
      s.push_back('_');
  }
  if (s.empty()) s = "sequence";
  return s;
}

}  // namespace smf_detail

inline void save_sequences(const std::vector<MotionSequence>& seqs,
                           const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir))
    throw DataError("save_sequences: cannot create directory " + dir.string());
  std::set<std::string> used;
  for (const auto& seq : seqs) {
    seq.validate();
    std::string stem = smf_detail::sanitize_stem(seq.name);
    if (used.count(stem)) {
      int n = 1;
      std::string candidate;
      do {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "_%03d", n++);
        candidate = stem + buf;
      } while (used.count(candidate));
      stem = candidate;
    }
    used.insert(stem);

    nlohmann::json header;
    header["name"] = seq.name;
    header["fps"] = seq.fps;
    header["persons"] = seq.persons;
    header["frames"] = seq.frames;
    header["joints"] = seq.joints();
    header["joint_names"] = seq.layout.names;
    header["left_hip"] = seq.layout.left_hip;
    header["right_hip"] = seq.layout.right_hip;
    auto edges = nlohmann::json::array();
    for (const auto& e : seq.layout.edges) edges.push_back({e[0], e[1]});
    header["edges"] = edges;
    header["has_validity"] = seq.has_validity();

    const fs::path header_path = dir / (stem + ".json");
    const fs::path blob_path = dir / (stem + ".bin");
    {
      std::ofstream hf(header_path);
      if (!hf) throw DataError("save_sequences: cannot write " + header_path.string());
      hf << header.dump(2) << "\n";
    }
    std::string blob;
    blob.reserve((seq.data.size() + seq.validity.size()) * 4);
    for (double x : seq.data)
      smf_detail::put_f32_le(blob, static_cast<float>(x));
    for (double s : seq.validity)
      smf_detail::put_f32_le(blob, static_cast<float>(s));
    std::ofstream bf(blob_path, std::ios::binary);
    if (!bf) throw DataError("save_sequences: cannot write " + blob_path.string());
    bf.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!bf) throw DataError("save_sequences: short write to " + blob_path.string());
  }
}

inline MotionSequence load_sequence_pair(const std::filesystem::path& header_path) {
  namespace fs = std::filesystem;
  nlohmann::json header;
  {
    std::ifstream hf(header_path);
    if (!hf)
      throw DataError("load_sequences: missing header " + header_path.string());
    try {
      hf >> header;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("load_sequences: corrupt header " + header_path.string() +
                      ": " + e.what());
    }
  }
  MotionSequence seq;
  try {
    seq.name = header.at("name").get<std::string>();
    seq.fps = header.at("fps").get<double>();
    seq.persons = header.at("persons").get<int>();
    seq.frames = header.at("frames").get<int>();
    seq.layout.names = header.at("joint_names").get<std::vector<std::string>>();
    seq.layout.left_hip = header.at("left_hip").get<int>();
    seq.layout.right_hip = header.at("right_hip").get<int>();
    for (const auto& e : header.at("edges"))
      seq.layout.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    const int declared_joints = header.at("joints").get<int>();
    if (declared_joints != seq.joints())
      throw DataError("load_sequences: header " + header_path.string() +
                      " declares " + std::to_string(declared_joints) +
                      " joints but names " + std::to_string(seq.joints()));
    const bool has_validity = header.at("has_validity").get<bool>();

    fs::path blob_path = header_path;
    blob_path.replace_extension(".bin");
    std::ifstream bf(blob_path, std::ios::binary);
    if (!bf)
      throw DataError("load_sequences: missing blob " + blob_path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(bf)),
                                     std::istreambuf_iterator<char>());
    const std::size_t coord_vals =
        static_cast<std::size_t>(seq.frames) * seq.persons * seq.joints() * 3;
    const std::size_t validity_vals =
        has_validity ? static_cast<std::size_t>(seq.frames) * seq.persons : 0;
    if (bytes.size() != (coord_vals + validity_vals) * 4)
      throw DataError("load_sequences: blob " + blob_path.string() + " holds " +
                      std::to_string(bytes.size()) + " bytes but header declares " +
                      std::to_string((coord_vals + validity_vals) * 4));
    seq.data.resize(coord_vals);
    for (std::size_t i = 0; i < coord_vals; ++i)
      seq.data[i] = smf_detail::get_f32_le(bytes.data() + i * 4);
    if (has_validity) {
      seq.validity.resize(validity_vals);
      for (std::size_t i = 0; i < validity_vals; ++i)
        seq.validity[i] =
            smf_detail::get_f32_le(bytes.data() + (coord_vals + i) * 4);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("load_sequences: corrupt header " + header_path.string() +
                    ": " + e.what());
  }
  try {
    seq.validate();
  } catch (const Error& e) {
    throw DataError("load_sequences: " + header_path.string() + ": " + e.what());
  }
  return seq;
}

// Loads every header/blob pair in lexicographic filename order. An empty or
// missing directory yields an empty list.
inline std::vector<MotionSequence> load_sequences(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<MotionSequence> out;
  if (!fs::is_directory(dir)) return out;
  std::vector<fs::path> headers;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      headers.push_back(entry.path());
  std::sort(headers.begin(), headers.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });
  out.reserve(headers.size());
  for (const auto& h : headers) out.push_back(load_sequence_pair(h));
  return out;
}

}  // namespace posecast
