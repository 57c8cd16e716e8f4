#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "posecast/errors.hpp"
#include "posecast/layout.hpp"
#include "posecast/pose.hpp"

namespace posecast {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

inline constexpr Rgb kInputColor{0, 160, 0};     // green
inline constexpr Rgb kPredictionColor{210, 0, 0};  // red
inline constexpr Rgb kTargetColor{0, 0, 210};      // blue

struct Image {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major

  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 255) {}

  void set(int x, int y, Rgb c) {
    if (x < 0 || x >= width || y < 0 || y >= height) return;
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    rgb[i] = c.r;
    rgb[i + 1] = c.g;
    rgb[i + 2] = c.b;
  }

  // Binary PPM: deterministic bytes for fixed content.
  void write_ppm(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("Image: cannot write " + path.string());
    f << "P6\n" << width << " " << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(rgb.data()),
            static_cast<std::streamsize>(rgb.size()));
    if (!f) throw DataError("Image: short write to " + path.string());
  }
};

struct RenderOptions {
  int width = 960;
  int height = 720;
  double azimuth_deg = 30.0;  // rotation of the scene about the vertical axis
  double margin = 0.06;
};

// One skeleton sequence to draw: all frames overlaid in one color.
struct RenderLayer {
  const PoseSeq* seq = nullptr;
  Rgb color;
};

namespace render_detail {

inline void project(double x, double y, double z, double az_rad, double* u,
                    double* v) {
  const double c = std::cos(az_rad), s = std::sin(az_rad);
  *u = c * x - s * z;  // horizontal screen axis
  *v = y;              // vertical screen axis (y up)
}

inline void draw_line(Image& img, int x0, int y0, int x1, int y1, Rgb c) {
  // Bresenham.
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    img.set(x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace render_detail

// Orthographic projection of skeleton sequences onto one image. The viewport
// is fitted over the union of all layers so coincident geometry lands on
// identical pixels across layers.
inline Image render_layers(const std::vector<RenderLayer>& layers,
                           const JointLayout& layout, const RenderOptions& opts = {}) {
  if (layout.edges.empty())
    throw ConfigError("render: layout provides no edges");
  layout.validate();
  const double az = opts.azimuth_deg * 3.14159265358979323846 / 180.0;
  double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
  for (const auto& layer : layers) {
    if (!layer.seq) continue;
    if (layer.seq->joints != layout.size())
      throw ConfigError("render: layer joint count does not match layout");
    for (int t = 0; t < layer.seq->frames; ++t)
      for (int j = 0; j < layer.seq->joints; ++j) {
        double u, v;
        render_detail::project(layer.seq->at(t, j, 0), layer.seq->at(t, j, 1),
                               layer.seq->at(t, j, 2), az, &u, &v);
        umin = std::min(umin, u);
        umax = std::max(umax, u);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
  }
  Image img(opts.width, opts.height);
  if (umin > umax) return img;  // nothing to draw
  const double span_u = std::max(umax - umin, 1e-9);
  const double span_v = std::max(vmax - vmin, 1e-9);
  const double avail_w = opts.width * (1.0 - 2.0 * opts.margin);
  const double avail_h = opts.height * (1.0 - 2.0 * opts.margin);
  const double scale = std::min(avail_w / span_u, avail_h / span_v);
  const double off_x = (opts.width - scale * span_u) / 2.0;
  const double off_y = (opts.height - scale * span_v) / 2.0;
  auto to_px = [&](double u, double v, int* x, int* y) {
    *x = static_cast<int>(std::lround(off_x + (u - umin) * scale));
    *y = static_cast<int>(std::lround(opts.height - 1 - (off_y + (v - vmin) * scale)));
  };
  for (const auto& layer : layers) {
    if (!layer.seq) continue;
    for (int t = 0; t < layer.seq->frames; ++t) {
      for (const auto& e : layout.edges) {
        double u0, v0, u1, v1;
        render_detail::project(layer.seq->at(t, e[0], 0), layer.seq->at(t, e[0], 1),
                               layer.seq->at(t, e[0], 2), az, &u0, &v0);
        render_detail::project(layer.seq->at(t, e[1], 0), layer.seq->at(t, e[1], 1),
                               layer.seq->at(t, e[1], 2), az, &u1, &v1);
        int x0, y0, x1, y1;
        to_px(u0, v0, &x0, &y0);
        to_px(u1, v1, &x1, &y1);
        render_detail::draw_line(img, x0, y0, x1, y1, layer.color);
      }
    }
  }
  return img;
}

inline PoseSeq single_frame(const PoseSeq& seq, int t) {
  PoseSeq out(1, seq.joints);
  for (int j = 0; j < seq.joints; ++j)
    for (int k = 0; k < 3; ++k) out.at(0, j, k) = seq.at(t, j, k);
  return out;
}

// Composite image (input green, prediction red, ground truth blue) plus
// optional per-frame images of the forecast horizon.
inline void render_forecast(const PoseSeq& input, const PoseSeq* prediction,
                            const PoseSeq* target, const JointLayout& layout,
                            const std::filesystem::path& out_dir,
                            int per_frame_count = 0, const RenderOptions& opts = {}) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::vector<RenderLayer> layers;
  layers.push_back({&input, kInputColor});
  if (prediction) layers.push_back({prediction, kPredictionColor});
  if (target) layers.push_back({target, kTargetColor});
  render_layers(layers, layout, opts).write_ppm(out_dir / "composite.ppm");

  const int n = prediction ? std::min(per_frame_count, prediction->frames)
                           : (target ? std::min(per_frame_count, target->frames) : 0);
  for (int t = 0; t < n; ++t) {
    std::vector<RenderLayer> frame_layers;
    PoseSeq p, g;
    if (prediction) {
      p = single_frame(*prediction, t);
      frame_layers.push_back({&p, kPredictionColor});
    }
    if (target) {
      g = single_frame(*target, t);
      frame_layers.push_back({&g, kTargetColor});
    }
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%03d.ppm", t);
    render_layers(frame_layers, layout, opts).write_ppm(out_dir / name);
  }
}

}  // namespace posecast
