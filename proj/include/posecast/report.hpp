#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "posecast/errors.hpp"
#include "posecast/metrics.hpp"

namespace posecast {

// Per-(model, dataset) evaluation summary. `fps` and the latency-derived
// columns are absent when throughput was not measured (e.g. deterministic
// runs), mirroring the "-" cells of the comparison tables.
struct MetricReport {
  std::string model_name;
  std::optional<std::int64_t> param_count;
  std::vector<double> horizons_ms;
  std::vector<double> mpjpe_mm;  // per horizon
  std::vector<double> vim_mm;    // per horizon
  std::optional<double> fps;
  std::optional<double> fce_mm;
  std::vector<double> fade_mm;  // per horizon, empty without fps
  std::int64_t sample_count = 0;

  void validate() const {
    if (mpjpe_mm.size() != horizons_ms.size() || vim_mm.size() != horizons_ms.size())
      throw ConfigError("MetricReport: per-horizon vectors must match horizons");
    auto check = [](double v, const char* what) {
      if (!std::isfinite(v) || v < 0.0)
        throw NumericError(std::string("MetricReport: ") + what +
                           " must be finite and nonnegative");
    };
    for (double v : mpjpe_mm) check(v, "mpjpe");
    for (double v : vim_mm) check(v, "vim");
    if (fps) {
      check(*fps, "fps");
      if (fade_mm.size() != horizons_ms.size())
        throw ConfigError("MetricReport: fade vector must match horizons");
      for (std::size_t i = 0; i < fade_mm.size(); ++i) {
        check(fade_mm[i], "fade");
        if (fade_mm[i] + 1e-12 < mpjpe_mm[i])
          throw NumericError("MetricReport: fade below mpjpe at horizon " +
                             std::to_string(horizons_ms[i]));
      }
      if (fce_mm) check(*fce_mm, "fce");
    }
  }
};

inline nlohmann::json report_to_json(const MetricReport& r) {
  nlohmann::json j;
  j["model_name"] = r.model_name;
  if (r.param_count)
    j["param_count"] = *r.param_count;
  else
    j["param_count"] = nullptr;
  j["horizons_ms"] = r.horizons_ms;
  j["mpjpe_mm"] = r.mpjpe_mm;
  j["vim_mm"] = r.vim_mm;
  if (r.fps) {
    j["fps"] = *r.fps;
    j["fce_mm"] = r.fce_mm ? nlohmann::json(*r.fce_mm) : nlohmann::json(nullptr);
    j["fade_mm"] = r.fade_mm;
  } else {
    j["fps"] = nullptr;
    j["fce_mm"] = nullptr;
    j["fade_mm"] = nlohmann::json::array();
  }
  j["sample_count"] = r.sample_count;
  return j;
}

inline MetricReport report_from_json(const nlohmann::json& j) {
  MetricReport r;
  try {
    r.model_name = j.at("model_name").get<std::string>();
    if (!j.at("param_count").is_null())
      r.param_count = j.at("param_count").get<std::int64_t>();
    r.horizons_ms = j.at("horizons_ms").get<std::vector<double>>();
    r.mpjpe_mm = j.at("mpjpe_mm").get<std::vector<double>>();
    r.vim_mm = j.at("vim_mm").get<std::vector<double>>();
    if (!j.at("fps").is_null()) r.fps = j.at("fps").get<double>();
    if (!j.at("fce_mm").is_null()) r.fce_mm = j.at("fce_mm").get<double>();
    r.fade_mm = j.at("fade_mm").get<std::vector<double>>();
    r.sample_count = j.at("sample_count").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("MetricReport: malformed JSON: ") + e.what());
  }
  return r;
}

// 5.64M / 202K style parameter-count formatting; absent counts show "-".
inline std::string display_param_count(const std::optional<std::int64_t>& count) {
  if (!count) return "-";
  const double c = static_cast<double>(*count);
  char buf[32];
  auto fmt3 = [&](double v, const char* suffix) {
    if (v >= 99.95)
      std::snprintf(buf, sizeof(buf), "%.0f%s", v, suffix);
    else if (v >= 9.995)
      std::snprintf(buf, sizeof(buf), "%.1f%s", v, suffix);
    else
      std::snprintf(buf, sizeof(buf), "%.2f%s", v, suffix);
  };
  if (c >= 1e6)
    fmt3(c / 1e6, "M");
  else if (c >= 1e3)
    fmt3(c / 1e3, "K");
  else
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(*count));
  return buf;
}

namespace report_detail {

inline std::string join_per_horizon(const std::vector<double>& values) {
  if (values.empty()) return "-";
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += " / ";
    s += display_metric(values[i]);
  }
  return s;
}

}  // namespace report_detail

// Aligned text table with columns Method | Size | MPJPE | FPS | FCE | FADE.
inline std::string report_table(const std::vector<MetricReport>& reports) {
  std::vector<std::array<std::string, 6>> rows;
  rows.push_back({"Method", "Size", "MPJPE", "FPS", "FCE", "FADE"});
  for (const auto& r : reports) {
    std::array<std::string, 6> row;
    row[0] = r.model_name;
    row[1] = display_param_count(r.param_count);
    row[2] = report_detail::join_per_horizon(r.mpjpe_mm);
    if (r.fps) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.0f", *r.fps);
      row[3] = buf;
      row[4] = r.fce_mm ? display_fce(*r.fce_mm) : "-";
      row[5] = report_detail::join_per_horizon(r.fade_mm);
    } else {
      row[3] = "-";
      row[4] = "-";
      row[5] = "-";
    }
    rows.push_back(row);
  }
  std::array<std::size_t, 6> width{};
  for (const auto& row : rows)
    for (int c = 0; c < 6; ++c) width[c] = std::max(width[c], row[c].size());
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < 6; ++c) {
      std::string cell = rows[i][c];
      cell.resize(width[c], ' ');
      out += cell;
      if (c + 1 < 6) out += " | ";
    }
    out += "\n";
    if (i == 0) {
      for (int c = 0; c < 6; ++c) {
        out += std::string(width[c], '-');
        if (c + 1 < 6) out += "-+-";
      }
      out += "\n";
    }
  }
  return out;
}

// CSV mirror of the table, one row per report, horizons expanded.
inline std::string report_csv(const std::vector<MetricReport>& reports) {
  std::string out = "method,param_count,horizon_ms,mpjpe_mm,vim_mm,fps,fce_mm,fade_mm,sample_count\n";
  char buf[64];
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.horizons_ms.size(); ++i) {
      out += r.model_name + ",";
      out += r.param_count ? std::to_string(*r.param_count) : "";
      std::snprintf(buf, sizeof(buf), ",%g,%.9g,%.9g", r.horizons_ms[i],
                    r.mpjpe_mm[i], r.vim_mm[i]);
      out += buf;
      if (r.fps) {
        std::snprintf(buf, sizeof(buf), ",%.9g", *r.fps);
        out += buf;
      } else {
        out += ",";
      }
      if (r.fce_mm) {
        std::snprintf(buf, sizeof(buf), ",%.9g", *r.fce_mm);
        out += buf;
      } else {
        out += ",";
      }
      if (i < r.fade_mm.size()) {
        std::snprintf(buf, sizeof(buf), ",%.9g", r.fade_mm[i]);
        out += buf;
      } else {
        out += ",";
      }
      out += "," + std::to_string(r.sample_count) + "\n";
    }
  }
  return out;
}

// Worst-first ordering by FADE at the largest horizon (falling back to MPJPE
// when throughput was not measured), the ordering of the comparison tables.
inline void sort_reports_worst_first(std::vector<MetricReport>& reports) {
  auto key = [](const MetricReport& r) {
    if (!r.fade_mm.empty()) return r.fade_mm.back();
    if (!r.mpjpe_mm.empty()) return r.mpjpe_mm.back();
    return 0.0;
  };
  std::stable_sort(reports.begin(), reports.end(),
                   [&](const MetricReport& a, const MetricReport& b) {
                     return key(a) > key(b);
                   });
}

// Appends #2, #3, ... to duplicate model names.
inline void disambiguate_names(std::vector<MetricReport>& reports) {
  std::map<std::string, int> seen;
  for (auto& r : reports) {
    const int n = ++seen[r.model_name];
    if (n > 1) r.model_name += "#" + std::to_string(n);
  }
}

}  // namespace posecast
