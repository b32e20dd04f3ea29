// Copyright 2026 The headprint Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Trace/fingerprint matching.
//
// A trace is scored against a fingerprint by the mean log-likelihood of its
// interval samples under the smoothed, normalized saliency map of the
// matching timestamp. An affine calibrator on standardized scores turns the
// raw score into a confidence in (0, 1); videos are ranked by that
// confidence, ties broken by ascending video id.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "headprint/error.hpp"
#include "headprint/fingerprint.hpp"
#include "headprint/geometry.hpp"
#include "headprint/io_util.hpp"
#include "headprint/trace.hpp"

namespace headprint {

inline constexpr double kCalibratedYawMaeDeg = 8.8;

struct MatchConfig {
  double tau_s = 0.8;
  double smoothing_sigma_px = 64 * kCalibratedYawMaeDeg / 360.0;
  int map_width = 64;
  int map_height = 32;
};

/// Smoothing that blurs by the modeled yaw error expressed in pixels.
inline double default_smoothing_sigma(int map_width, double yaw_mae_deg = kCalibratedYawMaeDeg) {
  return map_width * yaw_mae_deg / 360.0;
}

inline void validate(const MatchConfig& cfg) {
  if (!(cfg.tau_s > 0.0) || !(cfg.smoothing_sigma_px >= 0.0) || cfg.map_width < 1 ||
      cfg.map_height < 1) {
    fail(ErrorKind::kInvalidArgument, "invalid match configuration");
  }
}

/// FNV-1a over the canonical text of the configuration, as 16 hex digits.
inline std::string config_hash(const MatchConfig& cfg) {
  const std::string text = "tau_s=" + io::format_double(cfg.tau_s) +
                           ";smoothing_sigma_px=" + io::format_double(cfg.smoothing_sigma_px) +
                           ";map_width=" + std::to_string(cfg.map_width) +
                           ";map_height=" + std::to_string(cfg.map_height);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> k(2 * static_cast<std::size_t>(radius) + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : k) v /= total;
  return k;
}

}  // namespace detail

/// Separable Gaussian blur: periodic along w, edge-clamped along h.
inline SaliencyMap blur_periodic(const SaliencyMap& m, double sigma_px) {
  if (sigma_px <= 0.0) return m;
  const auto k = detail::gaussian_kernel(sigma_px);
  const int radius = static_cast<int>(k.size() / 2);
  const int w = m.width;
  const int h = m.height;
  SaliencyMap tmp = m;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int cc = (((c + i) % w) + w) % w;
        acc += k[static_cast<std::size_t>(i + radius)] * m.at(cc, r);
      }
      tmp.at(c, r) = acc;
    }
  }
  SaliencyMap out = tmp;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int rr = std::clamp(r + i, 0, h - 1);
        acc += k[static_cast<std::size_t>(i + radius)] * tmp.at(c, rr);
      }
      out.at(c, r) = acc;
    }
  }
  return out;
}

/// normalize -> blur -> renormalize.
inline SaliencyMap likelihood_map(const SaliencyMap& m, double sigma_px) {
  SaliencyMap d = blur_periodic(normalize_saliency(m), sigma_px);
  double total = 0.0;
  for (double c : d.cells) total += c;
  for (double& c : d.cells) c /= total;
  return d;
}

/// Bilinear interpolation between cell centers, periodic in w, clamped in h.
inline double sample_bilinear(const SaliencyMap& m, const EquirectPoint& p) {
  const double x = p.w - 0.5;
  const double y = std::clamp(p.h - 0.5, 0.0, static_cast<double>(m.height - 1));
  const double xf = std::floor(x);
  const double fx = x - xf;
  const int c0 = ((static_cast<int>(xf) % m.width) + m.width) % m.width;
  const int c1 = (c0 + 1) % m.width;
  const int r0 = std::min(static_cast<int>(std::floor(y)), m.height - 1);
  const int r1 = std::min(r0 + 1, m.height - 1);
  const double fy = y - r0;
  const double top = (1.0 - fx) * m.at(c0, r0) + fx * m.at(c1, r0);
  const double bottom = (1.0 - fx) * m.at(c0, r1) + fx * m.at(c1, r1);
  return (1.0 - fy) * top + fy * bottom;
}

/// A fingerprint with every map turned into a likelihood map once, so many
/// traces can be scored against it cheaply.
class PreparedFingerprint {
 public:
  PreparedFingerprint(const VideoFingerprint& fp, const MatchConfig& cfg)
      : video_id_(fp.video_id), frame_interval_ms_(fp.frame_interval_ms) {
    validate(cfg);
    validate_fingerprint(fp);
    if (fp.width() != cfg.map_width || fp.height() != cfg.map_height) {
      fail(ErrorKind::kInvalidArgument, "fingerprint '" + fp.video_id + "' is " +
                                            std::to_string(fp.width()) + "x" +
                                            std::to_string(fp.height()) +
                                            ", matcher expects " + std::to_string(cfg.map_width) +
                                            "x" + std::to_string(cfg.map_height));
    }
    maps_.reserve(fp.maps.size());
    for (const auto& m : fp.maps) maps_.push_back(likelihood_map(m, cfg.smoothing_sigma_px));
  }

  const std::string& video_id() const { return video_id_; }

  struct Score {
    double raw = 0.0;
    std::size_t pairs_used = 0;
  };

  /// Mean log-likelihood of interval samples (from sample_at_interval).
  Score score(const std::vector<TraceSample>& samples) const {
    const std::int64_t end = static_cast<std::int64_t>(maps_.size()) * frame_interval_ms_;
    double total = 0.0;
    std::size_t used = 0;
    for (const auto& s : samples) {
      if (s.t_ms < 0 || s.t_ms >= end) continue;
      const auto& m = maps_[nearest_index(s.t_ms)];
      const auto p = equirect_project(to_spherical(s.v), m.width, m.height);
      total += std::log(sample_bilinear(m, p));
      ++used;
    }
    if (used == 0) {
      fail(ErrorKind::kNoOverlap, "trace does not overlap fingerprint '" + video_id_ + "'");
    }
    return {total / static_cast<double>(used), used};
  }

 private:
  std::size_t nearest_index(std::int64_t t_ms) const {
    std::int64_t i = t_ms / frame_interval_ms_;
    if (2 * (t_ms - i * frame_interval_ms_) > frame_interval_ms_) ++i;
    return static_cast<std::size_t>(std::min<std::int64_t>(i, static_cast<std::int64_t>(maps_.size()) - 1));
  }

  std::string video_id_;
  std::int64_t frame_interval_ms_;
  std::vector<SaliencyMap> maps_;
};

inline std::vector<TraceSample> matcher_samples(const HeadMovementTrace& trace, const MatchConfig& cfg) {
  if (trace.frame != Frame::kVR) fail(ErrorKind::kFrameMismatch, "matching requires a VR-frame trace");
  return sample_at_interval(trace, cfg.tau_s);
}

/// Raw score of one (trace, fingerprint) pair, in nats per sample.
inline double score_pair(const HeadMovementTrace& trace, const VideoFingerprint& fp,
                         const MatchConfig& cfg) {
  const auto samples = matcher_samples(trace, cfg);
  const auto aligned = align_pairs(samples, fp);
  double total = 0.0;
  for (const auto& pair : aligned.pairs) {
    const auto d = likelihood_map(fp.maps[pair.map_index], cfg.smoothing_sigma_px);
    total += std::log(sample_bilinear(d, equirect_project(to_spherical(pair.sample.v), d.width, d.height)));
  }
  return total / static_cast<double>(aligned.pairs.size());
}

/// Literal negative log-likelihood: -label * log(n). Zero for negatives.
inline double nll_loss(double n, int label) {
  if (!(n > 0.0 && n < 1.0)) fail(ErrorKind::kInvalidArgument, "confidence must lie in (0, 1)");
  if (label != 0 && label != 1) fail(ErrorKind::kInvalidArgument, "label must be 0 or 1");
  return label == 1 ? -std::log(n) : 0.0;
}

struct Calibrator {
  double a = 1.0;
  double b = 0.0;
  double score_mean = 0.0;
  double score_std = 1.0;
  std::string config_hash;

  double standardize(double raw) const { return (raw - score_mean) / score_std; }
  double logit(double raw) const { return a * standardize(raw) + b; }
  double confidence(double raw) const { return 1.0 / (1.0 + std::exp(-logit(raw))); }
};

inline nlohmann::ordered_json to_json(const Calibrator& c) {
  nlohmann::ordered_json j;
  j["a"] = c.a;
  j["b"] = c.b;
  j["score_mean"] = c.score_mean;
  j["score_std"] = c.score_std;
  j["config_hash"] = c.config_hash;
  return j;
}

inline Calibrator calibrator_from_json(const nlohmann::json& j) {
  try {
    Calibrator c{j.at("a").get<double>(), j.at("b").get<double>(), j.at("score_mean").get<double>(),
                 j.at("score_std").get<double>(), j.at("config_hash").get<std::string>()};
    if (!(c.score_std > 0.0)) fail(ErrorKind::kFormat, "calibrator score_std must be positive");
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("calibrator JSON: ") + e.what());
  }
}

namespace detail {

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

/// Mean binary cross-entropy of sigmoid(a * z + b) against labels.
inline double calibration_loss(double a, double b, std::span<const double> z, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double l = a * z[i] + b;
    total += labels[i] == 1 ? detail::softplus(-l) : detail::softplus(l);
  }
  return total / static_cast<double>(z.size());
}

/// Analytic gradient of calibration_loss: mean (p - y) * (z, 1).
inline std::pair<double, double> calibration_gradient(double a, double b, std::span<const double> z,
                                                      std::span<const int> labels) {
  double ga = 0.0;
  double gb = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double r = detail::sigmoid(a * z[i] + b) - labels[i];
    ga += r * z[i];
    gb += r;
  }
  const double n = static_cast<double>(z.size());
  return {ga / n, gb / n};
}

struct CalibrationFit {
  Calibrator calibrator;
  std::vector<double> loss_history;  // loss before the first epoch and after each epoch
};

/// Full-batch gradient descent on standardized scores from (a, b) = (1, 0).
/// On standardized scores the loss is 1/4-smooth, so any lr <= 4 gives a
/// non-increasing loss sequence.
inline CalibrationFit fit_calibrator(std::span<const double> raw_scores, std::span<const int> labels,
                                     double lr, int epochs, std::string hash = {}) {
  if (raw_scores.size() != labels.size() || raw_scores.empty()) {
    fail(ErrorKind::kInvalidArgument, "scores and labels must be nonempty and of equal length");
  }
  if (!(lr > 0.0) || epochs < 0) fail(ErrorKind::kInvalidArgument, "invalid learning rate or epochs");
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) fail(ErrorKind::kInvalidArgument, "labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  if (pos == 0 || pos == labels.size()) {
    fail(ErrorKind::kDegenerateTraining, "calibration needs both positive and negative pairs");
  }
  const double n = static_cast<double>(raw_scores.size());
  double mean = 0.0;
  for (double s : raw_scores) mean += s;
  mean /= n;
  double var = 0.0;
  for (double s : raw_scores) var += (s - mean) * (s - mean);
  double sd = std::sqrt(var / n);
  if (!(sd > 0.0)) sd = 1.0;
  std::vector<double> z(raw_scores.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (raw_scores[i] - mean) / sd;

  CalibrationFit fit;
  fit.calibrator = {1.0, 0.0, mean, sd, std::move(hash)};
  auto& c = fit.calibrator;
  fit.loss_history.push_back(calibration_loss(c.a, c.b, z, labels));
  for (int e = 0; e < epochs; ++e) {
    const auto [ga, gb] = calibration_gradient(c.a, c.b, z, labels);
    c.a -= lr * ga;
    c.b -= lr * gb;
    fit.loss_history.push_back(calibration_loss(c.a, c.b, z, labels));
  }
  return fit;
}

struct LabeledPair {
  std::shared_ptr<const HeadMovementTrace> trace;
  std::shared_ptr<const VideoFingerprint> fingerprint;
  int label = 0;
};

inline Calibrator train_calibrator(const std::vector<LabeledPair>& pairs, const MatchConfig& cfg,
                                   double lr, int epochs) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(pairs.size());
  labels.reserve(pairs.size());
  for (const auto& p : pairs) {
    scores.push_back(score_pair(*p.trace, *p.fingerprint, cfg));
    labels.push_back(p.label);
  }
  return fit_calibrator(scores, labels, lr, epochs, config_hash(cfg)).calibrator;
}

struct MatchResult {
  std::string video_id;
  double raw_score = 0.0;
  double logit = 0.0;
  double confidence = 0.5;
  std::size_t pairs_used = 0;
};

/// Full ranking of a library; the first k entries are the decision.
struct Ranking {
  std::vector<MatchResult> results;
  std::size_t k = 1;

  std::span<const MatchResult> top() const { return {results.data(), std::min(k, results.size())}; }

  /// 1-based rank of a video, if present.
  std::optional<std::size_t> rank_of(const std::string& video_id) const {
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (results[i].video_id == video_id) return i + 1;
    }
    return std::nullopt;
  }
};

/// Sorts by confidence descending, ties by ascending video id. The logit is
/// the sort key: it orders exactly like the confidence but does not
/// saturate at 1.0.
inline void sort_ranking(std::vector<MatchResult>& results) {
  std::sort(results.begin(), results.end(), [](const MatchResult& x, const MatchResult& y) {
    if (x.logit != y.logit) return x.logit > y.logit;
    return x.video_id < y.video_id;
  });
}

/// Per-call overrides for prepared scoring. `offset_ms` places sample time 0
/// at that point of the video, for windows that do not start at playback start.
struct ScoreOptions {
  std::optional<double> tau_s;
  std::int64_t offset_ms = 0;
};

/// A library prepared for repeated identification under one configuration.
class PreparedLibrary {
 public:
  PreparedLibrary(const FingerprintLibrary& lib, MatchConfig cfg) : cfg_(cfg) {
    validate(cfg_);
    entries_.reserve(lib.size());
    for (const auto& e : lib.entries()) entries_.emplace_back(*e, cfg_);
  }

  const MatchConfig& config() const { return cfg_; }
  std::size_t size() const { return entries_.size(); }
  const PreparedFingerprint& operator[](std::size_t i) const { return entries_[i]; }

  std::vector<PreparedFingerprint::Score> score_all(const HeadMovementTrace& trace,
                                                    const ScoreOptions& opt = {}) const {
    MatchConfig cfg = cfg_;
    if (opt.tau_s) cfg.tau_s = *opt.tau_s;
    auto samples = matcher_samples(trace, cfg);
    for (auto& s : samples) s.t_ms += opt.offset_ms;
    std::vector<PreparedFingerprint::Score> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.score(samples));
    return out;
  }

  Ranking identify(const HeadMovementTrace& trace, const Calibrator& cal, std::size_t k,
                   const ScoreOptions& opt = {}) const {
    if (entries_.empty()) fail(ErrorKind::kInvalidArgument, "library is empty");
    if (k < 1 || k > entries_.size()) {
      fail(ErrorKind::kInvalidArgument, "k must be in [1, " + std::to_string(entries_.size()) + "]");
    }
    const auto scores = score_all(trace, opt);
    Ranking r;
    r.k = k;
    r.results.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const double raw = scores[i].raw;
      r.results.push_back({entries_[i].video_id(), raw, cal.logit(raw), cal.confidence(raw),
                           scores[i].pairs_used});
    }
    sort_ranking(r.results);
    return r;
  }

 private:
  MatchConfig cfg_;
  std::vector<PreparedFingerprint> entries_;
};

inline Ranking identify_topk(const HeadMovementTrace& trace, const FingerprintLibrary& lib,
                             const MatchConfig& cfg, const Calibrator& cal, std::size_t k) {
  if (lib.empty()) fail(ErrorKind::kInvalidArgument, "library is empty");
  return PreparedLibrary(lib, cfg).identify(trace, cal, k);
}

inline nlohmann::ordered_json to_json(const Ranking& r) {
  nlohmann::ordered_json j;
  j["k"] = r.k;
  j["ranking"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.results.size(); ++i) {
    const auto& m = r.results[i];
    nlohmann::ordered_json e;
    e["rank"] = i + 1;
    e["video_id"] = m.video_id;
    e["raw_score"] = m.raw_score;
    e["confidence"] = m.confidence;
    e["pairs_used"] = m.pairs_used;
    e["in_top_k"] = i < r.k;
    j["ranking"].push_back(std::move(e));
  }
  return j;
}

inline constexpr std::string_view kRankingCsvHeader = "trace_id,true_video,top1,top2,top3,rank_of_truth";

/// One summary row; unknown truth leaves true_video and rank_of_truth empty.
inline std::string ranking_csv_row(const std::string& trace_id, const std::optional<std::string>& truth,
                                   const Ranking& r) {
  std::string row = trace_id + "," + truth.value_or("");
  for (std::size_t i = 0; i < 3; ++i) {
    row += ",";
    if (i < r.results.size()) row += r.results[i].video_id;
  }
  row += ",";
  if (truth) {
    if (const auto rank = r.rank_of(*truth)) row += std::to_string(*rank);
  }
  return row;
}

}  // namespace headprint
