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

// Saliency maps, video fingerprints and trace/fingerprint time alignment.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "headprint/error.hpp"
#include "headprint/geometry.hpp"
#include "headprint/trace.hpp"

namespace headprint {

/// Nonnegative W x H heat map over the equirectangular frame, row-major.
struct SaliencyMap {
  int width = 0;
  int height = 0;
  std::int64_t t_ms = 0;
  std::vector<double> cells;

  double at(int col, int row) const { return cells[static_cast<std::size_t>(row) * width + col]; }
  double& at(int col, int row) { return cells[static_cast<std::size_t>(row) * width + col]; }
};

struct VideoFingerprint {
  std::string video_id;
  std::int64_t frame_interval_ms = 0;
  std::vector<SaliencyMap> maps;

  int width() const { return maps.empty() ? 0 : maps.front().width; }
  int height() const { return maps.empty() ? 0 : maps.front().height; }
  std::int64_t duration_ms() const {
    return static_cast<std::int64_t>(maps.size()) * frame_interval_ms;
  }
};

/// Map i at t = i * frame_interval_ms, shared dimensions, nonnegative cells.
inline void validate_fingerprint(const VideoFingerprint& fp) {
  if (fp.frame_interval_ms < 1) fail(ErrorKind::kFormat, "frame interval must be >= 1 ms");
  if (fp.maps.empty()) fail(ErrorKind::kFormat, "fingerprint '" + fp.video_id + "' has no maps");
  const int w = fp.width();
  const int h = fp.height();
  if (w < 1 || h < 1) fail(ErrorKind::kFormat, "fingerprint maps must be at least 1x1");
  for (std::size_t i = 0; i < fp.maps.size(); ++i) {
    const auto& m = fp.maps[i];
    if (m.width != w || m.height != h ||
        m.cells.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
      fail(ErrorKind::kFormat, "fingerprint '" + fp.video_id + "' map " + std::to_string(i) +
                                   " has mismatched dimensions");
    }
    if (m.t_ms != static_cast<std::int64_t>(i) * fp.frame_interval_ms) {
      fail(ErrorKind::kFormat, "fingerprint '" + fp.video_id + "' map " + std::to_string(i) +
                                   " is off the frame grid");
    }
    for (double c : m.cells) {
      if (!(c >= 0.0) || !std::isfinite(c)) {
        fail(ErrorKind::kFormat, "fingerprint '" + fp.video_id + "' has a negative cell");
      }
    }
  }
}

/// Probability interpretation of a heat map with an epsilon floor of 1e-6
/// times the peak, so every cell has finite log mass.
///
/// A map that already sums to one and already carries the floor is a fixed
/// point: it is only rescaled by its sum. Adding the floor a second time
/// would shift cells by up to ~1e-6 of the peak.
inline SaliencyMap normalize_saliency(const SaliencyMap& map) {
  double peak = 0.0;
  double low = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double c : map.cells) {
    peak = std::max(peak, c);
    low = std::min(low, c);
    sum += c;
  }
  if (!(peak > 0.0)) fail(ErrorKind::kDegenerateSaliency, "saliency map has no positive cell");
  const double eps = 1e-6 * peak;
  SaliencyMap out = map;
  if (std::abs(sum - 1.0) <= 1e-12 && low >= eps / (1.0 + 1e-6) * (1.0 - 1e-9)) {
    for (double& c : out.cells) c /= sum;
    return out;
  }
  double total = 0.0;
  for (double& c : out.cells) {
    c += eps;
    total += c;
  }
  for (double& c : out.cells) c /= total;
  return out;
}

/// Immutable set of fingerprints with unique ids.
class FingerprintLibrary {
 public:
  using Entry = std::shared_ptr<const VideoFingerprint>;

  FingerprintLibrary() = default;
  explicit FingerprintLibrary(std::vector<VideoFingerprint> fps) {
    for (auto& fp : fps) add(std::move(fp));
  }

  void add(VideoFingerprint fp) {
    validate_fingerprint(fp);
    if (!ids_.insert(fp.video_id).second) {
      fail(ErrorKind::kInvalidArgument, "duplicate video id '" + fp.video_id + "'");
    }
    entries_.push_back(std::make_shared<const VideoFingerprint>(std::move(fp)));
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const VideoFingerprint& operator[](std::size_t i) const { return *entries_[i]; }

  Entry find(const std::string& id) const {
    for (const auto& e : entries_) {
      if (e->video_id == id) return e;
    }
    return nullptr;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_set<std::string> ids_;
};

struct SynthSpec {
  int blob_count = 3;
  double blob_sigma_deg = 12.0;
  double drift_speed_deg_s = 2.0;
  double duration_s = 60.0;
  std::int64_t frame_interval_ms = 500;
  int width = 64;
  int height = 32;
  std::uint64_t seed = 1;
};

inline void validate(const SynthSpec& s) {
  if (s.blob_count < 1 || !(s.blob_sigma_deg > 0.0) || !(s.drift_speed_deg_s >= 0.0) ||
      !(s.duration_s > 0.0) || s.frame_interval_ms < 1 || s.width < 1 || s.height < 1) {
    fail(ErrorKind::kInvalidArgument, "invalid synthesis spec");
  }
}

struct Blob {
  Vec3 center;
  double weight = 1.0;
};

/// Unit directions of all cell centers, row-major.
inline std::vector<Vec3> cell_center_directions(int width, int height) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) out.push_back(cell_center_direction(c, r, width, height));
  }
  return out;
}

/// Mixture of Gaussians in great-circle distance, sampled at cell centers.
inline SaliencyMap render_blobs(const std::vector<Blob>& blobs, double sigma_deg, int width,
                                int height, std::int64_t t_ms,
                                const std::vector<Vec3>& centers) {
  SaliencyMap m{width, height, t_ms, std::vector<double>(centers.size(), 0.0)};
  const double sigma_rad = sigma_deg * kDegToRad;
  const double inv = 1.0 / (2.0 * sigma_rad * sigma_rad);
  for (const auto& b : blobs) {
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const double d = std::acos(std::clamp(dot(centers[i], b.center), -1.0, 1.0));
      m.cells[i] += b.weight * std::exp(-d * d * inv);
    }
  }
  return m;
}

inline SaliencyMap render_blobs(const std::vector<Blob>& blobs, double sigma_deg, int width,
                                int height, std::int64_t t_ms = 0) {
  return render_blobs(blobs, sigma_deg, width, height, t_ms,
                      cell_center_directions(width, height));
}

/// Synthetic stand-in for a saliency detector: blob_count Gaussian blobs
/// whose centers travel along seeded great circles at drift_speed_deg_s.
/// Maps are left unnormalized.
inline VideoFingerprint synth_fingerprint(const SynthSpec& spec, std::string video_id = {}) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Centers stay within +-60 degrees altitude at t = 0.
  const double max_sin = std::sin(60.0 * kDegToRad);
  struct Track {
    Vec3 start;
    Vec3 axis;
    double weight;
  };
  std::vector<Track> tracks;
  for (int b = 0; b < spec.blob_count; ++b) {
    const double az = 360.0 * unit(rng);
    const double alt = std::asin((2.0 * unit(rng) - 1.0) * max_sin) * kRadToDeg;
    const Vec3 start = from_spherical({az, alt});
    // A random horizontal-ish heading; the drift axis is perpendicular to it and to start.
    const double heading = 360.0 * unit(rng);
    const Vec3 east = normalized(cross(kVertical, start));
    const Vec3 north = cross(start, east);
    const double hr = heading * kDegToRad;
    const Vec3 tangent = std::cos(hr) * east + std::sin(hr) * north;
    const double weight = 0.5 + 0.5 * unit(rng);
    tracks.push_back({start, normalized(cross(start, tangent)), weight});
  }

  if (video_id.empty()) video_id = "video_" + std::to_string(spec.seed);
  VideoFingerprint fp{std::move(video_id), spec.frame_interval_ms, {}};
  const auto frames = static_cast<std::int64_t>(
      std::ceil(spec.duration_s * 1000.0 / static_cast<double>(spec.frame_interval_ms) - 1e-9));
  const auto centers = cell_center_directions(spec.width, spec.height);
  std::vector<Blob> blobs(tracks.size());
  fp.maps.reserve(static_cast<std::size_t>(frames));
  for (std::int64_t i = 0; i < frames; ++i) {
    const std::int64_t t_ms = i * spec.frame_interval_ms;
    const double angle = spec.drift_speed_deg_s * static_cast<double>(t_ms) / 1000.0;
    for (std::size_t b = 0; b < tracks.size(); ++b) {
      blobs[b].center = angle == 0.0
                            ? tracks[b].start
                            : rotate_vector(make_quaternion(tracks[b].axis, angle), tracks[b].start);
      blobs[b].weight = tracks[b].weight;
    }
    fp.maps.push_back(render_blobs(blobs, spec.blob_sigma_deg, spec.width, spec.height, t_ms, centers));
  }
  return fp;
}

/// Index of the largest cell (first one on ties).
inline std::size_t argmax_cell(const SaliencyMap& m) {
  return static_cast<std::size_t>(std::max_element(m.cells.begin(), m.cells.end()) - m.cells.begin());
}

inline Vec3 argmax_direction(const SaliencyMap& m) {
  const auto i = argmax_cell(m);
  return cell_center_direction(static_cast<int>(i % m.width), static_cast<int>(i / m.width),
                               m.width, m.height);
}

/// Map index whose timestamp is nearest to t (ties to the earlier map).
inline std::size_t nearest_map_index(const VideoFingerprint& fp, std::int64_t t_ms) {
  const auto n = static_cast<std::int64_t>(fp.maps.size());
  if (t_ms <= 0) return 0;
  std::int64_t i = t_ms / fp.frame_interval_ms;
  const std::int64_t rem = t_ms - i * fp.frame_interval_ms;
  if (2 * rem > fp.frame_interval_ms) ++i;
  return static_cast<std::size_t>(std::min(i, n - 1));
}

struct AlignedPair {
  TraceSample sample;
  std::size_t map_index = 0;
};

struct Alignment {
  std::vector<AlignedPair> pairs;
  std::size_t dropped = 0;
};

/// Pairs each sample with the fingerprint map nearest in time. Samples at or
/// past the fingerprint's coverage are dropped and counted.
inline Alignment align_pairs(const std::vector<TraceSample>& samples, const VideoFingerprint& fp) {
  if (fp.maps.empty()) fail(ErrorKind::kInvalidArgument, "fingerprint has no maps");
  Alignment out;
  out.pairs.reserve(samples.size());
  const auto end = fp.duration_ms();
  for (const auto& s : samples) {
    if (s.t_ms < 0 || s.t_ms >= end) {
      ++out.dropped;
      continue;
    }
    out.pairs.push_back({s, nearest_map_index(fp, s.t_ms)});
  }
  if (out.pairs.empty()) {
    fail(ErrorKind::kNoOverlap, "trace does not overlap fingerprint '" + fp.video_id + "'");
  }
  return out;
}

}  // namespace headprint
