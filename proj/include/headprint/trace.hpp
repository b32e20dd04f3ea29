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

// Head-movement traces: windowing, resampling, interval sampling,
// orientation maps and trace error metrics.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "headprint/error.hpp"
#include "headprint/geometry.hpp"

namespace headprint {

struct TraceSample {
  std::int64_t t_ms = 0;
  Vec3 v;
};

/// Timestamped head orientations of one viewing session. All samples share
/// `frame`; timestamps are strictly increasing and nonnegative.
struct HeadMovementTrace {
  std::string session_id;
  Frame frame = Frame::kVR;
  std::vector<TraceSample> samples;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
};

inline void validate_trace(const HeadMovementTrace& trace, double unit_tol = 1e-6) {
  std::int64_t prev = -1;
  for (const auto& s : trace.samples) {
    if (s.t_ms < 0 || s.t_ms <= prev) {
      fail(ErrorKind::kFormat, "trace timestamps must be nonnegative and strictly increasing");
    }
    if (!(std::abs(norm(s.v) - 1.0) <= unit_tol)) {
      fail(ErrorKind::kFormat, "trace sample at t_ms=" + std::to_string(s.t_ms) +
                                   " is not a unit vector");
    }
    prev = s.t_ms;
  }
}

/// Smallest spacing between consecutive samples; 0 for fewer than 2 samples.
inline std::int64_t sample_period_ms(const HeadMovementTrace& trace) {
  std::int64_t period = 0;
  for (std::size_t i = 1; i < trace.samples.size(); ++i) {
    const auto d = trace.samples[i].t_ms - trace.samples[i - 1].t_ms;
    if (period == 0 || d < period) period = d;
  }
  return period;
}

/// Time covered by the trace: each sample holds until the next one, and the
/// last one for one sample period.
inline std::int64_t coverage_ms(const HeadMovementTrace& trace) {
  if (trace.samples.empty()) return 0;
  return trace.samples.back().t_ms - trace.samples.front().t_ms + sample_period_ms(trace);
}

/// Samples with t0 <= t < t0 + T, rebased to start at 0.
inline HeadMovementTrace window(const HeadMovementTrace& trace, std::int64_t t0_ms,
                                double length_s) {
  if (trace.samples.empty()) fail(ErrorKind::kInvalidArgument, "cannot window an empty trace");
  if (!(length_s > 0.0)) fail(ErrorKind::kInvalidArgument, "window length must be positive");
  const auto end_ms = t0_ms + static_cast<std::int64_t>(std::llround(length_s * 1000.0));
  HeadMovementTrace out{trace.session_id, trace.frame, {}};
  for (const auto& s : trace.samples) {
    if (s.t_ms >= t0_ms && s.t_ms < end_ms) out.samples.push_back({s.t_ms - t0_ms, s.v});
  }
  if (out.samples.empty()) {
    fail(ErrorKind::kEmptyWindow, "no samples in [" + std::to_string(t0_ms) + ", " +
                                      std::to_string(end_ms) + ") ms");
  }
  return out;
}

/// Uniform grid from the first timestamp, slerping between neighbors.
/// Grid points past the last sample are dropped.
inline HeadMovementTrace resample(const HeadMovementTrace& trace, std::int64_t period_ms) {
  if (trace.samples.size() < 2) {
    fail(ErrorKind::kInsufficientData, "resample needs at least two samples");
  }
  if (period_ms < 1) fail(ErrorKind::kInvalidArgument, "resample period must be >= 1 ms");
  const auto& in = trace.samples;
  HeadMovementTrace out{trace.session_id, trace.frame, {}};
  std::size_t j = 0;
  for (std::int64_t t = in.front().t_ms; t <= in.back().t_ms; t += period_ms) {
    while (j + 1 < in.size() && in[j + 1].t_ms <= t) ++j;
    if (in[j].t_ms == t || j + 1 == in.size()) {
      out.samples.push_back({t, in[j].v});
      continue;
    }
    const double u = static_cast<double>(t - in[j].t_ms) /
                     static_cast<double>(in[j + 1].t_ms - in[j].t_ms);
    out.samples.push_back({t, slerp(in[j].v, in[j + 1].v, u)});
  }
  return out;
}

/// Converts a camera-based trace to the VR frame. The offset angle comes from
/// the first sample, where the VR coordinate system was reset.
inline HeadMovementTrace trace_to_vr(const HeadMovementTrace& trace) {
  if (trace.frame != Frame::kCameraBased) {
    fail(ErrorKind::kFrameMismatch, "trace is already in the VR frame");
  }
  if (trace.samples.empty()) fail(ErrorKind::kInsufficientData, "trace has no samples");
  const double offset = offset_angle(trace.samples.front().v);
  HeadMovementTrace out{trace.session_id, Frame::kVR, {}};
  out.samples.reserve(trace.samples.size());
  for (const auto& s : trace.samples) {
    out.samples.push_back({s.t_ms, camera_to_vr({s.v, Frame::kCameraBased}, offset).direction});
  }
  return out;
}

inline std::int64_t seconds_to_ms(double s) {
  return static_cast<std::int64_t>(std::llround(s * 1000.0));
}

/// Picks the sample nearest to t = 0, tau, 2 tau, ... (relative to the first
/// sample) for every grid point inside the trace's coverage. Ties go to the
/// earlier sample.
inline std::vector<TraceSample> sample_at_interval(const HeadMovementTrace& trace, double tau_s) {
  if (!(tau_s > 0.0)) fail(ErrorKind::kInvalidArgument, "sampling interval must be positive");
  const auto tau_ms = seconds_to_ms(tau_s);
  if (tau_ms < 1) fail(ErrorKind::kInvalidArgument, "sampling interval below 1 ms");
  std::vector<TraceSample> out;
  if (trace.samples.empty()) return out;
  const auto& in = trace.samples;
  const std::int64_t start = in.front().t_ms;
  const std::int64_t end = start + coverage_ms(trace);
  std::size_t j = 0;
  for (std::int64_t t = start; t < end; t += tau_ms) {
    while (j + 1 < in.size() && in[j + 1].t_ms <= t) ++j;
    std::size_t pick = j;
    if (j + 1 < in.size() && in[j + 1].t_ms - t < t - in[j].t_ms) pick = j + 1;
    out.push_back({t - start, in[pick].v});
  }
  return out;
}

/// W x H row-major grid, cell (col, row) at index row * width + col.
struct HeadOrientationMap {
  int width = 0;
  int height = 0;
  std::int64_t t_ms = 0;
  std::vector<double> cells;

  double at(int col, int row) const { return cells[static_cast<std::size_t>(row) * width + col]; }
};

namespace detail {

/// Index of the cell containing an equirectangular point.
inline std::pair<int, int> containing_cell(const EquirectPoint& p, int width, int height) {
  int col = static_cast<int>(std::floor(p.w));
  col = ((col % width) + width) % width;
  const int row = std::clamp(static_cast<int>(std::floor(p.h)), 0, height - 1);
  return {col, row};
}

}  // namespace detail

/// One splat map per sample. Gaussian in pixel units, periodic across the
/// w = 0 / W seam, unwrapped (clipped) in h, normalized to unit mass.
inline std::vector<HeadOrientationMap> orientation_maps(const std::vector<TraceSample>& samples,
                                                        Frame frame, int width, int height,
                                                        double splat_sigma_px) {
  if (frame != Frame::kVR) fail(ErrorKind::kFrameMismatch, "orientation maps require VR samples");
  if (width < 1 || height < 1) fail(ErrorKind::kInvalidArgument, "map size must be >= 1x1");
  if (!(splat_sigma_px >= 0.0)) fail(ErrorKind::kInvalidArgument, "splat sigma must be >= 0");
  std::vector<HeadOrientationMap> maps;
  maps.reserve(samples.size());
  const std::size_t n = static_cast<std::size_t>(width) * height;
  for (const auto& s : samples) {
    HeadOrientationMap m{width, height, s.t_ms, std::vector<double>(n, 0.0)};
    const EquirectPoint p = equirect_project(to_spherical(s.v), width, height);
    if (splat_sigma_px == 0.0) {
      const auto [col, row] = detail::containing_cell(p, width, height);
      m.cells[static_cast<std::size_t>(row) * width + col] = 1.0;
      maps.push_back(std::move(m));
      continue;
    }
    const double inv = 1.0 / (2.0 * splat_sigma_px * splat_sigma_px);
    // Enough periodic images to cover 8 sigma on either side.
    const int images = static_cast<int>(std::ceil(8.0 * splat_sigma_px / width)) + 1;
    std::vector<double> col_weight(width, 0.0);
    for (int c = 0; c < width; ++c) {
      for (int k = -images; k <= images; ++k) {
        const double d = c + 0.5 - p.w + static_cast<double>(k) * width;
        col_weight[c] += std::exp(-d * d * inv);
      }
    }
    double total = 0.0;
    for (int r = 0; r < height; ++r) {
      const double d = r + 0.5 - p.h;
      const double rw = std::exp(-d * d * inv);
      for (int c = 0; c < width; ++c) {
        const double v = rw * col_weight[c];
        m.cells[static_cast<std::size_t>(r) * width + c] = v;
        total += v;
      }
    }
    if (!(total > 0.0)) {
      // Splat entirely underflowed; fall back to the containing cell.
      const auto [col, row] = detail::containing_cell(p, width, height);
      m.cells[static_cast<std::size_t>(row) * width + col] = 1.0;
    } else {
      for (double& v : m.cells) v /= total;
    }
    maps.push_back(std::move(m));
  }
  return maps;
}

struct TraceErrorReport {
  double yaw_mae_deg = 0.0;
  double pitch_mae_deg = 0.0;
  double mse = 0.0;
};

namespace detail {

inline void check_aligned(const HeadMovementTrace& est, const HeadMovementTrace& gt) {
  if (est.samples.size() != gt.samples.size()) {
    fail(ErrorKind::kAlignment, "traces differ in length");
  }
  if (est.samples.empty()) fail(ErrorKind::kAlignment, "traces are empty");
  for (std::size_t i = 0; i < est.samples.size(); ++i) {
    if (est.samples[i].t_ms != gt.samples[i].t_ms) {
      fail(ErrorKind::kAlignment, "timestamps differ at sample " + std::to_string(i));
    }
  }
}

}  // namespace detail

/// Mean over samples of the per-component squared error averaged over the
/// three components.
inline double trace_mse(const HeadMovementTrace& est, const HeadMovementTrace& gt) {
  detail::check_aligned(est, gt);
  double sum = 0.0;
  for (std::size_t i = 0; i < est.samples.size(); ++i) {
    const Vec3 d = est.samples[i].v - gt.samples[i].v;
    sum += (d.x * d.x + d.y * d.y + d.z * d.z) / 3.0;
  }
  return sum / static_cast<double>(est.samples.size());
}

/// Yaw difference uses the wrapped angle, so |delta| <= 180. Pole samples
/// take the canonical azimuth 0.
inline TraceErrorReport trace_mae(const HeadMovementTrace& est, const HeadMovementTrace& gt) {
  detail::check_aligned(est, gt);
  double yaw = 0.0;
  double pitch = 0.0;
  for (std::size_t i = 0; i < est.samples.size(); ++i) {
    const auto a = to_spherical(est.samples[i].v);
    const auto b = to_spherical(gt.samples[i].v);
    yaw += std::abs(wrap_deg(a.azimuth_deg - b.azimuth_deg));
    pitch += std::abs(a.altitude_deg - b.altitude_deg);
  }
  const double n = static_cast<double>(est.samples.size());
  return {yaw / n, pitch / n, trace_mse(est, gt)};
}

}  // namespace headprint
