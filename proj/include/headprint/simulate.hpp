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

// Victim trace synthesis, estimation noise, yaw drift and log sync.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "headprint/error.hpp"
#include "headprint/fingerprint.hpp"
#include "headprint/geometry.hpp"
#include "headprint/trace.hpp"

namespace headprint {

struct VictimParams {
  double switch_prob_per_s = 0.2;
  double max_speed_deg_s = 90.0;
  double jitter_sigma_deg = 2.0;
  std::int64_t sample_period_ms = 100;
  std::uint64_t seed = 1;
};

/// Yaw-drift parameters are in degrees per second and degrees.
struct NoiseSpec {
  double yaw_sigma_deg = 0.0;
  double pitch_sigma_deg = 0.0;
  double drift_rate_deg_s = 0.0;
  double drift_offset_deg = 0.0;
  std::uint64_t seed = 1;
};

/// Noise whose yaw/pitch mean absolute errors are 8.8 and 4.3 degrees
/// (sigma = MAE * sqrt(pi / 2)).
inline NoiseSpec calibrated_estimation_noise(std::uint64_t seed = 1) {
  return {11.03, 5.39, 0.0, 0.0, seed};
}

/// YD(t) = theta * t + theta0, t in seconds.
struct DriftModel {
  double theta_deg_per_s = 0.0;
  double theta0_deg = 0.0;

  double at(double t_s) const { return theta_deg_per_s * t_s + theta0_deg; }
  DriftModel negated() const { return {-theta_deg_per_s, -theta0_deg}; }
};

namespace detail {

/// Orthonormal tangent basis at unit vector p.
inline std::pair<Vec3, Vec3> tangent_basis(const Vec3& p) {
  const Vec3 helper = std::abs(p.z) < 0.9 ? kVertical : Vec3{1.0, 0.0, 0.0};
  const Vec3 e1 = normalized(cross(helper, p));
  return {e1, cross(p, e1)};
}

/// Exponential map: walk `angle_deg` from p along tangent direction d.
inline Vec3 walk(const Vec3& p, const Vec3& d, double angle_deg) {
  const double r = angle_deg * kDegToRad;
  return normalized(std::cos(r) * p + std::sin(r) * d);
}

/// Cell drawn with probability proportional to the (normalized) map.
inline std::size_t sample_cell(const SaliencyMap& normalized_map, double u) {
  double acc = 0.0;
  const auto& c = normalized_map.cells;
  for (std::size_t i = 0; i < c.size(); ++i) {
    acc += c[i];
    if (u < acc) return i;
  }
  return c.size() - 1;
}

}  // namespace detail

/// First-order pursuit of saliency-sampled attention targets.
///
/// The head starts on the frame-0 argmax. At each step the target is
/// redrawn from the current normalized map with probability
/// 1 - (1 - switch_prob_per_s)^dt, the head moves toward it along the great
/// circle by at most max_speed_deg_s * dt, and the recorded sample gets an
/// isotropic angular jitter. The head state itself is not jittered.
inline HeadMovementTrace simulate_victim(const VideoFingerprint& fp, const VictimParams& p) {
  if (fp.maps.empty()) fail(ErrorKind::kInvalidArgument, "fingerprint has no maps");
  if (p.sample_period_ms < 1 || !(p.max_speed_deg_s > 0.0) || !(p.jitter_sigma_deg >= 0.0) ||
      !(p.switch_prob_per_s >= 0.0 && p.switch_prob_per_s <= 1.0)) {
    fail(ErrorKind::kInvalidArgument, "invalid victim parameters");
  }
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double dt = static_cast<double>(p.sample_period_ms) / 1000.0;
  const double switch_prob = 1.0 - std::pow(1.0 - p.switch_prob_per_s, dt);
  const double max_step = p.max_speed_deg_s * dt;

  std::vector<SaliencyMap> normalized_cache(fp.maps.size());
  std::vector<bool> cached(fp.maps.size(), false);
  auto normalized_at = [&](std::size_t i) -> const SaliencyMap& {
    if (!cached[i]) {
      normalized_cache[i] = normalize_saliency(fp.maps[i]);
      cached[i] = true;
    }
    return normalized_cache[i];
  };
  (void)normalized_at(0);  // degenerate frame 0 fails here

  HeadMovementTrace trace{fp.video_id, Frame::kVR, {}};
  Vec3 head = argmax_direction(fp.maps.front());
  Vec3 target = head;
  const auto end = fp.duration_ms();
  trace.samples.push_back({0, head});
  for (std::int64_t t = p.sample_period_ms; t < end; t += p.sample_period_ms) {
    if (unit(rng) < switch_prob) {
      const auto& m = normalized_at(nearest_map_index(fp, t));
      const auto cell = detail::sample_cell(m, unit(rng));
      target = cell_center_direction(static_cast<int>(cell % m.width),
                                     static_cast<int>(cell / m.width), m.width, m.height);
    }
    head = step_toward(head, target, max_step);
    const double j1 = gauss(rng) * p.jitter_sigma_deg;
    const double j2 = gauss(rng) * p.jitter_sigma_deg;
    Vec3 observed = head;
    const double r = std::hypot(j1, j2);
    if (r > 0.0) {
      const auto [e1, e2] = detail::tangent_basis(head);
      observed = detail::walk(head, (j1 / r) * e1 + (j2 / r) * e2, r);
    }
    trace.samples.push_back({t, observed});
  }
  return trace;
}

/// Independent zero-mean Gaussian errors on azimuth and altitude per sample;
/// altitude is clamped to [-90, 90].
inline HeadMovementTrace inject_estimation_noise(const HeadMovementTrace& trace, const NoiseSpec& spec) {
  if (!(spec.yaw_sigma_deg >= 0.0) || !(spec.pitch_sigma_deg >= 0.0)) {
    fail(ErrorKind::kInvalidArgument, "noise sigmas must be >= 0");
  }
  if (spec.yaw_sigma_deg == 0.0 && spec.pitch_sigma_deg == 0.0) return trace;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  HeadMovementTrace out = trace;
  for (auto& s : out.samples) {
    auto a = to_spherical(s.v);
    a.azimuth_deg += gauss(rng) * spec.yaw_sigma_deg;
    a.altitude_deg = std::clamp(a.altitude_deg + gauss(rng) * spec.pitch_sigma_deg, -90.0, 90.0);
    s.v = from_spherical(a);
  }
  return out;
}

/// Rotates the sample at time t about the vertical axis by YD(t) degrees.
inline HeadMovementTrace inject_yaw_drift(const HeadMovementTrace& trace, const DriftModel& model) {
  HeadMovementTrace out = trace;
  if (model.theta_deg_per_s == 0.0 && model.theta0_deg == 0.0) return out;
  for (auto& s : out.samples) {
    s.v = rotate_about_vertical(s.v, model.at(static_cast<double>(s.t_ms) / 1000.0));
  }
  return out;
}

inline HeadMovementTrace remove_yaw_drift(const HeadMovementTrace& trace, const DriftModel& model) {
  return inject_yaw_drift(trace, model.negated());
}

/// Observed yaw at a moment whose true yaw is known, expressed as the
/// residual (observed minus true), in degrees.
struct YawAnchor {
  double t_s = 0.0;
  double yaw_deg = 0.0;
};

/// Two-point line through the anchors. The slope uses the wrapped yaw
/// difference; the returned intercept is referenced to t = 0 (it equals the
/// first anchor's residual when that anchor sits at t = 0).
inline DriftModel fit_yaw_drift(const YawAnchor& a, const YawAnchor& b) {
  if (a.t_s == b.t_s) fail(ErrorKind::kInvalidArgument, "drift anchors must have distinct times");
  const double theta = wrap_deg(b.yaw_deg - a.yaw_deg) / (b.t_s - a.t_s);
  return {theta, wrap_deg(a.yaw_deg) - theta * a.t_s};
}

/// Offset that maps log time onto recording time, given one matched key pair.
constexpr std::int64_t sync_offset(std::int64_t key_frame_t_ms, std::int64_t key_log_t_ms) {
  return key_frame_t_ms - key_log_t_ms;
}

inline HeadMovementTrace apply_sync_offset(const HeadMovementTrace& log, std::int64_t offset_ms) {
  HeadMovementTrace out = log;
  for (auto& s : out.samples) s.t_ms += offset_ms;
  return out;
}

}  // namespace headprint
