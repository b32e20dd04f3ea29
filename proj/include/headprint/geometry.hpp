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

// Rotations, frame conversion and equirectangular projection.
//
// Axis convention, used everywhere in headprint:
//   component 0 (x)  reference direction: camera filming direction in the
//                    camera-based frame, roll axis in the VR frame
//   component 1 (y)  horizontal, 90 degrees counter-clockwise from x
//   component 2 (z)  vertical, shared by both frames (z axis == yaw axis)
// Azimuth is measured from x toward y about z; altitude is the elevation
// above the x-y plane. All public angles are in degrees.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "headprint/error.hpp"

namespace headprint {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend constexpr Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend constexpr Vec3 operator*(double s, const Vec3& v) {
    return {s * v.x, s * v.y, s * v.z};
  }
  friend constexpr Vec3 operator*(const Vec3& v, double s) { return s * v; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

inline constexpr Vec3 kVertical{0.0, 0.0, 1.0};

constexpr double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
          a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 0.0)) fail(ErrorKind::kInvalidArgument, "cannot normalize a zero vector");
  return (1.0 / n) * v;
}

/// Great-circle angle between two directions, in degrees.
inline double angle_between_deg(const Vec3& a, const Vec3& b) {
  // atan2 form stays accurate for nearly parallel vectors.
  return std::atan2(norm(cross(a, b)), dot(a, b)) * kRadToDeg;
}

/// Maps any angle into (-180, 180].
inline double wrap_deg(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r <= -180.0) r += 360.0;
  if (r > 180.0) r -= 360.0;
  return r;
}

enum class Frame { kCameraBased, kVR };

inline std::string_view to_string(Frame f) {
  return f == Frame::kVR ? "vr" : "camera";
}

inline Frame parse_frame(std::string_view s) {
  if (s == "vr") return Frame::kVR;
  if (s == "camera") return Frame::kCameraBased;
  fail(ErrorKind::kFormat, "unknown frame tag '" + std::string(s) + "'");
}

/// A unit direction with the frame it is expressed in.
struct HeadOrientation {
  Vec3 direction;
  Frame frame = Frame::kVR;
};

class Quaternion {
 public:
  constexpr Quaternion() = default;
  constexpr Quaternion(double w, double x, double y, double z)
      : w_(w), x_(x), y_(y), z_(z) {}

  static constexpr Quaternion identity() { return {}; }

  constexpr double w() const { return w_; }
  constexpr double x() const { return x_; }
  constexpr double y() const { return y_; }
  constexpr double z() const { return z_; }

  double norm() const { return std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_); }
  constexpr Quaternion conjugate() const { return {w_, -x_, -y_, -z_}; }

  /// Hamilton product; (a * b) applies b first, then a.
  friend constexpr Quaternion operator*(const Quaternion& a, const Quaternion& b) {
    return {a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
            a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
            a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
            a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_};
  }

 private:
  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

/// Composition renormalizes so that long chains stay unit.
inline Quaternion compose(const Quaternion& second, const Quaternion& first) {
  const Quaternion q = second * first;
  const double n = q.norm();
  return {q.w() / n, q.x() / n, q.y() / n, q.z() / n};
}

/// Rotation by `degrees` about `axis` (right-hand rule). The axis need not be unit.
inline Quaternion make_quaternion(const Vec3& axis, double degrees) {
  const double n = norm(axis);
  if (!(n > 0.0) || !std::isfinite(n)) {
    fail(ErrorKind::kInvalidArgument, "rotation axis must have nonzero length");
  }
  const double half = 0.5 * degrees * kDegToRad;
  const double s = std::sin(half) / n;
  return {std::cos(half), axis.x * s, axis.y * s, axis.z * s};
}

inline Vec3 rotate_vector(const Quaternion& q, const Vec3& v) {
  if (std::abs(q.norm() - 1.0) > 1e-6) {
    fail(ErrorKind::kInvalidArgument, "rotate_vector requires a unit quaternion");
  }
  // v' = v + 2w (u x v) + 2 u x (u x v), u = vector part
  const Vec3 u{q.x(), q.y(), q.z()};
  const Vec3 t = 2.0 * cross(u, v);
  return v + q.w() * t + cross(u, t);
}

inline Vec3 rotate_about_vertical(const Vec3& v, double degrees) {
  return rotate_vector(make_quaternion(kVertical, degrees), v);
}

/// Signed angle of the horizontal projection of the first-frame camera-based
/// orientation, measured from the x axis, in (-180, 180].
inline double offset_angle(const Vec3& first) {
  if (first.x == 0.0 && first.y == 0.0) {
    fail(ErrorKind::kDegenerateOrientation,
         "first orientation is vertical; its horizontal projection is undefined");
  }
  const double a = std::atan2(first.y, first.x) * kRadToDeg;
  return a == -180.0 ? 180.0 : a;
}

inline HeadOrientation camera_to_vr(const HeadOrientation& v, double offset_deg) {
  if (v.frame != Frame::kCameraBased) {
    fail(ErrorKind::kFrameMismatch, "camera_to_vr expects a camera-based orientation");
  }
  return {rotate_about_vertical(v.direction, -offset_deg), Frame::kVR};
}

struct SphericalAngles {
  double azimuth_deg = 0.0;   // [0, 360)
  double altitude_deg = 0.0;  // [-90, 90]
};

inline SphericalAngles to_spherical(const Vec3& v) {
  const double horizontal = std::hypot(v.x, v.y);
  const double alt = std::atan2(v.z, horizontal) * kRadToDeg;
  if (horizontal == 0.0) return {0.0, alt};
  double az = std::atan2(v.y, v.x) * kRadToDeg;
  if (az < 0.0) az += 360.0;
  if (az >= 360.0) az -= 360.0;  // -tiny + 360 can round up to 360
  return {az, alt};
}

inline Vec3 from_spherical(const SphericalAngles& a) {
  const double az = a.azimuth_deg * kDegToRad;
  const double alt = a.altitude_deg * kDegToRad;
  const double c = std::cos(alt);
  return {c * std::cos(az), c * std::sin(az), std::sin(alt)};
}

struct EquirectPoint {
  double w = 0.0;  // column, [0, W)
  double h = 0.0;  // row, [0, H]
};

inline EquirectPoint equirect_project(const SphericalAngles& a, int width, int height) {
  if (width < 1 || height < 1) {
    fail(ErrorKind::kInvalidArgument, "equirectangular grid must be at least 1x1");
  }
  return {a.azimuth_deg / 360.0 * width,
          (1.0 - std::sin(a.altitude_deg * kDegToRad)) / 2.0 * height};
}

/// Inverse of equirect_project; used to place grid cell centers on the sphere.
inline SphericalAngles equirect_unproject(const EquirectPoint& p, int width, int height) {
  const double s = std::clamp(1.0 - 2.0 * p.h / height, -1.0, 1.0);
  double az = p.w / width * 360.0;
  az = std::fmod(az, 360.0);
  if (az < 0.0) az += 360.0;
  return {az, std::asin(s) * kRadToDeg};
}

inline Vec3 cell_center_direction(int col, int row, int width, int height) {
  return from_spherical(equirect_unproject({col + 0.5, row + 0.5}, width, height));
}

/// Spherical linear interpolation between unit vectors, t in [0, 1].
inline Vec3 slerp(const Vec3& a, const Vec3& b, double t) {
  const double c = std::clamp(dot(a, b), -1.0, 1.0);
  const double omega = std::acos(c);
  if (omega < 1e-12) return normalized(a + t * (b - a));
  const double s = std::sin(omega);
  if (s < 1e-12) {
    // Antipodal: any great circle through a works; pick one deterministically.
    const Vec3 helper = std::abs(a.z) < 0.9 ? kVertical : Vec3{1.0, 0.0, 0.0};
    return rotate_vector(make_quaternion(cross(a, helper), t * omega * kRadToDeg), a);
  }
  return normalized((std::sin((1.0 - t) * omega) / s) * a + (std::sin(t * omega) / s) * b);
}

/// Moves `from` toward `to` along the great circle by at most `max_step_deg`.
inline Vec3 step_toward(const Vec3& from, const Vec3& to, double max_step_deg) {
  const double d = angle_between_deg(from, to);
  if (d <= max_step_deg || d == 0.0) return to;
  return slerp(from, to, max_step_deg / d);
}

}  // namespace headprint
