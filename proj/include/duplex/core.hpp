// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0
//
// Shared math aliases, the (w,x,y,z) quaternion, and the exception hierarchy.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace duplex {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unit quaternion stored in (w, x, y, z) order.
///
/// The library never mixes conventions: file formats, JSON and every rotation
/// routine read and write the scalar part first.
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static constexpr Quat identity() { return {}; }

  /// Rotation of `angle` radians about the (not necessarily unit) `axis`.
  static Quat from_axis_angle(const Vec3& axis, double angle) {
    const Vec3 a = axis.normalized();
    const double s = std::sin(0.5 * angle);
    return {std::cos(0.5 * angle), a.x() * s, a.y() * s, a.z() * s};
  }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Quat normalized() const {
    const double n = norm();
    return {w / n, x / n, y / n, z / n};
  }

  Quat operator*(double s) const { return {w * s, x * s, y * s, z * s}; }
  Quat operator+(const Quat& o) const { return {w + o.w, x + o.x, y + o.y, z + o.z}; }
  Quat operator-() const { return {-w, -x, -y, -z}; }

  /// Hamilton product; `(a * b)` applies `b` first.
  Quat operator*(const Quat& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z, w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x, w * o.z + x * o.y - y * o.x + z * o.w};
  }

  /// Standard unit-quaternion-to-matrix formula; assumes |q| = 1.
  Mat3 to_matrix() const {
    Mat3 r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),  //
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),    //
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
  }

  friend bool operator==(const Quat&, const Quat&) = default;
};

inline bool is_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace duplex
