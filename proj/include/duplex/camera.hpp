// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "duplex/core.hpp"

#include <stdexcept>

namespace duplex {

/// Pinhole camera. Camera frame: +x right, +y down, +z forward.
/// A world point p maps to camera coordinates `rotation * p + translation`,
/// and pixel (i, j) samples the image plane at (i + 0.5, j + 0.5).
struct Camera {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  Vec2 focal = Vec2(256.0, 256.0);
  Vec2 principal_point = Vec2(128.0, 128.0);
  int width = 256;
  int height = 256;
  double near = 0.01;
  double far = 1000.0;

  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }

  Vec3 position() const { return -rotation.transpose() * translation; }

  Vec2 project(const Vec3& cam) const {
    return {focal.x() * cam.x() / cam.z() + principal_point.x(),
            focal.y() * cam.y() / cam.z() + principal_point.y()};
  }

  bool valid() const {
    const double ortho = (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= 1e-6 && rotation.determinant() > 0.0 && width > 0 && height > 0 &&
           near > 0.0 && near < far && focal.minCoeff() > 0.0;
  }

  /// Camera at `eye` looking toward `target`; `up` fixes the roll so that image
  /// rows run against it.
  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, int width,
                        int height, double focal_px) {
    const Vec3 forward = (target - eye).normalized();
    const Vec3 right = forward.cross(up).normalized();
    const Vec3 down = forward.cross(right);
    Camera cam;
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = forward.transpose();
    cam.translation = -cam.rotation * eye;
    cam.width = width;
    cam.height = height;
    cam.focal = Vec2(focal_px, focal_px);
    cam.principal_point = Vec2(0.5 * width, 0.5 * height);
    return cam;
  }
};

}  // namespace duplex
