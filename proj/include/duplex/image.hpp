// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "duplex/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace duplex {

class IoError : public Error {
 public:
  using Error::Error;
};

/// Row-major RGB image with linear double channels, nominally in [0,1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

  double& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  double at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }

  void set(int x, int y, const Vec3& rgb) {
    for (int c = 0; c < 3; ++c) at(x, y, c) = rgb[c];
  }
  Vec3 pixel(int x, int y) const { return {at(x, y, 0), at(x, y, 1), at(x, y, 2)}; }

  bool same_shape(const Image& o) const { return width == o.width && height == o.height; }
};

inline std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

/// 8-bit binary PPM (P6) encoding.
inline std::vector<std::uint8_t> encode_ppm(const Image& img) {
  const std::string header =
      "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.data.size());
  for (double v : img.data) out.push_back(to_byte(v));
  return out;
}

inline void write_ppm(const std::string& path, const Image& img) {
  const std::vector<std::uint8_t> bytes = encode_ppm(img);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path);
}

inline Image read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::string magic;
  f >> magic;
  auto next_int = [&]() {
    f >> std::ws;
    while (f.peek() == '#') {
      std::string comment;
      std::getline(f, comment);
      f >> std::ws;
    }
    int v = -1;
    f >> v;
    return v;
  };
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (magic != "P6" || w <= 0 || h <= 0 || maxval != 255) throw IoError(path + ": not an 8-bit P6 file");
  f.get();
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * 3);
  f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError(path + ": truncated pixel data");
  Image img(w, h);
  for (std::size_t i = 0; i < bytes.size(); ++i) img.data[i] = bytes[i] / 255.0;
  return img;
}

}  // namespace duplex
