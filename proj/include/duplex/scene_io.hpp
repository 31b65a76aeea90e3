// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0
//
// Scene files. Binary layout (all little-endian, see docs/formats.md):
//
//   0   char[8]  magic "DPXSCENE"
//   8   u32      version (1)
//   12  u32      flags (0)
//   16  u32      cell count N
//   20  u32      slots per cell K
//   24  N cell records of (11 + 14 K) float32:
//         center[3] structure_scales[3] quaternion[4] (w,x,y,z) blend_weight
//         then K slots of
//         pos_offset[3] scale_ratio[3] rotation[4] (w,x,y,z) opacity color[3]
//
// The JSON variant carries the same fields with full double precision.

#pragma once

#include "duplex/image.hpp"
#include "duplex/scene.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

namespace duplex {

inline constexpr std::array<char, 8> kSceneMagic{'D', 'P', 'X', 'S', 'C', 'E', 'N', 'E'};
inline constexpr std::uint32_t kSceneVersion = 1;
inline constexpr std::size_t kSceneHeaderBytes = 16;
inline constexpr std::size_t kCellFloats = 11;
inline constexpr std::size_t kSlotFloats = 14;

class FormatError : public Error {
 public:
  using Error::Error;
};

namespace detail {

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void vec3(const Vec3& v) {
    for (int i = 0; i < 3; ++i) f32(v[i]);
  }
  void quat(const Quat& q) {
    f32(q.w);
    f32(q.x);
    f32(q.y);
    f32(q.z);
  }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : bytes_(b) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
  Vec3 vec3() {
    Vec3 v;
    for (int i = 0; i < 3; ++i) v[i] = f32();
    return v;
  }
  Quat quat() {
    Quat q;
    q.w = f32();
    q.x = f32();
    q.y = f32();
    q.z = f32();
    return q;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("scene file truncated");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> encode_scene(const Scene& scene) {
  detail::ByteWriter w;
  w.raw(std::string_view(kSceneMagic.data(), kSceneMagic.size()));
  w.u32(kSceneVersion);
  w.u32(0);
  w.u32(static_cast<std::uint32_t>(scene.cells.size()));
  w.u32(scene.slots_per_cell);
  for (const CellProxy& c : scene.cells) {
    if (c.slots.size() != scene.slots_per_cell)
      throw FormatError("every cell must carry exactly K slots");
    w.vec3(c.center);
    w.vec3(c.structure_scales);
    w.quat(c.quaternion);
    w.f32(c.blend_weight);
    for (const SlotAttributes& s : c.slots) {
      w.vec3(s.pos_offset);
      w.vec3(s.scale_ratio);
      w.quat(s.rotation);
      w.f32(s.opacity);
      w.vec3(s.color);
    }
  }
  return w.take();
}

inline Scene decode_scene_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kSceneHeaderBytes + 8 ||
      std::memcmp(bytes.data(), kSceneMagic.data(), kSceneMagic.size()) != 0)
    throw FormatError("not a binary scene file");
  detail::ByteReader r(bytes);
  r.skip(kSceneMagic.size());
  if (const std::uint32_t version = r.u32(); version != kSceneVersion)
    throw FormatError("unsupported scene version " + std::to_string(version));
  r.u32();
  const std::uint64_t n = r.u32();
  Scene scene;
  scene.slots_per_cell = r.u32();
  const std::uint64_t expected = n * (kCellFloats + kSlotFloats * scene.slots_per_cell) * 4;
  if (r.remaining() != expected) throw FormatError("scene payload size does not match header");
  scene.cells.resize(n);
  for (CellProxy& c : scene.cells) {
    c.center = r.vec3();
    c.structure_scales = r.vec3();
    c.quaternion = r.quat();
    c.blend_weight = r.f32();
    c.slots.resize(scene.slots_per_cell);
    for (SlotAttributes& s : c.slots) {
      s.pos_offset = r.vec3();
      s.scale_ratio = r.vec3();
      s.rotation = r.quat();
      s.opacity = r.f32();
      s.color = r.vec3();
    }
  }
  return scene;
}

namespace detail {

inline nlohmann::json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
inline nlohmann::json quat_json(const Quat& q) { return {q.w, q.x, q.y, q.z}; }

inline Vec3 json_vec(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Quat json_quat(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw FormatError("expected a 4-element [w,x,y,z] array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace detail

inline nlohmann::json scene_to_json(const Scene& scene) {
  nlohmann::json cells = nlohmann::json::array();
  for (const CellProxy& c : scene.cells) {
    nlohmann::json slots = nlohmann::json::array();
    for (const SlotAttributes& s : c.slots)
      slots.push_back({{"pos_offset", detail::vec_json(s.pos_offset)},
                       {"scale_ratio", detail::vec_json(s.scale_ratio)},
                       {"rotation", detail::quat_json(s.rotation)},
                       {"opacity", s.opacity},
                       {"color", detail::vec_json(s.color)}});
    cells.push_back({{"center", detail::vec_json(c.center)},
                     {"structure_scales", detail::vec_json(c.structure_scales)},
                     {"quaternion", detail::quat_json(c.quaternion)},
                     {"blend_weight", c.blend_weight},
                     {"slots", std::move(slots)}});
  }
  return {{"format", "duplex-scene"},
          {"version", kSceneVersion},
          {"slots_per_cell", scene.slots_per_cell},
          {"cells", std::move(cells)}};
}

inline Scene scene_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "duplex-scene") throw FormatError("not a duplex-scene JSON document");
    if (j.at("version").get<std::uint32_t>() != kSceneVersion) throw FormatError("unsupported scene version");
    Scene scene;
    scene.slots_per_cell = j.at("slots_per_cell").get<std::uint32_t>();
    for (const auto& jc : j.at("cells")) {
      CellProxy c;
      c.center = detail::json_vec(jc.at("center"));
      c.structure_scales = detail::json_vec(jc.at("structure_scales"));
      c.quaternion = detail::json_quat(jc.at("quaternion"));
      c.blend_weight = jc.value("blend_weight", 1.0);
      for (const auto& js : jc.at("slots")) {
        SlotAttributes s;
        s.pos_offset = detail::json_vec(js.at("pos_offset"));
        s.scale_ratio = detail::json_vec(js.at("scale_ratio"));
        s.rotation = detail::json_quat(js.at("rotation"));
        s.opacity = js.at("opacity").get<double>();
        s.color = detail::json_vec(js.at("color"));
        c.slots.push_back(s);
      }
      scene.cells.push_back(std::move(c));
    }
    return scene;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed scene JSON: ") + e.what());
  }
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path);
}

/// Loads either format, sniffing the magic bytes. Does not validate.
inline Scene load_scene(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  if (bytes.size() >= kSceneMagic.size() &&
      std::memcmp(bytes.data(), kSceneMagic.data(), kSceneMagic.size()) == 0)
    return decode_scene_bytes(bytes);
  const nlohmann::json j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) throw FormatError(path + ": neither a binary scene nor JSON");
  return scene_from_json(j);
}

/// Writes JSON when `path` ends in ".json", the binary container otherwise.
inline void save_scene(const std::string& path, const Scene& scene) {
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    const std::string text = scene_to_json(scene).dump(1);
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  } else {
    write_file(path, encode_scene(scene));
  }
}

}  // namespace duplex
