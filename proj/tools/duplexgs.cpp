// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0
//
// duplexgs: render, compare, benchmark and generate scenes from the shell.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 invalid scene,
// 3 I/O failure.

#include "duplex/duplex.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using duplex::Camera;
using duplex::Image;
using duplex::Kernel;
using duplex::RenderConfig;
using duplex::Scene;
using duplex::Vec3;
using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitInvalidScene = 2;
constexpr int kExitIo = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every setting that can come from a default, the config file, or a flag.
struct Settings {
  RenderConfig render;
  int threads = 1;
  int width = 256;
  int height = 256;
  /// 0 selects the image width.
  double focal = 0.0;
  int frames = 1;
  double orbit_radius = 8.0;
  double orbit_elevation = 0.0;
  std::uint64_t seed = 0;
};

json settings_to_json(const Settings& s) {
  const RenderConfig& r = s.render;
  return {{"kernel", duplex::to_string(r.kernel)},
          {"tile_size", r.tile_size},
          {"epsilon", r.et_epsilon},
          {"alpha_min", r.alpha_min},
          {"background", {r.background.x(), r.background.y(), r.background.z()}},
          {"tau", r.lc_tau},
          {"lc_background_weight", r.lc_background_weight},
          {"denom_floor", r.denom_floor},
          {"threads", s.threads},
          {"width", s.width},
          {"height", s.height},
          {"focal", s.focal},
          {"frames", s.frames},
          {"orbit_radius", s.orbit_radius},
          {"orbit_elevation", s.orbit_elevation},
          {"seed", s.seed}};
}

Kernel kernel_from_name(const std::string& name) {
  const auto k = duplex::parse_kernel(name);
  if (!k) throw UsageError("unknown kernel '" + name + "' (alpharef, lcwsr, duplex, oracle)");
  return *k;
}

Vec3 vec3_from(const std::vector<double>& v, const char* what) {
  if (v.size() != 3) throw UsageError(std::string(what) + " needs three components");
  return {v[0], v[1], v[2]};
}

void merge_settings(Settings& s, const json& j) {
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  static const std::vector<std::string> known{
      "kernel", "tile_size", "epsilon", "alpha_min", "background", "tau", "lc_background_weight",
      "denom_floor", "threads", "width", "height", "focal", "frames", "orbit_radius",
      "orbit_elevation", "seed"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw UsageError("unknown config key '" + key + "'");
  try {
    if (j.contains("kernel")) s.render.kernel = kernel_from_name(j["kernel"].get<std::string>());
    s.render.tile_size = j.value("tile_size", s.render.tile_size);
    s.render.et_epsilon = j.value("epsilon", s.render.et_epsilon);
    s.render.alpha_min = j.value("alpha_min", s.render.alpha_min);
    if (j.contains("background"))
      s.render.background = vec3_from(j["background"].get<std::vector<double>>(), "background");
    s.render.lc_tau = j.value("tau", s.render.lc_tau);
    s.render.lc_background_weight = j.value("lc_background_weight", s.render.lc_background_weight);
    s.render.denom_floor = j.value("denom_floor", s.render.denom_floor);
    s.threads = j.value("threads", s.threads);
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.focal = j.value("focal", s.focal);
    s.frames = j.value("frames", s.frames);
    s.orbit_radius = j.value("orbit_radius", s.orbit_radius);
    s.orbit_elevation = j.value("orbit_elevation", s.orbit_elevation);
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
}

/// Flags as typed by the user; unset ones leave the lower layers alone.
struct Overrides {
  std::string config_path;
  bool print_config = false;
  std::optional<std::string> kernel;
  std::optional<int> tile_size;
  std::optional<double> epsilon;
  std::optional<double> alpha_min;
  std::optional<std::vector<double>> background;
  std::optional<double> tau;
  std::optional<double> lc_background_weight;
  std::optional<int> threads;
  std::optional<int> width;
  std::optional<int> height;
  std::optional<double> focal;
  std::optional<int> frames;
  std::optional<double> orbit_radius;
  std::optional<double> orbit_elevation;
  std::optional<std::uint64_t> seed;
};

void add_common_options(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config_path, "JSON config file (default: $DUPLEX_CONFIG)");
  app.add_flag("--print-config", o.print_config, "Print the resolved configuration and exit");
  app.add_option("--kernel", o.kernel, "alpharef | lcwsr | duplex | oracle");
  app.add_option("--tile-size", o.tile_size, "Tile edge in pixels (8, 16, 32)");
  app.add_option("--epsilon", o.epsilon, "Early-termination threshold");
  app.add_option("--alpha-min", o.alpha_min, "Smallest alpha that is blended");
  app.add_option("--background", o.background, "Background RGB")->delimiter(',')->expected(3);
  app.add_option("--tau", o.tau, "Depth scale of the linear-correction weight");
  app.add_option("--lc-background-weight", o.lc_background_weight,
                 "Background weight of the linear-correction kernel");
  app.add_option("--threads", o.threads, "Worker threads for blending");
  app.add_option("--width", o.width, "Image width");
  app.add_option("--height", o.height, "Image height");
  app.add_option("--focal", o.focal, "Focal length in pixels (0: image width)");
  app.add_option("--frames", o.frames, "Orbit frame count");
  app.add_option("--orbit-radius", o.orbit_radius, "Orbit radius");
  app.add_option("--orbit-elevation", o.orbit_elevation, "Orbit height above the scene center");
  app.add_option("--seed", o.seed, "Generator seed");
}

Settings resolve_settings(const Overrides& o) {
  Settings s;
  std::string path = o.config_path;
  if (path.empty())
    if (const char* env = std::getenv("DUPLEX_CONFIG"); env != nullptr) path = env;
  if (!path.empty()) {
    const std::vector<std::uint8_t> bytes = duplex::read_file(path);
    const json j = json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (j.is_discarded()) throw UsageError(path + ": config is not valid JSON");
    merge_settings(s, j);
  }
  if (o.kernel) s.render.kernel = kernel_from_name(*o.kernel);
  if (o.tile_size) s.render.tile_size = *o.tile_size;
  if (o.epsilon) s.render.et_epsilon = *o.epsilon;
  if (o.alpha_min) s.render.alpha_min = *o.alpha_min;
  if (o.background) s.render.background = vec3_from(*o.background, "--background");
  if (o.tau) s.render.lc_tau = *o.tau;
  if (o.lc_background_weight) s.render.lc_background_weight = *o.lc_background_weight;
  if (o.threads) s.threads = *o.threads;
  if (o.width) s.width = *o.width;
  if (o.height) s.height = *o.height;
  if (o.focal) s.focal = *o.focal;
  if (o.frames) s.frames = *o.frames;
  if (o.orbit_radius) s.orbit_radius = *o.orbit_radius;
  if (o.orbit_elevation) s.orbit_elevation = *o.orbit_elevation;
  if (o.seed) s.seed = *o.seed;

  if (const std::string msg = s.render.check(); !msg.empty()) throw UsageError(msg);
  if (s.threads < 1) throw UsageError("threads must be >= 1");
  if (s.width < 1 || s.height < 1) throw UsageError("image size must be positive");
  if (s.frames < 1) throw UsageError("frames must be >= 1");
  if (!(s.orbit_radius > 0.0)) throw UsageError("orbit radius must be > 0");
  if (!(s.focal >= 0.0)) throw UsageError("focal must be >= 0");
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  duplex::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

Scene load_valid_scene(const std::string& path) {
  Scene scene = duplex::load_scene(path);
  duplex::require_valid(scene);
  return scene;
}

Vec3 scene_center(const Scene& scene) {
  if (scene.cells.empty()) return Vec3::Zero();
  Vec3 lo = scene.cells.front().center;
  Vec3 hi = lo;
  for (const auto& c : scene.cells) {
    lo = lo.cwiseMin(c.center);
    hi = hi.cwiseMax(c.center);
  }
  return 0.5 * (lo + hi);
}

/// Camera file: {"eye": [..], "target": [..], "up": [..], "focal": px,
/// "width": w, "height": h}; width, height, focal and up are optional.
Camera camera_from_file(const std::string& path, const Settings& s) {
  const std::vector<std::uint8_t> bytes = duplex::read_file(path);
  const json j = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw UsageError(path + ": camera file is not a JSON object");
  try {
    const Vec3 eye = vec3_from(j.at("eye").get<std::vector<double>>(), "eye");
    const Vec3 target = vec3_from(j.at("target").get<std::vector<double>>(), "target");
    const Vec3 up = j.contains("up") ? vec3_from(j["up"].get<std::vector<double>>(), "up") : Vec3::UnitY();
    const int w = j.value("width", s.width);
    const int h = j.value("height", s.height);
    const double focal = j.value("focal", s.focal > 0.0 ? s.focal : static_cast<double>(w));
    Camera cam = Camera::look_at(eye, target, up, w, h, focal);
    if (!cam.valid()) throw UsageError(path + ": degenerate camera");
    return cam;
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

json camera_json(const Vec3& eye, const Vec3& target, const Camera& cam) {
  return {{"eye", {eye.x(), eye.y(), eye.z()}},
          {"target", {target.x(), target.y(), target.z()}},
          {"up", {0.0, 1.0, 0.0}},
          {"focal", cam.focal.x()},
          {"width", cam.width},
          {"height", cam.height}};
}

/// A fixed camera file wins; otherwise an orbit around the scene center.
std::vector<Camera> resolve_cameras(const Scene& scene, const Settings& s,
                                    const std::string& camera_path) {
  if (!camera_path.empty()) return {camera_from_file(camera_path, s)};
  duplex::OrbitOptions opt;
  opt.focal_px = s.focal;
  opt.elevation = s.orbit_elevation;
  return duplex::gen_orbit(scene_center(scene), s.orbit_radius, s.frames, s.width, s.height, opt);
}

std::string frame_stem(Kernel k, int frame) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%04d", frame);
  return std::string(duplex::to_string(k)) + buf;
}

std::string replace_extension(const std::string& path, const std::string& ext) {
  return std::filesystem::path(path).replace_extension(ext).string();
}

duplex::FrameReport base_report(Kernel k, int frame, const duplex::RenderResult& r) {
  duplex::FrameReport rep;
  rep.kernel = std::string(duplex::to_string(k));
  rep.frame = frame;
  rep.width = r.image.width;
  rep.height = r.image.height;
  rep.et_ratio = duplex::termination_ratio(r.traces);
  rep.sort_stats = r.sort_stats;
  rep.render_ms = r.timings.total_ms;
  rep.timings = r.timings;
  return rep;
}

// ---------------------------------------------------------------- render

struct RenderArgs {
  std::string scene;
  std::string camera;
  int frame = 0;
  std::string out = "render.ppm";
  std::string report;
};

int cmd_render(const RenderArgs& a, const Settings& s) {
  const Scene scene = load_valid_scene(a.scene);
  const std::vector<Camera> cams = resolve_cameras(scene, s, a.camera);
  if (a.frame < 0 || a.frame >= static_cast<int>(cams.size()))
    throw UsageError("--frame outside [0, frames)");
  duplex::RenderOptions opt;
  opt.threads = s.threads;
  const duplex::RenderResult r = duplex::render_frame(scene, cams[a.frame], s.render, opt);
  duplex::write_ppm(a.out, r.image);
  const std::string report = a.report.empty() ? replace_extension(a.out, ".json") : a.report;
  write_json(report, duplex::to_json(base_report(s.render.kernel, a.frame, r)));
  return 0;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  std::string scene;
  std::string camera;
  std::vector<std::string> kernels;
  std::string out = "compare";
  std::string report;
  bool no_reference = false;
  std::vector<int> leak_region;
};

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

int cmd_compare(const CompareArgs& a, const Settings& s) {
  std::vector<Kernel> kernels;
  for (const std::string& name : a.kernels) {
    const Kernel k = kernel_from_name(name);
    if (std::find(kernels.begin(), kernels.end(), k) == kernels.end()) kernels.push_back(k);
  }
  if (kernels.size() < 2) throw UsageError("compare needs at least two distinct kernels");
  if (!a.leak_region.empty() && a.leak_region.size() != 4)
    throw UsageError("--leak-region takes x0,y0,x1,y1");

  const Scene scene = load_valid_scene(a.scene);
  const std::vector<Camera> cams = resolve_cameras(scene, s, a.camera);
  std::error_code ec;
  std::filesystem::create_directories(a.out, ec);
  if (ec) throw duplex::IoError("cannot create " + a.out + ": " + ec.message());

  duplex::RenderOptions opt;
  opt.threads = s.threads;
  const bool with_reference = !a.no_reference;

  struct Series {
    std::vector<double> psnr, ssim, max_err, leak, popping, et, entries, memory, render_ms;
    std::optional<Image> previous;
  };
  std::map<Kernel, Series> series;

  for (int f = 0; f < static_cast<int>(cams.size()); ++f) {
    const Camera& cam = cams[f];
    std::optional<duplex::RenderResult> reference;
    if (with_reference) {
      RenderConfig rc = s.render;
      rc.kernel = Kernel::Oracle;
      reference = duplex::render_frame(scene, cam, rc, opt);
    }
    const duplex::PixelRect region =
        a.leak_region.empty()
            ? duplex::PixelRect{0, 0, cam.width, cam.height}
            : duplex::PixelRect{a.leak_region[0], a.leak_region[1], a.leak_region[2], a.leak_region[3]};
    for (Kernel k : kernels) {
      RenderConfig rc = s.render;
      rc.kernel = k;
      const duplex::RenderResult r = (k == Kernel::Oracle && reference)
                                         ? *reference
                                         : duplex::render_frame(scene, cam, rc, opt);
      duplex::FrameReport rep = base_report(k, f, r);
      Series& ser = series[k];
      if (reference) {
        rep.psnr = duplex::psnr(r.image, reference->image);
        if (cam.width >= duplex::kSsimWindow && cam.height >= duplex::kSsimWindow)
          rep.ssim = duplex::ssim(r.image, reference->image);
        rep.max_abs_error = duplex::max_abs_error(r.image, reference->image);
        ser.psnr.push_back(*rep.psnr);
        if (rep.ssim) ser.ssim.push_back(*rep.ssim);
        ser.max_err.push_back(*rep.max_abs_error);
        ser.leak.push_back(duplex::region_leakage(r.image, region, reference->image));
      }
      if (ser.previous) {
        const std::vector<Image> pair{*ser.previous, r.image};
        rep.popping_delta = duplex::popping_delta(pair).front();
        ser.popping.push_back(*rep.popping_delta);
      }
      ser.et.push_back(rep.et_ratio);
      ser.entries.push_back(static_cast<double>(r.sort_stats.entries));
      ser.memory.push_back(static_cast<double>(r.sort_stats.memory_bytes()));
      ser.render_ms.push_back(r.timings.total_ms);
      const std::filesystem::path stem = std::filesystem::path(a.out) / frame_stem(k, f);
      duplex::write_ppm(stem.string() + ".ppm", r.image);
      write_json(stem.string() + ".json", duplex::to_json(rep));
      ser.previous = r.image;
    }
  }

  json per_kernel = json::object();
  for (Kernel k : kernels) {
    const Series& ser = series[k];
    json j{{"et_ratio_mean", mean_of(ser.et)},
           {"popping_delta", ser.popping},
           {"sort_entries", ser.entries},
           {"sort_entries_mean", mean_of(ser.entries)},
           {"sort_memory_bytes_mean", mean_of(ser.memory)},
           {"render_ms_median", median_of(ser.render_ms)}};
    j["popping_delta_max"] = ser.popping.empty()
                                 ? json(nullptr)
                                 : json(*std::max_element(ser.popping.begin(), ser.popping.end()));
    if (with_reference) {
      j["psnr_mean"] = duplex::metric_json(mean_of(ser.psnr));
      j["psnr_min"] = duplex::metric_json(*std::min_element(ser.psnr.begin(), ser.psnr.end()));
      j["ssim_mean"] = ser.ssim.empty() ? json(nullptr) : json(mean_of(ser.ssim));
      j["max_abs_error"] = *std::max_element(ser.max_err.begin(), ser.max_err.end());
      j["leak_mean"] = mean_of(ser.leak);
    }
    per_kernel[std::string(duplex::to_string(k))] = std::move(j);
  }
  const json summary{{"scene", a.scene},
                     {"frames", static_cast<int>(cams.size())},
                     {"reference", with_reference ? json("oracle") : json(nullptr)},
                     {"settings", settings_to_json(s)},
                     {"kernels", std::move(per_kernel)}};
  const std::string path =
      a.report.empty() ? (std::filesystem::path(a.out) / "summary.json").string() : a.report;
  write_json(path, summary);
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string scene;
  std::string camera;
  int repeats = 5;
  std::string report;
};

int cmd_bench(const BenchArgs& a, const Settings& s) {
  if (a.repeats < 1) throw UsageError("--repeats must be >= 1");
  const Scene scene = load_valid_scene(a.scene);
  const std::vector<Camera> cams = resolve_cameras(scene, s, a.camera);
  duplex::RenderOptions opt;
  opt.threads = s.threads;
  opt.trace_mode = duplex::TraceMode::Off;

  json frames = json::array();
  std::vector<double> medians;
  for (int f = 0; f < static_cast<int>(cams.size()); ++f) {
    std::vector<duplex::RenderResult> runs;
    for (int r = 0; r < a.repeats; ++r) runs.push_back(duplex::render_frame(scene, cams[f], s.render, opt));
    std::vector<std::size_t> idx(runs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
      return runs[x].timings.total_ms < runs[y].timings.total_ms;
    });
    // Stage times come from the median run so they add up to its total.
    const duplex::RenderResult& med = runs[idx[(idx.size() - 1) / 2]];
    medians.push_back(med.timings.total_ms);
    frames.push_back({{"frame", f},
                      {"median_ms", med.timings.total_ms},
                      {"stages_ms", duplex::to_json(med.timings)},
                      {"sort_stats", duplex::to_json(med.sort_stats)},
                      {"visible_cells", med.visible_cells},
                      {"primitives", med.primitives}});
  }
  const json out{{"kernel", duplex::to_string(s.render.kernel)},
                 {"scene", a.scene},
                 {"repeats", a.repeats},
                 {"threads", s.threads},
                 {"median_frame_ms", median_of(medians)},
                 {"frames", std::move(frames)}};
  if (a.report.empty())
    std::cout << out.dump(2) << "\n";
  else
    write_json(a.report, out);
  return 0;
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string type = "random";
  std::string out;
  std::size_t cells = 100;
  std::uint32_t slots = 5;
  double extent = 4.0;
  int layers = 3;
  std::string camera_out;
};

int cmd_gen(const GenArgs& a, const Settings& s) {
  Scene scene;
  std::optional<json> camera;
  if (a.type == "random") {
    if (a.cells < 1 || a.slots < 1) throw UsageError("--cells and --slots must be >= 1");
    if (!(a.extent >= 0.0)) throw UsageError("--extent must be >= 0");
    scene = duplex::gen_random_cells(s.seed, a.cells, a.slots, a.extent);
  } else if (a.type == "wall") {
    if (a.layers < 2) throw UsageError("--layers must be >= 2");
    const duplex::OpaqueWallOptions wo;
    scene = duplex::gen_opaque_wall(s.seed, a.layers, a.slots, wo);
    const Camera cam = duplex::opaque_wall_camera(wo, s.width, s.height);
    camera = camera_json(cam.position(), Vec3::Zero(), cam);
  } else if (a.type == "popping") {
    scene = duplex::gen_popping_pair(s.seed);
  } else {
    throw UsageError("unknown scene type '" + a.type + "' (random, wall, popping)");
  }
  duplex::save_scene(a.out, scene);
  if (!a.camera_out.empty()) {
    if (!camera) throw UsageError("--camera-out is only available for wall scenes");
    write_json(a.camera_out, *camera);
  }
  return 0;
}

// ---------------------------------------------------------------- diff

struct DiffArgs {
  std::string a;
  std::string b;
};

int cmd_diff(const DiffArgs& d) {
  const Image a = duplex::read_ppm(d.a);
  const Image b = duplex::read_ppm(d.b);
  if (!a.same_shape(b)) throw UsageError("images differ in size");
  json out{{"max_abs_error", duplex::max_abs_error(a, b)},
           {"mse", duplex::mean_squared_error(a, b)},
           {"psnr", duplex::metric_json(duplex::psnr(a, b))}};
  out["ssim"] = a.width >= duplex::kSsimWindow && a.height >= duplex::kSsimWindow
                    ? json(duplex::ssim(a, b))
                    : json(nullptr);
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-proxy Gaussian splatting reference renderer"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  Overrides over;
  add_common_options(app, over);

  RenderArgs render_args;
  auto* render = app.add_subcommand("render", "Render one view to PPM plus a JSON report");
  render->add_option("--scene", render_args.scene, "Scene file (binary or JSON)")->required();
  render->add_option("--camera", render_args.camera, "Camera JSON (default: orbit)");
  render->add_option("--frame", render_args.frame, "Orbit frame to render");
  render->add_option("--out", render_args.out, "Output image (PPM)");
  render->add_option("--report", render_args.report, "Report path (default: next to --out)");

  CompareArgs compare_args;
  auto* compare = app.add_subcommand("compare", "Render an orbit under several kernels");
  compare->add_option("--scene", compare_args.scene, "Scene file")->required();
  compare->add_option("--camera", compare_args.camera, "Fixed camera JSON instead of an orbit");
  compare->add_option("--kernels", compare_args.kernels, "Comma-separated kernel list")
      ->delimiter(',')
      ->required();
  compare->add_option("--out", compare_args.out, "Output directory");
  compare->add_option("--report", compare_args.report, "Summary path (default: OUT/summary.json)");
  compare->add_flag("--no-reference", compare_args.no_reference, "Skip the oracle reference");
  compare->add_option("--leak-region", compare_args.leak_region, "x0,y0,x1,y1 for the leak metric")
      ->delimiter(',');

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Time the pipeline stages");
  bench->add_option("--scene", bench_args.scene, "Scene file")->required();
  bench->add_option("--camera", bench_args.camera, "Fixed camera JSON instead of an orbit");
  bench->add_option("--repeats", bench_args.repeats, "Renders per frame");
  bench->add_option("--report", bench_args.report, "Output path (default: stdout)");

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Write a synthetic scene");
  gen->add_option("--type", gen_args.type, "random | wall | popping");
  gen->add_option("--out", gen_args.out, "Scene path (.json for JSON)")->required();
  gen->add_option("--cells", gen_args.cells, "Cell count (random)");
  gen->add_option("--slots", gen_args.slots, "Slots per cell (random, wall)");
  gen->add_option("--extent", gen_args.extent, "Cube side (random)");
  gen->add_option("--layers", gen_args.layers, "Layer count (wall)");
  gen->add_option("--camera-out", gen_args.camera_out, "Write the matching camera (wall)");

  DiffArgs diff_args;
  auto* diff = app.add_subcommand("diff", "Compare two PPM images");
  diff->add_option("a", diff_args.a, "First image")->required();
  diff->add_option("b", diff_args.b, "Second image")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    const Settings settings = resolve_settings(over);
    if (over.print_config) {
      std::cout << settings_to_json(settings).dump(2) << "\n";
      return 0;
    }
    if (*render) return cmd_render(render_args, settings);
    if (*compare) return cmd_compare(compare_args, settings);
    if (*bench) return cmd_bench(bench_args, settings);
    if (*gen) return cmd_gen(gen_args, settings);
    if (*diff) return cmd_diff(diff_args);
    std::cerr << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const duplex::InvalidScene& e) {
    std::cerr << "invalid scene: " << e.what() << "\n";
    return kExitInvalidScene;
  } catch (const duplex::FormatError& e) {
    std::cerr << "invalid scene: " << e.what() << "\n";
    return kExitInvalidScene;
  } catch (const duplex::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
