#pragma once

// File formats and run configuration.
//
//   RF pair     <stem>.json (header, magic "PARF") + <stem>.bin (f32 LE, [element][sample])
//   Image pair  <stem>.json (grid sidecar, magic "PAIM") + <stem>.bin (f32 LE, [z][x])
//   Display     <stem>.pgm, 8-bit P5, dB plane mapped [-DR, 0] -> [0, 255]
//   Profiles    CSV "x_m,value_db"
//   Metrics     CSV "method,snr_db,depth_m,fwhm_m,peak_sidelobe_db" or JSON

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "beamformers.hpp"
#include "errors.hpp"
#include "metrics.hpp"
#include "phantom.hpp"
#include "pipeline.hpp"

namespace pamv {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Paths

/// Strips a trailing .json/.bin/.pgm so either the stem or a member of the
/// pair can be passed on the command line.
inline fs::path file_stem(const fs::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".json" || ext == ".bin" || ext == ".pgm") {
    return p.parent_path() / p.stem();
  }
  return p;
}

inline fs::path with_suffix(const fs::path& stem, const std::string& suffix) {
  return fs::path(stem.string() + suffix);
}

// ---------------------------------------------------------------------------
// Raw f32 little-endian planes

inline void write_f32le(const fs::path& path, const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  std::vector<unsigned char> buf(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (int b = 0; b < 4; ++b) {
      buf[i * 4 + static_cast<std::size_t>(b)] = static_cast<unsigned char>((bits >> (8 * b)) & 0xffu);
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

inline std::vector<double> read_f32le(const fs::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<unsigned char> buf(count * 4);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw FormatError(path.string() + ": expected " + std::to_string(buf.size()) + " bytes");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path.string() + ": trailing bytes after " + std::to_string(count) + " samples");
  }
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(buf[i * 4 + static_cast<std::size_t>(b)]) << (8 * b);
    }
    v[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return v;
}

inline json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Checked JSON access with path-qualified errors

namespace detail {

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw ConfigError("missing field " + (path.empty() ? key : path + "." + key));
  }
  return *it;
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

inline std::int64_t as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer() && !(v.is_number() && std::floor(v.get<double>()) == v.get<double>())) {
    throw ConfigError(path + ": expected an integer");
  }
  return v.get<std::int64_t>();
}

inline std::size_t as_count(const json& v, const std::string& path) {
  const auto n = as_integer(v, path);
  if (n < 0) throw ConfigError(path + ": must be >= 0");
  return static_cast<std::size_t>(n);
}

inline double number_or(const json& obj, const std::string& key, const std::string& path, double fallback) {
  const auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? fallback : as_number(*it, path + "." + key);
}

inline void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& path) {
  for (const auto& [k, _] : obj.items()) {
    if (!known.contains(k)) {
      throw ConfigError("unknown field " + (path.empty() ? k : path + "." + k));
    }
  }
}

inline std::string path_join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

} // namespace detail

// ---------------------------------------------------------------------------
// RF files

inline void write_rf(const fs::path& stem_in, const RfFrame& frame) {
  const auto stem = file_stem(stem_in);
  const auto& g = frame.geometry;
  json h{{"magic", "PARF"},
         {"version", 1},
         {"n_elements", frame.n_elements()},
         {"n_samples", frame.n_samples},
         {"fs", g.sampling_rate},
         {"c", g.sound_speed},
         {"f0", g.center_frequency},
         {"fractional_bandwidth", g.fractional_bandwidth},
         {"pitch", g.pitch},
         {"element_x", g.element_x},
         {"encoding", "f32le"},
         {"layout", "element-major"}};
  h["channel_snr_db"] = frame.channel_snr_db ? json(*frame.channel_snr_db) : json(nullptr);
  if (!stem.parent_path().empty()) fs::create_directories(stem.parent_path());
  write_json_file(with_suffix(stem, ".json"), h);
  write_f32le(with_suffix(stem, ".bin"), frame.samples);
}

inline RfFrame read_rf(const fs::path& stem_in) {
  const auto stem = file_stem(stem_in);
  const auto h = read_json_file(with_suffix(stem, ".json"));
  try {
    if (h.value("magic", "") != "PARF") throw FormatError(stem.string() + ".json: magic is not PARF");
    if (h.value("version", 0) != 1) throw FormatError(stem.string() + ".json: unsupported version");
    if (h.value("encoding", "") != "f32le") throw FormatError(stem.string() + ".json: encoding must be f32le");
    ArrayGeometry g;
    g.sampling_rate = h.at("fs").get<double>();
    g.sound_speed = h.at("c").get<double>();
    g.center_frequency = h.at("f0").get<double>();
    g.fractional_bandwidth = h.at("fractional_bandwidth").get<double>();
    g.pitch = h.value("pitch", 0.0);
    g.element_x = h.at("element_x").get<std::vector<double>>();
    const auto m = h.at("n_elements").get<std::size_t>();
    if (g.element_x.size() != m) throw FormatError("element_x length does not match n_elements");
    g.validate();
    RfFrame f(g, h.at("n_samples").get<std::size_t>());
    f.samples = read_f32le(with_suffix(stem, ".bin"), m * f.n_samples);
    if (h.contains("channel_snr_db") && !h["channel_snr_db"].is_null()) {
      f.channel_snr_db = h["channel_snr_db"].get<double>();
    }
    return f;
  } catch (const json::exception& e) {
    throw FormatError(stem.string() + ".json: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Image files

inline json grid_to_json(const ImageGrid& g) {
  return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"z_min", g.z_min},
          {"z_max", g.z_max}, {"nx", g.nx},       {"nz", g.nz}};
}

inline ImageGrid grid_from_json(const json& j, const std::string& path) {
  using namespace detail;
  reject_unknown(j, {"x_min", "x_max", "z_min", "z_max", "nx", "nz"}, path);
  ImageGrid g;
  g.x_min = as_number(require(j, "x_min", path), path_join(path, "x_min"));
  g.x_max = as_number(require(j, "x_max", path), path_join(path, "x_max"));
  g.z_min = as_number(require(j, "z_min", path), path_join(path, "z_min"));
  g.z_max = as_number(require(j, "z_max", path), path_join(path, "z_max"));
  g.nx = as_count(require(j, "nx", path), path_join(path, "nx"));
  g.nz = as_count(require(j, "nz", path), path_join(path, "nz"));
  g.validate();
  return g;
}

/// 8-bit P5 of the dB plane; -DR maps to 0 and 0 dB to 255.
inline void write_pgm(const fs::path& path, const PaImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "P5\n" << img.grid.nx << ' ' << img.grid.nz << "\n255\n";
  std::vector<unsigned char> px(img.db.v.size());
  const double dr = img.dynamic_range_db;
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double t = std::clamp((img.db.v[i] + dr) / dr, 0.0, 1.0);
    px[i] = static_cast<unsigned char>(std::lround(t * 255.0));
  }
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

struct Pgm {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<unsigned char> pixels;
};

inline Pgm read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string magic;
  int maxval = 0;
  Pgm p;
  in >> magic >> p.width >> p.height >> maxval;
  if (magic != "P5" || maxval != 255) throw FormatError(path.string() + ": not an 8-bit P5 PGM");
  in.get();
  p.pixels.resize(p.width * p.height);
  in.read(reinterpret_cast<char*>(p.pixels.data()), static_cast<std::streamsize>(p.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(p.pixels.size())) throw FormatError(path.string() + ": truncated");
  return p;
}

/// Writes <stem>.bin (raw beamformed plane), <stem>.json and <stem>.pgm.
inline void write_image(const fs::path& stem_in, const PaImage& img) {
  const auto stem = file_stem(stem_in);
  json h{{"magic", "PAIM"},
         {"version", 1},
         {"grid", grid_to_json(img.grid)},
         {"method", std::string(to_string(img.method))},
         {"dynamic_range_db", img.dynamic_range_db},
         {"fallback_pixel_count", img.fallback_pixel_count},
         {"plane", "beamformed"},
         {"encoding", "f32le"},
         {"layout", "row-major, rows = depth (z), cols = lateral (x)"}};
  if (!stem.parent_path().empty()) fs::create_directories(stem.parent_path());
  write_json_file(with_suffix(stem, ".json"), h);
  write_f32le(with_suffix(stem, ".bin"), img.beamformed.v);
  write_pgm(with_suffix(stem, ".pgm"), img);
}

/// Reads the raw plane and recomputes envelope and dB planes.
inline PaImage read_image(const fs::path& stem_in) {
  const auto stem = file_stem(stem_in);
  const auto h = read_json_file(with_suffix(stem, ".json"));
  try {
    if (h.value("magic", "") != "PAIM") throw FormatError(stem.string() + ".json: magic is not PAIM");
    if (h.value("version", 0) != 1) throw FormatError(stem.string() + ".json: unsupported version");
    PaImage img;
    img.grid = grid_from_json(h.at("grid"), "grid");
    img.method = parse_method(h.at("method").get<std::string>());
    img.fallback_pixel_count = h.value("fallback_pixel_count", std::size_t{0});
    img.beamformed = Plane(img.grid.nz, img.grid.nx);
    img.beamformed.v = read_f32le(with_suffix(stem, ".bin"), img.grid.size());
    finalize_image(img, h.value("dynamic_range_db", 50.0));
    return img;
  } catch (const json::exception& e) {
    throw FormatError(stem.string() + ".json: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV / JSON reports

inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_num(*v) : std::string("nan"); }

inline void write_profile_csv(const fs::path& path, const std::vector<ProfilePoint>& profile) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "x_m,value_db\n";
  for (const auto& p : profile) {
    out << fmt_num(p.x) << ',' << fmt_num(p.value_db) << '\n';
  }
}

inline std::vector<ProfilePoint> read_profile_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "x_m,value_db") throw FormatError(path.string() + ": unexpected header");
  std::vector<ProfilePoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError(path.string() + ": malformed row");
    out.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return out;
}

/// Profile file name for a depth, e.g. "<stem>_profile_0.03m.csv".
inline fs::path profile_path(const fs::path& stem, double depth) {
  return with_suffix(file_stem(stem), "_profile_" + fmt_num(depth) + "m.csv");
}

/// One row per (method, target). With `with_status` a trailing status column
/// records why a metric is undefined.
inline void write_metrics_csv(const fs::path& path, const std::vector<MetricsReport>& reports,
                              bool with_status = false) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "method,snr_db,depth_m,fwhm_m,peak_sidelobe_db" << (with_status ? ",status" : "") << '\n';
  for (const auto& r : reports) {
    const std::string m(to_string(r.method));
    if (r.per_target.empty()) {
      out << m << ',' << fmt_opt(r.snr_db) << ",nan,nan,nan";
      if (with_status) out << ',' << r.snr_status;
      out << '\n';
    }
    for (const auto& t : r.per_target) {
      out << m << ',' << fmt_opt(r.snr_db) << ',' << fmt_num(t.depth) << ',' << fmt_opt(t.fwhm) << ','
          << fmt_opt(t.peak_sidelobe_db);
      if (with_status) {
        out << ',' << (r.snr_status != "ok" ? r.snr_status : t.status);
      }
      out << '\n';
    }
  }
}

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::optional<double> json_opt(const json& v) {
  return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
}

inline json metrics_to_json(const std::vector<MetricsReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) {
    json targets = json::array();
    for (const auto& t : r.per_target) {
      targets.push_back({{"depth_m", t.depth},
                         {"fwhm_m", opt_json(t.fwhm)},
                         {"peak_sidelobe_db", opt_json(t.peak_sidelobe_db)},
                         {"status", t.status}});
    }
    arr.push_back({{"method", std::string(to_string(r.method))},
                   {"snr_db", opt_json(r.snr_db)},
                   {"snr_status", r.snr_status},
                   {"per_target", targets}});
  }
  return {{"reports", arr}};
}

inline std::vector<MetricsReport> metrics_from_json(const json& j) {
  std::vector<MetricsReport> out;
  try {
    for (const auto& r : j.at("reports")) {
      MetricsReport rep;
      rep.method = parse_method(r.at("method").get<std::string>());
      rep.snr_db = json_opt(r.at("snr_db"));
      rep.snr_status = r.value("snr_status", "ok");
      for (const auto& t : r.at("per_target")) {
        TargetMetrics tm;
        tm.depth = t.at("depth_m").get<double>();
        tm.fwhm = json_opt(t.at("fwhm_m"));
        tm.peak_sidelobe_db = json_opt(t.at("peak_sidelobe_db"));
        tm.status = t.value("status", "ok");
        rep.per_target.push_back(tm);
      }
      out.push_back(std::move(rep));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("metrics JSON: ") + e.what());
  }
  return out;
}

inline TargetSpec targets_from_json(const json& j, const std::string& path = "") {
  using namespace detail;
  reject_unknown(j, {"targets", "depth_tolerance"}, path);
  TargetSpec spec;
  const auto& arr = require(j, "targets", path);
  if (!arr.is_array()) throw ConfigError(path_join(path, "targets") + ": expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path_join(path, "targets") + "[" + std::to_string(i) + "]";
    reject_unknown(arr[i], {"x", "z"}, p);
    spec.targets.push_back({as_number(require(arr[i], "x", p), p + ".x"), as_number(require(arr[i], "z", p), p + ".z")});
  }
  spec.depth_tolerance = number_or(j, "depth_tolerance", path, spec.depth_tolerance);
  if (!(spec.depth_tolerance > 0.0)) throw ConfigError(path_join(path, "depth_tolerance") + ": must be > 0");
  return spec;
}

inline json targets_to_json(const TargetSpec& spec) {
  json arr = json::array();
  for (const auto& t : spec.targets) arr.push_back({{"x", t.x}, {"z", t.z}});
  return {{"targets", arr}, {"depth_tolerance", spec.depth_tolerance}};
}

// ---------------------------------------------------------------------------
// Run configuration

struct NoiseConfig {
  double snr_db = 50.0;
  std::uint64_t seed = 1;
};

/// Complete description of a simulate/beamform/measure run. Defaults follow
/// the reference setup: 128 elements, 5 MHz, 77 % bandwidth, 1540 m/s,
/// L = M/2, K = 2, delta = 1/(100 L), beta = 1, 10 iterations, 50 dB display.
struct RunConfig {
  ArrayGeometry geometry = ArrayGeometry::linear(128, 3e-4);
  Phantom phantom;
  double record_depth = 0.07; // [m]; t_max = record_depth / c
  std::optional<ImageGrid> grid;
  std::vector<Method> methods{Method::DAS, Method::MV, Method::MSMV};
  ReconstructionParams recon;
  std::optional<NoiseConfig> noise;
  double dynamic_range_db = 50.0;
  std::vector<double> profile_depths;
  std::optional<TargetSpec> targets;

  [[nodiscard]] double t_max() const { return record_depth / geometry.sound_speed; }

  /// Lateral +-10 mm at lambda/2, depth 5 mm .. record depth at lambda/4.
  [[nodiscard]] ImageGrid resolved_grid() const {
    if (grid) return *grid;
    const double lam = geometry.wavelength();
    return ImageGrid::with_spacing(-10e-3, 10e-3, 5e-3, record_depth, lam / 2.0, lam / 4.0);
  }

  [[nodiscard]] TargetSpec resolved_targets() const {
    if (targets) return *targets;
    TargetSpec spec;
    for (const auto& a : phantom.absorbers) spec.targets.push_back(a.position);
    return spec;
  }
};

inline std::string to_string(PenaltyWindow w) { return w == PenaltyWindow::Full ? "full" : "centre"; }

inline PenaltyWindow parse_penalty_window(const std::string& s) {
  if (s == "full") return PenaltyWindow::Full;
  if (s == "center" || s == "centre") return PenaltyWindow::Centre;
  throw ConfigError("penalty window must be full|center, got '" + s + "'");
}

inline RunConfig config_from_json(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(j, {"geometry", "phantom", "record_depth", "grid", "beamformer", "noise", "dynamic_range_db",
                     "workers", "profile_depths", "targets"},
                 "");
  RunConfig cfg;

  if (j.contains("geometry")) {
    const auto& g = j["geometry"];
    const std::string p = "geometry";
    reject_unknown(g, {"n_elements", "pitch", "sound_speed", "sampling_rate", "center_frequency",
                       "fractional_bandwidth"},
                   p);
    const auto m = g.contains("n_elements") ? as_count(g["n_elements"], p + ".n_elements") : std::size_t{128};
    if (m < 1) throw ConfigError("geometry.n_elements: must be >= 1");
    try {
      cfg.geometry = ArrayGeometry::linear(m, number_or(g, "pitch", p, 3e-4), number_or(g, "sound_speed", p, 1540.0),
                                           number_or(g, "sampling_rate", p, 20e6),
                                           number_or(g, "center_frequency", p, 5e6),
                                           number_or(g, "fractional_bandwidth", p, 0.77));
    } catch (const Error& e) {
      throw ConfigError("geometry: " + std::string(e.what()));
    }
  }

  const auto& ph = require(j, "phantom", "");
  reject_unknown(ph, {"absorbers"}, "phantom");
  const auto& abs = require(ph, "absorbers", "phantom");
  if (!abs.is_array()) throw ConfigError("phantom.absorbers: expected an array");
  for (std::size_t i = 0; i < abs.size(); ++i) {
    const std::string p = "phantom.absorbers[" + std::to_string(i) + "]";
    reject_unknown(abs[i], {"x", "z", "radius", "amplitude"}, p);
    Absorber a;
    a.position.x = as_number(require(abs[i], "x", p), p + ".x");
    a.position.z = as_number(require(abs[i], "z", p), p + ".z");
    a.radius = number_or(abs[i], "radius", p, 1e-4);
    a.amplitude = number_or(abs[i], "amplitude", p, 1.0);
    cfg.phantom.absorbers.push_back(a);
  }
  try {
    cfg.phantom.validate();
  } catch (const Error& e) {
    throw ConfigError("phantom: " + std::string(e.what()));
  }

  cfg.record_depth = number_or(j, "record_depth", "", cfg.record_depth);
  if (!(cfg.record_depth > 0.0)) throw ConfigError("record_depth: must be > 0");
  if (j.contains("grid") && !j["grid"].is_null()) cfg.grid = grid_from_json(j["grid"], "grid");

  if (j.contains("beamformer")) {
    const auto& b = j["beamformer"];
    const std::string p = "beamformer";
    reject_unknown(b, {"methods", "L", "K", "dl", "beta", "n_iter", "early_stop", "early_stop_tol",
                       "epsilon_floor_rel", "penalty_window"},
                   p);
    if (b.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : b["methods"]) {
        if (!m.is_string()) throw ConfigError("beamformer.methods: expected strings");
        cfg.methods.push_back(parse_method(m.get<std::string>()));
      }
    }
    if (b.contains("L")) cfg.recon.subarray_len = as_count(b["L"], p + ".L");
    if (b.contains("K")) cfg.recon.half_window = as_count(b["K"], p + ".K");
    if (b.contains("dl") && !b["dl"].is_null()) cfg.recon.dl = as_number(b["dl"], p + ".dl");
    cfg.recon.msmv.beta = number_or(b, "beta", p, cfg.recon.msmv.beta);
    if (b.contains("n_iter")) cfg.recon.msmv.n_iter = static_cast<int>(as_integer(b["n_iter"], p + ".n_iter"));
    if (b.contains("early_stop")) {
      if (!b["early_stop"].is_boolean()) throw ConfigError(p + ".early_stop: expected a boolean");
      cfg.recon.msmv.early_stop = b["early_stop"].get<bool>();
    }
    cfg.recon.msmv.early_stop_tol = number_or(b, "early_stop_tol", p, cfg.recon.msmv.early_stop_tol);
    cfg.recon.msmv.epsilon_floor_rel = number_or(b, "epsilon_floor_rel", p, cfg.recon.msmv.epsilon_floor_rel);
    if (b.contains("penalty_window")) {
      if (!b["penalty_window"].is_string()) throw ConfigError(p + ".penalty_window: expected a string");
      cfg.recon.penalty_window = parse_penalty_window(b["penalty_window"].get<std::string>());
    }
    try {
      cfg.recon.msmv.validate();
    } catch (const Error& e) {
      throw ConfigError(p + ": " + e.what());
    }
    const auto l = cfg.recon.resolved_subarray_len(cfg.geometry.n_elements());
    if (l > cfg.geometry.n_elements()) throw ConfigError(p + ".L: exceeds n_elements");
  }

  if (j.contains("noise") && !j["noise"].is_null()) {
    const auto& n = j["noise"];
    reject_unknown(n, {"snr_db", "seed"}, "noise");
    NoiseConfig nc;
    nc.snr_db = as_number(require(n, "snr_db", "noise"), "noise.snr_db");
    if (n.contains("seed")) nc.seed = static_cast<std::uint64_t>(as_integer(n["seed"], "noise.seed"));
    cfg.noise = nc;
  }
  cfg.dynamic_range_db = number_or(j, "dynamic_range_db", "", cfg.dynamic_range_db);
  if (!(cfg.dynamic_range_db > 0.0)) throw ConfigError("dynamic_range_db: must be > 0");
  if (j.contains("workers")) cfg.recon.workers = static_cast<unsigned>(as_count(j["workers"], "workers"));
  if (j.contains("profile_depths")) {
    for (std::size_t i = 0; i < j["profile_depths"].size(); ++i) {
      cfg.profile_depths.push_back(as_number(j["profile_depths"][i], "profile_depths[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("targets") && !j["targets"].is_null()) cfg.targets = targets_from_json(j["targets"], "targets");
  return cfg;
}

/// Fully resolved config: every default is written out explicitly, so the
/// result reproduces the run without relying on built-in defaults.
inline json config_to_json(const RunConfig& cfg) {
  const auto m = cfg.geometry.n_elements();
  json absorbers = json::array();
  for (const auto& a : cfg.phantom.absorbers) {
    absorbers.push_back({{"x", a.position.x}, {"z", a.position.z}, {"radius", a.radius}, {"amplitude", a.amplitude}});
  }
  json methods = json::array();
  for (auto me : cfg.methods) methods.push_back(std::string(to_string(me)));
  json j{
      {"geometry",
       {{"n_elements", m},
        {"pitch", cfg.geometry.pitch},
        {"sound_speed", cfg.geometry.sound_speed},
        {"sampling_rate", cfg.geometry.sampling_rate},
        {"center_frequency", cfg.geometry.center_frequency},
        {"fractional_bandwidth", cfg.geometry.fractional_bandwidth}}},
      {"phantom", {{"absorbers", absorbers}}},
      {"record_depth", cfg.record_depth},
      {"grid", grid_to_json(cfg.resolved_grid())},
      {"beamformer",
       {{"methods", methods},
        {"L", cfg.recon.resolved_subarray_len(m)},
        {"K", cfg.recon.half_window},
        {"dl", cfg.recon.resolved_dl(m)},
        {"beta", cfg.recon.msmv.beta},
        {"n_iter", cfg.recon.msmv.n_iter},
        {"early_stop", cfg.recon.msmv.early_stop},
        {"early_stop_tol", cfg.recon.msmv.early_stop_tol},
        {"epsilon_floor_rel", cfg.recon.msmv.epsilon_floor_rel},
        {"penalty_window", to_string(cfg.recon.penalty_window)}}},
      {"dynamic_range_db", cfg.dynamic_range_db},
      {"workers", cfg.recon.workers},
      {"profile_depths", cfg.profile_depths},
      {"targets", targets_to_json(cfg.resolved_targets())}};
  j["noise"] = cfg.noise ? json{{"snr_db", cfg.noise->snr_db}, {"seed", cfg.noise->seed}} : json(nullptr);
  return j;
}

inline RunConfig load_config(const fs::path& path) { return config_from_json(read_json_file(path)); }

} // namespace pamv
