// pamv: simulate, beamform, measure and compare photoacoustic images.

#include <CLI11.hpp>

#include <pamv/pamv.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace pamv;

int report_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
  return 1;
}

ImageGrid parse_grid(const std::string& spec) {
  std::vector<double> v;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--grid: cannot parse '" + item + "' as a number");
    }
  }
  if (v.size() != 6) throw ConfigError("--grid expects xmin,xmax,zmin,zmax,nx,nz");
  if (v[4] < 1 || v[5] < 1 || v[4] != std::floor(v[4]) || v[5] != std::floor(v[5])) {
    throw ConfigError("--grid: nx and nz must be positive integers");
  }
  ImageGrid g{v[0], v[1], v[2], v[3], static_cast<std::size_t>(v[4]), static_cast<std::size_t>(v[5])};
  g.validate();
  return g;
}

// +-10 mm at lambda/2 laterally; 5 mm to the recorded depth (at most 70 mm)
// at lambda/4 axially.
ImageGrid default_grid(const RfFrame& frame) {
  const auto& g = frame.geometry;
  const double lam = g.wavelength();
  const double recorded = static_cast<double>(frame.n_samples) / g.sampling_rate * g.sound_speed;
  return ImageGrid::with_spacing(-10e-3, 10e-3, 5e-3, std::min(0.07, recorded), lam / 2.0, lam / 4.0);
}

TargetSpec load_targets(const std::string& path) {
  auto j = read_json_file(path);
  if (j.is_array()) j = json{{"targets", j}};
  return targets_from_json(j);
}

struct BeamformArgs {
  std::string rf;
  std::string method = "mv";
  std::string out;
  std::optional<double> beta;
  std::optional<int> iters;
  std::optional<std::size_t> l;
  std::optional<std::size_t> k;
  std::optional<double> dl;
  std::string grid;
  double dr = 50.0;
  std::vector<double> profile_depths;
  unsigned workers = 0;
  bool early_stop = false;
  std::string penalty_window = "full";
};

void cmd_simulate(const std::string& config, const std::string& out) {
  const auto cfg = load_config(config);
  std::vector<std::string> notes;
  const auto frame = simulate_from_config(cfg, &notes);
  write_rf(out, frame);
  for (const auto& n : notes) std::cerr << n << '\n';
  std::cout << "wrote " << file_stem(out).string() << ".{json,bin}: " << frame.n_elements() << " x "
            << frame.n_samples << " samples\n";
}

void cmd_beamform(const BeamformArgs& a) {
  const auto frame = read_rf(a.rf);
  const auto method = parse_method(a.method);
  ReconstructionParams p;
  if (a.l) p.subarray_len = *a.l;
  if (a.k) p.half_window = *a.k;
  p.dl = a.dl;
  if (a.beta) p.msmv.beta = *a.beta;
  if (a.iters) p.msmv.n_iter = *a.iters;
  p.msmv.early_stop = a.early_stop;
  p.penalty_window = parse_penalty_window(a.penalty_window);
  p.workers = a.workers;
  const auto grid = a.grid.empty() ? default_grid(frame) : parse_grid(a.grid);

  auto img = reconstruct(frame, grid, method, p);
  finalize_image(img, a.dr);
  write_image(a.out, img);
  for (double d : a.profile_depths) {
    write_profile_csv(profile_path(a.out, d), lateral_profile(img, d));
  }
  std::cout << "wrote " << file_stem(a.out).string() << ".{json,bin,pgm}: " << grid.nx << " x " << grid.nz
            << ", " << img.fallback_pixel_count << " fallback pixels\n";
}

void cmd_metrics(const std::string& image, const std::string& targets, const std::string& out) {
  const auto img = read_image(image);
  const auto spec = load_targets(targets);
  MetricsReport rep;
  rep.method = img.method;
  rep.snr_db = snr(img);
  for (const auto& t : spec.targets) {
    TargetMetrics tm;
    tm.depth = t.z;
    tm.fwhm = fwhm(img, t, spec.depth_tolerance);
    tm.peak_sidelobe_db = peak_sidelobe(img, t, 3.0 * *tm.fwhm, spec.depth_tolerance);
    rep.per_target.push_back(tm);
  }
  if (fs::path(out).extension() == ".json") {
    write_json_file(out, metrics_to_json({rep}));
  } else {
    write_metrics_csv(out, {rep});
  }
}

void cmd_compare(const std::string& config, const std::string& out, std::optional<unsigned> workers) {
  auto cfg = load_config(config);
  if (workers) cfg.recon.workers = *workers;
  const auto res = run_compare(cfg, out);
  std::printf("%-6s %10s %10s %12s %12s %10s\n", "method", "snr_db", "depth_mm", "fwhm_mm", "sidelobe_db", "time_s");
  for (const auto& r : res.runs) {
    const auto m = std::string(to_string(r.image.method));
    const auto snr_s = r.report.snr_db ? fmt_num(*r.report.snr_db) : r.report.snr_status;
    if (r.report.per_target.empty()) {
      std::printf("%-6s %10s %10s %12s %12s %10.2f\n", m.c_str(), snr_s.c_str(), "-", "-", "-", r.seconds);
    }
    for (const auto& t : r.report.per_target) {
      const auto f = t.fwhm ? fmt_num(*t.fwhm * 1e3) : t.status;
      const auto s = t.peak_sidelobe_db ? fmt_num(*t.peak_sidelobe_db) : t.status;
      std::printf("%-6s %10.10s %10.3f %12.12s %12.12s %10.2f\n", m.c_str(), snr_s.c_str(), t.depth * 1e3,
                  f.c_str(), s.c_str(), r.seconds);
    }
  }
  for (const auto& n : res.notes) std::cerr << "note: " << n << '\n';
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photoacoustic linear-array beamforming: DAS, MV and MS-MV"};
  app.require_subcommand(1);

  std::string sim_config;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "Simulate an RF frame from a run config");
  sim->add_option("--config", sim_config, "Run config JSON")->required();
  sim->add_option("--out", sim_out, "Output RF stem (writes .json and .bin)")->required();

  BeamformArgs bf;
  auto* bfc = app.add_subcommand("beamform", "Reconstruct an image from an RF file pair");
  bfc->add_option("--rf", bf.rf, "RF stem or .json/.bin path")->required();
  bfc->add_option("--method", bf.method, "das | mv | msmv")->required();
  bfc->add_option("--out", bf.out, "Output image stem")->required();
  bfc->add_option("--beta", bf.beta, "MS-MV sparsity weight");
  bfc->add_option("--iters", bf.iters, "MS-MV iteration count");
  bfc->add_option("--L", bf.l, "Subarray length (default M/2)");
  bfc->add_option("--K", bf.k, "Temporal half window");
  bfc->add_option("--dl", bf.dl, "Diagonal loading factor (default 1/(100 L))");
  bfc->add_option("--grid", bf.grid, "xmin,xmax,zmin,zmax,nx,nz in metres");
  bfc->add_option("--dr", bf.dr, "Display dynamic range [dB]");
  bfc->add_option("--profile-depth", bf.profile_depths, "Write a lateral profile CSV at this depth [m]");
  bfc->add_option("--workers", bf.workers, "Worker threads (0 = all cores)");
  bfc->add_flag("--early-stop", bf.early_stop, "Stop MS-MV when the weight step falls below 1e-6");
  bfc->add_option("--penalty-window", bf.penalty_window, "full | center: snapshots entering the MS-MV penalty");

  std::string mt_image;
  std::string mt_targets;
  std::string mt_out;
  auto* met = app.add_subcommand("metrics", "Measure SNR, FWHM and peak sidelobe of an image");
  met->add_option("--image", mt_image, "Image stem")->required();
  met->add_option("--targets", mt_targets, "Target JSON")->required();
  met->add_option("--out", mt_out, "Output .csv or .json")->required();

  std::string cmp_config;
  std::string cmp_out;
  std::optional<unsigned> cmp_workers;
  auto* cmp = app.add_subcommand("compare", "Simulate once and compare all configured methods");
  cmp->add_option("--config", cmp_config, "Run config JSON or run-manifest.json")->required();
  cmp->add_option("--out", cmp_out, "Output directory")->required();
  cmp->add_option("--workers", cmp_workers, "Worker threads, overrides the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("UsageError", e.what());
  }

  try {
    if (*sim) cmd_simulate(sim_config, sim_out);
    if (*bfc) cmd_beamform(bf);
    if (*met) cmd_metrics(mt_image, mt_targets, mt_out);
    if (*cmp) cmd_compare(cmp_config, cmp_out, cmp_workers);
  } catch (const Error& e) {
    return report_error(e.kind(), e.what());
  } catch (const std::exception& e) {
    return report_error("InternalError", e.what());
  }
  return 0;
}
