#pragma once

// End-to-end runs: simulate -> reconstruct -> measure, with every artifact
// written under one output directory.

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "io.hpp"
#include "metrics.hpp"
#include "phantom.hpp"
#include "pipeline.hpp"

namespace pamv {

/// Simulated frame for a config, with channel noise when configured. A frame
/// without signal is returned noise-free (there is no power to scale by).
inline RfFrame simulate_from_config(const RunConfig& cfg, std::vector<std::string>* notes = nullptr) {
  auto frame = simulate_rf(cfg.geometry, cfg.phantom, cfg.t_max());
  if (cfg.noise) {
    try {
      frame = add_channel_noise(frame, cfg.noise->snr_db, cfg.noise->seed);
    } catch (const ZeroSignal& e) {
      if (notes != nullptr) notes->push_back(std::string("noise skipped: ") + e.what());
    }
  }
  return frame;
}

struct MethodRun {
  PaImage image;
  MetricsReport report;
  double seconds = 0.0;
};

struct CompareResult {
  std::vector<MethodRun> runs;
  std::vector<std::string> notes;
};

/// Runs every configured method on one simulated frame and writes
///   rf.{json,bin}, <method>.{json,bin,pgm}, <method>_profile_<d>m.csv,
///   metrics.csv, metrics.json, run-manifest.json
/// into `out_dir`. Beamforming reads the RF back from disk, so the images are
/// formed from exactly the f32 data that a later `beamform` run would see.
inline CompareResult run_compare(const RunConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  CompareResult res;
  write_json_file(out_dir / "run-manifest.json", config_to_json(cfg));

  write_rf(out_dir / "rf", simulate_from_config(cfg, &res.notes));
  const auto frame = read_rf(out_dir / "rf");

  const auto grid = cfg.resolved_grid();
  const auto targets = cfg.resolved_targets();
  std::vector<MetricsReport> reports;
  for (auto method : cfg.methods) {
    MethodRun run;
    const auto t0 = std::chrono::steady_clock::now();
    run.image = reconstruct(frame, grid, method, cfg.recon);
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    finalize_image(run.image, cfg.dynamic_range_db);

    const auto stem = out_dir / std::string(to_string(method));
    write_image(stem, run.image);
    for (double d : cfg.profile_depths) {
      write_profile_csv(profile_path(stem, d), lateral_profile(run.image, d));
    }
    run.report = evaluate(run.image, targets);
    if (run.report.snr_status != "ok") {
      res.notes.push_back(std::string(to_string(method)) + ": " + run.report.snr_status);
    }
    reports.push_back(run.report);
    res.runs.push_back(std::move(run));
  }

  write_metrics_csv(out_dir / "metrics.csv", reports, true);
  auto mj = metrics_to_json(reports);
  mj["notes"] = res.notes;
  json timing = json::object();
  for (const auto& r : res.runs) {
    timing[std::string(to_string(r.image.method))] = {{"seconds", r.seconds},
                                                       {"fallback_pixel_count", r.image.fallback_pixel_count}};
  }
  mj["timing"] = timing;
  write_json_file(out_dir / "metrics.json", mj);
  return res;
}

} // namespace pamv
