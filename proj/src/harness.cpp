#include "bundleray/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "bundleray/parallel.hpp"
#include "bundleray/serialize.hpp"
#include "bundleray/tracking.hpp"
#include "bundleray/volume_io.hpp"

#ifndef BUNDLERAY_VERSION
#define BUNDLERAY_VERSION "unknown"
#endif

namespace bundleray {

using nlohmann::json;

std::string build_identifier() { return std::string("bundleray ") + BUNDLERAY_VERSION; }

double dice(const BinaryMask& a, const BinaryMask& b) {
  if (!(a.geometry == b.geometry)) throw Error("dice: mask geometries differ");
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    na += a.data[i];
    nb += b.data[i];
    both += a.data[i] & b.data[i];
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

json RunReport::to_json(bool include_timings) const {
  json j;
  j["build"] = build;
  j["seed"] = config.seed;
  j["config"] = bundleray::to_json(config);
  j["dsc"] = dsc;
  j["counts"] = {{"clamped_signals", counts.clamped_signals}, {"invalid_voxels", counts.invalid_voxels},
                 {"seeds", counts.seeds},
                 {"fibers_kept", counts.fibers_kept},
                 {"rays_corrected", counts.rays_corrected},
                 {"truth_voxels", counts.truth_voxels},
                 {"estimate_voxels", counts.estimate_voxels}};
  j["outlier"] = {{"passes", outlier_passes},
                  {"converged", outlier_converged},
                  {"max_gap_before", max_gap_before},
                  {"max_gap_after", max_gap_after}};
  if (include_timings) {
    json t = json::object();
    for (const auto& s : timings) t[s.stage] = t.value(s.stage, 0.0) + s.ms;
    j["timings_ms"] = t;
  }
  return j;
}

namespace {

class StageRunner {
 public:
  explicit StageRunner(RunReport& report) : report_(report) {}

  template <class F>
  auto operator()(const char* stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        record(stage, start);
      } else {
        auto result = f();
        record(stage, start);
        return result;
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }

 private:
  void record(const char* stage, std::chrono::steady_clock::time_point start) {
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report_.timings.push_back({stage, ms});
  }

  RunReport& report_;
};

}  // namespace

RunReport run_pipeline(const PipelineConfig& config, PipelineArtifacts* artifacts) {
  RunReport report;
  report.config = config;
  report.build = build_identifier();
  StageRunner stage(report);

  stage("config", [&] { config.validate(); });
  namespace fs = std::filesystem;
  const fs::path out_dir = config.output_dir;
  const bool keep = config.keep_intermediates;
  if (keep) stage("config", [&] { fs::create_directories(out_dir); });

  Phantom phantom = stage("phantom", [&] { return generate_phantom(config.phantom); });
  report.counts.truth_voxels = phantom.truth.count();
  if (keep) {
    stage("write", [&] {
      save_volume(phantom.tensors, out_dir / "phantom_tensors.vol");
      save_volume(phantom.truth, out_dir / "truth.mask");
      write_json_file(out_dir / "analytic_centerline.json", to_json(phantom.centerline));
    });
  }

  DWIVolume dwi = stage("simulate", [&] { return simulate_dwi(phantom.tensors, config.phantom.acq); });
  if (std::isfinite(config.phantom.snr)) {
    dwi = stage("noise", [&] { return add_complex_gaussian_noise(dwi, config.phantom.snr, config.noise_seed()); });
  }
  if (keep) stage("write", [&] { save_volume(dwi, out_dir / "dwi.vol"); });

  DwiFit fit = stage("fit", [&] { return fit_dwi(dwi); });
  report.counts.clamped_signals = fit.clamped_signals;
  report.counts.invalid_voxels = fit.invalid_voxels;
  if (keep) stage("write", [&] { save_volume(fit.tensors, out_dir / "tensors.vol"); });

  const int n = config.raycast.n;
  Centerline centerline;
  std::vector<Fiber> kept;
  if (config.use_analytic_centerline) {
    centerline = stage("centerline", [&] { return resample_centerline(phantom.centerline, n); });
  } else {
    const Roi a = config.effective_roi_a();
    const Roi b = config.effective_roi_b();
    kept = stage("track", [&] {
      const auto seeds = seeds_in_roi(fit.tensors, a, config.tracking.fa_stop);
      report.counts.seeds = seeds.size();
      return filter_by_rois(track_seeds(fit.tensors, seeds, config.tracking), a, b);
    });
    report.counts.fibers_kept = kept.size();
    if (keep) stage("write", [&] { write_json_file(out_dir / "fibers.json", to_json(kept)); });
    centerline = stage("centerline", [&] { return extract_centerline(kept, n); });
  }
  if (keep) stage("write", [&] { write_json_file(out_dir / "centerline.json", to_json(centerline)); });

  BoundaryGrid raw = stage("boundary", [&] {
    return estimate_boundary(fit.tensors, centerline, config.raycast, config.criteria);
  });
  report.max_gap_before = raw.max_adjacent_gap();

  OutlierResult corrected = stage("outliers", [&] { return correct_outliers(raw, config.outlier); });
  report.outlier_passes = corrected.passes;
  report.outlier_converged = corrected.converged;
  report.max_gap_after = corrected.grid.max_adjacent_gap();
  report.counts.rays_corrected = corrected.corrected_entries;
  if (keep) stage("write", [&] { write_json_file(out_dir / "boundary.json", to_json(corrected.grid)); });

  SurfaceMesh mesh = stage("mesh", [&] { return round_to_float32(triangulate(corrected.grid, centerline)); });
  if (keep) stage("write", [&] { export_ply(mesh, out_dir / "surface.ply"); });

  BinaryMask estimate = stage("voxelize", [&] { return voxelize(mesh, config.phantom.grid); });
  report.counts.estimate_voxels = estimate.count();
  if (keep) stage("write", [&] { save_volume(estimate, out_dir / "estimate.mask"); });

  report.dsc = stage("dice", [&] { return dice(estimate, phantom.truth); });
  if (keep) stage("write", [&] { write_json_file(out_dir / "report.json", report.to_json()); });

  if (artifacts) {
    artifacts->phantom = std::move(phantom);
    artifacts->fitted = std::move(fit.tensors);
    artifacts->fibers = std::move(kept);
    artifacts->centerline = std::move(centerline);
    artifacts->raw_grid = std::move(raw);
    artifacts->grid = std::move(corrected.grid);
    artifacts->mesh = std::move(mesh);
    artifacts->estimate = std::move(estimate);
  }
  return report;
}

SweepResult run_sweep(const PipelineConfig& base) {
  base.sweep.validate();
  SweepResult result;
  for (int n : base.sweep.n)
    for (int k : base.sweep.k)
      for (double d : base.sweep.d_mm)
        for (auto seed : base.sweep.seeds) result.cells.push_back({n, k, d, seed, std::nullopt, {}, 0.0});

  parallel_for(result.cells.size(), [&](std::size_t i) {
    SweepCell& cell = result.cells[i];
    PipelineConfig cfg = base;
    cfg.seed = cell.seed;
    cfg.phantom.seed = cell.seed;
    cfg.raycast.n = cell.n;
    cfg.raycast.k = cell.k;
    cfg.raycast.d_mm = cell.d_mm;
    cfg.keep_intermediates = false;
    const auto start = std::chrono::steady_clock::now();
    try {
      cell.dsc = run_pipeline(cfg).dsc;
    } catch (const StageError& e) {
      cell.error = e.stage();
    } catch (const std::exception&) {
      cell.error = "unknown";
    }
    cell.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  });

  const std::size_t per_group = base.sweep.seeds.size();
  for (std::size_t g = 0; g < result.cells.size(); g += per_group) {
    SweepMean mean{result.cells[g].n, result.cells[g].k, result.cells[g].d_mm, std::nullopt, 0.0};
    double sum = 0.0;
    int ok = 0;
    for (std::size_t s = 0; s < per_group; ++s) {
      const SweepCell& c = result.cells[g + s];
      mean.runtime_ms += c.runtime_ms / static_cast<double>(per_group);
      if (c.dsc) {
        sum += *c.dsc;
        ++ok;
      }
    }
    if (ok > 0) mean.dsc = sum / ok;
    result.means.push_back(mean);
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "n,k,d,seed,dsc,runtime_ms\n";
  char buf[256];
  auto dsc_field = [](const std::optional<double>& dsc, const std::string& error) {
    if (dsc) {
      char b[32];
      std::snprintf(b, sizeof b, "%.6f", *dsc);
      return std::string(b);
    }
    return "error:" + (error.empty() ? std::string("all-seeds-failed") : error);
  };
  for (const auto& c : result.cells) {
    std::snprintf(buf, sizeof buf, "%d,%d,%g,%llu,%s,%.1f\n", c.n, c.k, c.d_mm, static_cast<unsigned long long>(c.seed),
                  dsc_field(c.dsc, c.error).c_str(), c.runtime_ms);
    out << buf;
  }
  for (const auto& m : result.means) {
    std::snprintf(buf, sizeof buf, "%d,%d,%g,mean,%s,%.1f\n", m.n, m.k, m.d_mm, dsc_field(m.dsc, "").c_str(),
                  m.runtime_ms);
    out << buf;
  }
  return out.str();
}

}  // namespace bundleray
