#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bundleray/boundary.hpp"
#include "bundleray/config.hpp"
#include "bundleray/phantom.hpp"
#include "bundleray/surface.hpp"

namespace bundleray {

std::string build_identifier();

// 2|a & b| / (|a| + |b|); 1 when both masks are empty. Throws Error when the
// geometries differ.
double dice(const BinaryMask& a, const BinaryMask& b);

// Error raised by run_pipeline, tagged with the stage that failed.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct RunCounts {
  std::size_t clamped_signals = 0;
  std::size_t invalid_voxels = 0;
  std::size_t seeds = 0;
  std::size_t fibers_kept = 0;
  std::size_t rays_corrected = 0;
  std::size_t truth_voxels = 0;
  std::size_t estimate_voxels = 0;
};

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct RunReport {
  PipelineConfig config;
  std::string build;
  double dsc = 0.0;
  RunCounts counts;
  int outlier_passes = 0;
  bool outlier_converged = false;
  int max_gap_before = 0;
  int max_gap_after = 0;
  std::vector<StageTiming> timings;

  // Timings vary run to run, so they are left out unless asked for; the
  // remaining report is a pure function of the config.
  nlohmann::json to_json(bool include_timings = false) const;
};

// Intermediate results, filled when a pointer is passed to run_pipeline.
struct PipelineArtifacts {
  std::optional<Phantom> phantom;
  std::optional<TensorVolume> fitted;
  std::vector<Fiber> fibers;
  std::optional<Centerline> centerline;  // resampled to n layers
  std::optional<BoundaryGrid> raw_grid;
  std::optional<BoundaryGrid> grid;
  std::optional<SurfaceMesh> mesh;
  std::optional<BinaryMask> estimate;
};

// phantom -> DWI -> noise -> tensor fit -> centerline (analytic or tracked)
// -> resample to n -> boundary -> outlier correction -> mesh -> voxelize ->
// Dice against the ground truth. Intermediates are written to
// config.output_dir when keep_intermediates is set.
RunReport run_pipeline(const PipelineConfig& config, PipelineArtifacts* artifacts = nullptr);

struct SweepCell {
  int n = 0;
  int k = 0;
  double d_mm = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> dsc;
  std::string error;  // "<stage>" tag when the cell failed
  double runtime_ms = 0.0;
};

struct SweepMean {
  int n = 0;
  int k = 0;
  double d_mm = 0.0;
  std::optional<double> dsc;  // mean over successful seeds
  double runtime_ms = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // n-major, then k, d, seed
  std::vector<SweepMean> means;  // one per (n, k, d)
};

SweepResult run_sweep(const PipelineConfig& base);

// Header `n,k,d,seed,dsc,runtime_ms`, cell rows in order, then averaged rows
// with seed "mean". Failed cells carry "error:<stage>" in the dsc column.
std::string sweep_csv(const SweepResult& result);

}  // namespace bundleray
