#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bundleray/centerline.hpp"
#include "bundleray/tensor.hpp"
#include "bundleray/volume.hpp"

namespace bundleray {

/// Orthonormal, right-handed frame of one centerline layer: tangent = u x v.
struct LayerFrame {
  Vec3 center;
  Vec3 tangent;
  Vec3 u;
  Vec3 v;
};

// Tangents are forward differences of consecutive centerline points (the last
// layer reuses the final difference). u starts as tangent x (least aligned
// world axis, ties resolved x, y, z) and is parallel-transported by
// projection onto each following normal plane, so ray j keeps its meaning
// from layer to layer. Throws Error on a kink that makes the projection
// vanish.
std::vector<LayerFrame> compute_frames(const Centerline& c);

// cos(2 pi j / k) u + sin(2 pi j / k) v
Vec3 ray_direction(const LayerFrame& frame, int j, int k);

struct RayCastParams {
  int n = 49;         // layers
  int k = 16;         // rays per layer
  int m = 20;         // samples per ray
  double d_mm = 0.5;  // sample spacing

  void validate() const;
};

struct BoundaryCriteria {
  double fa_min = 0.1;  // tuned on the default torus phantom at snr 20
  double theta_neighbor_deg = 30.0;  // vs. previous sample on the same ray
  double theta_center_deg = 60.0;    // vs. the layer center

  void validate() const;
};

enum class StopReason { FA, AngleNeighbor, AngleCenter, OutsideVolume, MaxLength };

const char* to_string(StopReason r);
std::optional<StopReason> stop_reason_from_string(const std::string& s);

// nullopt means the sample is inside the bundle. Criteria are checked in the
// order FA, AngleNeighbor, AngleCenter and the first failure is returned.
std::optional<StopReason> classify_sample(const EigenSystem& sample, const Vec3& prev_e1, const Vec3& center_e1,
                                          const BoundaryCriteria& crit);
std::optional<StopReason> classify_sample(const DiffusionTensor& sample, const Vec3& prev_e1, const Vec3& center_e1,
                                          const BoundaryCriteria& crit);

struct BoundaryEntry {
  int index = 0;  // last inside sample, 0..m
  Vec3 point = Vec3::Zero();
  StopReason reason = StopReason::MaxLength;
  bool corrected = false;
};

/// n x k boundary lattice, entries stored layer-major (i * k + j).
struct BoundaryGrid {
  RayCastParams params;
  BoundaryCriteria criteria;
  std::vector<LayerFrame> frames;
  std::vector<BoundaryEntry> entries;

  BoundaryEntry& at(int i, int j) { return entries[static_cast<std::size_t>(i * params.k + j)]; }
  const BoundaryEntry& at(int i, int j) const { return entries[static_cast<std::size_t>(i * params.k + j)]; }

  Vec3 point_for(int i, int j, int index) const;

  // Largest |index(i, j) - index(i + 1, j)| over all layers and rays.
  int max_adjacent_gap() const;
};

// Casts k rays of m samples from every layer center. The center is inside by
// definition; each ray keeps the last sample that passes classify_sample,
// comparing against the previous inside sample and the center e1. Requires
// c.size() == p.n and every center inside the volume (throws Error).
BoundaryGrid estimate_boundary(const TensorVolume& v, const Centerline& c, const RayCastParams& p,
                               const BoundaryCriteria& crit);

struct OutlierParams {
  int max_index_gap = 2;
  int max_passes = 10;

  void validate() const;
};

struct OutlierResult {
  BoundaryGrid grid;
  int passes = 0;
  bool converged = false;
  std::size_t corrected_entries = 0;
};

// One pass sweeps layers forward (1..n-1) then backward (n-2..0) and clamps
// each index to within max_index_gap of the layer just visited on the same
// ray. Passes repeat until nothing changes or max_passes is reached.
OutlierResult correct_outliers(const BoundaryGrid& grid, const OutlierParams& p);

}  // namespace bundleray
