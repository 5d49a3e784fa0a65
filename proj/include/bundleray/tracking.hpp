#pragma once

#include <vector>

#include "bundleray/centerline.hpp"
#include "bundleray/volume.hpp"

namespace bundleray {

struct Roi {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;  // mm, sphere

  bool contains(const Vec3& p) const { return (p - center).squaredNorm() <= radius * radius; }
  void validate() const;
};

// Points are step_mm apart. A seed that stops immediately yields a single
// point; such fibers never survive ROI filtering.
struct Fiber {
  std::vector<Vec3> points;
};

struct TrackParams {
  double step_mm = 0.5;
  double fa_stop = 0.15;
  double max_turn_deg = 45.0;
  int max_steps = 1000;  // per direction

  void validate() const;  // throws ConfigError
};

// Euler streamline along +/- e1 from the seed. Each step keeps the
// orientation closest to the previous step and terminates on leaving the
// volume, FA < fa_stop, a turn sharper than max_turn_deg, or max_steps.
// Throws Error if the seed is outside the volume.
Fiber track_streamline(const TensorVolume& v, const Vec3& seed, const TrackParams& p);

// Voxel centers inside the ROI whose tensor FA is >= fa_stop, in linear
// voxel order.
std::vector<Vec3> seeds_in_roi(const TensorVolume& v, const Roi& roi, double fa_stop);

// Tracks every seed; output order follows seed order.
std::vector<Fiber> track_seeds(const TensorVolume& v, const std::vector<Vec3>& seeds, const TrackParams& p);

// Keeps fibers visiting both ROIs, cut to the stretch from the first point in
// a to the first point in b and oriented a -> b.
std::vector<Fiber> filter_by_rois(const std::vector<Fiber>& fibers, const Roi& a, const Roi& b);

// Resamples each fiber to n points at equal arc-length fractions and
// averages the fibers pointwise. Throws Error when fibers is empty.
Centerline extract_centerline(const std::vector<Fiber>& fibers, int n);

}  // namespace bundleray
