#pragma once

#include <span>
#include <vector>

#include "bundleray/core.hpp"

namespace bundleray {

/// Ordered world-space polyline through the middle of a bundle. Each point
/// becomes one layer of the ray fan.
struct Centerline {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }

  // Throws Error unless there are >= 2 points and consecutive points are
  // more than 1e-9 mm apart.
  void validate() const;
};

double polyline_length(std::span<const Vec3> points);

// n points at equal arc-length fractions along the polyline; the first and
// last input points are reproduced exactly.
std::vector<Vec3> resample_polyline(std::span<const Vec3> points, int n);

Centerline resample_centerline(const Centerline& c, int n);

}  // namespace bundleray
