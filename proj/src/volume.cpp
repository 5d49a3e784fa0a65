#include "bundleray/volume.hpp"

#include <algorithm>
#include <cmath>

#include "bundleray/parallel.hpp"

namespace bundleray {

void GridGeometry::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] < 1) throw ConfigError("grid: dims must be >= 1");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) throw ConfigError("grid: spacing must be > 0");
    if (!std::isfinite(origin[a])) throw ConfigError("grid: origin must be finite");
  }
}

std::array<int, 3> GridGeometry::voxel_of(std::size_t linear) const {
  const auto nx = static_cast<std::size_t>(dims[0]);
  const auto ny = static_cast<std::size_t>(dims[1]);
  return {static_cast<int>(linear % nx), static_cast<int>((linear / nx) % ny),
          static_cast<int>(linear / (nx * ny))};
}

Vec3 GridGeometry::center_of(std::size_t linear) const {
  const auto ijk = voxel_of(linear);
  return voxel_to_world(Vec3(ijk[0], ijk[1], ijk[2]));
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

DiffusionTensor TensorVolume::at(std::size_t voxel) const {
  DiffusionTensor d;
  const float* p = data.data() + voxel * 6;
  for (std::size_t i = 0; i < 6; ++i) d.c[i] = p[i];
  return d;
}

void TensorVolume::set(std::size_t voxel, const DiffusionTensor& d) {
  float* p = data.data() + voxel * 6;
  for (std::size_t i = 0; i < 6; ++i) p[i] = static_cast<float>(d.c[i]);
}

std::optional<DiffusionTensor> sample_trilinear(const TensorVolume& v, const Vec3& p) {
  const GridGeometry& g = v.geometry;
  const Vec3 c = g.world_to_voxel(p);

  std::array<int, 3> lo{};
  std::array<double, 3> frac{};
  for (int a = 0; a < 3; ++a) {
    const double x = c[a];
    const double last = g.dims[a] - 1;
    if (!(x >= 0.0 && x <= last)) return std::nullopt;
    int i0 = static_cast<int>(std::floor(x));
    if (i0 >= g.dims[a] - 1) i0 = std::max(0, g.dims[a] - 2);
    lo[a] = i0;
    frac[a] = g.dims[a] == 1 ? 0.0 : x - i0;
  }

  DiffusionTensor out;
  for (int corner = 0; corner < 8; ++corner) {
    double w = 1.0;
    std::array<int, 3> idx{};
    for (int a = 0; a < 3; ++a) {
      const bool upper = (corner >> a) & 1;
      w *= upper ? frac[a] : 1.0 - frac[a];
      idx[a] = std::min(lo[a] + (upper ? 1 : 0), g.dims[a] - 1);
    }
    if (w == 0.0) continue;
    const float* t = v.data.data() + g.linear_index(idx[0], idx[1], idx[2]) * 6;
    for (std::size_t i = 0; i < 6; ++i) out.c[i] += w * t[i];
  }
  return out;
}

ScalarVolume fa_map(const TensorVolume& v) {
  ScalarVolume out(v.geometry);
  parallel_for(v.geometry.voxel_count(), [&](std::size_t i) {
    out.data[i] = static_cast<float>(eigensystem(v.at(i)).fa);
  });
  return out;
}

}  // namespace bundleray
