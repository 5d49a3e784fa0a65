#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "bundleray/core.hpp"
#include "bundleray/tensor.hpp"

namespace bundleray {

/// Regular voxel grid. Samples live at voxel centers: voxel index i sits at
/// world position origin + i * spacing (mm). Linear order is x-fastest.
struct GridGeometry {
  std::array<int, 3> dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};

  void validate() const;  // throws ConfigError

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }
  std::size_t linear_index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(k));
  }
  std::array<int, 3> voxel_of(std::size_t linear) const;

  Vec3 voxel_to_world(const Vec3& voxel) const { return origin + voxel.cwiseProduct(spacing); }
  Vec3 world_to_voxel(const Vec3& p) const { return (p - origin).cwiseQuotient(spacing); }
  Vec3 center_of(std::size_t linear) const;

  bool operator==(const GridGeometry& o) const {
    return dims == o.dims && spacing == o.spacing && origin == o.origin;
  }
};

inline Vec3 world_to_voxel(const Vec3& p, const GridGeometry& g) { return g.world_to_voxel(p); }
inline Vec3 voxel_to_world(const Vec3& v, const GridGeometry& g) { return g.voxel_to_world(v); }

struct ScalarVolume {
  GridGeometry geometry;
  std::vector<float> data;

  explicit ScalarVolume(const GridGeometry& g = {}) : geometry(g), data(g.voxel_count(), 0.0f) {}
};

// Voxel values are 0 or 1.
struct BinaryMask {
  GridGeometry geometry;
  std::vector<std::uint8_t> data;

  explicit BinaryMask(const GridGeometry& g = {}) : geometry(g), data(g.voxel_count(), 0) {}
  std::size_t count() const;
};

// Six float32 coefficients per voxel in (Dxx, Dxy, Dxz, Dyy, Dyz, Dzz) order.
struct TensorVolume {
  GridGeometry geometry;
  std::vector<float> data;

  explicit TensorVolume(const GridGeometry& g = {}) : geometry(g), data(g.voxel_count() * 6, 0.0f) {}

  DiffusionTensor at(std::size_t voxel) const;
  void set(std::size_t voxel, const DiffusionTensor& d);
};

// Signals stored gradient-major: image g occupies
// data[g * voxel_count, (g + 1) * voxel_count). Image 0 is unweighted.
struct DWIVolume {
  GridGeometry geometry;
  AcquisitionSpec acq;
  std::vector<float> data;

  DWIVolume(const GridGeometry& g, AcquisitionSpec a)
      : geometry(g), acq(std::move(a)), data(g.voxel_count() * image_count(), 0.0f) {}

  std::size_t image_count() const { return acq.gradients.size() + 1; }
  float& signal(std::size_t image, std::size_t voxel) { return data[image * geometry.voxel_count() + voxel]; }
  float signal(std::size_t image, std::size_t voxel) const {
    return data[image * geometry.voxel_count() + voxel];
  }
};

// Component-wise trilinear interpolation over the 8 voxel centers around p.
// Returns nullopt when p lies outside the hull of voxel centers, i.e. any
// continuous voxel coordinate is < 0 or > dims - 1. No clamping.
std::optional<DiffusionTensor> sample_trilinear(const TensorVolume& v, const Vec3& p);

ScalarVolume fa_map(const TensorVolume& v);

}  // namespace bundleray
