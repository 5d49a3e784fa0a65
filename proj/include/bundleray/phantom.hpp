#pragma once

#include <array>
#include <cstdint>

#include "bundleray/centerline.hpp"
#include "bundleray/tensor.hpp"
#include "bundleray/volume.hpp"

namespace bundleray {

/// Torus-segment software phantom. The centerline circle has its center at
/// the world origin and lies in the z = 0 plane; the arc starts at angle 0
/// (positive x axis) and sweeps counterclockwise by arc_degrees.
struct PhantomSpec {
  double major_radius_mm = 30.0;
  double tube_radius_mm = 5.0;
  double arc_degrees = 90.0;
  std::array<double, 3> inside_eigenvalues{1.7e-3, 0.3e-3, 0.3e-3};
  double outside_diffusivity = 0.8e-3;
  GridGeometry grid = default_grid();
  AcquisitionSpec acq = AcquisitionSpec::default_six();
  double snr = 20.0;  // infinity disables noise
  std::uint64_t seed = 1;

  // 55 x 55 x 25 voxels of 1 mm with z = 0 on the middle slice; covers the
  // default 90 degree arc plus the longest default ray (10 mm) and a margin.
  static GridGeometry default_grid();

  void validate() const;  // throws ConfigError
};

// Analytic inside test shared by mask generation and its tests: the angular
// coordinate of p lies within the arc and p is within tube_radius of the
// centerline circle.
bool torus_contains(const PhantomSpec& spec, const Vec3& p);

// Unit tangent of the centerline circle at the angular coordinate of p.
Vec3 torus_tangent(const Vec3& p);

struct Phantom {
  TensorVolume tensors;
  BinaryMask truth;
  Centerline centerline;  // arc sampled every 1 mm, endpoint included
};

// Throws ConfigError if the parameters are invalid or the tube does not fit inside
// the hull of voxel centers.
Phantom generate_phantom(const PhantomSpec& spec);

Centerline analytic_centerline(const PhantomSpec& spec);

DWIVolume simulate_dwi(const TensorVolume& tensors, const AcquisitionSpec& acq);

// Rician magnitude noise: S -> |(S + n_re) + i n_im| with n ~ N(0, sigma^2)
// and sigma = acq.s0 / snr. Signals are visited in storage order (image
// major, x fastest), drawing the real part before the imaginary part.
DWIVolume add_complex_gaussian_noise(const DWIVolume& dwi, double snr, std::uint64_t seed);

struct DwiFit {
  TensorVolume tensors;
  std::size_t clamped_signals = 0;
  std::size_t invalid_voxels = 0;  // unweighted signal <= 0, tensor left at zero
};

DwiFit fit_dwi(const DWIVolume& dwi);

}  // namespace bundleray
