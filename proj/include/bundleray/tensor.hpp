#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bundleray/core.hpp"

namespace bundleray {

/// Symmetric 3x3 diffusion tensor in mm^2/s, stored as its six unique
/// coefficients in the order (Dxx, Dxy, Dxz, Dyy, Dyz, Dzz).
struct DiffusionTensor {
  std::array<double, 6> c{};

  static DiffusionTensor from_matrix(const Eigen::Matrix3d& m);
  static DiffusionTensor isotropic(double d) { return {{d, 0.0, 0.0, d, 0.0, d}}; }

  Eigen::Matrix3d matrix() const;
  double trace() const { return c[0] + c[3] + c[5]; }
  bool is_finite() const;

  // g^T D g
  double quadratic_form(const Vec3& g) const;

  DiffusionTensor& operator+=(const DiffusionTensor& o) {
    for (std::size_t i = 0; i < 6; ++i) c[i] += o.c[i];
    return *this;
  }
  friend DiffusionTensor operator*(double s, DiffusionTensor t) {
    for (auto& x : t.c) x *= s;
    return t;
  }
  friend DiffusionTensor operator+(DiffusionTensor a, const DiffusionTensor& b) { return a += b; }
  bool operator==(const DiffusionTensor&) const = default;
};

/// Eigen decomposition of a diffusion tensor. Eigenvalues are sorted in
/// descending order and may be negative for noisy fits. Eigenvector signs are
/// arbitrary.
struct EigenSystem {
  std::array<double, 3> values{};
  std::array<Vec3, 3> vectors{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  double fa = 0.0;

  const Vec3& principal() const { return vectors[0]; }
};

// Cyclic Jacobi rotations run to machine precision, so the reconstruction
// sum(l_i e_i e_i^T) matches the input to ~1e-15 relative even for
// degenerate spectra. Throws Error on non-finite input.
EigenSystem eigensystem(const DiffusionTensor& d);

// sqrt(3/2) * |l - mean(l)| / |l|, clamped to [0, 1]. Returns 0 when all
// eigenvalues are zero.
double fractional_anisotropy(double l1, double l2, double l3);

Vec3 principal_direction(const DiffusionTensor& d);

// Acute angle in degrees between two directions, ignoring sign.
double acute_angle_deg(const Vec3& a, const Vec3& b);

/// Diffusion acquisition: one unweighted image plus one image per weighted
/// gradient direction, all at a single b-value.
struct AcquisitionSpec {
  double bvalue = 1000.0;      // s/mm^2
  std::vector<Vec3> gradients;  // weighted directions only, unit norm
  double s0 = 1000.0;          // nominal unweighted signal

  // (1,1,0), (1,-1,0), (1,0,1), (1,0,-1), (0,1,1), (0,1,-1), normalized.
  static AcquisitionSpec default_six(double bvalue = 1000.0, double s0 = 1000.0);

  // Throws ConfigError unless bvalue > 0, s0 > 0, every gradient is unit
  // length and the log-linear design matrix has full rank.
  void validate() const;
};

struct TensorFit {
  DiffusionTensor tensor;
  int clamped = 0;  // signals <= 0 replaced by 1e-6 * S0 before the log
};

/// Log-linear least-squares tensor estimation, ln(S_i/S0) = -b g_i^T D g_i.
/// The pseudo-inverse of the design matrix is computed once per acquisition.
class TensorFitter {
 public:
  explicit TensorFitter(const AcquisitionSpec& acq);

  // weighted: one signal per weighted gradient, in acquisition order.
  TensorFit fit(std::span<const double> weighted, double s0) const;

  std::size_t gradient_count() const { return static_cast<std::size_t>(solve_.cols()); }

 private:
  Eigen::Matrix<double, 6, Eigen::Dynamic> solve_;
};

TensorFit fit_tensor(std::span<const double> weighted, double s0, const AcquisitionSpec& acq);

// Stejskal-Tanner forward model: S_i = s0 * exp(-b g_i^T D g_i).
std::vector<double> simulate_signals(const DiffusionTensor& d, const AcquisitionSpec& acq);

}  // namespace bundleray
