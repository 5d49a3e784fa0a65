#include "bundleray/phantom.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "bundleray/parallel.hpp"

namespace bundleray {

GridGeometry PhantomSpec::default_grid() {
  GridGeometry g;
  g.dims = {55, 55, 25};
  g.spacing = Vec3(1.0, 1.0, 1.0);
  g.origin = Vec3(-12.0, -12.0, -12.0);
  return g;
}

void PhantomSpec::validate() const {
  if (!(tube_radius_mm > 0.0)) throw ConfigError("phantom: tube_radius_mm must be > 0");
  if (!(major_radius_mm > tube_radius_mm)) throw ConfigError("phantom: major_radius_mm must exceed tube_radius_mm");
  if (!(arc_degrees > 0.0 && arc_degrees <= 360.0)) throw ConfigError("phantom: arc_degrees must be in (0, 360]");
  if (!(snr > 0.0)) throw ConfigError("phantom: snr must be > 0");
  if (!(outside_diffusivity >= 0.0)) throw ConfigError("phantom: outside_diffusivity must be >= 0");
  for (double l : inside_eigenvalues)
    if (!std::isfinite(l)) throw ConfigError("phantom: inside_eigenvalues must be finite");
  grid.validate();
  acq.validate();
}

namespace {

double angular_coordinate(const Vec3& p) {
  double phi = std::atan2(p.y(), p.x());
  if (phi < 0.0) phi += 2.0 * kPi;
  return phi;
}

void check_fits(const PhantomSpec& spec) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  constexpr int kSteps = 3600;
  const double arc = deg_to_rad(spec.arc_degrees);
  for (int s = 0; s <= kSteps; ++s) {
    const double phi = arc * s / kSteps;
    const Vec3 c(spec.major_radius_mm * std::cos(phi), spec.major_radius_mm * std::sin(phi), 0.0);
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  lo -= Vec3::Constant(spec.tube_radius_mm);
  hi += Vec3::Constant(spec.tube_radius_mm);
  const Vec3 first = spec.grid.origin;
  const Vec3 last = spec.grid.voxel_to_world(
      Vec3(spec.grid.dims[0] - 1, spec.grid.dims[1] - 1, spec.grid.dims[2] - 1));
  for (int a = 0; a < 3; ++a) {
    if (lo[a] < first[a] || hi[a] > last[a])
      throw ConfigError("phantom: tube does not fit inside the grid");
  }
}

DiffusionTensor inside_tensor(const PhantomSpec& spec, const Vec3& p) {
  const double phi = angular_coordinate(p);
  Eigen::Matrix3d r;
  r.col(0) = Vec3(-std::sin(phi), std::cos(phi), 0.0);
  r.col(1) = Vec3(std::cos(phi), std::sin(phi), 0.0);
  r.col(2) = Vec3::UnitZ();
  const Eigen::Vector3d l(spec.inside_eigenvalues[0], spec.inside_eigenvalues[1], spec.inside_eigenvalues[2]);
  return DiffusionTensor::from_matrix(r * l.asDiagonal() * r.transpose());
}

}  // namespace

bool torus_contains(const PhantomSpec& spec, const Vec3& p) {
  const double phi = angular_coordinate(p);
  if (phi > deg_to_rad(spec.arc_degrees)) return false;
  const double rho = std::hypot(p.x(), p.y());
  return std::hypot(rho - spec.major_radius_mm, p.z()) <= spec.tube_radius_mm;
}

Vec3 torus_tangent(const Vec3& p) {
  const double phi = angular_coordinate(p);
  return {-std::sin(phi), std::cos(phi), 0.0};
}

Centerline analytic_centerline(const PhantomSpec& spec) {
  const double arc = deg_to_rad(spec.arc_degrees);
  const double length = spec.major_radius_mm * arc;
  Centerline c;
  const auto whole = static_cast<int>(std::floor(length));
  for (int s = 0; s <= whole; ++s) {
    const double phi = s / spec.major_radius_mm;
    c.points.emplace_back(spec.major_radius_mm * std::cos(phi), spec.major_radius_mm * std::sin(phi), 0.0);
  }
  if (length - whole > 1e-9)
    c.points.emplace_back(spec.major_radius_mm * std::cos(arc), spec.major_radius_mm * std::sin(arc), 0.0);
  return c;
}

Phantom generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  check_fits(spec);

  Phantom ph{TensorVolume(spec.grid), BinaryMask(spec.grid), analytic_centerline(spec)};
  const DiffusionTensor outside = DiffusionTensor::isotropic(spec.outside_diffusivity);
  parallel_for(spec.grid.voxel_count(), [&](std::size_t i) {
    const Vec3 q = spec.grid.center_of(i);
    if (torus_contains(spec, q)) {
      ph.truth.data[i] = 1;
      ph.tensors.set(i, inside_tensor(spec, q));
    } else {
      ph.tensors.set(i, outside);
    }
  });
  return ph;
}

DWIVolume simulate_dwi(const TensorVolume& tensors, const AcquisitionSpec& acq) {
  acq.validate();
  DWIVolume out(tensors.geometry, acq);
  const float s0 = static_cast<float>(acq.s0);
  parallel_for(tensors.geometry.voxel_count(), [&](std::size_t v) {
    out.signal(0, v) = s0;
    const auto signals = simulate_signals(tensors.at(v), acq);
    for (std::size_t g = 0; g < signals.size(); ++g) out.signal(g + 1, v) = static_cast<float>(signals[g]);
  });
  return out;
}

DWIVolume add_complex_gaussian_noise(const DWIVolume& dwi, double snr, std::uint64_t seed) {
  if (!(snr > 0.0)) throw ConfigError("noise: snr must be > 0");
  DWIVolume out = dwi;
  const double sigma = dwi.acq.s0 / snr;
  if (!(sigma > 0.0)) return out;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (auto& s : out.data) {
    const double re = s + normal(rng);
    const double im = normal(rng);
    s = static_cast<float>(std::hypot(re, im));
  }
  return out;
}

DwiFit fit_dwi(const DWIVolume& dwi) {
  const TensorFitter fitter(dwi.acq);
  const std::size_t voxels = dwi.geometry.voxel_count();
  const std::size_t weighted = dwi.acq.gradients.size();

  DwiFit out{TensorVolume(dwi.geometry)};
  std::vector<int> clamped(voxels, 0);
  std::vector<std::uint8_t> invalid(voxels, 0);
  parallel_for(voxels, [&](std::size_t v) {
    const double s0 = dwi.signal(0, v);
    if (!(s0 > 0.0)) {
      invalid[v] = 1;
      return;
    }
    std::vector<double> signals(weighted);
    for (std::size_t g = 0; g < weighted; ++g) signals[g] = dwi.signal(g + 1, v);
    const TensorFit fit = fitter.fit(signals, s0);
    out.tensors.set(v, fit.tensor);
    clamped[v] = fit.clamped;
  });
  for (std::size_t v = 0; v < voxels; ++v) {
    out.clamped_signals += static_cast<std::size_t>(clamped[v]);
    out.invalid_voxels += invalid[v];
  }
  return out;
}

}  // namespace bundleray
