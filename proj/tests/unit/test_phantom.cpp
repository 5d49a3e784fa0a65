#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "bundleray/phantom.hpp"

using namespace bundleray;

namespace {

const Phantom& default_phantom() {
  static const Phantom ph = generate_phantom(PhantomSpec{});
  return ph;
}

std::size_t voxel_at(const GridGeometry& g, const Vec3& p) {
  const Vec3 v = g.world_to_voxel(p);
  return g.linear_index(static_cast<int>(std::lround(v.x())), static_cast<int>(std::lround(v.y())),
                        static_cast<int>(std::lround(v.z())));
}

}  // namespace

TEST(Phantom, CenterlineVoxelIsInsideAndAlignedWithTangent) {
  const auto& ph = default_phantom();
  const Vec3 p(30, 0, 0);
  const std::size_t i = voxel_at(ph.truth.geometry, p);
  ASSERT_EQ(ph.truth.geometry.center_of(i), p);
  EXPECT_EQ(ph.truth.data[i], 1);
  const auto es = eigensystem(ph.tensors.at(i));
  EXPECT_GT(std::abs(es.principal().dot(torus_tangent(p))), std::cos(1e-6));
}

TEST(Phantom, ExteriorVoxelIsIsotropic) {
  const auto& ph = default_phantom();
  const std::size_t i = voxel_at(ph.truth.geometry, Vec3(36, 0, 0));
  EXPECT_EQ(ph.truth.data[i], 0);
  EXPECT_EQ(eigensystem(ph.tensors.at(i)).fa, 0.0);
}

TEST(Phantom, InteriorPrincipalDirectionFollowsTangent) {
  const auto& ph = default_phantom();
  const auto& g = ph.truth.geometry;
  for (std::size_t i = 0; i < g.voxel_count(); ++i) {
    if (!ph.truth.data[i]) continue;
    const Vec3 p = g.center_of(i);
    EXPECT_LE(acute_angle_deg(principal_direction(ph.tensors.at(i)), torus_tangent(p)), 5.0) << p.transpose();
  }
}

TEST(Phantom, MaskVolumeMatchesTorusSegment) {
  const auto& ph = default_phantom();
  const double analytic = 2.0 * kPi * 30.0 * kPi * 25.0 * 0.25;
  EXPECT_NEAR(analytic, 3701.1, 0.1);
  EXPECT_NEAR(static_cast<double>(ph.truth.count()), analytic, 0.05 * analytic);
  // Independent voxel-center count of the same inside rule, computed in numpy.
  EXPECT_EQ(ph.truth.count(), 3665u);
}

TEST(Phantom, MaskAgreesWithAnalyticInsideTest) {
  const auto& ph = default_phantom();
  const PhantomSpec spec;
  for (std::size_t i = 0; i < ph.truth.data.size(); ++i)
    EXPECT_EQ(ph.truth.data[i] == 1, torus_contains(spec, ph.truth.geometry.center_of(i)));
}

TEST(Phantom, AnalyticCenterlineSpansTheArc) {
  const auto& c = default_phantom().centerline;
  EXPECT_NO_THROW(c.validate());
  EXPECT_LT((c.points.front() - Vec3(30, 0, 0)).norm(), 1e-12);
  EXPECT_LT((c.points.back() - Vec3(0, 30, 0)).norm(), 1e-12);
  for (const auto& p : c.points) EXPECT_NEAR(std::hypot(p.x(), p.y()), 30.0, 1e-12);
  EXPECT_NEAR(polyline_length(c.points), 15.0 * kPi, 0.01);
}

TEST(Phantom, TubeOutsideGridRejected) {
  PhantomSpec spec;
  spec.grid.dims = {30, 30, 25};
  EXPECT_THROW(generate_phantom(spec), ConfigError);
  spec = PhantomSpec{};
  spec.tube_radius_mm = -1.0;
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Simulate, IsotropicVolumeGivesExpMinusOne) {
  GridGeometry g;
  g.dims = {2, 2, 2};
  TensorVolume t(g);
  for (std::size_t i = 0; i < 8; ++i) t.set(i, DiffusionTensor::isotropic(1e-3));
  const auto acq = AcquisitionSpec::default_six();
  const auto dwi = simulate_dwi(t, acq);
  for (std::size_t v = 0; v < 8; ++v) {
    EXPECT_EQ(dwi.signal(0, v), 1000.0f);
    for (std::size_t img = 1; img < dwi.image_count(); ++img)
      EXPECT_NEAR(dwi.signal(img, v), 1000.0 * std::exp(-1.0), 1e-4);
  }
}

TEST(Simulate, NoiseFreeFitRecoversPhantomTensors) {
  const auto& ph = default_phantom();
  const auto fit = fit_dwi(simulate_dwi(ph.tensors, AcquisitionSpec::default_six()));
  EXPECT_EQ(fit.clamped_signals, 0u);
  EXPECT_EQ(fit.invalid_voxels, 0u);
  for (std::size_t i = 0; i < ph.truth.data.size(); ++i) {
    const auto a = ph.tensors.at(i).matrix();
    const auto b = fit.tensors.at(i).matrix();
    EXPECT_LT((a - b).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(Noise, InfiniteSnrIsIdentity) {
  const auto dwi = simulate_dwi(default_phantom().tensors, AcquisitionSpec::default_six());
  EXPECT_EQ(add_complex_gaussian_noise(dwi, std::numeric_limits<double>::infinity(), 9).data, dwi.data);
}

TEST(Noise, SameSeedIsBitIdenticalDifferentSeedIsNot) {
  const auto dwi = simulate_dwi(default_phantom().tensors, AcquisitionSpec::default_six());
  const auto a = add_complex_gaussian_noise(dwi, 20.0, 3);
  const auto b = add_complex_gaussian_noise(dwi, 20.0, 3);
  const auto c = add_complex_gaussian_noise(dwi, 20.0, 4);
  EXPECT_EQ(a.data, b.data);
  EXPECT_NE(a.data, c.data);
}

TEST(Noise, RayleighMeanAtZeroSignal) {
  GridGeometry g;
  g.dims = {100, 50, 3};
  DWIVolume zero(g, AcquisitionSpec::default_six());
  ASSERT_GE(zero.data.size(), 100000u);
  const double snr = 10.0;
  const double sigma = zero.acq.s0 / snr;
  const auto noisy = add_complex_gaussian_noise(zero, snr, 77);
  double sum = 0.0;
  for (float s : noisy.data) {
    EXPECT_GE(s, 0.0f);
    sum += s;
  }
  const double mean = sum / static_cast<double>(noisy.data.size());
  EXPECT_NEAR(mean, sigma * std::sqrt(kPi / 2.0), 0.02 * sigma * std::sqrt(kPi / 2.0));
}

TEST(FitDwi, NonPositiveUnweightedSignalMarksVoxelInvalid) {
  GridGeometry g;
  g.dims = {2, 1, 1};
  DWIVolume dwi(g, AcquisitionSpec::default_six());
  for (std::size_t img = 0; img < dwi.image_count(); ++img) {
    dwi.signal(img, 0) = 500.0f;
    dwi.signal(img, 1) = 0.0f;
  }
  dwi.signal(0, 0) = 1000.0f;
  const auto fit = fit_dwi(dwi);
  EXPECT_EQ(fit.invalid_voxels, 1u);
  EXPECT_EQ(fit.tensors.at(1), DiffusionTensor{});
  EXPECT_NEAR(fit.tensors.at(0).trace(), 3.0 * std::log(2.0) / 1000.0, 1e-7);
}
