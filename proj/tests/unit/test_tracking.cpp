#include <gtest/gtest.h>

#include <cmath>

#include "bundleray/config.hpp"
#include "bundleray/phantom.hpp"
#include "bundleray/tracking.hpp"

using namespace bundleray;

namespace {

TensorVolume uniform_volume(const DiffusionTensor& d, int n = 21) {
  GridGeometry g;
  g.dims = {n, n, n};
  g.origin = Vec3(-10, -10, -10);
  TensorVolume v(g);
  for (std::size_t i = 0; i < g.voxel_count(); ++i) v.set(i, d);
  return v;
}

const DiffusionTensor kAlongX = DiffusionTensor::from_matrix(Eigen::Vector3d(1.7e-3, 0.3e-3, 0.3e-3).asDiagonal());

const TensorVolume& noise_free_fit() {
  static const TensorVolume v = [] {
    const Phantom ph = generate_phantom(PhantomSpec{});
    return fit_dwi(simulate_dwi(ph.tensors, AcquisitionSpec::default_six())).tensors;
  }();
  return v;
}

double distance_to_circle(const Vec3& p, double radius) { return std::hypot(std::hypot(p.x(), p.y()) - radius, p.z()); }

double distance_to_arc(const Vec3& p, double radius, double arc_rad) {
  const double phi = std::atan2(p.y(), p.x());
  if (phi >= 0.0 && phi <= arc_rad) return distance_to_circle(p, radius);
  const Vec3 a(radius, 0, 0), b(radius * std::cos(arc_rad), radius * std::sin(arc_rad), 0);
  return std::min((p - a).norm(), (p - b).norm());
}

Fiber line(const Vec3& from, const Vec3& to, int segments) {
  Fiber f;
  for (int s = 0; s <= segments; ++s) f.points.push_back(from + (to - from) * (static_cast<double>(s) / segments));
  return f;
}

}  // namespace

TEST(Track, UniformFieldGivesStraightLineToTheEdge) {
  const auto v = uniform_volume(kAlongX);
  const auto f = track_streamline(v, Vec3(0.2, 0.3, -0.1), TrackParams{});
  ASSERT_GE(f.points.size(), 2u);
  for (const auto& p : f.points) {
    EXPECT_NEAR(p.y(), 0.3, 1e-12);
    EXPECT_NEAR(p.z(), -0.1, 1e-12);
  }
  const double lo = std::min(f.points.front().x(), f.points.back().x());
  const double hi = std::max(f.points.front().x(), f.points.back().x());
  EXPECT_GT(lo, -10.0 - 1e-12);
  EXPECT_LT(lo, -10.0 + 0.5);
  EXPECT_LT(hi, 10.0 + 1e-12);
  EXPECT_GT(hi, 10.0 - 0.5);
}

TEST(Track, ConsecutivePointsAreOneStepApart) {
  const auto v = uniform_volume(kAlongX);
  TrackParams p;
  p.step_mm = 0.3;
  const auto f = track_streamline(v, Vec3(0, 0, 0), p);
  for (std::size_t i = 1; i < f.points.size(); ++i) EXPECT_NEAR((f.points[i] - f.points[i - 1]).norm(), 0.3, 1e-6);
}

TEST(Track, IsotropicSeedStopsImmediately) {
  const auto v = uniform_volume(DiffusionTensor::isotropic(1e-3));
  TrackParams p;
  p.fa_stop = 0.2;
  const auto f = track_streamline(v, Vec3(0, 0, 0), p);
  EXPECT_EQ(f.points.size(), 1u);
}

TEST(Track, SeedOutsideVolumeThrows) {
  const auto v = uniform_volume(kAlongX);
  EXPECT_THROW(track_streamline(v, Vec3(11, 0, 0), TrackParams{}), Error);
}

TEST(Track, MaxStepsBoundsEachHalf) {
  const auto v = uniform_volume(kAlongX);
  TrackParams p;
  p.max_steps = 3;
  EXPECT_EQ(track_streamline(v, Vec3(0, 0, 0), p).points.size(), 7u);
}

TEST(Track, InvalidParamsRejected) {
  TrackParams p;
  p.step_mm = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = TrackParams{};
  p.max_turn_deg = 91.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = TrackParams{};
  p.fa_stop = 1.5;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Track, TorusFiberStaysInsideTube) {
  const auto& v = noise_free_fit();
  const double a = kPi / 4.0;
  const auto f = track_streamline(v, Vec3(30 * std::cos(a), 30 * std::sin(a), 0), TrackParams{});
  ASSERT_GT(f.points.size(), 10u);
  std::size_t within = 0;
  for (const auto& p : f.points) within += distance_to_circle(p, 30.0) <= 5.0;
  EXPECT_GE(static_cast<double>(within), 0.8 * static_cast<double>(f.points.size()));
}

TEST(Track, DeterministicAndInsideVolume) {
  const auto& v = noise_free_fit();
  const PipelineConfig cfg;
  const auto seeds = seeds_in_roi(v, cfg.effective_roi_a(), cfg.tracking.fa_stop);
  ASSERT_FALSE(seeds.empty());
  const auto a = track_seeds(v, seeds, cfg.tracking);
  const auto b = track_seeds(v, seeds, cfg.tracking);
  ASSERT_EQ(a.size(), seeds.size());
  const auto& g = v.geometry;
  const Vec3 hi = g.voxel_to_world(Vec3(g.dims[0] - 1, g.dims[1] - 1, g.dims[2] - 1));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].points, b[i].points);
    for (const auto& p : a[i].points) {
      EXPECT_TRUE((p.array() >= g.origin.array()).all() && (p.array() <= hi.array()).all()) << p.transpose();
    }
  }
}

TEST(SeedsInRoi, OnlyAnisotropicVoxelCentersInsideSphere) {
  const auto v = uniform_volume(kAlongX);
  const auto seeds = seeds_in_roi(v, Roi{Vec3(0, 0, 0), 1.0}, 0.2);
  EXPECT_EQ(seeds.size(), 7u);
  EXPECT_TRUE(seeds_in_roi(uniform_volume(DiffusionTensor::isotropic(1e-3)), Roi{Vec3(0, 0, 0), 2.0}, 0.2).empty());
}

TEST(FilterByRois, FiberThroughBothIsKeptAndTruncated) {
  const Roi a{Vec3(-5, 0, 0), 1.0}, b{Vec3(5, 0, 0), 1.0};
  const auto kept = filter_by_rois({line(Vec3(-8, 0, 0), Vec3(8, 0, 0), 16)}, a, b);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].points.front(), Vec3(-6, 0, 0));
  EXPECT_EQ(kept[0].points.back(), Vec3(4, 0, 0));
}

TEST(FilterByRois, ReversedFiberIsReoriented) {
  const Roi a{Vec3(-5, 0, 0), 1.0}, b{Vec3(5, 0, 0), 1.0};
  const auto kept = filter_by_rois({line(Vec3(8, 0, 0), Vec3(-8, 0, 0), 16)}, a, b);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_TRUE(a.contains(kept[0].points.front()));
  EXPECT_TRUE(b.contains(kept[0].points.back()));
}

TEST(FilterByRois, MissingRoiBIsRemovedAndEmptyInputIsEmpty) {
  const Roi a{Vec3(-5, 0, 0), 1.0}, b{Vec3(5, 3, 0), 1.0};
  EXPECT_TRUE(filter_by_rois({line(Vec3(-8, 0, 0), Vec3(8, 0, 0), 16)}, a, b).empty());
  EXPECT_TRUE(filter_by_rois({}, a, b).empty());
}

TEST(ExtractCenterline, SingleStraightFiber) {
  const auto c = extract_centerline({line(Vec3(0, 0, 0), Vec3(4, 0, 0), 8)}, 3);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_LT((c.points[0] - Vec3(0, 0, 0)).norm(), 1e-12);
  EXPECT_LT((c.points[1] - Vec3(2, 0, 0)).norm(), 1e-12);
  EXPECT_LT((c.points[2] - Vec3(4, 0, 0)).norm(), 1e-12);
}

TEST(ExtractCenterline, ParallelFibersAverageToMidPlane) {
  const auto c = extract_centerline({line(Vec3(0, 1, 0), Vec3(10, 1, 0), 20), line(Vec3(0, -1, 0), Vec3(10, -1, 0), 13)}, 7);
  for (const auto& p : c.points) EXPECT_NEAR(p.y(), 0.0, 1e-9);
}

TEST(ExtractCenterline, EmptyBundleThrows) { EXPECT_THROW(extract_centerline({}, 5), Error); }

TEST(ExtractCenterline, TorusBundleFollowsAnalyticArc) {
  const auto& v = noise_free_fit();
  const PipelineConfig cfg;
  const auto a = cfg.effective_roi_a(), b = cfg.effective_roi_b();
  const auto kept = filter_by_rois(track_seeds(v, seeds_in_roi(v, a, cfg.tracking.fa_stop), cfg.tracking), a, b);
  ASSERT_FALSE(kept.empty());
  const auto c = extract_centerline(kept, 49);
  ASSERT_EQ(c.size(), 49u);
  double sum = 0.0;
  for (const auto& p : c.points) sum += distance_to_arc(p, 30.0, kPi / 2.0);
  EXPECT_LE(sum / 49.0, 1.0);

  double prev = 0.0;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    const double len = polyline_length(std::span(c.points.data(), i + 1));
    EXPECT_GT(len, prev);
    prev = len;
  }
}

TEST(Resample, EndpointsExactAndEqualSpacing) {
  const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 3, 0)};
  const auto r = resample_polyline(pts, 5);
  ASSERT_EQ(r.size(), 5u);
  EXPECT_EQ(r.front(), pts.front());
  EXPECT_EQ(r.back(), pts.back());
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_NEAR(polyline_length(std::span(r.data(), i + 1)), i * 1.0, 1e-12);
}
