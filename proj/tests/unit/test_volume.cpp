#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include <json.hpp>

#include "bundleray/volume.hpp"
#include "bundleray/volume_io.hpp"
#include "test_util.hpp"

using namespace bundleray;
using bundleray::testing::TempDir;

namespace {

GridGeometry grid(int nx, int ny, int nz, Vec3 spacing = {1, 1, 1}, Vec3 origin = {0, 0, 0}) {
  GridGeometry g;
  g.dims = {nx, ny, nz};
  g.spacing = spacing;
  g.origin = origin;
  return g;
}

void expect_io_error(VolumeErrorKind kind, const std::function<void()>& f) {
  try {
    f();
    FAIL() << "expected " << to_string(kind);
  } catch (const VolumeIoError& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

}  // namespace

TEST(Geometry, WorldToVoxelIdentitySpacing) {
  EXPECT_EQ(world_to_voxel(Vec3(3, 4, 5), grid(8, 8, 8)), Vec3(3, 4, 5));
}

TEST(Geometry, OriginMapsToIndexZero) {
  EXPECT_EQ(world_to_voxel(Vec3(10, 0, 0), grid(4, 4, 4, {2, 2, 2}, {10, 0, 0})), Vec3(0, 0, 0));
}

TEST(Geometry, VoxelWorldRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  const auto g = grid(10, 20, 30, {0.7, 1.3, 2.1}, {-4.5, 3.25, 11.0});
  for (int i = 0; i < 100; ++i) {
    const Vec3 v(u(rng), u(rng), u(rng));
    EXPECT_LT((world_to_voxel(voxel_to_world(v, g), g) - v).norm(), 1e-12);
  }
}

TEST(Geometry, LinearIndexIsXFastest) {
  const auto g = grid(3, 4, 5);
  EXPECT_EQ(g.linear_index(1, 0, 0), 1u);
  EXPECT_EQ(g.linear_index(0, 1, 0), 3u);
  EXPECT_EQ(g.linear_index(0, 0, 1), 12u);
  for (std::size_t i = 0; i < g.voxel_count(); ++i) {
    const auto ijk = g.voxel_of(i);
    EXPECT_EQ(g.linear_index(ijk[0], ijk[1], ijk[2]), i);
  }
}

TEST(Geometry, ValidateRejectsBadDimsAndSpacing) {
  EXPECT_THROW(grid(0, 1, 1).validate(), ConfigError);
  EXPECT_THROW(grid(1, 1, 1, {1, -1, 1}).validate(), ConfigError);
  EXPECT_NO_THROW(grid(1, 1, 1).validate());
}

TEST(Trilinear, VoxelCenterReturnsStoredTensor) {
  TensorVolume v(grid(3, 3, 3));
  std::mt19937_64 rng(4);
  for (std::size_t i = 0; i < v.geometry.voxel_count(); ++i) v.set(i, bundleray::testing::random_spd(rng));
  const std::size_t idx = v.geometry.linear_index(1, 2, 1);
  const auto s = sample_trilinear(v, v.geometry.center_of(idx));
  ASSERT_TRUE(s);
  EXPECT_EQ(*s, v.at(idx));
}

TEST(Trilinear, MidpointAveragesNeighbours) {
  TensorVolume v(grid(2, 1, 1));
  const DiffusionTensor a{{1e-3, 1e-4, 0, 2e-3, 0, 3e-3}};
  const DiffusionTensor b{{3e-3, -1e-4, 2e-4, 1e-3, 1e-4, 1e-3}};
  v.set(0, a);
  v.set(1, b);
  const auto s = sample_trilinear(v, Vec3(0.5, 0, 0));
  ASSERT_TRUE(s);
  const auto sa = v.at(0), sb = v.at(1);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(s->c[i], 0.5 * (sa.c[i] + sb.c[i]), 1e-15);
}

TEST(Trilinear, OutsideHullIsNullopt) {
  TensorVolume v(grid(4, 4, 4, {1, 1, 1}, {2, 2, 2}));
  EXPECT_FALSE(sample_trilinear(v, v.geometry.origin - v.geometry.spacing));
  EXPECT_FALSE(sample_trilinear(v, Vec3(5.0001, 3, 3)));
  EXPECT_TRUE(sample_trilinear(v, Vec3(5.0, 5.0, 5.0)));
  EXPECT_TRUE(sample_trilinear(v, Vec3(2.0, 2.0, 2.0)));
}

TEST(Trilinear, SingleSliceAxisAcceptsOnlyThatPlane) {
  TensorVolume v(grid(3, 3, 1));
  EXPECT_TRUE(sample_trilinear(v, Vec3(1.5, 1.5, 0.0)));
  EXPECT_FALSE(sample_trilinear(v, Vec3(1.5, 1.5, 0.1)));
}

TEST(FaMap, MatchesPerVoxelFa) {
  TensorVolume v(grid(2, 2, 1));
  v.set(0, DiffusionTensor::isotropic(1e-3));
  v.set(1, DiffusionTensor::from_matrix(Eigen::Vector3d(1.7e-3, 0.3e-3, 0.3e-3).asDiagonal()));
  const auto fa = fa_map(v);
  EXPECT_EQ(fa.data[0], 0.0f);
  EXPECT_NEAR(fa.data[1], 0.79902, 1e-5);
}

TEST(VolumeIo, TensorRoundTripIsBitIdentical) {
  TempDir dir("tensor");
  TensorVolume v(grid(2, 2, 2, {0.5, 1, 2}, {-1, 2.5, 3}));
  std::mt19937_64 rng(5);
  for (std::size_t i = 0; i < 8; ++i) v.set(i, bundleray::testing::random_spd(rng));
  save_volume(v, dir / "t.vol");
  const auto back = load_tensor_volume(dir / "t.vol");
  EXPECT_EQ(back.geometry, v.geometry);
  EXPECT_EQ(back.data, v.data);
}

TEST(VolumeIo, MaskRoundTripPreservesBits) {
  TempDir dir("mask");
  BinaryMask m(grid(3, 2, 2));
  for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = static_cast<std::uint8_t>((i * 7) % 3 == 0);
  save_volume(m, dir / "m.mask");
  const auto back = load_mask(dir / "m.mask");
  EXPECT_EQ(back.data, m.data);
  EXPECT_EQ(back.count(), m.count());
}

TEST(VolumeIo, ScalarAndDwiRoundTrip) {
  TempDir dir("dwi");
  ScalarVolume s(grid(2, 3, 1));
  for (std::size_t i = 0; i < s.data.size(); ++i) s.data[i] = 0.25f * static_cast<float>(i) - 1.0f;
  save_volume(s, dir / "s.vol");
  EXPECT_EQ(load_scalar_volume(dir / "s.vol").data, s.data);

  DWIVolume d(grid(2, 2, 1), AcquisitionSpec::default_six(1500.0, 800.0));
  for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] = 1.5f * static_cast<float>(i);
  save_volume(d, dir / "d.vol");
  const auto back = load_dwi_volume(dir / "d.vol");
  EXPECT_EQ(back.data, d.data);
  EXPECT_EQ(back.acq.bvalue, 1500.0);
  EXPECT_EQ(back.acq.s0, 800.0);
  ASSERT_EQ(back.acq.gradients.size(), 6u);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(back.acq.gradients[i], d.acq.gradients[i]);
}

TEST(VolumeIo, HeaderDescribesLayout) {
  TempDir dir("header");
  save_volume(TensorVolume(grid(2, 2, 2)), dir / "t.vol");
  std::ifstream f(header_path(dir / "t.vol"));
  const auto h = nlohmann::json::parse(f);
  EXPECT_EQ(h["kind"], "tensor6");
  EXPECT_EQ(h["dtype"], "f32le");
  EXPECT_EQ(h["layout"], "x-fastest");
  EXPECT_EQ(h["dims"], nlohmann::json::array({2, 2, 2}));
}

TEST(VolumeIo, ShortPayloadIsSizeMismatch) {
  TempDir dir("short");
  save_volume(TensorVolume(grid(2, 2, 2)), dir / "t.vol");
  std::filesystem::resize_file(dir / "t.vol", 47 * sizeof(float));
  expect_io_error(VolumeErrorKind::PayloadSizeMismatch, [&] { load_tensor_volume(dir / "t.vol"); });
}

TEST(VolumeIo, MissingFilesAndBadHeaders) {
  TempDir dir("bad");
  expect_io_error(VolumeErrorKind::Io, [&] { load_volume(dir / "nope.vol"); });

  save_volume(BinaryMask(grid(2, 2, 2)), dir / "m.mask");
  {
    std::ofstream h(header_path(dir / "m.mask"));
    h << "{ not json";
  }
  expect_io_error(VolumeErrorKind::MalformedHeader, [&] { load_volume(dir / "m.mask"); });

  save_volume(BinaryMask(grid(2, 2, 2)), dir / "m2.mask");
  {
    std::ifstream in(header_path(dir / "m2.mask"));
    auto h = nlohmann::json::parse(in);
    in.close();
    h["dtype"] = "float64";
    std::ofstream out(header_path(dir / "m2.mask"));
    out << h.dump();
  }
  expect_io_error(VolumeErrorKind::UnsupportedDtype, [&] { load_volume(dir / "m2.mask"); });
}

TEST(VolumeIo, MaskValuesAboveOneRejected) {
  TempDir dir("maskval");
  BinaryMask m(grid(2, 1, 1));
  m.data[1] = 2;
  save_volume(m, dir / "m.mask");
  expect_io_error(VolumeErrorKind::InvalidPayload, [&] { load_mask(dir / "m.mask"); });
}

TEST(VolumeIo, KindMismatchOnTypedLoad) {
  TempDir dir("kind");
  save_volume(BinaryMask(grid(2, 2, 2)), dir / "m.mask");
  expect_io_error(VolumeErrorKind::KindMismatch, [&] { load_tensor_volume(dir / "m.mask"); });
  EXPECT_EQ(load_geometry(dir / "m.mask"), grid(2, 2, 2));
}
