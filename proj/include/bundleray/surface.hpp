#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "bundleray/boundary.hpp"
#include "bundleray/volume.hpp"

namespace bundleray {

/// Triangle mesh; triangles are counterclockwise seen from outside.
struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
};

struct MeshTopology {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t faces = 0;
  long euler = 0;              // V - E + F
  bool edge_manifold = false;  // every edge shared by exactly two triangles
  bool oriented = false;       // every directed edge used once
};

MeshTopology analyze_topology(const SurfaceMesh& mesh);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double surface_area(const SurfaceMesh& mesh);

// Vertices are the n*k boundary points (index i*k + j) followed by apexes at
// the first and last layer centers. Each lattice quad is split along its
// (i, j)-(i+1, j+1) diagonal and the ends are closed by triangle fans.
// Throws Error naming the (i, j) entries of any triangle with area <= 1e-12.
SurfaceMesh triangulate(const BoundaryGrid& grid, const Centerline& c);
SurfaceMesh triangulate(const BoundaryGrid& grid);  // apexes from frame centers

// Vertices rounded to float32, i.e. the mesh exactly as written to PLY.
SurfaceMesh round_to_float32(SurfaceMesh mesh);

// ASCII PLY with float x/y/z vertex properties and int index lists.
void export_ply(const SurfaceMesh& mesh, const std::filesystem::path& path);
SurfaceMesh import_ply(const std::filesystem::path& path);

// Parity test per voxel center: a ray (+x first) is cast and its crossings
// counted. Rays passing within 1e-9 mm of a triangle edge, vertex, or lying
// in a triangle plane are retried along a fixed ladder of 16 tilted
// directions; if none is clean an Error is thrown. Centers within 1e-9 mm of
// the surface count as inside. Voxels outside the mesh bounding box are
// outside without a ray test.
BinaryMask voxelize(const SurfaceMesh& mesh, const GridGeometry& grid);

}  // namespace bundleray
