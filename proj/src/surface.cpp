#include "bundleray/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "bundleray/parallel.hpp"

namespace bundleray {

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * (b - a).cross(c - a).norm(); }

double surface_area(const SurfaceMesh& mesh) {
  double area = 0.0;
  for (const auto& t : mesh.triangles)
    area += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
  return area;
}

MeshTopology analyze_topology(const SurfaceMesh& mesh) {
  auto key = [](int a, int b) { return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b); };
  std::unordered_map<std::uint64_t, int> undirected;
  std::unordered_map<std::uint64_t, int> directed;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = t[e];
      const int b = t[(e + 1) % 3];
      ++undirected[key(std::min(a, b), std::max(a, b))];
      ++directed[key(a, b)];
    }
  }
  MeshTopology topo;
  topo.vertices = mesh.vertices.size();
  topo.edges = undirected.size();
  topo.faces = mesh.triangles.size();
  topo.euler = static_cast<long>(topo.vertices) - static_cast<long>(topo.edges) + static_cast<long>(topo.faces);
  topo.edge_manifold = !undirected.empty() &&
                       std::all_of(undirected.begin(), undirected.end(), [](const auto& kv) { return kv.second == 2; });
  topo.oriented = std::all_of(directed.begin(), directed.end(), [](const auto& kv) { return kv.second == 1; });
  return topo;
}

SurfaceMesh triangulate(const BoundaryGrid& grid, const Centerline& c) {
  const int n = grid.params.n;
  const int k = grid.params.k;
  if (n < 2 || k < 3) throw Error("triangulate: grid needs n >= 2 layers and k >= 3 rays");
  if (static_cast<int>(c.size()) != n || grid.entries.size() != static_cast<std::size_t>(n * k))
    throw Error("triangulate: centerline and grid sizes disagree");

  SurfaceMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(n * k + 2));
  for (const auto& e : grid.entries) mesh.vertices.push_back(e.point);
  const int apex_start = n * k;
  const int apex_end = n * k + 1;
  mesh.vertices.push_back(c.points.front());
  mesh.vertices.push_back(c.points.back());

  auto vid = [k](int i, int j) { return i * k + j; };
  mesh.triangles.reserve(static_cast<std::size_t>(2 * k * (n - 1) + 2 * k));
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j < k; ++j) {
      const int jn = (j + 1) % k;
      mesh.triangles.push_back({vid(i, j), vid(i, jn), vid(i + 1, jn)});
      mesh.triangles.push_back({vid(i, j), vid(i + 1, jn), vid(i + 1, j)});
    }
  }
  for (int j = 0; j < k; ++j) {
    const int jn = (j + 1) % k;
    mesh.triangles.push_back({apex_start, vid(0, jn), vid(0, j)});
    mesh.triangles.push_back({apex_end, vid(n - 1, j), vid(n - 1, jn)});
  }

  std::set<std::pair<int, int>> offending;
  for (const auto& t : mesh.triangles) {
    if (triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) > 1e-12) continue;
    for (int v : t)
      if (v < apex_start) offending.emplace(v / k, v % k);
  }
  if (!offending.empty()) {
    std::ostringstream msg;
    msg << "triangulate: degenerate triangles at boundary entries";
    for (const auto& [i, j] : offending) msg << " (" << i << "," << j << ")";
    throw Error(msg.str());
  }
  return mesh;
}

SurfaceMesh triangulate(const BoundaryGrid& grid) {
  Centerline c;
  for (const auto& f : grid.frames) c.points.push_back(f.center);
  return triangulate(grid, c);
}

SurfaceMesh round_to_float32(SurfaceMesh mesh) {
  for (auto& v : mesh.vertices)
    for (int a = 0; a < 3; ++a) v[a] = static_cast<double>(static_cast<float>(v[a]));
  return mesh;
}

void export_ply(const SurfaceMesh& mesh, const std::filesystem::path& path) {
  if (mesh.vertices.empty() || mesh.triangles.empty()) throw Error("export_ply: refusing to write an empty mesh");
  std::ofstream out(path);
  if (!out) throw Error("export_ply: cannot write " + path.string());
  out << "ply\nformat ascii 1.0\ncomment bundleray boundary surface\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "element face " << mesh.triangles.size() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  char line[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(line, sizeof line, "%.9g %.9g %.9g\n", static_cast<double>(static_cast<float>(v.x())),
                  static_cast<double>(static_cast<float>(v.y())), static_cast<double>(static_cast<float>(v.z())));
    out << line;
  }
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (!out) throw Error("export_ply: write failed for " + path.string());
}

SurfaceMesh import_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("import_ply: cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "ply") throw Error("import_ply: missing 'ply' magic");

  std::size_t n_vertices = 0, n_faces = 0;
  std::vector<std::string> vertex_props;
  std::string current;
  bool ascii = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      ls >> current;
      if (current == "vertex") ls >> n_vertices;
      else if (current == "face") ls >> n_faces;
      else throw Error("import_ply: unsupported element " + current);
    } else if (word == "property" && current == "vertex") {
      std::string type, name;
      ls >> type >> name;
      vertex_props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!ascii) throw Error("import_ply: only ASCII PLY is supported");
  const auto find = [&](const char* name) {
    const auto it = std::find(vertex_props.begin(), vertex_props.end(), name);
    if (it == vertex_props.end()) throw Error(std::string("import_ply: missing vertex property ") + name);
    return static_cast<std::size_t>(it - vertex_props.begin());
  };
  const std::size_t ix = find("x"), iy = find("y"), iz = find("z");

  SurfaceMesh mesh;
  mesh.vertices.reserve(n_vertices);
  std::vector<float> values(vertex_props.size());
  for (std::size_t v = 0; v < n_vertices; ++v) {
    for (auto& x : values)
      if (!(in >> x)) throw Error("import_ply: truncated vertex list");
    mesh.vertices.emplace_back(values[ix], values[iy], values[iz]);
  }
  for (std::size_t f = 0; f < n_faces; ++f) {
    int count = 0;
    std::array<int, 3> t{};
    if (!(in >> count) || count != 3) throw Error("import_ply: only triangular faces are supported");
    for (int& idx : t) {
      if (!(in >> idx) || idx < 0 || static_cast<std::size_t>(idx) >= n_vertices)
        throw Error("import_ply: bad face index");
    }
    mesh.triangles.push_back(t);
  }
  return mesh;
}

namespace {

constexpr double kGrazeMm = 1e-9;

enum class HitKind { Miss, Hit, Unclean, OnSurface };

struct RayHit {
  HitKind kind = HitKind::Miss;
  double t = 0.0;
};

struct Triangle {
  Vec3 a, b, c;
  Vec3 normal;  // unnormalized, |normal| = 2 * area
  double normal_len;
  std::array<double, 3> edge_len;  // opposite a, b, c
  Vec3 lo, hi;
};

// Ray/triangle test with a distance tolerance: hits within kGrazeMm of an
// edge or vertex and rays lying in the plane of the triangle are Unclean; a
// ray starting on the triangle is OnSurface.
RayHit intersect(const Vec3& origin, const Vec3& dir, const Triangle& tri) {
  const double denom = dir.dot(tri.normal);
  const double offset = (origin - tri.a).dot(tri.normal);
  if (std::abs(denom) <= 1e-12 * tri.normal_len) {
    return {std::abs(offset) / tri.normal_len <= kGrazeMm ? HitKind::Unclean : HitKind::Miss, 0.0};
  }
  const double t = -offset / denom;
  if (t < -kGrazeMm) return {};
  const Vec3 p = origin + t * dir;
  const double n2 = tri.normal_len;
  const std::array<double, 3> dist{
      (tri.b - p).cross(tri.c - p).dot(tri.normal) / n2 / tri.edge_len[0],
      (tri.c - p).cross(tri.a - p).dot(tri.normal) / n2 / tri.edge_len[1],
      (tri.a - p).cross(tri.b - p).dot(tri.normal) / n2 / tri.edge_len[2],
  };
  if (dist[0] < -kGrazeMm || dist[1] < -kGrazeMm || dist[2] < -kGrazeMm) return {};
  if (std::abs(t) <= kGrazeMm) return {HitKind::OnSurface, t};
  if (dist[0] <= kGrazeMm || dist[1] <= kGrazeMm || dist[2] <= kGrazeMm) return {HitKind::Unclean, t};
  return {HitKind::Hit, t};
}

std::array<Vec3, 16> retry_directions() {
  std::array<Vec3, 16> dirs;
  for (int i = 0; i < 16; ++i) {
    dirs[static_cast<std::size_t>(i)] =
        Vec3(1.0, 0.3 * std::sin(1.3 * (i + 1)), 0.3 * std::cos(2.1 * (i + 1) + 0.5)).normalized();
  }
  return dirs;
}

bool inside_by_retry(const Vec3& q, const std::vector<Triangle>& tris, std::size_t voxel) {
  static const auto dirs = retry_directions();
  for (const Vec3& dir : dirs) {
    int crossings = 0;
    bool clean = true;
    for (const auto& tri : tris) {
      const RayHit h = intersect(q, dir, tri);
      if (h.kind == HitKind::OnSurface) return true;
      if (h.kind == HitKind::Unclean) {
        clean = false;
        break;
      }
      if (h.kind == HitKind::Hit) ++crossings;
    }
    if (clean) return crossings % 2 == 1;
  }
  throw Error("voxelize: no clean ray for voxel " + std::to_string(voxel) + " after 16 retries (pathological mesh)");
}

}  // namespace

BinaryMask voxelize(const SurfaceMesh& mesh, const GridGeometry& grid) {
  grid.validate();
  const MeshTopology topo = analyze_topology(mesh);
  if (!topo.edge_manifold) throw Error("voxelize: mesh is not closed (edge-manifold check failed)");

  std::vector<Triangle> tris;
  tris.reserve(mesh.triangles.size());
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& t : mesh.triangles) {
    Triangle tri;
    tri.a = mesh.vertices[t[0]];
    tri.b = mesh.vertices[t[1]];
    tri.c = mesh.vertices[t[2]];
    tri.normal = (tri.b - tri.a).cross(tri.c - tri.a);
    tri.normal_len = tri.normal.norm();
    if (!(tri.normal_len > 0.0)) throw Error("voxelize: mesh has a zero-area triangle");
    tri.edge_len = {(tri.c - tri.b).norm(), (tri.a - tri.c).norm(), (tri.b - tri.a).norm()};
    tri.lo = tri.a.cwiseMin(tri.b).cwiseMin(tri.c);
    tri.hi = tri.a.cwiseMax(tri.b).cwiseMax(tri.c);
    lo = lo.cwiseMin(tri.lo);
    hi = hi.cwiseMax(tri.hi);
    tris.push_back(tri);
  }

  BinaryMask mask(grid);
  const int nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];

  // Every voxel center of an x-row shares the +x ray line, so crossings are
  // found once per row and each voxel counts those strictly ahead of it.
  auto index_range = [&](double a, double b, int axis, int dim) {
    const double o = grid.origin[axis], s = grid.spacing[axis];
    const int first = std::max(0, static_cast<int>(std::ceil((a - kGrazeMm - o) / s)));
    const int last = std::min(dim - 1, static_cast<int>(std::floor((b + kGrazeMm - o) / s)));
    return std::pair{first, last};
  };
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz));
  for (std::size_t ti = 0; ti < tris.size(); ++ti) {
    const auto [j0, j1] = index_range(tris[ti].lo.y(), tris[ti].hi.y(), 1, ny);
    const auto [k0, k1] = index_range(tris[ti].lo.z(), tris[ti].hi.z(), 2, nz);
    for (int kk = k0; kk <= k1; ++kk)
      for (int jj = j0; jj <= j1; ++jj) rows[static_cast<std::size_t>(kk) * ny + jj].push_back(static_cast<int>(ti));
  }

  const auto [x_first, x_last] = index_range(lo.x(), hi.x(), 0, nx);
  parallel_for(rows.size(), [&](std::size_t r) {
    const int jj = static_cast<int>(r % static_cast<std::size_t>(ny));
    const int kk = static_cast<int>(r / static_cast<std::size_t>(ny));
    const auto& candidates = rows[r];
    if (candidates.empty()) return;
    const double y = grid.origin.y() + jj * grid.spacing.y();
    const double z = grid.origin.z() + kk * grid.spacing.z();
    if (y < lo.y() || y > hi.y() || z < lo.z() || z > hi.z()) return;

    const Vec3 origin(grid.origin.x() - 1.0, y, z);
    std::vector<double> crossings;
    std::vector<double> unclean;  // x beyond which a voxel's +x ray is affected
    for (int ti : candidates) {
      const Triangle& tri = tris[static_cast<std::size_t>(ti)];
      const RayHit h = intersect(origin, Vec3::UnitX(), tri);
      if (h.kind == HitKind::Hit || h.kind == HitKind::OnSurface) {
        crossings.push_back(origin.x() + h.t);
      } else if (h.kind == HitKind::Unclean) {
        unclean.push_back(std::max(tri.hi.x(), origin.x() + h.t));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    const double unclean_limit =
        unclean.empty() ? -std::numeric_limits<double>::infinity() : *std::max_element(unclean.begin(), unclean.end());

    for (int ii = x_first; ii <= x_last; ++ii) {
      const double x = grid.origin.x() + ii * grid.spacing.x();
      if (x < lo.x() || x > hi.x()) continue;
      const std::size_t voxel = grid.linear_index(ii, jj, kk);
      const auto ahead = std::upper_bound(crossings.begin(), crossings.end(), x);
      const bool touching = (ahead != crossings.end() && *ahead - x <= kGrazeMm) ||
                            (ahead != crossings.begin() && x - *(ahead - 1) <= kGrazeMm);
      bool inside;
      if (touching) {
        inside = true;
      } else if (unclean_limit >= x - kGrazeMm) {
        inside = inside_by_retry(Vec3(x, y, z), tris, voxel);
      } else {
        inside = (crossings.end() - ahead) % 2 == 1;
      }
      mask.data[voxel] = inside ? 1 : 0;
    }
  });
  return mask;
}

}  // namespace bundleray
