#include "bundleray/boundary.hpp"

#include <cmath>
#include <cstdlib>

#include "bundleray/parallel.hpp"

namespace bundleray {

std::vector<LayerFrame> compute_frames(const Centerline& c) {
  c.validate();
  const std::size_t n = c.size();
  std::vector<LayerFrame> frames(n);

  for (std::size_t i = 0; i < n; ++i) {
    frames[i].center = c.points[i];
    const std::size_t a = i + 1 < n ? i : n - 2;
    frames[i].tangent = (c.points[a + 1] - c.points[a]).normalized();
  }

  const Vec3& t0 = frames[0].tangent;
  int axis = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::abs(t0[k]) < std::abs(t0[axis])) axis = k;
  }
  frames[0].u = t0.cross(Vec3::Unit(axis)).normalized();
  frames[0].v = t0.cross(frames[0].u);

  for (std::size_t i = 1; i < n; ++i) {
    const Vec3& t = frames[i].tangent;
    const Vec3& prev = frames[i - 1].u;
    const Vec3 projected = prev - prev.dot(t) * t;
    if (projected.norm() < 1e-9)
      throw Error("frames: centerline kink at layer " + std::to_string(i) + " (transported u parallel to tangent)");
    frames[i].u = projected.normalized();
    frames[i].v = t.cross(frames[i].u);
  }
  return frames;
}

Vec3 ray_direction(const LayerFrame& frame, int j, int k) {
  const double angle = 2.0 * kPi * j / k;
  return std::cos(angle) * frame.u + std::sin(angle) * frame.v;
}

void RayCastParams::validate() const {
  if (n < 2) throw ConfigError("raycast: n must be >= 2");
  if (k < 3) throw ConfigError("raycast: k must be >= 3");
  if (m < 1) throw ConfigError("raycast: m must be >= 1");
  if (!(d_mm > 0.0)) throw ConfigError("raycast: d_mm must be > 0");
}

void BoundaryCriteria::validate() const {
  if (!(fa_min >= 0.0 && fa_min <= 1.0)) throw ConfigError("criteria: fa_min must be in [0, 1]");
  if (!(theta_neighbor_deg > 0.0 && theta_neighbor_deg <= 90.0))
    throw ConfigError("criteria: theta_neighbor_deg must be in (0, 90]");
  if (!(theta_center_deg > 0.0 && theta_center_deg <= 90.0))
    throw ConfigError("criteria: theta_center_deg must be in (0, 90]");
}

void OutlierParams::validate() const {
  if (max_index_gap < 0) throw ConfigError("outlier: max_index_gap must be >= 0");
  if (max_passes < 1) throw ConfigError("outlier: max_passes must be >= 1");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::FA: return "FA";
    case StopReason::AngleNeighbor: return "AngleNeighbor";
    case StopReason::AngleCenter: return "AngleCenter";
    case StopReason::OutsideVolume: return "OutsideVolume";
    case StopReason::MaxLength: return "MaxLength";
  }
  return "?";
}

std::optional<StopReason> stop_reason_from_string(const std::string& s) {
  for (auto r : {StopReason::FA, StopReason::AngleNeighbor, StopReason::AngleCenter, StopReason::OutsideVolume,
                 StopReason::MaxLength}) {
    if (s == to_string(r)) return r;
  }
  return std::nullopt;
}

std::optional<StopReason> classify_sample(const EigenSystem& sample, const Vec3& prev_e1, const Vec3& center_e1,
                                          const BoundaryCriteria& crit) {
  if (sample.fa < crit.fa_min) return StopReason::FA;
  if (acute_angle_deg(sample.principal(), prev_e1) > crit.theta_neighbor_deg) return StopReason::AngleNeighbor;
  if (acute_angle_deg(sample.principal(), center_e1) > crit.theta_center_deg) return StopReason::AngleCenter;
  return std::nullopt;
}

std::optional<StopReason> classify_sample(const DiffusionTensor& sample, const Vec3& prev_e1, const Vec3& center_e1,
                                          const BoundaryCriteria& crit) {
  return classify_sample(eigensystem(sample), prev_e1, center_e1, crit);
}

Vec3 BoundaryGrid::point_for(int i, int j, int index) const {
  const LayerFrame& f = frames[static_cast<std::size_t>(i)];
  return f.center + (index * params.d_mm) * ray_direction(f, j, params.k);
}

int BoundaryGrid::max_adjacent_gap() const {
  int gap = 0;
  for (int i = 0; i + 1 < params.n; ++i)
    for (int j = 0; j < params.k; ++j) gap = std::max(gap, std::abs(at(i, j).index - at(i + 1, j).index));
  return gap;
}

BoundaryGrid estimate_boundary(const TensorVolume& v, const Centerline& c, const RayCastParams& p,
                               const BoundaryCriteria& crit) {
  p.validate();
  crit.validate();
  if (static_cast<int>(c.size()) != p.n)
    throw Error("boundary: centerline has " + std::to_string(c.size()) + " points, expected n = " +
                std::to_string(p.n));

  BoundaryGrid grid;
  grid.params = p;
  grid.criteria = crit;
  grid.frames = compute_frames(c);
  grid.entries.resize(static_cast<std::size_t>(p.n) * static_cast<std::size_t>(p.k));

  std::vector<Vec3> center_e1(static_cast<std::size_t>(p.n));
  for (int i = 0; i < p.n; ++i) {
    const auto d = sample_trilinear(v, c.points[static_cast<std::size_t>(i)]);
    if (!d) throw Error("boundary: centerline point " + std::to_string(i) + " lies outside the volume");
    center_e1[static_cast<std::size_t>(i)] = principal_direction(*d);
  }

  parallel_for(grid.entries.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / p.k;
    const int j = static_cast<int>(idx) % p.k;
    const LayerFrame& f = grid.frames[static_cast<std::size_t>(i)];
    const Vec3 dir = ray_direction(f, j, p.k);
    const Vec3& ce1 = center_e1[static_cast<std::size_t>(i)];

    BoundaryEntry e;
    e.index = p.m;
    e.reason = StopReason::MaxLength;
    Vec3 prev = ce1;
    for (int s = 1; s <= p.m; ++s) {
      const auto d = sample_trilinear(v, f.center + (s * p.d_mm) * dir);
      if (!d) {
        e.index = s - 1;
        e.reason = StopReason::OutsideVolume;
        break;
      }
      const EigenSystem es = eigensystem(*d);
      if (const auto stop = classify_sample(es, prev, ce1, crit)) {
        e.index = s - 1;
        e.reason = *stop;
        break;
      }
      prev = es.principal();
    }
    e.point = f.center + (e.index * p.d_mm) * dir;
    grid.entries[idx] = e;
  });
  return grid;
}

OutlierResult correct_outliers(const BoundaryGrid& grid, const OutlierParams& p) {
  p.validate();
  const int n = grid.params.n;
  const int k = grid.params.k;
  const int gap = p.max_index_gap;

  OutlierResult out{grid};
  std::vector<int> passes(static_cast<std::size_t>(k), 0);
  std::vector<std::uint8_t> converged(static_cast<std::size_t>(k), 0);

  // Rays are independent; within a ray the sweeps are sequential.
  parallel_for(static_cast<std::size_t>(k), [&](std::size_t jj) {
    const int j = static_cast<int>(jj);
    auto pull = [&](int i, int ref) {
      BoundaryEntry& e = out.grid.at(i, j);
      const int r = out.grid.at(ref, j).index;
      if (std::abs(e.index - r) <= gap) return false;
      e.index = e.index > r ? r + gap : std::max(0, r - gap);
      e.corrected = true;
      return true;
    };
    int pass = 0;
    bool changed = true;
    while (changed && pass < p.max_passes) {
      changed = false;
      for (int i = 1; i < n; ++i) changed = pull(i, i - 1) || changed;
      for (int i = n - 2; i >= 0; --i) changed = pull(i, i + 1) || changed;
      ++pass;
    }
    passes[jj] = pass;
    converged[jj] = changed ? 0 : 1;
  });

  out.passes = 0;
  out.converged = true;
  for (int j = 0; j < k; ++j) {
    out.passes = std::max(out.passes, passes[static_cast<std::size_t>(j)]);
    out.converged = out.converged && converged[static_cast<std::size_t>(j)];
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      BoundaryEntry& e = out.grid.at(i, j);
      if (e.corrected) {
        e.point = out.grid.point_for(i, j, e.index);
        ++out.corrected_entries;
      }
    }
  }
  return out;
}

}  // namespace bundleray
