#include "bundleray/tracking.hpp"

#include <algorithm>
#include <cmath>

#include "bundleray/parallel.hpp"

namespace bundleray {

void Roi::validate() const {
  if (!(radius > 0.0)) throw ConfigError("roi: radius must be > 0");
  if (!center.allFinite()) throw ConfigError("roi: center must be finite");
}

void TrackParams::validate() const {
  if (!(step_mm > 0.0)) throw ConfigError("tracking: step_mm must be > 0");
  if (!(fa_stop >= 0.0 && fa_stop <= 1.0)) throw ConfigError("tracking: fa_stop must be in [0, 1]");
  if (!(max_turn_deg > 0.0 && max_turn_deg <= 90.0)) throw ConfigError("tracking: max_turn_deg must be in (0, 90]");
  if (max_steps < 0) throw ConfigError("tracking: max_steps must be >= 0");
}

namespace {

std::vector<Vec3> half_track(const TensorVolume& v, const Vec3& seed, Vec3 dir, const TrackParams& p) {
  std::vector<Vec3> pts;
  const double cos_max_turn = std::cos(deg_to_rad(p.max_turn_deg));
  Vec3 pos = seed;
  for (int step = 0; step < p.max_steps; ++step) {
    const Vec3 next = pos + p.step_mm * dir;
    const auto d = sample_trilinear(v, next);
    if (!d) break;
    const EigenSystem es = eigensystem(*d);
    if (es.fa < p.fa_stop) break;
    Vec3 e1 = es.principal();
    if (e1.dot(dir) < 0.0) e1 = -e1;
    if (e1.dot(dir) < cos_max_turn) break;
    pts.push_back(next);
    pos = next;
    dir = e1;
  }
  return pts;
}

}  // namespace

Fiber track_streamline(const TensorVolume& v, const Vec3& seed, const TrackParams& p) {
  const auto d = sample_trilinear(v, seed);
  if (!d) throw Error("track: seed lies outside the volume");

  Fiber f;
  const EigenSystem es = eigensystem(*d);
  if (es.fa < p.fa_stop) {
    f.points.push_back(seed);
    return f;
  }
  const Vec3 e1 = es.principal();
  const auto forward = half_track(v, seed, e1, p);
  const auto backward = half_track(v, seed, -e1, p);

  f.points.reserve(forward.size() + backward.size() + 1);
  f.points.insert(f.points.end(), backward.rbegin(), backward.rend());
  f.points.push_back(seed);
  f.points.insert(f.points.end(), forward.begin(), forward.end());
  return f;
}

std::vector<Vec3> seeds_in_roi(const TensorVolume& v, const Roi& roi, double fa_stop) {
  std::vector<Vec3> seeds;
  const GridGeometry& g = v.geometry;
  for (std::size_t i = 0; i < g.voxel_count(); ++i) {
    const Vec3 c = g.center_of(i);
    if (!roi.contains(c)) continue;
    if (eigensystem(v.at(i)).fa >= fa_stop) seeds.push_back(c);
  }
  return seeds;
}

std::vector<Fiber> track_seeds(const TensorVolume& v, const std::vector<Vec3>& seeds, const TrackParams& p) {
  p.validate();
  std::vector<Fiber> fibers(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { fibers[i] = track_streamline(v, seeds[i], p); });
  return fibers;
}

std::vector<Fiber> filter_by_rois(const std::vector<Fiber>& fibers, const Roi& a, const Roi& b) {
  auto first_in = [](const std::vector<Vec3>& pts, const Roi& roi) {
    return std::find_if(pts.begin(), pts.end(), [&](const Vec3& q) { return roi.contains(q); });
  };

  std::vector<Fiber> kept;
  for (const auto& f : fibers) {
    auto ia = first_in(f.points, a);
    auto ib = first_in(f.points, b);
    if (ia == f.points.end() || ib == f.points.end()) continue;

    std::vector<Vec3> pts = f.points;
    if (ib < ia) {
      std::reverse(pts.begin(), pts.end());
      ia = first_in(pts, a);
      ib = first_in(pts, b);
    } else {
      ia = pts.begin() + (ia - f.points.begin());
      ib = pts.begin() + (ib - f.points.begin());
    }
    if (ib <= ia) continue;
    kept.push_back(Fiber{std::vector<Vec3>(ia, ib + 1)});
  }
  return kept;
}

Centerline extract_centerline(const std::vector<Fiber>& fibers, int n) {
  if (fibers.empty()) throw Error("centerline: no fibers survived ROI filtering (empty bundle)");
  if (n < 2) throw Error("centerline: n must be >= 2");

  std::vector<Vec3> sum(static_cast<std::size_t>(n), Vec3::Zero());
  for (const auto& f : fibers) {
    const auto r = resample_polyline(f.points, n);
    for (std::size_t i = 0; i < r.size(); ++i) sum[i] += r[i];
  }
  Centerline c;
  for (auto& s : sum) c.points.push_back(s / static_cast<double>(fibers.size()));
  c.validate();
  return c;
}

}  // namespace bundleray
