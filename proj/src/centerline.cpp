#include "bundleray/centerline.hpp"

#include <algorithm>

namespace bundleray {

void Centerline::validate() const {
  if (points.size() < 2) throw Error("centerline: needs at least 2 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) throw Error("centerline: non-finite point");
    if (i > 0 && (points[i] - points[i - 1]).norm() <= 1e-9)
      throw Error("centerline: consecutive points " + std::to_string(i - 1) + " and " + std::to_string(i) +
                  " coincide");
  }
}

double polyline_length(std::span<const Vec3> points) {
  double length = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) length += (points[i] - points[i - 1]).norm();
  return length;
}

std::vector<Vec3> resample_polyline(std::span<const Vec3> points, int n) {
  if (n < 2) throw Error("resample: n must be >= 2");
  if (points.size() < 2) throw Error("resample: polyline needs at least 2 points");

  std::vector<double> cumulative(points.size(), 0.0);
  for (std::size_t i = 1; i < points.size(); ++i)
    cumulative[i] = cumulative[i - 1] + (points[i] - points[i - 1]).norm();
  const double total = cumulative.back();
  if (!(total > 0.0)) throw Error("resample: polyline has zero length");

  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(n));
  out.push_back(points.front());
  std::size_t seg = 1;
  for (int s = 1; s < n - 1; ++s) {
    const double target = total * s / (n - 1);
    while (seg + 1 < points.size() && cumulative[seg] < target) ++seg;
    const double len = cumulative[seg] - cumulative[seg - 1];
    const double t = len > 0.0 ? std::clamp((target - cumulative[seg - 1]) / len, 0.0, 1.0) : 0.0;
    out.push_back(points[seg - 1] + t * (points[seg] - points[seg - 1]));
  }
  out.push_back(points.back());
  return out;
}

Centerline resample_centerline(const Centerline& c, int n) {
  Centerline out{resample_polyline(c.points, n)};
  out.validate();
  return out;
}

}  // namespace bundleray
