#include "bundleray/serialize.hpp"

#include <fstream>

namespace bundleray {

using nlohmann::json;

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("json: expected a [x, y, z] array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

namespace {

json polyline(const std::vector<Vec3>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(to_json(p));
  return out;
}

std::vector<Vec3> polyline_from_json(const json& j) {
  if (!j.is_array()) throw Error("json: expected an array of points");
  std::vector<Vec3> pts;
  pts.reserve(j.size());
  for (const auto& p : j) pts.push_back(vec3_from_json(p));
  return pts;
}

}  // namespace

json to_json(const Centerline& c) { return polyline(c.points); }

Centerline centerline_from_json(const json& j) { return Centerline{polyline_from_json(j)}; }

json to_json(const std::vector<Fiber>& fibers) {
  json out = json::array();
  for (const auto& f : fibers) out.push_back(polyline(f.points));
  return out;
}

std::vector<Fiber> fibers_from_json(const json& j) {
  if (!j.is_array()) throw Error("json: expected an array of fibers");
  std::vector<Fiber> fibers;
  for (const auto& f : j) fibers.push_back(Fiber{polyline_from_json(f)});
  return fibers;
}

json to_json(const RayCastParams& p) { return {{"n", p.n}, {"k", p.k}, {"m", p.m}, {"d_mm", p.d_mm}}; }

json to_json(const BoundaryCriteria& c) {
  return {{"fa_min", c.fa_min}, {"theta_neighbor_deg", c.theta_neighbor_deg}, {"theta_center_deg", c.theta_center_deg}};
}

json to_json(const OutlierParams& p) { return {{"max_index_gap", p.max_index_gap}, {"max_passes", p.max_passes}}; }

json to_json(const BoundaryGrid& g) {
  json frames = json::array();
  for (const auto& f : g.frames)
    frames.push_back({{"center", to_json(f.center)}, {"tangent", to_json(f.tangent)}, {"u", to_json(f.u)}, {"v", to_json(f.v)}});
  json rows = json::array();
  for (int i = 0; i < g.params.n; ++i) {
    json row = json::array();
    for (int j = 0; j < g.params.k; ++j) {
      const auto& e = g.at(i, j);
      row.push_back({{"index", e.index}, {"point", to_json(e.point)}, {"reason", to_string(e.reason)}, {"corrected", e.corrected}});
    }
    rows.push_back(std::move(row));
  }
  return {{"params", to_json(g.params)}, {"criteria", to_json(g.criteria)}, {"frames", frames}, {"entries", rows}};
}

BoundaryGrid boundary_grid_from_json(const json& j) {
  try {
    BoundaryGrid g;
    const auto& p = j.at("params");
    g.params = {p.at("n").get<int>(), p.at("k").get<int>(), p.at("m").get<int>(), p.at("d_mm").get<double>()};
    const auto& c = j.at("criteria");
    g.criteria = {c.at("fa_min").get<double>(), c.at("theta_neighbor_deg").get<double>(),
                  c.at("theta_center_deg").get<double>()};
    g.params.validate();
    for (const auto& f : j.at("frames")) {
      g.frames.push_back({vec3_from_json(f.at("center")), vec3_from_json(f.at("tangent")), vec3_from_json(f.at("u")),
                          vec3_from_json(f.at("v"))});
    }
    const auto& rows = j.at("entries");
    if (g.frames.size() != static_cast<std::size_t>(g.params.n) || rows.size() != static_cast<std::size_t>(g.params.n))
      throw Error("boundary grid json: expected n frames and n entry rows");
    for (const auto& row : rows) {
      if (row.size() != static_cast<std::size_t>(g.params.k)) throw Error("boundary grid json: expected k entries per row");
      for (const auto& e : row) {
        BoundaryEntry entry;
        entry.index = e.at("index").get<int>();
        entry.point = vec3_from_json(e.at("point"));
        const auto reason = stop_reason_from_string(e.at("reason").get<std::string>());
        if (!reason) throw Error("boundary grid json: unknown stop reason");
        entry.reason = *reason;
        entry.corrected = e.at("corrected").get<bool>();
        if (entry.index < 0 || entry.index > g.params.m) throw Error("boundary grid json: index out of range");
        g.entries.push_back(entry);
      }
    }
    return g;
  } catch (const json::exception& e) {
    throw Error(std::string("boundary grid json: ") + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace bundleray
