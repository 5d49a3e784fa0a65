#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "bundleray/boundary.hpp"
#include "bundleray/centerline.hpp"
#include "bundleray/tracking.hpp"

namespace bundleray {

nlohmann::json to_json(const Vec3& v);
Vec3 vec3_from_json(const nlohmann::json& j);

// Polylines are JSON arrays of [x, y, z] points in mm.
nlohmann::json to_json(const Centerline& c);
Centerline centerline_from_json(const nlohmann::json& j);

// Fibers are a JSON array of polylines.
nlohmann::json to_json(const std::vector<Fiber>& fibers);
std::vector<Fiber> fibers_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RayCastParams& p);
nlohmann::json to_json(const BoundaryCriteria& c);
nlohmann::json to_json(const OutlierParams& p);

// {"params", "criteria", "frames": [{center, tangent, u, v}],
//  "entries": n rows of k {index, point, reason, corrected}}
nlohmann::json to_json(const BoundaryGrid& g);
BoundaryGrid boundary_grid_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace bundleray
