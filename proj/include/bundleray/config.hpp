#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bundleray/boundary.hpp"
#include "bundleray/phantom.hpp"
#include "bundleray/tracking.hpp"

namespace bundleray {

struct SweepAxes {
  std::vector<int> n{33, 49, 65};
  std::vector<int> k{4, 8, 16, 32};
  std::vector<double> d_mm{0.25, 0.5, 0.75};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

  void validate() const;
};

/// Everything a run depends on. All randomness derives from `seed`: stage s
/// uses seed + s, and only the noise stage (s = 2) draws random numbers.
struct PipelineConfig {
  std::uint64_t seed = 1;
  bool use_analytic_centerline = true;
  bool keep_intermediates = false;
  std::string output_dir = "bundleray_out";

  PhantomSpec phantom;
  TrackParams tracking;
  std::optional<Roi> roi_a;  // default: sphere of 3 mm at the arc start
  std::optional<Roi> roi_b;  // default: sphere of 3 mm at the arc end
  RayCastParams raycast;
  BoundaryCriteria criteria;
  OutlierParams outlier;
  SweepAxes sweep;

  Roi effective_roi_a() const;
  Roi effective_roi_b() const;
  std::uint64_t noise_seed() const { return seed + 2; }

  void validate() const;  // throws ConfigError
};

inline constexpr double kDefaultRoiRadiusMm = 3.0;

nlohmann::json to_json(const PipelineConfig& c);
nlohmann::json to_json(const PhantomSpec& p);

// Parses a (possibly partial) config; missing keys keep their defaults and
// unknown keys are rejected with ConfigError naming the dotted key path.
PipelineConfig config_from_json(const nlohmann::json& user);

// Applies "dotted.key=value" to a user config JSON. The value is parsed as
// JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& user, const std::string& assignment);

}  // namespace bundleray
