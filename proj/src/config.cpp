#include "bundleray/config.hpp"

#include <cmath>
#include <limits>

#include "bundleray/serialize.hpp"

namespace bundleray {

using nlohmann::json;

void SweepAxes::validate() const {
  if (n.empty() || k.empty() || d_mm.empty()) throw ConfigError("sweep: axes n, k and d_mm must be non-empty");
  if (seeds.empty()) throw ConfigError("sweep: at least one seed is required");
}

Roi PipelineConfig::effective_roi_a() const {
  if (roi_a) return *roi_a;
  return {Vec3(phantom.major_radius_mm, 0.0, 0.0), kDefaultRoiRadiusMm};
}

Roi PipelineConfig::effective_roi_b() const {
  if (roi_b) return *roi_b;
  const double arc = deg_to_rad(phantom.arc_degrees);
  return {Vec3(phantom.major_radius_mm * std::cos(arc), phantom.major_radius_mm * std::sin(arc), 0.0),
          kDefaultRoiRadiusMm};
}

void PipelineConfig::validate() const {
  phantom.validate();
  tracking.validate();
  effective_roi_a().validate();
  effective_roi_b().validate();
  raycast.validate();
  criteria.validate();
  outlier.validate();
  sweep.validate();
}

json to_json(const PhantomSpec& p) {
  json grads = json::array();
  for (const auto& g : p.acq.gradients) grads.push_back(to_json(g));
  json j;
  j["major_radius_mm"] = p.major_radius_mm;
  j["tube_radius_mm"] = p.tube_radius_mm;
  j["arc_degrees"] = p.arc_degrees;
  j["inside_eigenvalues"] = p.inside_eigenvalues;
  j["outside_diffusivity"] = p.outside_diffusivity;
  j["grid"] = {{"dims", p.grid.dims}, {"spacing_mm", to_json(p.grid.spacing)}, {"origin_mm", to_json(p.grid.origin)}};
  j["bvalue_s_per_mm2"] = p.acq.bvalue;
  j["gradients"] = grads;
  j["s0"] = p.acq.s0;
  if (std::isinf(p.snr)) j["snr"] = "inf";
  else j["snr"] = p.snr;
  return j;
}

namespace {

json roi_json(const std::optional<Roi>& r) {
  if (!r) return nullptr;
  return {{"center_mm", to_json(r->center)}, {"radius_mm", r->radius}};
}

const json& roi_schema() {
  static const json schema = {{"center_mm", json::array({0.0, 0.0, 0.0})}, {"radius_mm", 1.0}};
  return schema;
}

void check_keys(const json& user, const json& schema, const std::string& path) {
  if (!user.is_object()) throw ConfigError("config: '" + (path.empty() ? std::string("<root>") : path) + "' must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!schema.contains(key)) throw ConfigError("config: unknown key '" + full + "'");
    const json& s = schema[key];
    if (s.is_object()) {
      check_keys(value, s, full);
    } else if (s.is_null() && value.is_object()) {
      check_keys(value, roi_schema(), full);
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: '" + section + "." + key + "' has the wrong type");
  }
}

Vec3 read_vec(const json& j, const char* key, const Vec3& fallback, const std::string& section) {
  if (!j.contains(key)) return fallback;
  try {
    return vec3_from_json(j.at(key));
  } catch (const std::exception&) {
    throw ConfigError("config: '" + section + "." + key + "' must be a 3-array of numbers");
  }
}

std::optional<Roi> read_roi(const json& j, const char* key, const std::optional<Roi>& fallback,
                            const std::string& section) {
  if (!j.contains(key)) return fallback;
  const json& r = j.at(key);
  if (r.is_null()) return std::nullopt;
  Roi roi;
  const std::string where = section + "." + key;
  roi.center = read_vec(r, "center_mm", roi.center, where);
  read(r, "radius_mm", roi.radius, where);
  return roi;
}

void read_phantom(const json& j, PhantomSpec& p) {
  const std::string s = "phantom";
  read(j, "major_radius_mm", p.major_radius_mm, s);
  read(j, "tube_radius_mm", p.tube_radius_mm, s);
  read(j, "arc_degrees", p.arc_degrees, s);
  read(j, "inside_eigenvalues", p.inside_eigenvalues, s);
  read(j, "outside_diffusivity", p.outside_diffusivity, s);
  if (j.contains("grid")) {
    const json& g = j["grid"];
    read(g, "dims", p.grid.dims, "phantom.grid");
    p.grid.spacing = read_vec(g, "spacing_mm", p.grid.spacing, "phantom.grid");
    p.grid.origin = read_vec(g, "origin_mm", p.grid.origin, "phantom.grid");
  }
  read(j, "bvalue_s_per_mm2", p.acq.bvalue, s);
  read(j, "s0", p.acq.s0, s);
  if (j.contains("gradients")) {
    const json& g = j["gradients"];
    if (!g.is_array()) throw ConfigError("config: 'phantom.gradients' must be an array");
    p.acq.gradients.clear();
    for (const auto& v : g) {
      try {
        p.acq.gradients.push_back(vec3_from_json(v));
      } catch (const std::exception&) {
        throw ConfigError("config: 'phantom.gradients' entries must be 3-arrays");
      }
    }
  }
  if (j.contains("snr")) {
    const json& v = j["snr"];
    if (v.is_string() && v.get<std::string>() == "inf") p.snr = std::numeric_limits<double>::infinity();
    else read(j, "snr", p.snr, s);
  }
}

}  // namespace

json to_json(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["use_analytic_centerline"] = c.use_analytic_centerline;
  j["keep_intermediates"] = c.keep_intermediates;
  j["output_dir"] = c.output_dir;
  j["phantom"] = to_json(c.phantom);
  j["tracking"] = {{"step_mm", c.tracking.step_mm},
                   {"fa_stop", c.tracking.fa_stop},
                   {"max_turn_deg", c.tracking.max_turn_deg},
                   {"max_steps", c.tracking.max_steps},
                   {"roi_a", roi_json(c.roi_a)},
                   {"roi_b", roi_json(c.roi_b)}};
  j["raycast"] = to_json(c.raycast);
  j["criteria"] = to_json(c.criteria);
  j["outlier"] = to_json(c.outlier);
  j["sweep"] = {{"n", c.sweep.n}, {"k", c.sweep.k}, {"d_mm", c.sweep.d_mm}, {"seeds", c.sweep.seeds}};
  return j;
}

PipelineConfig config_from_json(const json& user) {
  static const json schema = to_json(PipelineConfig{});
  check_keys(user, schema, "");

  PipelineConfig c;
  read(user, "seed", c.seed, "<root>");
  read(user, "use_analytic_centerline", c.use_analytic_centerline, "<root>");
  read(user, "keep_intermediates", c.keep_intermediates, "<root>");
  read(user, "output_dir", c.output_dir, "<root>");
  if (user.contains("phantom")) read_phantom(user["phantom"], c.phantom);
  c.phantom.seed = c.seed;
  if (user.contains("tracking")) {
    const json& t = user["tracking"];
    read(t, "step_mm", c.tracking.step_mm, "tracking");
    read(t, "fa_stop", c.tracking.fa_stop, "tracking");
    read(t, "max_turn_deg", c.tracking.max_turn_deg, "tracking");
    read(t, "max_steps", c.tracking.max_steps, "tracking");
    c.roi_a = read_roi(t, "roi_a", c.roi_a, "tracking");
    c.roi_b = read_roi(t, "roi_b", c.roi_b, "tracking");
  }
  if (user.contains("raycast")) {
    const json& r = user["raycast"];
    read(r, "n", c.raycast.n, "raycast");
    read(r, "k", c.raycast.k, "raycast");
    read(r, "m", c.raycast.m, "raycast");
    read(r, "d_mm", c.raycast.d_mm, "raycast");
  }
  if (user.contains("criteria")) {
    const json& r = user["criteria"];
    read(r, "fa_min", c.criteria.fa_min, "criteria");
    read(r, "theta_neighbor_deg", c.criteria.theta_neighbor_deg, "criteria");
    read(r, "theta_center_deg", c.criteria.theta_center_deg, "criteria");
  }
  if (user.contains("outlier")) {
    const json& r = user["outlier"];
    read(r, "max_index_gap", c.outlier.max_index_gap, "outlier");
    read(r, "max_passes", c.outlier.max_passes, "outlier");
  }
  if (user.contains("sweep")) {
    const json& r = user["sweep"];
    read(r, "n", c.sweep.n, "sweep");
    read(r, "k", c.sweep.k, "sweep");
    read(r, "d_mm", c.sweep.d_mm, "sweep");
    read(r, "seeds", c.sweep.seeds, "sweep");
  }
  c.validate();
  return c;
}

void apply_override(json& user, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }

  json* node = &user;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--set: malformed key '" + key + "'");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace bundleray
