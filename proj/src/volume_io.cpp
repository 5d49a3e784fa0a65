#include "bundleray/volume_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

namespace bundleray {

using nlohmann::json;
namespace fs = std::filesystem;

const char* to_string(VolumeErrorKind kind) {
  switch (kind) {
    case VolumeErrorKind::Io: return "io";
    case VolumeErrorKind::MalformedHeader: return "malformed-header";
    case VolumeErrorKind::PayloadSizeMismatch: return "payload-size";
    case VolumeErrorKind::UnsupportedDtype: return "unsupported-dtype";
    case VolumeErrorKind::InvalidPayload: return "invalid-payload";
    case VolumeErrorKind::KindMismatch: return "kind-mismatch";
  }
  return "unknown";
}

VolumeIoError::VolumeIoError(VolumeErrorKind kind, const std::string& what)
    : Error(std::string("volume ") + to_string(kind) + ": " + what), kind_(kind) {}

fs::path header_path(const fs::path& data_path) {
  fs::path h = data_path;
  h += ".json";
  return h;
}

namespace {

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json geometry_to_json(const GridGeometry& g, const char* kind, const char* dtype) {
  json h;
  h["dims"] = g.dims;
  h["spacing_mm"] = vec_to_json(g.spacing);
  h["origin_mm"] = vec_to_json(g.origin);
  h["kind"] = kind;
  h["dtype"] = dtype;
  h["layout"] = "x-fastest";
  return h;
}

void write_header(const fs::path& path, const json& h) {
  std::ofstream out(header_path(path));
  if (!out) throw VolumeIoError(VolumeErrorKind::Io, "cannot write " + header_path(path).string());
  out << h.dump(2) << '\n';
  if (!out) throw VolumeIoError(VolumeErrorKind::Io, "write failed: " + header_path(path).string());
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw VolumeIoError(VolumeErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw VolumeIoError(VolumeErrorKind::Io, "write failed: " + path.string());
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VolumeIoError(VolumeErrorKind::Io, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<unsigned char> encode_f32le(const std::vector<float>& values) {
  std::vector<unsigned char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xFFu);
  }
  return bytes;
}

std::vector<float> decode_f32le(const std::vector<unsigned char>& bytes) {
  std::vector<float> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[i * 4 + b]) << (8 * b);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

struct Header {
  GridGeometry geometry;
  std::string kind;
  std::string dtype;
  json raw;
};

Vec3 json_to_vec(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3) throw VolumeIoError(VolumeErrorKind::MalformedHeader, std::string(field) + " must be a 3-array");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw VolumeIoError(VolumeErrorKind::MalformedHeader, std::string(field) + " must be numeric");
    v[i] = j[i].get<double>();
  }
  return v;
}

Header read_header(const fs::path& path) {
  std::ifstream in(header_path(path));
  if (!in) throw VolumeIoError(VolumeErrorKind::Io, "cannot read " + header_path(path).string());
  Header h;
  try {
    h.raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw VolumeIoError(VolumeErrorKind::MalformedHeader, e.what());
  }
  const json& r = h.raw;
  for (const char* field : {"dims", "spacing_mm", "origin_mm", "kind", "dtype", "layout"}) {
    if (!r.is_object() || !r.contains(field))
      throw VolumeIoError(VolumeErrorKind::MalformedHeader, std::string("missing field ") + field);
  }
  const json& dims = r["dims"];
  if (!dims.is_array() || dims.size() != 3)
    throw VolumeIoError(VolumeErrorKind::MalformedHeader, "dims must be a 3-array");
  for (int i = 0; i < 3; ++i) {
    if (!dims[i].is_number_integer() || dims[i].get<long long>() < 1)
      throw VolumeIoError(VolumeErrorKind::MalformedHeader, "dims must be positive integers");
    h.geometry.dims[i] = dims[i].get<int>();
  }
  h.geometry.spacing = json_to_vec(r["spacing_mm"], "spacing_mm");
  h.geometry.origin = json_to_vec(r["origin_mm"], "origin_mm");
  try {
    h.geometry.validate();
  } catch (const ConfigError& e) {
    throw VolumeIoError(VolumeErrorKind::MalformedHeader, e.what());
  }
  if (!r["kind"].is_string() || !r["dtype"].is_string() || !r["layout"].is_string())
    throw VolumeIoError(VolumeErrorKind::MalformedHeader, "kind, dtype and layout must be strings");
  h.kind = r["kind"].get<std::string>();
  h.dtype = r["dtype"].get<std::string>();
  if (h.kind != "scalar" && h.kind != "mask" && h.kind != "tensor6" && h.kind != "dwi")
    throw VolumeIoError(VolumeErrorKind::MalformedHeader, "unknown kind '" + h.kind + "'");
  if (r["layout"].get<std::string>() != "x-fastest")
    throw VolumeIoError(VolumeErrorKind::MalformedHeader, "layout must be x-fastest");
  const std::string expected = h.kind == "mask" ? "u8" : "f32le";
  if (h.dtype != expected)
    throw VolumeIoError(VolumeErrorKind::UnsupportedDtype,
                        "dtype '" + h.dtype + "' is not supported for kind " + h.kind + " (expected " + expected + ")");
  return h;
}

std::vector<float> read_f32_payload(const fs::path& path, std::size_t count) {
  const auto bytes = read_bytes(path);
  if (bytes.size() != count * 4)
    throw VolumeIoError(VolumeErrorKind::PayloadSizeMismatch,
                        path.string() + " holds " + std::to_string(bytes.size() / 4.0) + " floats, header requires " +
                            std::to_string(count));
  return decode_f32le(bytes);
}

AcquisitionSpec parse_acquisition(const json& r) {
  if (!r.contains("bvalue_s_per_mm2") || !r["bvalue_s_per_mm2"].is_number())
    throw VolumeIoError(VolumeErrorKind::MalformedHeader, "dwi header requires bvalue_s_per_mm2");
  if (!r.contains("gradients") || !r["gradients"].is_array() || r["gradients"].empty())
    throw VolumeIoError(VolumeErrorKind::MalformedHeader, "dwi header requires gradients");
  AcquisitionSpec acq;
  acq.bvalue = r["bvalue_s_per_mm2"].get<double>();
  if (r.contains("s0_nominal")) acq.s0 = r["s0_nominal"].get<double>();
  const json& grads = r["gradients"];
  if (json_to_vec(grads[0], "gradients[0]").norm() != 0.0)
    throw VolumeIoError(VolumeErrorKind::MalformedHeader, "first gradient must be (0,0,0), the unweighted image");
  for (std::size_t i = 1; i < grads.size(); ++i) acq.gradients.push_back(json_to_vec(grads[i], "gradients[i]"));
  return acq;
}

template <class T>
T expect_kind(AnyVolume v, const char* kind) {
  if (auto* p = std::get_if<T>(&v)) return std::move(*p);
  throw VolumeIoError(VolumeErrorKind::KindMismatch, std::string("expected a ") + kind + " volume");
}

}  // namespace

void save_volume(const ScalarVolume& v, const fs::path& path) {
  write_header(path, geometry_to_json(v.geometry, "scalar", "f32le"));
  write_bytes(path, encode_f32le(v.data));
}

void save_volume(const BinaryMask& v, const fs::path& path) {
  write_header(path, geometry_to_json(v.geometry, "mask", "u8"));
  write_bytes(path, {v.data.begin(), v.data.end()});
}

void save_volume(const TensorVolume& v, const fs::path& path) {
  write_header(path, geometry_to_json(v.geometry, "tensor6", "f32le"));
  write_bytes(path, encode_f32le(v.data));
}

void save_volume(const DWIVolume& v, const fs::path& path) {
  json h = geometry_to_json(v.geometry, "dwi", "f32le");
  h["bvalue_s_per_mm2"] = v.acq.bvalue;
  h["s0_nominal"] = v.acq.s0;
  json grads = json::array({json::array({0.0, 0.0, 0.0})});
  for (const auto& g : v.acq.gradients) grads.push_back(vec_to_json(g));
  h["gradients"] = grads;
  write_header(path, h);
  write_bytes(path, encode_f32le(v.data));
}

AnyVolume load_volume(const fs::path& path) {
  const Header h = read_header(path);
  const std::size_t n = h.geometry.voxel_count();
  if (h.kind == "mask") {
    const auto bytes = read_bytes(path);
    if (bytes.size() != n)
      throw VolumeIoError(VolumeErrorKind::PayloadSizeMismatch,
                          path.string() + " holds " + std::to_string(bytes.size()) + " bytes, header requires " +
                              std::to_string(n));
    BinaryMask m(h.geometry);
    for (std::size_t i = 0; i < n; ++i) {
      if (bytes[i] > 1) throw VolumeIoError(VolumeErrorKind::InvalidPayload, "mask values must be 0 or 1");
      m.data[i] = bytes[i];
    }
    return m;
  }
  if (h.kind == "scalar") {
    ScalarVolume s(h.geometry);
    s.data = read_f32_payload(path, n);
    return s;
  }
  if (h.kind == "tensor6") {
    TensorVolume t(h.geometry);
    t.data = read_f32_payload(path, n * 6);
    return t;
  }
  DWIVolume d(h.geometry, parse_acquisition(h.raw));
  d.data = read_f32_payload(path, n * d.image_count());
  return d;
}

ScalarVolume load_scalar_volume(const fs::path& path) { return expect_kind<ScalarVolume>(load_volume(path), "scalar"); }
BinaryMask load_mask(const fs::path& path) { return expect_kind<BinaryMask>(load_volume(path), "mask"); }
TensorVolume load_tensor_volume(const fs::path& path) { return expect_kind<TensorVolume>(load_volume(path), "tensor6"); }
DWIVolume load_dwi_volume(const fs::path& path) { return expect_kind<DWIVolume>(load_volume(path), "dwi"); }

GridGeometry load_geometry(const fs::path& path) { return read_header(path).geometry; }

}  // namespace bundleray
