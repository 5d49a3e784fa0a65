#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "bundleray/volume.hpp"

namespace bundleray {

enum class VolumeErrorKind { Io, MalformedHeader, PayloadSizeMismatch, UnsupportedDtype, InvalidPayload, KindMismatch };

const char* to_string(VolumeErrorKind kind);

class VolumeIoError : public Error {
 public:
  VolumeIoError(VolumeErrorKind kind, const std::string& what);
  VolumeErrorKind kind() const { return kind_; }

 private:
  VolumeErrorKind kind_;
};

// A volume on disk is a raw little-endian payload at `path` plus a JSON
// sidecar header at `path + ".json"`.
std::filesystem::path header_path(const std::filesystem::path& data_path);

void save_volume(const ScalarVolume& v, const std::filesystem::path& path);
void save_volume(const BinaryMask& v, const std::filesystem::path& path);
void save_volume(const TensorVolume& v, const std::filesystem::path& path);
void save_volume(const DWIVolume& v, const std::filesystem::path& path);

using AnyVolume = std::variant<ScalarVolume, BinaryMask, TensorVolume, DWIVolume>;

AnyVolume load_volume(const std::filesystem::path& path);
ScalarVolume load_scalar_volume(const std::filesystem::path& path);
BinaryMask load_mask(const std::filesystem::path& path);
TensorVolume load_tensor_volume(const std::filesystem::path& path);
DWIVolume load_dwi_volume(const std::filesystem::path& path);

// Reads only the header geometry, whatever the kind.
GridGeometry load_geometry(const std::filesystem::path& path);

}  // namespace bundleray
