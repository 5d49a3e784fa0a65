#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "bundleray/tensor.hpp"

namespace bundleray::testing {

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

inline DiffusionTensor rotated_diag(const Eigen::Matrix3d& r, double a, double b, double c) {
  return DiffusionTensor::from_matrix(r * Eigen::Vector3d(a, b, c).asDiagonal() * r.transpose());
}

inline DiffusionTensor random_spd(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1e-3, 3.0e-3);
  return rotated_diag(random_rotation(rng), u(rng), u(rng), u(rng));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("bundleray_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace bundleray::testing
