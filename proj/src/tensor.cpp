#include "bundleray/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace bundleray {

DiffusionTensor DiffusionTensor::from_matrix(const Eigen::Matrix3d& m) {
  return {{m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), 0.5 * (m(0, 2) + m(2, 0)), m(1, 1),
           0.5 * (m(1, 2) + m(2, 1)), m(2, 2)}};
}

Eigen::Matrix3d DiffusionTensor::matrix() const {
  Eigen::Matrix3d m;
  m << c[0], c[1], c[2],
       c[1], c[3], c[4],
       c[2], c[4], c[5];
  return m;
}

bool DiffusionTensor::is_finite() const {
  return std::all_of(c.begin(), c.end(), [](double x) { return std::isfinite(x); });
}

double DiffusionTensor::quadratic_form(const Vec3& g) const {
  return c[0] * g.x() * g.x() + c[3] * g.y() * g.y() + c[5] * g.z() * g.z() +
         2.0 * (c[1] * g.x() * g.y() + c[2] * g.x() * g.z() + c[4] * g.y() * g.z());
}

EigenSystem eigensystem(const DiffusionTensor& d) {
  if (!d.is_finite()) throw Error("eigensystem: tensor has non-finite components");

  Eigen::Matrix3d a = d.matrix();
  Eigen::Matrix3d v = Eigen::Matrix3d::Identity();
  const double frob = a.norm();

  if (frob > 0.0) {
    constexpr int kMaxSweeps = 50;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      const double off = std::sqrt(a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2));
      if (off <= 1e-18 * frob) break;
      for (int p = 0; p < 2; ++p) {
        for (int q = p + 1; q < 3; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0) continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          double t;
          if (std::abs(theta) > 1e150) {
            t = 0.5 / theta;
          } else {
            t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          }
          const double cs = 1.0 / std::sqrt(t * t + 1.0);
          const double sn = t * cs;
          Eigen::Matrix3d j = Eigen::Matrix3d::Identity();
          j(p, p) = cs;
          j(q, q) = cs;
          j(p, q) = sn;
          j(q, p) = -sn;
          a = (j.transpose() * a * j).eval();
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          v = (v * j).eval();
        }
      }
    }
  }

  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int k) { return a(i, i) > a(k, k); });

  EigenSystem es;
  for (int i = 0; i < 3; ++i) {
    es.values[i] = a(order[i], order[i]);
    es.vectors[i] = v.col(order[i]).normalized();
  }
  es.fa = fractional_anisotropy(es.values[0], es.values[1], es.values[2]);
  return es;
}

double fractional_anisotropy(double l1, double l2, double l3) {
  const double norm2 = l1 * l1 + l2 * l2 + l3 * l3;
  if (norm2 == 0.0) return 0.0;
  const double mean = (l1 + l2 + l3) / 3.0;
  const double dev2 = (l1 - mean) * (l1 - mean) + (l2 - mean) * (l2 - mean) + (l3 - mean) * (l3 - mean);
  const double fa = std::sqrt(1.5 * dev2 / norm2);
  return std::clamp(fa, 0.0, 1.0);
}

Vec3 principal_direction(const DiffusionTensor& d) { return eigensystem(d).principal(); }

double acute_angle_deg(const Vec3& a, const Vec3& b) {
  const double c = std::min(1.0, std::abs(a.dot(b)));
  return rad_to_deg(std::acos(c));
}

AcquisitionSpec AcquisitionSpec::default_six(double bvalue, double s0) {
  AcquisitionSpec acq;
  acq.bvalue = bvalue;
  acq.s0 = s0;
  acq.gradients = {Vec3(1, 1, 0), Vec3(1, -1, 0), Vec3(1, 0, 1),
                   Vec3(1, 0, -1), Vec3(0, 1, 1), Vec3(0, 1, -1)};
  for (auto& g : acq.gradients) g.normalize();
  return acq;
}

namespace {

Eigen::MatrixXd design_matrix(const AcquisitionSpec& acq) {
  const auto rows = static_cast<Eigen::Index>(acq.gradients.size());
  Eigen::MatrixXd x(rows, 6);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vec3& g = acq.gradients[static_cast<std::size_t>(i)];
    x.row(i) << g.x() * g.x(), 2 * g.x() * g.y(), 2 * g.x() * g.z(),
                g.y() * g.y(), 2 * g.y() * g.z(), g.z() * g.z();
  }
  return -acq.bvalue * x;
}

}  // namespace

void AcquisitionSpec::validate() const {
  if (!(bvalue > 0.0)) throw ConfigError("acquisition: bvalue must be > 0");
  if (!(s0 > 0.0)) throw ConfigError("acquisition: s0 must be > 0");
  if (gradients.size() < 6)
    throw ConfigError("acquisition: at least 6 weighted gradient directions are required");
  for (const auto& g : gradients) {
    if (!g.allFinite() || std::abs(g.norm() - 1.0) > 1e-9)
      throw ConfigError("acquisition: weighted gradients must have unit norm");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design_matrix(*this));
  qr.setThreshold(1e-10);
  if (qr.rank() < 6) throw ConfigError("acquisition: gradient design matrix is rank deficient");
}

TensorFitter::TensorFitter(const AcquisitionSpec& acq) {
  acq.validate();
  const Eigen::MatrixXd x = design_matrix(acq);
  // Least-squares operator X^+ obtained column by column from a pivoted QR.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(x.rows(), x.rows());
  solve_ = qr.solve(identity);
}

TensorFit TensorFitter::fit(std::span<const double> weighted, double s0) const {
  if (weighted.size() != gradient_count())
    throw Error("fit_tensor: signal count does not match gradient count");
  if (!(s0 > 0.0)) throw Error("fit_tensor: unweighted signal must be > 0");

  TensorFit out;
  const double floor = 1e-6 * s0;
  Eigen::VectorXd y(static_cast<Eigen::Index>(weighted.size()));
  for (std::size_t i = 0; i < weighted.size(); ++i) {
    double s = weighted[i];
    if (!(s > 0.0)) {
      s = floor;
      ++out.clamped;
    }
    y(static_cast<Eigen::Index>(i)) = std::log(s / s0);
  }
  const Eigen::Matrix<double, 6, 1> coef = solve_ * y;
  for (int i = 0; i < 6; ++i) out.tensor.c[static_cast<std::size_t>(i)] = coef(i);
  return out;
}

TensorFit fit_tensor(std::span<const double> weighted, double s0, const AcquisitionSpec& acq) {
  return TensorFitter(acq).fit(weighted, s0);
}

std::vector<double> simulate_signals(const DiffusionTensor& d, const AcquisitionSpec& acq) {
  std::vector<double> out;
  out.reserve(acq.gradients.size());
  for (const auto& g : acq.gradients) out.push_back(acq.s0 * std::exp(-acq.bvalue * d.quadratic_form(g)));
  return out;
}

}  // namespace bundleray
