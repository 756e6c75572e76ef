#include "mhc/motion/rotation.hpp"

#include "mhc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mhc::motion {

namespace {
constexpr double kMinNorm = 1e-9;
}

Mat3 sixd_to_matrix(const Rot6& rep) {
  const Vec3 a1 = rep.head<3>();
  const Vec3 a2 = rep.tail<3>();

  const double n1 = a1.norm();
  if (!(n1 >= kMinNorm)) throw DegenerateRotation("6D rotation: first column has zero length");
  const Vec3 b1 = a1 / n1;

  const Vec3 residual = a2 - b1.dot(a2) * b1;
  const double n2 = residual.norm();
  if (!(n2 >= kMinNorm)) throw DegenerateRotation("6D rotation: second column is parallel to the first");
  const Vec3 b2 = residual / n2;

  Mat3 out;
  out.col(0) = b1;
  out.col(1) = b2;
  out.col(2) = b1.cross(b2);
  return out;
}

bool is_rotation(const Mat3& rotation, double tolerance) {
  if (!rotation.allFinite()) return false;
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tolerance && std::abs(rotation.determinant() - 1.0) <= tolerance;
}

Rot6 matrix_to_sixd(const Mat3& rotation) {
  if (!is_rotation(rotation)) throw NotARotation("matrix is not a proper rotation");
  Rot6 out;
  out.head<3>() = rotation.col(0);
  out.tail<3>() = rotation.col(1);
  return out;
}

Mat3 expmap_to_matrix(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle < 1e-12) {
    // First-order expansion keeps the map smooth at the origin.
    Mat3 skew;
    skew << 0, -axis_angle.z(), axis_angle.y(), axis_angle.z(), 0, -axis_angle.x(), -axis_angle.y(),
        axis_angle.x(), 0;
    return Mat3::Identity() + skew;
  }
  return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

Vec3 matrix_to_expmap(const Mat3& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.axis() * aa.angle();
}

Mat3 yaw_matrix(double yaw) {
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

double yaw_of(const Mat3& rotation) {
  return std::atan2(rotation(1, 0), rotation(0, 0));
}

Mat3 remove_yaw(const Mat3& rotation) {
  return yaw_matrix(-yaw_of(rotation)) * rotation;
}

double geodesic_angle(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c);
}

double tilt_angle(const Mat3& rotation) {
  return std::acos(std::clamp(rotation(2, 2), -1.0, 1.0));
}

double wrap_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle + std::numbers::pi, kTwoPi);
  if (a <= 0.0) a += kTwoPi;
  return a - std::numbers::pi;
}

}  // namespace mhc::motion
