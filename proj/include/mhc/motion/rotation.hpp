#pragma once

#include "mhc/types.hpp"

namespace mhc::motion {

/// Continuous 6D rotation codec. The six numbers are the first two columns
/// of the rotation matrix; decoding re-orthonormalizes them with Gram-Schmidt
/// and completes the frame with a cross product.
///
/// Throws DegenerateRotation when either column normalization would divide
/// by less than 1e-9.
Mat3 sixd_to_matrix(const Rot6& rep);

/// Throws NotARotation unless R is orthonormal with det +1 (within 1e-6).
Rot6 matrix_to_sixd(const Mat3& rotation);

inline Rot6 identity_sixd() {
  Rot6 r;
  r << 1, 0, 0, 0, 1, 0;
  return r;
}

// Exponential map (axis * angle) conversions used for simulator joint state.
Mat3 expmap_to_matrix(const Vec3& axis_angle);
Vec3 matrix_to_expmap(const Mat3& rotation);

Mat3 yaw_matrix(double yaw);

/// Heading of a root frame: yaw of its forward (+x) axis projected on the
/// ground plane.
double yaw_of(const Mat3& rotation);

/// R expressed in its own heading frame (yaw removed).
Mat3 remove_yaw(const Mat3& rotation);

double geodesic_angle(const Mat3& a, const Mat3& b);

/// Angle between the frame's up axis and world vertical, in [0, pi].
double tilt_angle(const Mat3& rotation);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

bool is_rotation(const Mat3& rotation, double tolerance = 1e-6);

}  // namespace mhc::motion
