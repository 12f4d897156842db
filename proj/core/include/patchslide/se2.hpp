#pragma once

#include <Eigen/Core>

namespace patchslide {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// Planar generalized coordinates [x, y, theta]. The angle is kept
/// unwrapped: integration must stay continuous across +-pi, so nothing in
/// this module ever normalizes it. Wrap only at display time.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec3 vec() const { return {x, y, theta}; }
  Vec2 xy() const { return {x, y}; }
  static Pose from_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

/// Planar body twist [vx, vy, omega].
struct Twist {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;

  Vec3 vec() const { return {vx, vy, omega}; }
  Vec2 linear() const { return {vx, vy}; }
  double norm() const { return vec().norm(); }
  bool is_zero() const { return vx == 0.0 && vy == 0.0 && omega == 0.0; }
  static Twist from_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

/// Planar wrench [fx, fy, m].
struct Wrench {
  double fx = 0.0;
  double fy = 0.0;
  double m = 0.0;

  Vec3 vec() const { return {fx, fy, m}; }
  Vec2 force() const { return {fx, fy}; }
  static Wrench from_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

/// Rotation about z as a 3x3 acting on [x, y, theta] triples.
Mat3 rot(double theta);

/// Point Jacobian J(r) for a point at planar offset r; satisfies
/// J(r1) J(r2) = J(r1 + r2) and J(r)^-1 = J(-r).
Mat3 jac(const Vec2& r);

/// Twist/wrench transform G(q_rel) = R(theta_r)^T J(r) between a base frame
/// and a frame at relative pose q_rel. Twists map as nu_p = G nu_o, wrenches
/// pull back as w_o = G^T w_p; G is full rank for every input.
Mat3 adjoint(const Pose& q_rel);

/// G(q_rel)^-1 = J(-r) R(theta_r), without forming an explicit inverse.
Mat3 adjoint_inverse(const Pose& q_rel);

/// Relative pose of frame 'h' expressed in frame 'o':
/// q_rel = R(-theta_o) (q_h - q_o).
Pose rel_pose(const Pose& q_h, const Pose& q_o);

/// Inverse of rel_pose: compose(q_o, rel_pose(q_h, q_o)) == q_h.
Pose compose(const Pose& q_o, const Pose& q_rel);

}  // namespace patchslide
