#include "patchslide/se2.hpp"

#include <cmath>

namespace patchslide {

Mat3 rot(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat3 r;
  r << c, -s, 0.0,
       s,  c, 0.0,
       0.0, 0.0, 1.0;
  return r;
}

Mat3 jac(const Vec2& r) {
  Mat3 j;
  j << 1.0, 0.0, -r.y(),
       0.0, 1.0,  r.x(),
       0.0, 0.0,  1.0;
  return j;
}

Mat3 adjoint(const Pose& q_rel) {
  return rot(q_rel.theta).transpose() * jac(q_rel.xy());
}

Mat3 adjoint_inverse(const Pose& q_rel) {
  return jac(-q_rel.xy()) * rot(q_rel.theta);
}

Pose rel_pose(const Pose& q_h, const Pose& q_o) {
  const Vec3 d = q_h.vec() - q_o.vec();
  return Pose::from_vec(rot(-q_o.theta) * d);
}

Pose compose(const Pose& q_o, const Pose& q_rel) {
  return Pose::from_vec(q_o.vec() + rot(q_o.theta) * q_rel.vec());
}

}  // namespace patchslide
