#include "patchslide/limit_surface.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "patchslide/errors.hpp"

namespace patchslide {

namespace {

void check_spd(const Mat3& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (!a.allFinite() || (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw NotPositiveDefiniteError("limit surface matrix is not symmetric");
  }
  Eigen::LLT<Mat3> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("limit surface matrix is not positive definite");
  }
}

}  // namespace

LimitSurface LimitSurface::from_matrix(const Mat3& a, Frame frame) {
  check_spd(a);
  // Store the exactly symmetric part; callers often build A by congruence and
  // accumulate last-bit asymmetry.
  return {0.5 * (a + a.transpose()), frame};
}

LimitSurface LimitSurface::from_capacities(double f_max, double m_max, Frame frame) {
  if (f_max <= 0.0 || m_max <= 0.0) {
    throw NotPositiveDefiniteError("limit surface capacities must be positive");
  }
  Mat3 a = Mat3::Zero();
  a(0, 0) = 1.0 / (f_max * f_max);
  a(1, 1) = a(0, 0);
  a(2, 2) = 1.0 / (m_max * m_max);
  return {a, frame};
}

LimitSurface transform_ls(const LimitSurface& ls, const Pose& q_rel, Frame new_frame) {
  const Mat3 g = adjoint(q_rel);
  const Mat3 a_hat = g * ls.A * g.transpose();
  return {0.5 * (a_hat + a_hat.transpose()), new_frame};
}

Mat3 LsDecomposition::reconstruct() const {
  const Mat3 rm = rot(theta);
  const Mat3 jm = jac(r);
  return rm.transpose() * jm * lambda.asDiagonal() * jm.transpose() * rm;
}

LsDecomposition decompose(const LimitSurface& ls) {
  check_spd(ls.A);
  const Mat3& a = ls.A;

  // Intermediates satisfying x = (l1 - l2) cos 2theta, y = (l1 - l2) sin 2theta.
  const double x = (a(0, 0) - a(1, 1)) + (a(1, 2) * a(1, 2) - a(0, 2) * a(0, 2)) / a(2, 2);
  const double y = -2.0 * (a(0, 1) - a(0, 2) * a(1, 2) / a(2, 2));

  LsDecomposition d;
  const double tie_tol = 1e-10 * a.trace();
  if (std::hypot(x, y) < tie_tol) {
    // lambda1 ~ lambda2: any angle reconstructs; take 0.
    d.theta = 0.0;
    d.degenerate_orientation = true;
  } else {
    // Taking the angle of (x, y) directly lands on the lambda1 >= lambda2
    // ordering; the opposite ordering flips (x, y) and adds pi/2 to theta.
    d.theta = 0.5 * std::atan2(y, x);
  }

  const Mat3 rm = rot(d.theta);
  const Mat3 lam_tilde = rm * a * rm.transpose();
  d.r = {lam_tilde(1, 2) / lam_tilde(2, 2), -lam_tilde(0, 2) / lam_tilde(2, 2)};

  const Mat3 jm_inv = jac(-d.r);
  const Mat3 lam = jm_inv * lam_tilde * jm_inv.transpose();
  d.lambda = lam.diagonal();
  return d;
}

Wrench wrench_from_twist(const LimitSurface& ls, const Twist& nu) {
  if (nu.is_zero()) throw ZeroTwistError();
  const Vec3 ainv_nu = ls.A.llt().solve(nu.vec());
  const double denom = std::sqrt(nu.vec().dot(ainv_nu));
  return Wrench::from_vec(-ainv_nu / denom);
}

Twist twist_dir_from_wrench(const LimitSurface& ls, const Wrench& w) {
  const double h = ls.h(w);
  if (std::abs(h - 1.0) > 1e-6) throw NotOnSurfaceError(h);
  const Vec3 dir = -(ls.A * w.vec());
  return Twist::from_vec(dir / dir.norm());
}

HertzContact hertz_contact(const PatchModel& patch, double f_n) {
  if (f_n < 0.0) throw PreconditionError("hertz_contact: f_n must be >= 0");
  HertzContact c;
  if (f_n == 0.0) return c;
  c.radius_m = std::cbrt(0.75 * patch.sphere_radius_m / patch.effective_modulus_pa * f_n);
  c.f_max = patch.mu * f_n;
  c.m_max = patch.mu * kHertzTorqueCoeff * c.radius_m * f_n;
  return c;
}

double cop_shift(const ObjectModel& object, double f_n) {
  if (f_n < 0.0) throw PreconditionError("cop_shift: f_n must be >= 0");
  return 1.0 - std::pow(object.cop_shift_c * f_n / object.weight() + 1.0, -object.cop_shift_delta);
}

LimitSurface build_object_ls(const ObjectModel& object, const Vec2& patch_pos, double f_n) {
  if (f_n < 0.0) throw PreconditionError("build_object_ls: f_n must be >= 0");
  const double total_load = object.weight() + f_n;
  // Capacities grow linearly with the supported load, so the quadratic form
  // shrinks with its square. Pressure redistribution enters only through the
  // COP shift below.
  Mat3 a_cop = object.a_cop_scale * object.a_cop_unit.A / (total_load * total_load);
  const double s = cop_shift(object, f_n);
  const Mat3 jm = jac(-s * patch_pos);
  const Mat3 a = jm * a_cop * jm.transpose();
  return LimitSurface{0.5 * (a + a.transpose()), Frame::kObject};
}

LimitSurface build_patch_ls(const PatchModel& patch, double f_n,
                            std::optional<double> fixed_radius) {
  if (f_n <= 0.0) throw NonPositiveForceError(f_n);
  double radius = 0.0;
  if (fixed_radius) {
    radius = *fixed_radius;
  } else {
    radius = hertz_contact(patch, f_n).radius_m;
  }
  const double f_max = patch.mu * f_n;
  const double m_max = patch.mu * kHertzTorqueCoeff * radius * f_n;
  return LimitSurface::from_capacities(f_max, m_max, Frame::kHand);
}

}  // namespace patchslide
