#pragma once

#include <optional>

#include "patchslide/se2.hpp"

namespace patchslide {

/// Standard gravity used to turn object mass into support load.
inline constexpr double kGravity = 9.81;  // m/s^2

/// Peak torque of a Hertzian pressure disc, as a fraction of mu * a * f_n.
inline constexpr double kHertzTorqueCoeff = 3.0 * 3.14159265358979323846 / 16.0;

enum class Frame { kUnspecified, kObjectCop, kObject, kHand };

/// Ellipsoidal limit surface H(w) = w^T A w = 1 with A symmetric positive
/// definite, tagged with the frame the wrench coordinates live in.
struct LimitSurface {
  Mat3 A = Mat3::Identity();
  Frame frame = Frame::kUnspecified;

  double h(const Wrench& w) const { return w.vec().dot(A * w.vec()); }

  /// Validates symmetry (1e-12 relative) and positive definiteness
  /// (Cholesky); throws NotPositiveDefiniteError.
  static LimitSurface from_matrix(const Mat3& a, Frame frame = Frame::kUnspecified);

  /// B = diag(1/f_max^2, 1/f_max^2, 1/m_max^2).
  static LimitSurface from_capacities(double f_max, double m_max, Frame frame = Frame::kUnspecified);
};

/// Sphere-shaped soft finger obeying a Hertzian contact law.
struct PatchModel {
  double sphere_radius_m = 0.0;     // R
  double effective_modulus_pa = 0.0;  // E*
  double mu = 0.0;                  // hand-object friction coefficient
};

/// Flat rectangular object resting on the support surface. a_cop_unit is the
/// object-surface limit surface at the (unloaded) COP for a unit normal load;
/// build_object_ls scales and shifts it for the actual load.
struct ObjectModel {
  Vec2 half_extents_m = {0.0, 0.0};
  double mass_kg = 0.0;
  double mu = 0.0;            // object-environment friction coefficient
  double cop_shift_c = 0.0;   // COP-shift model parameters
  double cop_shift_delta = 1.0;
  LimitSurface a_cop_unit;
  /// Correction on a_cop_unit; the knob parameter identification turns.
  double a_cop_scale = 1.0;

  double weight() const { return mass_kg * kGravity; }
};

/// Result of the R^T J Lambda J^T R factorization of an SPD matrix:
/// orientation theta, COP offset r (as the J argument) and diagonal Lambda,
/// ordered lambda[0] >= lambda[1].
struct LsDecomposition {
  double theta = 0.0;
  Vec2 r = {0.0, 0.0};
  Vec3 lambda = {1.0, 1.0, 1.0};
  /// lambda1 ~ lambda2: the orientation is arbitrary and 0 was chosen.
  bool degenerate_orientation = false;

  Mat3 reconstruct() const;
};

struct HertzContact {
  double radius_m = 0.0;
  double f_max = 0.0;
  double m_max = 0.0;
};

/// Re-express a limit surface in a frame at relative pose q_rel:
/// A_new = G A G^T with G = R(theta_r)^T J(r). Positive definiteness is
/// preserved (G is full rank).
LimitSurface transform_ls(const LimitSurface& ls, const Pose& q_rel,
                          Frame new_frame = Frame::kUnspecified);

/// Factor A = R(theta)^T J(r) Lambda J(r)^T R(theta). When the two leading
/// eigenvalues tie within 1e-10 * trace the angle is arbitrary; theta = 0 is
/// returned and the result is flagged.
LsDecomposition decompose(const LimitSurface& ls);

/// Wrench sustaining a given sliding twist: w = -A^-1 nu / sqrt(nu^T A^-1 nu).
/// The result lies on the surface and is invariant to positive scaling of nu.
/// Throws ZeroTwistError for nu = 0.
Wrench wrench_from_twist(const LimitSurface& ls, const Twist& nu);

/// Unit sliding direction for a wrench on the surface: -A w normalized.
/// Throws NotOnSurfaceError when |H(w) - 1| > 1e-6.
Twist twist_dir_from_wrench(const LimitSurface& ls, const Wrench& w);

/// Hertz contact radius and friction capacities at normal force f_n:
/// a = (3 R f_n / (4 E*))^(1/3), f_max = mu f_n, m_max = mu (3 pi / 16) a f_n.
HertzContact hertz_contact(const PatchModel& patch, double f_n);

/// Fraction s in [0, 1) by which the object COP shifts toward the patch:
/// s = 1 - (c f_n / (m g) + 1)^-delta.
double cop_shift(const ObjectModel& object, double f_n);

/// Object-surface limit surface at the object frame under patch load f_n at
/// patch position r: a_cop_unit scaled for total load (m g + f_n), then
/// shifted by J(-s r).
LimitSurface build_object_ls(const ObjectModel& object, const Vec2& patch_pos, double f_n);

/// Patch limit surface, diagonal in the hand frame. The contact radius comes
/// from the Hertz law unless fixed_radius pins it (fixed-size patch); the
/// Hertzian pressure profile torque constant applies either way.
/// Throws NonPositiveForceError for f_n <= 0.
LimitSurface build_patch_ls(const PatchModel& patch, double f_n,
                            std::optional<double> fixed_radius = std::nullopt);

}  // namespace patchslide
