#pragma once

#include <optional>

#include "patchslide/limit_surface.hpp"
#include "patchslide/se2.hpp"

namespace patchslide {

/// Patch description as configured: either the Hertz law sizes the contact,
/// or a fixed-radius disc (still with the Hertzian pressure profile), or a
/// fully specified anisotropic B.
struct PatchConfig {
  PatchModel model;
  std::optional<double> fixed_radius_m;
  std::optional<Mat3> b_override;  // constant SPD B in the hand frame
  // Capacity corrections, the knobs parameter identification turns.
  double force_scale = 1.0;
  double torque_scale = 1.0;
};

/// A manipulation scene: what is sliding on what, and where the patch sits.
struct ContactScene {
  ObjectModel object;
  PatchConfig patch;
  Pose q_rel;  // hand frame pose in the object frame
};

/// Limit surfaces frozen at one normal force, ready for the solver and the
/// analysis sweeps.
struct LsScene {
  LimitSurface a;  // object-surface LS, object frame
  LimitSurface b;  // patch LS, hand frame
  Pose q_rel;
  double patch_radius_m = 0.0;

  Mat3 g() const { return adjoint(q_rel); }
  LimitSurface a_hat() const { return transform_ls(a, q_rel, Frame::kHand); }
};

/// Builds the object model, running the friction oracle once over a
/// uniform-pressure rectangle at unit load to get a_cop_unit.
ObjectModel make_object_model(const Vec2& half_extents_m, double mass_kg, double mu_oe,
                              double cop_shift_c, double cop_shift_delta,
                              int oracle_dirs = 400, int oracle_grid = 96);

double patch_contact_radius(const PatchConfig& patch, double f_n);

LimitSurface build_patch_ls(const PatchConfig& patch, double f_n);

/// Evaluate both limit surfaces at normal force f_n (patch position and COP
/// shift taken from scene.q_rel).
LsScene freeze(const ContactScene& scene, double f_n);

/// True when the patch disc lies fully inside the object footprint.
bool patch_inside_object(const ObjectModel& object, const Vec2& r, double patch_radius);

}  // namespace patchslide
