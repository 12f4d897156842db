#include "patchslide/scene.hpp"

#include "patchslide/errors.hpp"
#include "patchslide/friction_oracle.hpp"

namespace patchslide {

ObjectModel make_object_model(const Vec2& half_extents_m, double mass_kg, double mu_oe,
                              double cop_shift_c, double cop_shift_delta,
                              int oracle_dirs, int oracle_grid) {
  if (half_extents_m.minCoeff() <= 0.0 || mass_kg <= 0.0 || mu_oe <= 0.0) {
    throw PreconditionError("make_object_model: geometry, mass and friction must be positive");
  }
  ObjectModel obj;
  obj.half_extents_m = half_extents_m;
  obj.mass_kg = mass_kg;
  obj.mu = mu_oe;
  obj.cop_shift_c = cop_shift_c;
  obj.cop_shift_delta = cop_shift_delta;

  // Unloaded, the pressure under the object is uniform; fit the ellipsoid to
  // the oracle at unit load once and rescale per step.
  const PressureField field = PressureField::uniform_rect(half_extents_m, 1.0, mu_oe);
  const auto samples = sample_limit_surface(field, oracle_dirs, oracle_grid);
  EllipsoidFit fit = fit_ellipsoid(samples, Frame::kObjectCop);
  obj.a_cop_unit = fit.ls;
  return obj;
}

double patch_contact_radius(const PatchConfig& patch, double f_n) {
  if (patch.fixed_radius_m) return *patch.fixed_radius_m;
  return hertz_contact(patch.model, f_n).radius_m;
}

LimitSurface build_patch_ls(const PatchConfig& patch, double f_n) {
  if (patch.b_override) {
    return LimitSurface::from_matrix(*patch.b_override, Frame::kHand);
  }
  if (patch.force_scale == 1.0 && patch.torque_scale == 1.0) {
    return build_patch_ls(patch.model, f_n, patch.fixed_radius_m);
  }
  if (f_n <= 0.0) throw NonPositiveForceError(f_n);
  const double radius = patch_contact_radius(patch, f_n);
  const double f_max = patch.force_scale * patch.model.mu * f_n;
  const double m_max = patch.torque_scale * patch.model.mu * kHertzTorqueCoeff * radius * f_n;
  return LimitSurface::from_capacities(f_max, m_max, Frame::kHand);
}

LsScene freeze(const ContactScene& scene, double f_n) {
  LsScene out;
  out.a = build_object_ls(scene.object, scene.q_rel.xy(), f_n);
  out.b = build_patch_ls(scene.patch, f_n);
  out.q_rel = scene.q_rel;
  out.patch_radius_m = patch_contact_radius(scene.patch, f_n);
  return out;
}

bool patch_inside_object(const ObjectModel& object, const Vec2& r, double patch_radius) {
  return std::abs(r.x()) <= object.half_extents_m.x() - patch_radius &&
         std::abs(r.y()) <= object.half_extents_m.y() - patch_radius;
}

}  // namespace patchslide
