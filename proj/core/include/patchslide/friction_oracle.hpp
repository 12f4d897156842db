#pragma once

#include <vector>

#include "patchslide/limit_surface.hpp"
#include "patchslide/se2.hpp"

namespace patchslide {

// Brute-force Coulomb integration over a contact region. This is the ground
// truth the ellipsoid model is fitted to and checked against; it must stay
// independent of the limit-surface algebra.

enum class SupportShape { kRectangle, kDisc };
enum class PressureProfile { kUniform, kHertzian };

/// Contact region with an analytic pressure profile, normalized so the
/// discretized pressure integrates exactly to normal_load at any resolution.
struct PressureField {
  SupportShape shape = SupportShape::kDisc;
  Vec2 half_extents = {0.0, 0.0};  // disc: radius in x, y ignored
  PressureProfile profile = PressureProfile::kUniform;
  double mu = 0.0;
  double normal_load = 0.0;  // N

  static PressureField uniform_rect(const Vec2& half_extents, double load, double mu);
  static PressureField uniform_disc(double radius, double load, double mu);
  static PressureField hertzian_disc(double radius, double load, double mu);

  /// Unnormalized profile value at a point (0 outside the support).
  double profile_at(const Vec2& r) const;
  bool inside(const Vec2& r) const;
  /// Length used to balance force- and torque-dominated sampling.
  double characteristic_length() const;
};

/// Friction wrench about the field origin for sliding twist nu, by midpoint
/// rule on a grid_n x grid_n grid. Cells where the sliding speed is below
/// 1e-12 m/s contribute nothing (the integrand direction is undefined at the
/// rotation center, a measure-zero set). Throws ZeroTwistError.
Wrench friction_wrench(const PressureField& field, const Twist& nu, int grid_n);

/// Relative discretization error of the *analytic* profile mass on the grid,
/// before the exact renormalization applied by friction_wrench.
double integrated_load_error(const PressureField& field, int grid_n);

struct LsSample {
  Twist twist_dir;  // unit in scaled twist space
  Wrench wrench;
};

/// One friction wrench per quasi-uniform direction on the unit sphere in
/// (vx, vy, omega * L) with L the characteristic length.
std::vector<LsSample> sample_limit_surface(const PressureField& field, int n_dirs,
                                           int grid_n = 96);

struct EllipsoidFit {
  LimitSurface ls;
  double rms_residual = 0.0;  // RMS of (w^T A w - 1) over the samples
  bool eigenvalue_clamped = false;
};

/// Least-squares fit of w^T A w = 1 over the six unique entries of A.
/// Near-singular directions are clamped to 1e-12 and flagged. Throws
/// RankDeficientError when the normal system is singular, PreconditionError
/// for fewer than six samples.
EllipsoidFit fit_ellipsoid(const std::vector<LsSample>& samples,
                           Frame frame = Frame::kUnspecified);

}  // namespace patchslide
