#pragma once

#include <vector>

#include "patchslide/scene.hpp"
#include "patchslide/solver.hpp"

namespace patchslide {

// Planning-oriented tools built on the quasi-static solve: motion cones and
// their loci, sticking/slipping margins, boundary fixed-point stability,
// rotation-reach estimates, and parameter identification from trajectories.

struct ConeSample {
  Vec2 v;  // linear velocity, hand frame
  Mode mode;
};

/// Slice of the mode cones at a fixed hand angular velocity.
struct MotionConeSection {
  double omega_h = 0.0;
  /// Points where nu~^T C nu~ changes sign (sticking boundary), grouped into
  /// polylines; for omega_h = 0 each boundary is a ray from the origin.
  std::vector<std::vector<Vec2>> stick_boundaries;
  /// Same for the slipping boundary nu~^T C (C+I)^-2 nu~ = 0.
  std::vector<std::vector<Vec2>> slip_boundaries;
  std::vector<ConeSample> samples;
};

MotionConeSection motion_cone_section(const LsScene& scene, double omega_h, int n_dirs,
                                      double v_max = 0.05);

struct Line2 {
  Vec2 point;
  Vec2 dir;  // unit
};

struct HandLocus {
  std::vector<Line2> lines;      // at most two, parallel
  std::vector<Vec2> roots;       // raw boundary placements found by the scan
  double rms_residual_m = 0.0;   // perpendicular scatter about the fitted lines
};

/// Locus of patch placements for which a given linear hand velocity sits on
/// the sticking-cone boundary; the object-surface ellipsoid is held fixed
/// while the placement varies. Throws NoLocusError when the scan finds no
/// boundary crossing inside the box.
HandLocus hand_locus_lines(const LsScene& scene, const Vec2& v_h, double search_box_m,
                           int grid_n = 161);

enum class ConicKind { kEllipse, kParabola, kHyperbola, kDegenerate };

struct ConicFit {
  /// Coefficients [a, b, c, d, e, f] of a x^2 + b xy + c y^2 + d x + e y + f = 0.
  Eigen::Matrix<double, 6, 1> coeffs;
  ConicKind kind = ConicKind::kDegenerate;
  double rms_residual_m = 0.0;  // Sampson distance RMS
  std::vector<Vec2> pivots;
};

/// Sweep hand twists, collect the pivot points of the pivoting solves and fit
/// the conic they lie on. Throws InsufficientPointsError when the scene
/// produces too few pivoting samples.
ConicFit pivot_locus(const LsScene& scene, int n_dirs);

bool conic_contains(const ConicFit& fit, const Vec2& p);

struct MarginReport {
  Twist stick_twist;  // hand frame, unit
  Twist slip_twist;
  Wrench w_dist;  // smallest disturbance (object frame) that breaks sticking
  double margin = 0.0;
  bool tie = false;  // all eigenvalues equal: every direction has the same margin
};

/// Extremal-margin twists from the principal sliding wrenches, and the
/// smallest mode-breaking disturbance wrench. Throws DegenerateCError.
MarginReport max_margin(const DiagonalizedPair& pair, const LimitSurface& a_hat,
                        const Mat3& g);

struct StabilityReport {
  int sign = 0;  // negative: stable fixed point
  double eigen_estimate = 0.0;  // grad(alpha) . u
  int probe_sign = 0;  // from the perturbation probe; should agree with sign
};

/// Stability of the boundary fixed point for a twist on the sticking-pivoting
/// boundary, from the sign of the linearized relative-pose dynamics' only
/// nonzero eigenvalue. Throws NotOnBoundaryError when alpha at the nominal
/// pose exceeds 1e-6.
StabilityReport fixed_point_stability(const LsScene& scene, const Twist& nu_h);

enum class PlacementClass { kInfeasible = 0, kSticking = 1, kRotating = 2 };

struct MaxRotationField {
  std::vector<double> xs;  // placement grid, object frame
  std::vector<double> ys;
  std::vector<double> estimate_rad;     // row-major [iy * nx + ix], NaN when infeasible
  std::vector<PlacementClass> cls;
  int nx = 0;
  int ny = 0;
};

/// Estimated total rotation reachable with a straight-line hand motion, per
/// initial patch placement: the angle from the velocity direction to the
/// stable boundary of the planar sticking cone at that placement.
MaxRotationField max_rotation_estimate(const ContactScene& scene, double f_n,
                                       const Vec2& v_dir, int nx, int ny);

/// Pose samples of one recorded (or simulated) experiment.
struct RecordedTrajectory {
  std::vector<double> t;
  std::vector<Pose> q_h;
  std::vector<Pose> q_o;
  std::vector<double> f_n;
  std::vector<Wrench> w_h;  // optional; empty when the recording lacks forces
};

struct FitOptions {
  int max_evals = 500;
  double initial_spread = 0.25;  // relative simplex size around the start
  double sim_dt = 0.0;           // 0: use the recording's sample spacing
};

struct FitResult {
  double a_cop_scale = 1.0;
  double b_force_scale = 1.0;
  double b_torque_scale = 1.0;
  double cop_c = 0.0;
  double cop_delta = 1.0;
  double rms_pose_m = 0.0;  // final integrated pose error
  int evaluations = 0;
  bool improved = true;  // false: search never beat the initial guess
};

/// Identify friction parameters by replaying the recorded hand motion and
/// normal forces through the simulator and minimizing the pose mismatch with
/// a derivative-free simplex search. Wrench samples, when present, join the
/// objective; without them the overall scale of both surfaces is a gauge
/// freedom poses cannot pin down.
FitResult fit_parameters(const RecordedTrajectory& recorded, const ContactScene& scene,
                         const FitOptions& options = {});

ContactScene apply_fit(const ContactScene& scene, const FitResult& fit);

}  // namespace patchslide
