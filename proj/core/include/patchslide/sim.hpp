#pragma once

#include <utility>
#include <vector>

#include "patchslide/scene.hpp"
#include "patchslide/solver.hpp"

namespace patchslide {

/// One piecewise-constant stretch of the hand program. A controller segment
/// gets its normal force from the control law instead of fn_n.
struct HandSegment {
  double duration_s = 0.0;
  Twist nu_h;
  double fn_n = 0.0;
  bool use_controller = false;
};

struct SimConfig {
  ContactScene scene;  // q_rel consistent with the initial poses below
  Pose q_o0;
  Pose q_h0;
  std::vector<HandSegment> program;
  double duration_s = 0.0;
  double dt_s = 0.01;
  int record_stride = 10;
  bool stop_on_patch_exit = true;
  double f_min_n = 0.05;  // keeps the patch limit surface well defined
};

struct SimState {
  double t = 0.0;
  Pose q_h;
  Pose q_o;
  double f_n = 0.0;
  ModeSolution solution;

  Pose q_rel() const { return rel_pose(q_h, q_o); }
};

enum class EventKind { kModeChange, kPatchExit };

struct SimEvent {
  double t = 0.0;
  EventKind kind = EventKind::kModeChange;
  Mode from = Mode::kSticking;
  Mode to = Mode::kSticking;
};

struct Trajectory {
  std::vector<SimState> states;
  std::vector<SimEvent> events;
  bool patch_exit = false;
};

/// Proportional normal-force law f_n = -K sat(theta_ref - theta_meas) + f_U,
/// with a piecewise-linear reference profile (t, theta) pairs.
struct ControllerConfig {
  double gain = 0.0;  // N/rad
  double f_upper = 0.0;
  double sat_lo = -0.5;  // rad
  double sat_hi = 0.5;
  std::vector<std::pair<double, double>> theta_ref;

  double reference_at(double t) const;
  double force(double theta_meas, double t, double f_min) const;
};

/// Advance one fixed step: rebuild both limit surfaces at f_n and the current
/// relative pose, solve the mode once, then integrate both poses with RK4.
/// The mode is frozen across the stage evaluations; alpha and the transforms
/// are re-evaluated per stage so smooth pivoting arcs keep full RK4 order.
SimState step(const ContactScene& scene, const SimState& state, const Twist& nu_h,
              double f_n, double dt);

/// Run the program. Deterministic for a fixed config; states recorded every
/// record_stride steps plus the final one. A patch leaving the object
/// footprint emits a PatchExit event and, by default, stops the run.
Trajectory run(const SimConfig& config);

/// Like run, but segments marked use_controller draw f_n from the control
/// law with theta_meas = the simulated object angle.
Trajectory run_controlled(const SimConfig& config, const ControllerConfig& ctrl);

/// Contact mode per linear-speed magnitude along a fixed direction with the
/// hand also rotating at omega_h; exposes the speed-dependent mode flip a
/// nonplanar cone section produces.
std::vector<Mode> rotation_mode_flip(const LsScene& scene, double omega_h,
                                     const Vec2& v_dir, const std::vector<double>& v_mags);

}  // namespace patchslide
