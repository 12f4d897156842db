#include "patchslide/sim.hpp"

#include <algorithm>
#include <cmath>

#include "patchslide/errors.hpp"

namespace patchslide {

double ControllerConfig::reference_at(double t) const {
  if (theta_ref.empty()) return 0.0;
  if (t <= theta_ref.front().first) return theta_ref.front().second;
  if (t >= theta_ref.back().first) return theta_ref.back().second;
  for (size_t i = 1; i < theta_ref.size(); ++i) {
    if (t <= theta_ref[i].first) {
      const auto& [t0, v0] = theta_ref[i - 1];
      const auto& [t1, v1] = theta_ref[i];
      const double u = (t - t0) / (t1 - t0);
      return v0 + u * (v1 - v0);
    }
  }
  return theta_ref.back().second;
}

double ControllerConfig::force(double theta_meas, double t, double f_min) const {
  const double err = reference_at(t) - theta_meas;
  const double sat = std::clamp(err, sat_lo, sat_hi);
  return std::clamp(-gain * sat + f_upper, f_min, f_upper);
}

namespace {

// Object body twist at a given relative pose with the mode held fixed.
// Pivoting re-solves alpha at the new pose; if the pose has drifted out of
// the pivoting region mid-step, fall back to the adjacent mode's field
// (the twist map is continuous across both boundaries).
Twist object_twist(const ContactScene& scene, const LimitSurface& b, const Pose& q_rel,
                   const Twist& nu_h, double f_n, Mode mode) {
  if (mode == Mode::kSlipping) return {};
  const Mat3 g = adjoint(q_rel);
  if (mode == Mode::kSticking) {
    return Twist::from_vec(g.partialPivLu().solve(nu_h.vec()));
  }

  const LimitSurface a = build_object_ls(scene.object, q_rel.xy(), f_n);
  const LimitSurface a_hat = transform_ls(a, q_rel, Frame::kHand);
  const DiagonalizedPair pair = diagonalize(a_hat, b);
  const Twist nu_tilde = Twist::from_vec(pair.phi.transpose() * nu_h.vec());

  double alpha = 0.0;
  if (!pair.degenerate_c()) {
    if (auto root = solve_alpha(pair, nu_tilde)) {
      alpha = *root;
    } else {
      const Vec3 nu = nu_tilde.vec();
      if (nu.dot(pair.c().asDiagonal() * nu) > 0.0) return {};  // slipping side
      // else sticking side: alpha = 0
    }
  }
  const Vec3 y = (a_hat.A + alpha * b.A).ldlt().solve(nu_h.vec());
  return Twist::from_vec(g.partialPivLu().solve(a_hat.A * y));
}

struct PoseRates {
  Vec3 dq_h;
  Vec3 dq_o;
};

PoseRates rates(const ContactScene& scene, const LimitSurface& b, const Pose& q_h,
                const Pose& q_o, const Twist& nu_h, double f_n, Mode mode) {
  const Twist nu_o = object_twist(scene, b, rel_pose(q_h, q_o), nu_h, f_n, mode);
  return {rot(q_h.theta) * nu_h.vec(), rot(q_o.theta) * nu_o.vec()};
}

}  // namespace

SimState step(const ContactScene& scene, const SimState& state, const Twist& nu_h,
              double f_n, double dt) {
  if (dt <= 0.0) throw PreconditionError("step: dt must be positive");
  const LimitSurface b = build_patch_ls(scene.patch, f_n);
  const Pose q_rel = state.q_rel();
  const LimitSurface a = build_object_ls(scene.object, q_rel.xy(), f_n);
  const LimitSurface a_hat = transform_ls(a, q_rel, Frame::kHand);
  const Mat3 g = adjoint(q_rel);

  SimState next = state;
  next.f_n = f_n;
  next.solution = solve(a_hat, b, g, nu_h);
  const Mode mode = next.solution.mode;

  const Vec3 qh0 = state.q_h.vec();
  const Vec3 qo0 = state.q_o.vec();
  const PoseRates k1 = rates(scene, b, state.q_h, state.q_o, nu_h, f_n, mode);
  const PoseRates k2 = rates(scene, b, Pose::from_vec(qh0 + 0.5 * dt * k1.dq_h),
                             Pose::from_vec(qo0 + 0.5 * dt * k1.dq_o), nu_h, f_n, mode);
  const PoseRates k3 = rates(scene, b, Pose::from_vec(qh0 + 0.5 * dt * k2.dq_h),
                             Pose::from_vec(qo0 + 0.5 * dt * k2.dq_o), nu_h, f_n, mode);
  const PoseRates k4 = rates(scene, b, Pose::from_vec(qh0 + dt * k3.dq_h),
                             Pose::from_vec(qo0 + dt * k3.dq_o), nu_h, f_n, mode);

  next.q_h = Pose::from_vec(qh0 + dt / 6.0 * (k1.dq_h + 2.0 * k2.dq_h + 2.0 * k3.dq_h + k4.dq_h));
  next.q_o = Pose::from_vec(qo0 + dt / 6.0 * (k1.dq_o + 2.0 * k2.dq_o + 2.0 * k3.dq_o + k4.dq_o));
  next.t = state.t + dt;
  return next;
}

namespace {

ModeSolution solve_at(const ContactScene& scene, const SimState& state, const Twist& nu_h,
                      double f_n) {
  const LimitSurface b = build_patch_ls(scene.patch, f_n);
  const Pose q_rel = state.q_rel();
  const LimitSurface a = build_object_ls(scene.object, q_rel.xy(), f_n);
  const LimitSurface a_hat = transform_ls(a, q_rel, Frame::kHand);
  return solve(a_hat, b, adjoint(q_rel), nu_h);
}

Trajectory run_loop(const SimConfig& config, const ControllerConfig* ctrl) {
  Trajectory traj;
  if (config.duration_s <= 0.0 || config.program.empty()) return traj;
  if (config.dt_s <= 0.0) throw PreconditionError("run: dt must be positive");
  double covered = 0.0;
  for (const auto& seg : config.program) covered += seg.duration_s;
  if (covered + 1e-9 < config.duration_s) {
    throw PreconditionError("run: program segments do not cover the duration");
  }

  const int n_steps = static_cast<int>(std::llround(config.duration_s / config.dt_s));
  const int stride = std::max(1, config.record_stride);

  SimState state;
  state.q_h = config.q_h0;
  state.q_o = config.q_o0;

  auto segment_at = [&](double t) -> const HandSegment& {
    double acc = 0.0;
    for (const auto& seg : config.program) {
      acc += seg.duration_s;
      if (t < acc - 1e-12) return seg;
    }
    return config.program.back();
  };

  bool have_prev_mode = false;
  Mode prev_mode = Mode::kSticking;

  for (int i = 0; i < n_steps; ++i) {
    const double t = i * config.dt_s;
    const HandSegment& seg = segment_at(t);
    double f_n = seg.fn_n;
    if (seg.use_controller && ctrl != nullptr) {
      f_n = ctrl->force(state.q_o.theta, t, config.f_min_n);
    }

    const SimState next = step(config.scene, state, seg.nu_h, f_n, config.dt_s);
    // step() computed the mode solution at this step's start; snapshot it.
    state.t = t;
    state.f_n = f_n;
    state.solution = next.solution;

    if (have_prev_mode && state.solution.mode != prev_mode) {
      traj.events.push_back({t, EventKind::kModeChange, prev_mode, state.solution.mode});
    }
    prev_mode = state.solution.mode;
    have_prev_mode = true;

    if (i % stride == 0) traj.states.push_back(state);

    state.q_h = next.q_h;
    state.q_o = next.q_o;
    state.t = next.t;

    const double radius = patch_contact_radius(config.scene.patch, f_n);
    if (!patch_inside_object(config.scene.object, state.q_rel().xy(), radius)) {
      traj.events.push_back({state.t, EventKind::kPatchExit, prev_mode, prev_mode});
      traj.patch_exit = true;
      if (config.stop_on_patch_exit) {
        state.solution = solve_at(config.scene, state, seg.nu_h, f_n);
        traj.states.push_back(state);
        return traj;
      }
    }
  }

  // Final row at t = duration, resolved at the final pose.
  const HandSegment& last = config.program.back();
  double f_n = last.fn_n;
  if (last.use_controller && ctrl != nullptr) {
    f_n = ctrl->force(state.q_o.theta, state.t, config.f_min_n);
  }
  state.f_n = f_n;
  state.solution = solve_at(config.scene, state, last.nu_h, f_n);
  traj.states.push_back(state);
  return traj;
}

}  // namespace

Trajectory run(const SimConfig& config) { return run_loop(config, nullptr); }

Trajectory run_controlled(const SimConfig& config, const ControllerConfig& ctrl) {
  return run_loop(config, &ctrl);
}

std::vector<Mode> rotation_mode_flip(const LsScene& scene, double omega_h,
                                     const Vec2& v_dir, const std::vector<double>& v_mags) {
  if (omega_h == 0.0 && v_mags.empty()) return {};
  const Vec2 dir = v_dir.normalized();
  const DiagonalizedPair pair = diagonalize(scene.a_hat(), scene.b);
  std::vector<Mode> modes;
  modes.reserve(v_mags.size());
  for (double v : v_mags) {
    const Twist nu_h{v * dir.x(), v * dir.y(), omega_h};
    const Twist nu_tilde = Twist::from_vec(pair.phi.transpose() * nu_h.vec());
    modes.push_back(select_mode(pair, nu_tilde).first);
  }
  return modes;
}

}  // namespace patchslide
