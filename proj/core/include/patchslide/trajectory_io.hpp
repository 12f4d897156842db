#pragma once

#include <filesystem>
#include <string>

#include "patchslide/analysis.hpp"
#include "patchslide/sim.hpp"

namespace patchslide {

/// CSV header: t,xo,yo,tho,xh,yh,thh,mode,alpha,px,py,fxh,fyh,mh,fn.
/// World-frame pivot columns stay empty when the pivot is at infinity;
/// alpha is empty outside sticking/pivoting. Output is byte-deterministic
/// for identical trajectories.
std::string trajectory_to_csv(const Trajectory& traj);

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Reads the columns fit_parameters needs (poses, normal force, hand wrench).
RecordedTrajectory read_trajectory_csv(const std::filesystem::path& path);

RecordedTrajectory parse_trajectory_csv(const std::string& text, const std::string& name);

}  // namespace patchslide
