#pragma once

#include <filesystem>
#include <string>

#include "patchslide/sim.hpp"

namespace patchslide {

/// Vector overlay of a run: object rectangle snapshots, hand path (red),
/// object path (blue) and pivot path (cyan).
std::string trajectory_to_svg(const Trajectory& traj, const ContactScene& scene);

void write_trajectory_svg(const std::filesystem::path& path, const Trajectory& traj,
                          const ContactScene& scene);

}  // namespace patchslide
