#include "patchslide/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <vector>

#include "patchslide/errors.hpp"

namespace patchslide {

namespace {

struct Mapper {
  double min_x, max_y, scale;

  std::pair<double, double> operator()(double x, double y) const {
    return {(x - min_x) * scale, (max_y - y) * scale};  // y flipped for SVG
  }
};

void append_point(std::string& out, const Mapper& map, double x, double y, bool first) {
  const auto [px, py] = map(x, y);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%.3f,%.3f", first ? "" : " ", px, py);
  out += buf;
}

void polyline(std::string& out, const Mapper& map, const std::vector<Vec2>& pts,
              const char* color, double width) {
  if (pts.size() < 2) return;
  out += "<polyline fill=\"none\" stroke=\"";
  out += color;
  out += "\" stroke-width=\"";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", width);
  out += buf;
  out += "\" points=\"";
  for (size_t i = 0; i < pts.size(); ++i) append_point(out, map, pts[i].x(), pts[i].y(), i == 0);
  out += "\"/>\n";
}

}  // namespace

std::string trajectory_to_svg(const Trajectory& traj, const ContactScene& scene) {
  std::vector<Vec2> object_path, hand_path, pivot_path;
  for (const auto& s : traj.states) {
    object_path.push_back(s.q_o.xy());
    hand_path.push_back(s.q_h.xy());
    if (!s.solution.pivot.at_infinity) {
      const Vec3 p = s.q_h.vec() + rot(s.q_h.theta) * Vec3{s.solution.pivot.point.x(),
                                                           s.solution.pivot.point.y(), 0.0};
      pivot_path.push_back({p.x(), p.y()});
    }
  }

  const Vec2 he = scene.object.half_extents_m;
  double min_x = -he.x(), max_x = he.x(), min_y = -he.y(), max_y = he.y();
  auto grow = [&](const Vec2& p) {
    min_x = std::min(min_x, p.x() - he.norm());
    max_x = std::max(max_x, p.x() + he.norm());
    min_y = std::min(min_y, p.y() - he.norm());
    max_y = std::max(max_y, p.y() + he.norm());
  };
  for (const auto& p : object_path) grow(p);
  for (const auto& p : hand_path) grow(p);

  const double extent = std::max(max_x - min_x, max_y - min_y);
  const double scale = 800.0 / (extent > 0.0 ? extent : 1.0);
  const Mapper map{min_x, max_y, scale};

  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.3f %.3f\">\n",
                (max_x - min_x) * scale, (max_y - min_y) * scale, (max_x - min_x) * scale,
                (max_y - min_y) * scale);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Object outline snapshots, oldest faded.
  const size_t n_snaps = std::min<size_t>(12, traj.states.size());
  for (size_t k = 0; k < n_snaps; ++k) {
    const size_t idx = (traj.states.size() - 1) * k / std::max<size_t>(1, n_snaps - 1);
    const auto& s = traj.states[idx];
    const Mat3 r = rot(s.q_o.theta);
    out += "<polygon fill=\"none\" stroke=\"#9db4d0\" stroke-width=\"1\" points=\"";
    const Vec2 corners[4] = {{-he.x(), -he.y()}, {he.x(), -he.y()}, {he.x(), he.y()},
                             {-he.x(), he.y()}};
    for (int i = 0; i < 4; ++i) {
      const Vec3 w = s.q_o.vec() + r * Vec3{corners[i].x(), corners[i].y(), 0.0};
      append_point(out, map, w.x(), w.y(), i == 0);
    }
    out += "\"/>\n";
  }

  polyline(out, map, object_path, "blue", 2.0);
  polyline(out, map, hand_path, "red", 2.0);
  polyline(out, map, pivot_path, "cyan", 2.0);
  out += "</svg>\n";
  return out;
}

void write_trajectory_svg(const std::filesystem::path& path, const Trajectory& traj,
                          const ContactScene& scene) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << trajectory_to_svg(traj, scene);
}

}  // namespace patchslide
