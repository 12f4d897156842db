#include "patchslide/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "patchslide/errors.hpp"

namespace patchslide {

namespace {

constexpr char kHeader[] = "t,xo,yo,tho,xh,yh,thh,mode,alpha,px,py,fxh,fyh,mh,fn";

void append_num(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

std::string trajectory_to_csv(const Trajectory& traj) {
  std::string out{kHeader};
  out += '\n';
  for (const auto& s : traj.states) {
    append_num(out, s.t);
    for (double v : {s.q_o.x, s.q_o.y, s.q_o.theta, s.q_h.x, s.q_h.y, s.q_h.theta}) {
      out += ',';
      append_num(out, v);
    }
    out += ',';
    out += to_string(s.solution.mode);
    out += ',';
    if (s.solution.alpha) append_num(out, *s.solution.alpha);
    out += ',';
    if (!s.solution.pivot.at_infinity) {
      // Pivot expressed in the world frame for plotting alongside the paths.
      const Vec3 p_world =
          s.q_h.vec() + rot(s.q_h.theta) * Vec3{s.solution.pivot.point.x(),
                                                s.solution.pivot.point.y(), 0.0};
      append_num(out, p_world.x());
      out += ',';
      append_num(out, p_world.y());
    } else {
      out += ',';
    }
    for (double v : {s.solution.w_h.fx, s.solution.w_h.fy, s.solution.w_h.m, s.f_n}) {
      out += ',';
      append_num(out, v);
    }
    out += '\n';
  }
  return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << trajectory_to_csv(traj);
}

RecordedTrajectory parse_trajectory_csv(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(name + ": empty trajectory file");

  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };

  const auto header = split(line);
  auto col = [&](const char* key) {
    for (size_t i = 0; i < header.size(); ++i) {
      if (header[i] == key) return static_cast<int>(i);
    }
    throw SchemaError(name + ": missing column '" + std::string(key) + "'");
  };
  const int ct = col("t");
  const int cxo = col("xo"), cyo = col("yo"), ctho = col("tho");
  const int cxh = col("xh"), cyh = col("yh"), cthh = col("thh");
  const int cfn = col("fn");
  int cfx = -1, cfy = -1, cm = -1;
  try {
    cfx = col("fxh");
    cfy = col("fyh");
    cm = col("mh");
  } catch (const SchemaError&) {
    // wrench columns are optional
  }

  RecordedTrajectory rec;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    auto num = [&](int c) {
      if (c < 0 || static_cast<size_t>(c) >= cells.size() || cells[static_cast<size_t>(c)].empty()) {
        throw SchemaError(name + ": line " + std::to_string(line_no) + ": bad numeric cell");
      }
      return std::stod(cells[static_cast<size_t>(c)]);
    };
    rec.t.push_back(num(ct));
    rec.q_o.push_back({num(cxo), num(cyo), num(ctho)});
    rec.q_h.push_back({num(cxh), num(cyh), num(cthh)});
    rec.f_n.push_back(num(cfn));
    if (cfx >= 0) rec.w_h.push_back({num(cfx), num(cfy), num(cm)});
  }
  if (rec.t.size() < 2) throw SchemaError(name + ": trajectory needs at least 2 rows");
  return rec;
}

RecordedTrajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path.string() + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trajectory_csv(ss.str(), path.filename().string());
}

}  // namespace patchslide
