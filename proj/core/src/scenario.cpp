#include "patchslide/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "patchslide/errors.hpp"

namespace patchslide {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& name, const std::string& path, const std::string& what) {
  throw SchemaError(name + ": " + path + ": " + what);
}

const json& require(const json& node, const char* key, const std::string& name,
                    const std::string& path) {
  if (!node.is_object()) fail(name, path, "expected an object");
  auto it = node.find(key);
  if (it == node.end()) fail(name, path + "." + key, "missing required key");
  return *it;
}

double number(const json& node, const char* key, const std::string& name,
              const std::string& path) {
  const json& v = require(node, key, name, path);
  if (!v.is_number()) fail(name, path + "." + key, "expected a number");
  return v.get<double>();
}

double positive(const json& node, const char* key, const std::string& name,
                const std::string& path) {
  const double v = number(node, key, name, path);
  if (!(v > 0.0)) fail(name, path + "." + key, "expected a positive number");
  return v;
}

Vec2 vec2(const json& node, const char* key, const std::string& name, const std::string& path) {
  const json& v = require(node, key, name, path);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    fail(name, path + "." + key, "expected [x, y]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

Pose pose(const json& node, const char* key, const std::string& name, const std::string& path) {
  const json& v = require(node, key, name, path);
  if (!v.is_array() || v.size() != 3) fail(name, path + "." + key, "expected [x, y, theta]");
  for (const auto& c : v) {
    if (!c.is_number()) fail(name, path + "." + key, "expected [x, y, theta]");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(name + ": " + e.what());
  }

  Scenario out;
  SimConfig& cfg = out.config;

  const json& obj = require(doc, "object", name, "$");
  const Vec2 dims = vec2(obj, "dims_m", name, "object");
  if (dims.minCoeff() <= 0.0) fail(name, "object.dims_m", "dimensions must be positive");
  const double mass = positive(obj, "mass_kg", name, "object");
  const double mu_oe = positive(obj, "mu_oe", name, "object");
  const json& cop = require(obj, "cop_shift", name, "object");
  const double cop_c = number(cop, "c", name, "object.cop_shift");
  const double cop_delta = number(cop, "delta", name, "object.cop_shift");
  if (cop_c < 0.0 || cop_delta < 0.0) {
    fail(name, "object.cop_shift", "c and delta must be non-negative");
  }
  cfg.scene.object = make_object_model(0.5 * dims, mass, mu_oe, cop_c, cop_delta);
  if (obj.contains("a_cop_scale")) {
    cfg.scene.object.a_cop_scale = positive(obj, "a_cop_scale", name, "object");
  }

  const json& patch = require(doc, "patch", name, "$");
  const std::string type = require(patch, "type", name, "patch").get<std::string>();
  cfg.scene.patch.model.mu = positive(patch, "mu_ho", name, "patch");
  if (type == "fixed_disc") {
    cfg.scene.patch.fixed_radius_m = positive(patch, "radius_m", name, "patch");
  } else if (type == "hertz") {
    cfg.scene.patch.model.sphere_radius_m = positive(patch, "R_m", name, "patch");
    cfg.scene.patch.model.effective_modulus_pa = positive(patch, "E_star_pa", name, "patch");
  } else {
    fail(name, "patch.type", "expected \"hertz\" or \"fixed_disc\"");
  }
  if (patch.contains("B_override")) {
    const json& b = patch["B_override"];
    if (!b.is_array() || b.size() != 3) fail(name, "patch.B_override", "expected a 3x3 matrix");
    Mat3 m;
    for (int i = 0; i < 3; ++i) {
      if (!b[i].is_array() || b[i].size() != 3) {
        fail(name, "patch.B_override", "expected a 3x3 matrix");
      }
      for (int j = 0; j < 3; ++j) m(i, j) = b[i][j].get<double>();
    }
    try {
      cfg.scene.patch.b_override = LimitSurface::from_matrix(m, Frame::kHand).A;
    } catch (const Error& e) {
      fail(name, "patch.B_override", e.what());
    }
  }
  if (patch.contains("force_scale")) {
    cfg.scene.patch.force_scale = positive(patch, "force_scale", name, "patch");
  }
  if (patch.contains("torque_scale")) {
    cfg.scene.patch.torque_scale = positive(patch, "torque_scale", name, "patch");
  }

  const json& initial = require(doc, "initial", name, "$");
  cfg.q_o0 = pose(initial, "q_o_m_rad", name, "initial");
  cfg.q_h0 = pose(initial, "q_h_m_rad", name, "initial");
  cfg.scene.q_rel = rel_pose(cfg.q_h0, cfg.q_o0);

  const json& program = require(doc, "program", name, "$");
  if (!program.is_array() || program.empty()) fail(name, "program", "expected a non-empty array");
  for (size_t i = 0; i < program.size(); ++i) {
    const std::string path = "program[" + std::to_string(i) + "]";
    const json& seg = program[i];
    HandSegment hs;
    hs.duration_s = positive(seg, "duration_s", name, path);
    const Vec2 v = vec2(seg, "v_mps", name, path);
    hs.nu_h = {v.x(), v.y(), 0.0};
    if (seg.contains("omega_radps")) hs.nu_h.omega = number(seg, "omega_radps", name, path);
    if (seg.contains("controller") && seg["controller"].get<bool>()) {
      hs.use_controller = true;
    } else {
      hs.fn_n = positive(seg, "fn_n", name, path);
    }
    cfg.program.push_back(hs);
  }

  const json& sim = require(doc, "sim", name, "$");
  cfg.dt_s = positive(sim, "dt_s", name, "sim");
  cfg.duration_s = number(sim, "duration_s", name, "sim");
  if (cfg.duration_s < 0.0) fail(name, "sim.duration_s", "must be >= 0");
  if (sim.contains("record_stride")) {
    cfg.record_stride = static_cast<int>(number(sim, "record_stride", name, "sim"));
    if (cfg.record_stride < 1) fail(name, "sim.record_stride", "must be >= 1");
  }
  if (sim.contains("on_patch_exit")) {
    const std::string mode = sim["on_patch_exit"].get<std::string>();
    if (mode == "stop") {
      cfg.stop_on_patch_exit = true;
    } else if (mode == "continue") {
      cfg.stop_on_patch_exit = false;
    } else {
      fail(name, "sim.on_patch_exit", "expected \"stop\" or \"continue\"");
    }
  }
  if (sim.contains("f_min_n")) cfg.f_min_n = positive(sim, "f_min_n", name, "sim");

  if (doc.contains("controller")) {
    const json& ctl = doc["controller"];
    ControllerConfig cc;
    cc.gain = positive(ctl, "K_n_per_rad", name, "controller");
    cc.f_upper = positive(ctl, "f_upper_n", name, "controller");
    const Vec2 sat = vec2(ctl, "sat_rad", name, "controller");
    cc.sat_lo = sat.x();
    cc.sat_hi = sat.y();
    if (!(cc.sat_lo < cc.sat_hi)) fail(name, "controller.sat_rad", "expected lo < hi");
    if (ctl.contains("theta_ref")) {
      for (const auto& pt : ctl["theta_ref"]) {
        if (!pt.is_array() || pt.size() != 2) {
          fail(name, "controller.theta_ref", "expected [t, theta] pairs");
        }
        cc.theta_ref.emplace_back(pt[0].get<double>(), pt[1].get<double>());
      }
    }
    out.controller = cc;
  }
  return out;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path.string() + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.filename().string());
}

std::string scenario_to_json(const Scenario& scenario) {
  const SimConfig& cfg = scenario.config;
  json doc;
  doc["object"] = {
      {"dims_m", {2.0 * cfg.scene.object.half_extents_m.x(),
                  2.0 * cfg.scene.object.half_extents_m.y()}},
      {"mass_kg", cfg.scene.object.mass_kg},
      {"mu_oe", cfg.scene.object.mu},
      {"cop_shift", {{"c", cfg.scene.object.cop_shift_c},
                     {"delta", cfg.scene.object.cop_shift_delta}}},
      {"a_cop_scale", cfg.scene.object.a_cop_scale},
  };
  json patch;
  if (cfg.scene.patch.fixed_radius_m) {
    patch["type"] = "fixed_disc";
    patch["radius_m"] = *cfg.scene.patch.fixed_radius_m;
  } else {
    patch["type"] = "hertz";
    patch["R_m"] = cfg.scene.patch.model.sphere_radius_m;
    patch["E_star_pa"] = cfg.scene.patch.model.effective_modulus_pa;
  }
  patch["mu_ho"] = cfg.scene.patch.model.mu;
  patch["force_scale"] = cfg.scene.patch.force_scale;
  patch["torque_scale"] = cfg.scene.patch.torque_scale;
  if (cfg.scene.patch.b_override) {
    json rows = json::array();
    for (int i = 0; i < 3; ++i) {
      rows.push_back({(*cfg.scene.patch.b_override)(i, 0), (*cfg.scene.patch.b_override)(i, 1),
                      (*cfg.scene.patch.b_override)(i, 2)});
    }
    patch["B_override"] = rows;
  }
  doc["patch"] = patch;
  doc["initial"] = {
      {"q_o_m_rad", {cfg.q_o0.x, cfg.q_o0.y, cfg.q_o0.theta}},
      {"q_h_m_rad", {cfg.q_h0.x, cfg.q_h0.y, cfg.q_h0.theta}},
  };
  json program = json::array();
  for (const auto& seg : cfg.program) {
    json s = {{"duration_s", seg.duration_s},
              {"v_mps", {seg.nu_h.vx, seg.nu_h.vy}},
              {"omega_radps", seg.nu_h.omega}};
    if (seg.use_controller) {
      s["controller"] = true;
    } else {
      s["fn_n"] = seg.fn_n;
    }
    program.push_back(s);
  }
  doc["program"] = program;
  doc["sim"] = {
      {"dt_s", cfg.dt_s},
      {"duration_s", cfg.duration_s},
      {"record_stride", cfg.record_stride},
      {"on_patch_exit", cfg.stop_on_patch_exit ? "stop" : "continue"},
      {"f_min_n", cfg.f_min_n},
  };
  if (scenario.controller) {
    const ControllerConfig& cc = *scenario.controller;
    json ref = json::array();
    for (const auto& [t, th] : cc.theta_ref) ref.push_back({t, th});
    doc["controller"] = {
        {"K_n_per_rad", cc.gain},
        {"f_upper_n", cc.f_upper},
        {"sat_rad", {cc.sat_lo, cc.sat_hi}},
        {"theta_ref", ref},
    };
  }
  return doc.dump(2) + "\n";
}

}  // namespace patchslide
