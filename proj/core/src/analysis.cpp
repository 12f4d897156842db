#include "patchslide/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "patchslide/errors.hpp"
#include "patchslide/parallel.hpp"
#include "patchslide/sim.hpp"

namespace patchslide {

namespace {

double stick_form(const DiagonalizedPair& pair, const Vec3& nu) {
  const Vec3 nt = pair.phi.transpose() * nu;
  return nt.dot(pair.c().asDiagonal() * nt);
}

double slip_form(const DiagonalizedPair& pair, const Vec3& nu) {
  const Vec3 nt = pair.phi.transpose() * nu;
  const Vec3 w = pair.c().cwiseQuotient(pair.lambda.cwiseProduct(pair.lambda));
  return nt.dot(w.asDiagonal() * nt);
}

double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 80) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((flo <= 0.0) == (fm <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

MotionConeSection motion_cone_section(const LsScene& scene, double omega_h, int n_dirs,
                                      double v_max) {
  if (n_dirs < 90) throw PreconditionError("motion_cone_section: n_dirs must be >= 90");
  const DiagonalizedPair pair = diagonalize(scene.a_hat(), scene.b);

  MotionConeSection section;
  section.omega_h = omega_h;

  const auto dir_at = [&](int k) {
    const double phi = 2.0 * std::numbers::pi * k / n_dirs;
    return Vec2{std::cos(phi), std::sin(phi)};
  };

  // Mode labels on a polar grid of the section plane.
  const int n_mags = 8;
  for (int k = 0; k < n_dirs; ++k) {
    const Vec2 d = dir_at(k);
    for (int j = 1; j <= n_mags; ++j) {
      const double v = v_max * j / n_mags;
      const Twist nu{v * d.x(), v * d.y(), omega_h};
      const Twist nt = Twist::from_vec(pair.phi.transpose() * nu.vec());
      section.samples.push_back({v * d, select_mode(pair, nt).first});
    }
  }

  if (omega_h == 0.0) {
    // Homogeneous case: modes depend on direction only, boundaries are rays.
    auto ray_value = [&](double phi) {
      return stick_form(pair, {std::cos(phi), std::sin(phi), 0.0});
    };
    const int scan = 4 * n_dirs;
    double prev = ray_value(0.0);
    for (int k = 1; k <= scan; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / scan;
      const double cur = ray_value(phi);
      if ((prev <= 0.0) != (cur <= 0.0)) {
        const double root = bisect(ray_value, phi - 2.0 * std::numbers::pi / scan, phi);
        const Vec2 d{std::cos(root), std::sin(root)};
        section.stick_boundaries.push_back({Vec2{0.0, 0.0}, v_max * d});
      }
      prev = cur;
    }
    return section;
  }

  // Nonplanar slice: scan each ray for magnitude crossings of both forms,
  // then chain crossing k of consecutive rays into polylines.
  auto collect = [&](const std::function<double(const Vec3&)>& form,
                     std::vector<std::vector<Vec2>>& out) {
    const int scan = 96;
    std::vector<std::vector<Vec2>> open;  // per crossing index
    for (int k = 0; k <= n_dirs; ++k) {
      const Vec2 d = dir_at(k % n_dirs);
      auto value = [&](double v) { return form(Vec3{v * d.x(), v * d.y(), omega_h}); };
      std::vector<Vec2> crossings;
      double prev = value(v_max * 1e-6);
      for (int j = 1; j <= scan; ++j) {
        const double v = v_max * j / scan;
        const double cur = value(v);
        if ((prev <= 0.0) != (cur <= 0.0)) {
          const double root = bisect(value, v_max * (j - 1) / scan, v);
          crossings.push_back(root * d);
        }
        prev = cur;
      }
      for (size_t b = 0; b < std::max(open.size(), crossings.size()); ++b) {
        if (b < crossings.size()) {
          if (open.size() <= b) open.resize(b + 1);
          open[b].push_back(crossings[b]);
        } else if (b < open.size() && !open[b].empty()) {
          out.push_back(std::move(open[b]));
          open[b].clear();
        }
      }
    }
    for (auto& poly : open) {
      if (poly.size() > 1) out.push_back(std::move(poly));
    }
  };

  collect([&](const Vec3& nu) { return stick_form(pair, nu); }, section.stick_boundaries);
  collect([&](const Vec3& nu) { return slip_form(pair, nu); }, section.slip_boundaries);
  return section;
}

HandLocus hand_locus_lines(const LsScene& scene, const Vec2& v_h, double search_box_m,
                           int grid_n) {
  const Vec3 nu_h{v_h.x(), v_h.y(), 0.0};
  const double theta_r = scene.q_rel.theta;

  // Boundary residual of the sticking cone at placement r, with the
  // object-surface ellipsoid held fixed.
  auto boundary_value = [&](const Vec2& r) {
    const Mat3 g = adjoint(Pose{r.x(), r.y(), theta_r});
    const Mat3 a_hat = g * scene.a.A * g.transpose();
    const Eigen::LLT<Mat3> fac(a_hat);
    const Vec3 ai_nu = fac.solve(nu_h);
    return ai_nu.dot(scene.b.A * ai_nu) - nu_h.dot(ai_nu);
  };

  const Vec2 center = scene.q_rel.xy();
  HandLocus locus;
  const double step = 2.0 * search_box_m / (grid_n - 1);
  for (int iy = 0; iy < grid_n; ++iy) {
    const double y = center.y() - search_box_m + iy * step;
    double prev = boundary_value({center.x() - search_box_m, y});
    for (int ix = 1; ix < grid_n; ++ix) {
      const double x = center.x() - search_box_m + ix * step;
      const double cur = boundary_value({x, y});
      if ((prev <= 0.0) != (cur <= 0.0)) {
        const double root =
            bisect([&](double xx) { return boundary_value({xx, y}); }, x - step, x);
        locus.roots.push_back({root, y});
      }
      prev = cur;
    }
  }
  if (locus.roots.empty()) throw NoLocusError();

  // The roots fall on level sets of u1 y - u2 x + u3; cluster along the
  // normal of that direction, then fit each cluster by total least squares.
  const Vec3 u = scene.a.A.llt().solve(rot(theta_r) * nu_h);
  Vec2 line_dir{u[0], u[1]};
  if (line_dir.norm() < 1e-14) {
    line_dir = Vec2{1.0, 0.0};
  } else {
    line_dir.normalize();
  }
  const Vec2 normal{-line_dir.y(), line_dir.x()};

  std::vector<double> ts(locus.roots.size());
  for (size_t i = 0; i < locus.roots.size(); ++i) ts[i] = locus.roots[i].dot(normal);
  std::vector<size_t> order(ts.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return ts[a] < ts[b]; });

  size_t split = 0;  // index in `order` where the second cluster starts; 0 = one line
  double best_gap = 0.0;
  for (size_t i = 1; i < order.size(); ++i) {
    const double gap = ts[order[i]] - ts[order[i - 1]];
    if (gap > best_gap) {
      best_gap = gap;
      split = i;
    }
  }
  const double span = ts[order.back()] - ts[order.front()];
  const bool two_lines = order.size() >= 6 && best_gap > 0.25 * span && split >= 3 &&
                         order.size() - split >= 3;

  auto fit_line = [&](size_t begin, size_t end) {
    Vec2 mean{0.0, 0.0};
    for (size_t i = begin; i < end; ++i) mean += locus.roots[order[i]];
    mean /= static_cast<double>(end - begin);
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (size_t i = begin; i < end; ++i) {
      const Vec2 d = locus.roots[order[i]] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    Vec2 dir = eig.eigenvectors().col(1);  // principal direction
    if (dir.x() < 0.0 || (dir.x() == 0.0 && dir.y() < 0.0)) dir = -dir;
    return Line2{mean, dir};
  };

  if (two_lines) {
    locus.lines.push_back(fit_line(0, split));
    locus.lines.push_back(fit_line(split, order.size()));
  } else {
    locus.lines.push_back(fit_line(0, order.size()));
  }

  double sq = 0.0;
  for (size_t i = 0; i < order.size(); ++i) {
    const Line2& line = (two_lines && i >= split) ? locus.lines[1] : locus.lines[0];
    const Vec2 d = locus.roots[order[i]] - line.point;
    const double perp = d.x() * line.dir.y() - d.y() * line.dir.x();
    sq += perp * perp;
  }
  locus.rms_residual_m = std::sqrt(sq / static_cast<double>(order.size()));
  return locus;
}

ConicFit pivot_locus(const LsScene& scene, int n_dirs) {
  const LimitSurface a_hat = scene.a_hat();
  const Mat3 g = scene.g();

  ConicFit fit;
  const double len = 0.1;  // twist-space angular scale, m
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n_dirs; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n_dirs;
    const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    const Twist nu{rad * std::cos(phi), rad * std::sin(phi), z / len};
    const ModeSolution sol = solve(a_hat, scene.b, g, nu);
    if (sol.mode == Mode::kPivoting && !sol.pivot.at_infinity && !sol.degenerate_c) {
      fit.pivots.push_back(sol.pivot.point);
    }
  }
  if (fit.pivots.size() < 12) {
    throw InsufficientPointsError("pivot_locus: only " + std::to_string(fit.pivots.size()) +
                                  " pivoting samples");
  }

  // Normalized algebraic least squares: smallest singular vector of the
  // design matrix in centered/scaled coordinates.
  Vec2 centroid{0.0, 0.0};
  for (const auto& p : fit.pivots) centroid += p;
  centroid /= static_cast<double>(fit.pivots.size());
  double scale = 0.0;
  for (const auto& p : fit.pivots) scale += (p - centroid).norm();
  scale /= static_cast<double>(fit.pivots.size());
  if (scale <= 0.0) throw InsufficientPointsError("pivot_locus: degenerate sample cloud");

  Eigen::MatrixXd design(static_cast<Eigen::Index>(fit.pivots.size()), 6);
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    const Vec2 p = (fit.pivots[static_cast<size_t>(i)] - centroid) / scale;
    design.row(i) << p.x() * p.x(), p.x() * p.y(), p.y() * p.y(), p.x(), p.y(), 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinV);
  Eigen::Matrix<double, 6, 1> v = svd.matrixV().col(5);

  // Undo the normalization x' = (x - cx)/s.
  const double a = v[0], b = v[1], c = v[2];
  const double d = v[3], e = v[4], f = v[5];
  const double cx = centroid.x(), cy = centroid.y(), s = scale;
  fit.coeffs << a, b, c,
      -2.0 * a * cx - b * cy + s * d,
      -b * cx - 2.0 * c * cy + s * e,
      a * cx * cx + b * cx * cy + c * cy * cy - s * d * cx - s * e * cy + s * s * f;

  const double disc = fit.coeffs[1] * fit.coeffs[1] - 4.0 * fit.coeffs[0] * fit.coeffs[2];
  const double coeff_scale = fit.coeffs.head<3>().squaredNorm();
  if (std::abs(disc) < 1e-9 * coeff_scale) {
    Mat3 q;
    q << fit.coeffs[0], 0.5 * fit.coeffs[1], 0.5 * fit.coeffs[3],
        0.5 * fit.coeffs[1], fit.coeffs[2], 0.5 * fit.coeffs[4],
        0.5 * fit.coeffs[3], 0.5 * fit.coeffs[4], fit.coeffs[5];
    fit.kind = std::abs(q.determinant()) < 1e-9 * coeff_scale ? ConicKind::kDegenerate
                                                              : ConicKind::kParabola;
  } else {
    fit.kind = disc < 0.0 ? ConicKind::kEllipse : ConicKind::kHyperbola;
  }

  double sq = 0.0;
  for (const auto& p : fit.pivots) {
    const double val = fit.coeffs[0] * p.x() * p.x() + fit.coeffs[1] * p.x() * p.y() +
                       fit.coeffs[2] * p.y() * p.y() + fit.coeffs[3] * p.x() +
                       fit.coeffs[4] * p.y() + fit.coeffs[5];
    const double gx = 2.0 * fit.coeffs[0] * p.x() + fit.coeffs[1] * p.y() + fit.coeffs[3];
    const double gy = fit.coeffs[1] * p.x() + 2.0 * fit.coeffs[2] * p.y() + fit.coeffs[4];
    const double grad = std::hypot(gx, gy);
    if (grad > 0.0) sq += (val / grad) * (val / grad);
  }
  fit.rms_residual_m = std::sqrt(sq / static_cast<double>(fit.pivots.size()));
  return fit;
}

bool conic_contains(const ConicFit& fit, const Vec2& p) {
  Eigen::Matrix2d h;
  h << 2.0 * fit.coeffs[0], fit.coeffs[1], fit.coeffs[1], 2.0 * fit.coeffs[2];
  const Vec2 center = h.partialPivLu().solve(Vec2{-fit.coeffs[3], -fit.coeffs[4]});
  auto eval = [&](const Vec2& x) {
    return fit.coeffs[0] * x.x() * x.x() + fit.coeffs[1] * x.x() * x.y() +
           fit.coeffs[2] * x.y() * x.y() + fit.coeffs[3] * x.x() + fit.coeffs[4] * x.y() +
           fit.coeffs[5];
  };
  return eval(p) * eval(center) > 0.0;
}

MarginReport max_margin(const DiagonalizedPair& pair, const LimitSurface& a_hat,
                        const Mat3& g) {
  if (pair.degenerate_c()) throw DegenerateCError();
  MarginReport report;
  // lambda is sorted descending: index 0 carries the slipping extreme,
  // index 2 the sticking extreme.
  const Vec3 phi_max = pair.phi.col(0);
  const Vec3 phi_min = pair.phi.col(2);
  const double l_max = pair.lambda[0];
  const double l_min = pair.lambda[2];

  report.tie = (l_max - l_min) <= 1e-9 * l_max;
  report.stick_twist = Twist::from_vec((a_hat.A * phi_min).normalized());
  report.slip_twist = Twist::from_vec((a_hat.A * (l_max * phi_max)).normalized());
  report.margin = std::sqrt(std::abs(l_min - 1.0) / std::abs(l_max - 1.0));
  report.w_dist = Wrench::from_vec(report.margin * (g.transpose() * phi_max));
  return report;
}

namespace {

// Real alpha root closest to zero: the branch that crosses the
// sticking-pivoting boundary continuously.
std::optional<double> alpha_branch(const DiagonalizedPair& pair, const Twist& nu_tilde) {
  std::optional<double> best;
  for (double r : real_alpha_roots(pair, nu_tilde)) {
    if (!best || std::abs(r) < std::abs(*best)) best = r;
  }
  return best;
}

std::optional<double> alpha_branch_at(const LimitSurface& a, const LimitSurface& b,
                                      const Pose& q_rel, const Vec3& nu_h) {
  const LimitSurface a_hat = transform_ls(a, q_rel, Frame::kHand);
  const DiagonalizedPair pair = diagonalize(a_hat, b);
  return alpha_branch(pair, Twist::from_vec(pair.phi.transpose() * nu_h));
}

}  // namespace

StabilityReport fixed_point_stability(const LsScene& scene, const Twist& nu_h) {
  const LimitSurface a_hat = scene.a_hat();
  const Mat3 g = scene.g();
  const DiagonalizedPair pair = diagonalize(a_hat, scene.b);
  if (pair.degenerate_c()) throw DegenerateCError();

  const auto alpha0 = alpha_branch(pair, Twist::from_vec(pair.phi.transpose() * nu_h.vec()));
  if (!alpha0 || std::abs(*alpha0) > 1e-6) {
    throw NotOnBoundaryError(alpha0 ? *alpha0 : std::numeric_limits<double>::quiet_NaN());
  }

  // The linearized relative-pose dynamics are rank one with eigenvector u and
  // eigenvalue grad(alpha) . u.
  const Vec3 u = adjoint_inverse(scene.q_rel) * (scene.b.A * a_hat.A.llt().solve(nu_h.vec()));

  Vec3 grad;
  const double h = 1e-5;
  for (int i = 0; i < 3; ++i) {
    Vec3 dq = Vec3::Zero();
    dq[i] = h;
    const auto ap = alpha_branch_at(scene.a, scene.b,
                                    Pose::from_vec(scene.q_rel.vec() + dq), nu_h.vec());
    const auto am = alpha_branch_at(scene.a, scene.b,
                                    Pose::from_vec(scene.q_rel.vec() - dq), nu_h.vec());
    if (!ap || !am) throw NotOnBoundaryError(std::numeric_limits<double>::quiet_NaN());
    grad[i] = (*ap - *am) / (2.0 * h);
  }

  StabilityReport report;
  report.eigen_estimate = grad.dot(u);
  report.sign = report.eigen_estimate < 0.0 ? -1 : (report.eigen_estimate > 0.0 ? 1 : 0);

  // Probe: push the relative pose along u into the pivoting side and check
  // whether the flow of q_rel runs back toward the boundary.
  const Vec3 u_hat = u.normalized();
  const double eps = 1e-5;
  for (int side : {+1, -1}) {
    const Pose q = Pose::from_vec(scene.q_rel.vec() + side * eps * u_hat);
    const LimitSurface a_hat_p = transform_ls(scene.a, q, Frame::kHand);
    const Mat3 g_p = adjoint(q);
    const ModeSolution sol = solve(a_hat_p, scene.b, g_p, nu_h);
    if (sol.mode != Mode::kPivoting || sol.degenerate_c) continue;
    const Vec3 flow = adjoint_inverse(q) * sol.nu_rel.vec();
    const double drift = side * flow.dot(u_hat);
    report.probe_sign = drift > 0.0 ? 1 : -1;
    break;
  }
  return report;
}

namespace {

double wrap_positive(double angle) {
  const double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a < 0.0) a += two_pi;
  return a;
}

}  // namespace

MaxRotationField max_rotation_estimate(const ContactScene& scene, double f_n,
                                       const Vec2& v_dir, int nx, int ny) {
  MaxRotationField field;
  field.nx = nx;
  field.ny = ny;
  const Vec2 he = scene.object.half_extents_m;
  for (int i = 0; i < nx; ++i) field.xs.push_back(-he.x() + 2.0 * he.x() * i / (nx - 1));
  for (int j = 0; j < ny; ++j) field.ys.push_back(-he.y() + 2.0 * he.y() * j / (ny - 1));
  field.estimate_rad.assign(static_cast<size_t>(nx) * ny,
                            std::numeric_limits<double>::quiet_NaN());
  field.cls.assign(static_cast<size_t>(nx) * ny, PlacementClass::kInfeasible);

  const double radius = patch_contact_radius(scene.patch, f_n);
  const Vec2 v_hat = v_dir.normalized();
  const double v_angle = std::atan2(v_hat.y(), v_hat.x());

  parallel_for(static_cast<size_t>(nx) * ny, [&](size_t idx) {
    const int ix = static_cast<int>(idx) % nx;
    const int iy = static_cast<int>(idx) / nx;
    const Vec2 r{field.xs[static_cast<size_t>(ix)], field.ys[static_cast<size_t>(iy)]};
    if (!patch_inside_object(scene.object, r, radius)) return;

    ContactScene placed = scene;
    placed.q_rel = Pose{r.x(), r.y(), scene.q_rel.theta};
    const LsScene ls = freeze(placed, f_n);
    const LimitSurface a_hat = ls.a_hat();
    const DiagonalizedPair pair = diagonalize(a_hat, ls.b);
    const Twist nu_h{v_hat.x(), v_hat.y(), 0.0};
    const Twist nu_tilde = Twist::from_vec(pair.phi.transpose() * nu_h.vec());

    Mode mode;
    try {
      mode = select_mode(pair, nu_tilde).first;
    } catch (const DegenerateCError&) {
      return;
    }
    if (mode == Mode::kSticking) {
      field.estimate_rad[idx] = 0.0;
      field.cls[idx] = PlacementClass::kSticking;
      return;
    }
    field.cls[idx] = PlacementClass::kRotating;

    // Planar sticking-cone boundary rays from the 2x2 restriction of the
    // sticking quadratic to the omega = 0 plane.
    const Mat3 s3 = pair.phi * pair.c().asDiagonal() * pair.phi.transpose();
    const Eigen::Matrix2d s2 = s3.topLeftCorner<2, 2>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(s2);
    const double e_lo = eig.eigenvalues()[0];
    const double e_hi = eig.eigenvalues()[1];
    if (!(e_lo < 0.0 && e_hi > 0.0)) return;  // no planar sticking cone here

    const double t_star = std::atan(std::sqrt(e_hi / -e_lo));
    // s2 eigenvector order is ascending: col(1) goes with e_hi.
    const Vec2 v_hi = eig.eigenvectors().col(1);
    const Vec2 v_lo = eig.eigenvectors().col(0);

    double sigma = 0.0;
    const ModeSolution sol = solve(a_hat, ls.b, ls.g(), nu_h);
    if (sol.mode == Mode::kPivoting) sigma = sol.nu_o.omega >= 0.0 ? 1.0 : -1.0;

    double best = std::numeric_limits<double>::quiet_NaN();
    for (double t : {t_star, -t_star, std::numbers::pi - t_star, std::numbers::pi + t_star}) {
      const Vec2 b_dir = std::cos(t) * v_hi + std::sin(t) * v_lo;
      StabilityReport stab;
      try {
        stab = fixed_point_stability(ls, Twist{b_dir.x(), b_dir.y(), 0.0});
      } catch (const Error&) {
        continue;
      }
      if (stab.sign >= 0) continue;
      const double b_angle = std::atan2(b_dir.y(), b_dir.x());
      double delta;
      if (sigma != 0.0) {
        delta = wrap_positive(sigma * (v_angle - b_angle));
      } else {
        delta = std::min(wrap_positive(v_angle - b_angle), wrap_positive(b_angle - v_angle));
      }
      if (std::isnan(best) || delta < best) best = delta;
    }
    field.estimate_rad[idx] = best;
  });
  return field;
}

namespace {

// Body twist that carries pose a to pose b over dt, evaluated with the
// midpoint orientation.
Twist body_twist_between(const Pose& a, const Pose& b, double dt) {
  const Vec3 dq = (b.vec() - a.vec()) / dt;
  return Twist::from_vec(rot(a.theta + 0.5 * (b.theta - a.theta)).transpose() * dq);
}

struct ReplayObjective {
  const RecordedTrajectory& rec;
  const ContactScene& base;
  double sim_dt;
  double theta_weight = 0.1;   // m per rad
  double wrench_weight = 0.02; // m per N

  double operator()(const Eigen::VectorXd& log_params) const {
    FitResult p;
    p.a_cop_scale = std::exp(log_params[0]);
    p.b_force_scale = std::exp(log_params[1]);
    p.b_torque_scale = std::exp(log_params[2]);
    p.cop_c = std::exp(log_params[3]);
    p.cop_delta = std::exp(log_params[4]);
    try {
      return rms_error(apply_fit(base, p)).first;
    } catch (const Error&) {
      return 1e6;
    }
  }

  // (combined objective, pose-only rms)
  std::pair<double, double> rms_error(const ContactScene& scene) const {
    SimState state;
    state.q_h = rec.q_h.front();
    state.q_o = rec.q_o.front();
    double pose_sq = 0.0;
    double wrench_sq = 0.0;
    const size_t n = rec.t.size();
    const bool use_wrench = rec.w_h.size() == n;
    for (size_t i = 0; i + 1 < n; ++i) {
      const double dt = rec.t[i + 1] - rec.t[i];
      const Twist nu_h = body_twist_between(rec.q_h[i], rec.q_h[i + 1], dt);
      state.q_h = rec.q_h[i];  // replay the hand exactly
      const int nsub = std::max(1, static_cast<int>(std::llround(dt / sim_dt)));
      const double h = dt / nsub;
      for (int s = 0; s < nsub; ++s) {
        state = step(scene, state, nu_h, rec.f_n[i], h);
      }
      if (use_wrench) {
        const Vec3 dw = state.solution.w_h.vec() - rec.w_h[i + 1].vec();
        wrench_sq += dw.squaredNorm();
      }
      const Vec3 dq = state.q_o.vec() - rec.q_o[i + 1].vec();
      pose_sq += dq.head<2>().squaredNorm() +
                 theta_weight * theta_weight * dq[2] * dq[2];
    }
    const double m = static_cast<double>(n - 1);
    const double pose_rms = std::sqrt(pose_sq / m);
    double total = pose_rms;
    if (use_wrench) total += wrench_weight * std::sqrt(wrench_sq / m);
    return {total, pose_rms};
  }
};

// Nelder-Mead with standard coefficients on the log-parameter space.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x0, double spread, int max_evals,
                            int* evals_out, double* best_out) {
  const int dim = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> xs;
  std::vector<double> fs;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };
  xs.push_back(x0);
  fs.push_back(eval(x0));
  for (int i = 0; i < dim; ++i) {
    Eigen::VectorXd x = x0;
    x[i] += spread;
    xs.push_back(x);
    fs.push_back(eval(x));
  }
  auto order = [&] {
    std::vector<int> idx(xs.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    std::vector<Eigen::VectorXd> nxs;
    std::vector<double> nfs;
    for (int i : idx) {
      nxs.push_back(xs[i]);
      nfs.push_back(fs[i]);
    }
    xs = std::move(nxs);
    fs = std::move(nfs);
  };

  while (evals < max_evals) {
    order();
    if (fs.back() - fs.front() < 1e-14) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < dim; ++i) centroid += xs[static_cast<size_t>(i)];
    centroid /= dim;

    const Eigen::VectorXd xr = centroid + (centroid - xs.back());
    const double fr = eval(xr);
    if (fr < fs.front()) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs.back());
      const double fe = eval(xe);
      if (fe < fr) {
        xs.back() = xe;
        fs.back() = fe;
      } else {
        xs.back() = xr;
        fs.back() = fr;
      }
    } else if (fr < fs[fs.size() - 2]) {
      xs.back() = xr;
      fs.back() = fr;
    } else {
      const Eigen::VectorXd xc = centroid + 0.5 * (xs.back() - centroid);
      const double fc = eval(xc);
      if (fc < fs.back()) {
        xs.back() = xc;
        fs.back() = fc;
      } else {
        for (size_t i = 1; i < xs.size(); ++i) {
          xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
          fs[i] = eval(xs[i]);
        }
      }
    }
  }
  order();
  *evals_out = evals;
  *best_out = fs.front();
  return xs.front();
}

}  // namespace

ContactScene apply_fit(const ContactScene& scene, const FitResult& fit) {
  ContactScene out = scene;
  out.object.a_cop_scale = scene.object.a_cop_scale * fit.a_cop_scale;
  out.object.cop_shift_c = fit.cop_c;
  out.object.cop_shift_delta = fit.cop_delta;
  out.patch.force_scale = scene.patch.force_scale * fit.b_force_scale;
  out.patch.torque_scale = scene.patch.torque_scale * fit.b_torque_scale;
  return out;
}

FitResult fit_parameters(const RecordedTrajectory& recorded, const ContactScene& scene,
                         const FitOptions& options) {
  if (recorded.t.size() < 2 || recorded.q_h.size() != recorded.t.size() ||
      recorded.q_o.size() != recorded.t.size() || recorded.f_n.size() != recorded.t.size()) {
    throw PreconditionError("fit_parameters: trajectory needs >= 2 consistent samples");
  }
  double dt_min = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < recorded.t.size(); ++i) {
    dt_min = std::min(dt_min, recorded.t[i + 1] - recorded.t[i]);
  }
  if (!(dt_min > 0.0)) throw PreconditionError("fit_parameters: time stamps must increase");

  ReplayObjective obj{recorded, scene, options.sim_dt > 0.0 ? options.sim_dt : dt_min};

  Eigen::VectorXd x0(5);
  x0 << 0.0, 0.0, 0.0, std::log(scene.object.cop_shift_c), std::log(scene.object.cop_shift_delta);
  const double f0 = obj(x0);

  int evals = 0;
  double best = 0.0;
  const Eigen::VectorXd x =
      nelder_mead([&](const Eigen::VectorXd& v) { return obj(v); }, x0,
                  options.initial_spread, options.max_evals, &evals, &best);

  FitResult result;
  result.evaluations = evals;
  if (best >= f0 - 1e-15) {
    result.cop_c = scene.object.cop_shift_c;
    result.cop_delta = scene.object.cop_shift_delta;
    result.improved = false;
    result.rms_pose_m = obj.rms_error(scene).second;
    return result;
  }
  result.a_cop_scale = std::exp(x[0]);
  result.b_force_scale = std::exp(x[1]);
  result.b_torque_scale = std::exp(x[2]);
  result.cop_c = std::exp(x[3]);
  result.cop_delta = std::exp(x[4]);
  result.rms_pose_m = obj.rms_error(apply_fit(scene, result)).second;
  return result;
}

}  // namespace patchslide
