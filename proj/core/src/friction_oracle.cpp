#include "patchslide/friction_oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "patchslide/errors.hpp"

namespace patchslide {

PressureField PressureField::uniform_rect(const Vec2& half_extents, double load, double mu) {
  return {SupportShape::kRectangle, half_extents, PressureProfile::kUniform, mu, load};
}

PressureField PressureField::uniform_disc(double radius, double load, double mu) {
  return {SupportShape::kDisc, {radius, radius}, PressureProfile::kUniform, mu, load};
}

PressureField PressureField::hertzian_disc(double radius, double load, double mu) {
  return {SupportShape::kDisc, {radius, radius}, PressureProfile::kHertzian, mu, load};
}

bool PressureField::inside(const Vec2& r) const {
  if (shape == SupportShape::kRectangle) {
    return std::abs(r.x()) <= half_extents.x() && std::abs(r.y()) <= half_extents.y();
  }
  return r.squaredNorm() <= half_extents.x() * half_extents.x();
}

double PressureField::profile_at(const Vec2& r) const {
  if (!inside(r)) return 0.0;
  if (profile == PressureProfile::kUniform) return 1.0;
  const double a2 = half_extents.x() * half_extents.x();
  return std::sqrt(std::max(0.0, 1.0 - r.squaredNorm() / a2));
}

double PressureField::characteristic_length() const {
  if (shape == SupportShape::kDisc) return half_extents.x();
  return half_extents.norm();
}

namespace {

struct Grid {
  double x0, y0, dx, dy;
  int n;
};

Grid make_grid(const PressureField& field, int grid_n) {
  const double w = field.half_extents.x();
  const double h = (field.shape == SupportShape::kDisc) ? field.half_extents.x()
                                                        : field.half_extents.y();
  Grid g;
  g.n = grid_n;
  g.dx = 2.0 * w / grid_n;
  g.dy = 2.0 * h / grid_n;
  g.x0 = -w + 0.5 * g.dx;  // cell centers
  g.y0 = -h + 0.5 * g.dy;
  return g;
}

double raw_profile_mass(const PressureField& field, const Grid& g) {
  double sum = 0.0;
  for (int iy = 0; iy < g.n; ++iy) {
    for (int ix = 0; ix < g.n; ++ix) {
      sum += field.profile_at({g.x0 + ix * g.dx, g.y0 + iy * g.dy});
    }
  }
  return sum * g.dx * g.dy;
}

}  // namespace

double integrated_load_error(const PressureField& field, int grid_n) {
  const Grid g = make_grid(field, grid_n);
  double analytic = 0.0;
  const double a = field.half_extents.x();
  switch (field.shape) {
    case SupportShape::kRectangle:
      analytic = 4.0 * field.half_extents.x() * field.half_extents.y();
      break;
    case SupportShape::kDisc:
      analytic = (field.profile == PressureProfile::kUniform)
                     ? std::numbers::pi * a * a
                     : 2.0 * std::numbers::pi * a * a / 3.0;  // integral of the cap profile
      break;
  }
  return std::abs(raw_profile_mass(field, g) / analytic - 1.0);
}

Wrench friction_wrench(const PressureField& field, const Twist& nu, int grid_n) {
  if (nu.is_zero()) throw ZeroTwistError();
  if (grid_n < 32) throw PreconditionError("friction_wrench: grid_n must be >= 32");

  const Grid g = make_grid(field, grid_n);
  // Rescale so the discrete pressure mass carries exactly the declared load.
  const double mass = raw_profile_mass(field, g);
  const double scale = field.normal_load / mass;

  double fx = 0.0, fy = 0.0, m = 0.0;
  for (int iy = 0; iy < g.n; ++iy) {
    const double y = g.y0 + iy * g.dy;
    for (int ix = 0; ix < g.n; ++ix) {
      const double x = g.x0 + ix * g.dx;
      const double p = field.profile_at({x, y});
      if (p == 0.0) continue;
      const double vx = nu.vx - nu.omega * y;
      const double vy = nu.vy + nu.omega * x;
      const double speed = std::hypot(vx, vy);
      if (speed < 1e-12) continue;  // rotation center
      const double wgt = field.mu * p * scale * g.dx * g.dy / speed;
      fx -= wgt * vx;
      fy -= wgt * vy;
      m -= wgt * (x * vy - y * vx);
    }
  }
  return {fx, fy, m};
}

std::vector<LsSample> sample_limit_surface(const PressureField& field, int n_dirs, int grid_n) {
  if (n_dirs < 50) throw PreconditionError("sample_limit_surface: n_dirs must be >= 50");
  const double len = field.characteristic_length();

  std::vector<LsSample> samples;
  samples.reserve(n_dirs);
  // Fibonacci sphere in scaled twist coordinates (vx, vy, omega * len).
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n_dirs; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n_dirs;
    const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    const Twist dir{rad * std::cos(phi), rad * std::sin(phi), z / len};
    samples.push_back({dir, friction_wrench(field, dir, grid_n)});
  }
  return samples;
}

EllipsoidFit fit_ellipsoid(const std::vector<LsSample>& samples, Frame frame) {
  if (samples.size() < 6) {
    throw PreconditionError("fit_ellipsoid: need at least 6 samples");
  }
  Eigen::MatrixXd design(samples.size(), 6);
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    const Vec3 w = samples[static_cast<size_t>(i)].wrench.vec();
    design.row(i) << w[0] * w[0], 2.0 * w[0] * w[1], 2.0 * w[0] * w[2],
                     w[1] * w[1], 2.0 * w[1] * w[2], w[2] * w[2];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 6) throw RankDeficientError();
  const Eigen::VectorXd sol = qr.solve(Eigen::VectorXd::Ones(design.rows()));

  Mat3 a;
  a << sol[0], sol[1], sol[2],
       sol[1], sol[3], sol[4],
       sol[2], sol[4], sol[5];

  EllipsoidFit fit;
  Eigen::SelfAdjointEigenSolver<Mat3> eig(a);
  if (eig.eigenvalues().minCoeff() <= 1e-12) {
    Vec3 clamped = eig.eigenvalues().cwiseMax(1e-12);
    a = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    fit.eigenvalue_clamped = true;
  }
  fit.ls = LimitSurface{0.5 * (a + a.transpose()), frame};

  double sq = 0.0;
  for (const auto& s : samples) {
    const double r = s.wrench.vec().dot(fit.ls.A * s.wrench.vec()) - 1.0;
    sq += r * r;
  }
  fit.rms_residual = std::sqrt(sq / static_cast<double>(samples.size()));
  return fit;
}

}  // namespace patchslide
