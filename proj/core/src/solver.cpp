#include "patchslide/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>

#include "patchslide/errors.hpp"

namespace patchslide {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kSticking: return "stick";
    case Mode::kPivoting: return "pivot";
    case Mode::kSlipping: return "slip";
  }
  return "?";
}

DiagonalizedPair diagonalize(const LimitSurface& a_hat, const LimitSurface& b) {
  Eigen::LLT<Mat3> llt(a_hat.A);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("diagonalize: A_hat is not positive definite");
  }
  const Mat3 l = llt.matrixL();
  // M = L^-1 B L^-T is symmetric with the pencil's eigenvalues.
  const Mat3 linv_b = l.triangularView<Eigen::Lower>().solve(b.A);
  Mat3 m = l.triangularView<Eigen::Lower>().solve(linv_b.transpose());
  m = 0.5 * (m + m.transpose());

  Eigen::SelfAdjointEigenSolver<Mat3> eig(m);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw NotPositiveDefiniteError("diagonalize: B is not positive definite");
  }

  DiagonalizedPair pair;
  // SelfAdjointEigenSolver sorts ascending; flip to descending.
  const Mat3 q = eig.eigenvectors();
  for (int k = 0; k < 3; ++k) {
    pair.lambda[k] = eig.eigenvalues()[2 - k];
    pair.phi.col(k) = l.transpose().triangularView<Eigen::Upper>().solve(q.col(2 - k));
  }
  return pair;
}

namespace {

// Coefficients (ascending) of the quartic obtained by clearing denominators:
// P(alpha) = sum_i c_i nu_i^2 prod_{j != i} (lambda_j alpha + 1)^2.
std::array<double, 5> alpha_polynomial(const Vec3& lambda, const Vec3& c, const Vec3& nu) {
  std::array<double, 5> p{0.0, 0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    // (lambda_j a + 1)(lambda_k a + 1) = q2 a^2 + q1 a + q0
    const double q2 = lambda[j] * lambda[k];
    const double q1 = lambda[j] + lambda[k];
    const double q0 = 1.0;
    const double w = c[i] * nu[i] * nu[i];
    p[0] += w * q0 * q0;
    p[1] += w * 2.0 * q0 * q1;
    p[2] += w * (q1 * q1 + 2.0 * q0 * q2);
    p[3] += w * 2.0 * q1 * q2;
    p[4] += w * q2 * q2;
  }
  return p;
}

// Real roots of a polynomial with ascending coefficients, by companion-matrix
// eigenvalues after degree reduction; robust to coefficient noise.
std::vector<double> real_poly_roots(std::array<double, 5> p) {
  double maxc = 0.0;
  for (double v : p) maxc = std::max(maxc, std::abs(v));
  std::vector<double> roots;
  if (maxc == 0.0) return roots;  // identically zero: no isolated roots
  for (double& v : p) v /= maxc;

  int degree = 4;
  while (degree > 0 && std::abs(p[degree]) < 1e-14) --degree;
  if (degree == 0) return roots;

  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(degree, degree);
  for (int i = 0; i < degree; ++i) comp(i, degree - 1) = -p[i] / p[degree];
  comp.block(1, 0, degree - 1, degree - 1).setIdentity();

  Eigen::EigenSolver<Eigen::MatrixXd> eig(comp);
  for (int i = 0; i < degree; ++i) {
    const std::complex<double> z = eig.eigenvalues()[i];
    if (std::abs(z.imag()) / (1.0 + std::abs(z.real())) < 1e-8) {
      roots.push_back(z.real());
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

std::vector<double> real_alpha_roots(const DiagonalizedPair& pair, const Twist& nu_h_tilde) {
  return real_poly_roots(alpha_polynomial(pair.lambda, pair.c(), nu_h_tilde.vec()));
}

std::optional<double> solve_alpha(const DiagonalizedPair& pair, const Twist& nu_h_tilde) {
  if (pair.degenerate_c()) throw DegenerateCError();
  const Vec3 c = pair.c();
  // All c_i of one sign: the left-hand side cannot vanish; skip root finding.
  if ((c.array() > 0.0).all() || (c.array() < 0.0).all()) return std::nullopt;

  std::optional<double> best;
  for (double r : real_alpha_roots(pair, nu_h_tilde)) {
    if (r <= kAlphaEps) continue;
    if (!best || r < *best) best = r;  // at most one positive root exists (full-rank C)
  }
  return best;
}

std::pair<Mode, std::optional<double>> select_mode(const DiagonalizedPair& pair,
                                                   const Twist& nu_h_tilde) {
  const Vec3 c = pair.c();
  if (nu_h_tilde.is_zero()) {
    if ((c.array() < 0.0).all()) return {Mode::kSticking, std::nullopt};
    if ((c.array() > 0.0).all()) return {Mode::kSlipping, std::nullopt};
    return {Mode::kPivoting, std::nullopt};
  }
  if (auto alpha = solve_alpha(pair, nu_h_tilde)) {
    return {Mode::kPivoting, alpha};
  }
  const Vec3 nu = nu_h_tilde.vec();
  if (nu.dot(c.asDiagonal() * nu) <= 0.0) return {Mode::kSticking, std::nullopt};
  return {Mode::kSlipping, std::nullopt};
}

Pivot pivot_from_twist(const Twist& nu) {
  Pivot p;
  const double scale = std::max(1.0, std::hypot(nu.vx, nu.vy));
  if (std::abs(nu.omega) < kOmegaEps * scale) {
    if (std::hypot(nu.vx, nu.vy) == 0.0) {
      // Fully zero relative motion: indeterminate, put it at the hand origin.
      return p;
    }
    p.at_infinity = true;
    return p;
  }
  p.point = Vec2{-nu.vy, nu.vx} / nu.omega;
  return p;
}

namespace {

ModeSolution sticking_solution(const LimitSurface& a_hat, const LimitSurface& b,
                               const Mat3& g, const Twist& nu_h) {
  ModeSolution sol;
  sol.mode = Mode::kSticking;
  sol.alpha = 0.0;
  sol.nu_o = Twist::from_vec(g.partialPivLu().solve(nu_h.vec()));
  sol.nu_rel = Twist{};
  const Vec3 ainv_nu = a_hat.A.llt().solve(nu_h.vec());
  sol.k1 = std::sqrt(nu_h.vec().dot(ainv_nu));
  sol.k2 = 0.0;
  if (sol.k1 > 0.0) sol.w_h = Wrench::from_vec(-ainv_nu / sol.k1);
  // Boundary-continuous pivot: the alpha -> 0 limit of the relative twist.
  sol.pivot = pivot_from_twist(Twist::from_vec(b.A * ainv_nu));
  return sol;
}

}  // namespace

ModeSolution solve(const LimitSurface& a_hat, const LimitSurface& b, const Mat3& g,
                   const Twist& nu_h) {
  if (!nu_h.vec().allFinite()) throw PreconditionError("solve: nu_h must be finite");
  const DiagonalizedPair pair = diagonalize(a_hat, b);
  const Twist nu_tilde = Twist::from_vec(pair.phi.transpose() * nu_h.vec());

  if (pair.degenerate_c() && !nu_h.is_zero()) {
    // Sticking by convention: zero relative velocity is the conservative
    // prediction when the pencil leaves alpha undetermined.
    ModeSolution sol = sticking_solution(a_hat, b, g, nu_h);
    sol.degenerate_c = true;
    sol.w_o = Wrench::from_vec(g.transpose() * sol.w_h.vec());
    return sol;
  }

  const auto [mode, alpha] = select_mode(pair, nu_tilde);

  ModeSolution sol;
  sol.mode = mode;
  if (nu_h.is_zero()) {
    // Everything rests; wrenches are indeterminate inside both surfaces.
    sol.alpha = std::nullopt;
    return sol;
  }

  switch (mode) {
    case Mode::kPivoting: {
      sol.alpha = alpha;
      const Mat3 blend = a_hat.A + *alpha * b.A;  // A_hat + alpha B, SPD
      const Eigen::LDLT<Mat3> fac(blend);
      const Vec3 y = fac.solve(nu_h.vec());       // (A_hat + alpha B)^-1 nu_h
      const Vec3 nu_o_hand = a_hat.A * y;         // object twist seen from the hand
      sol.nu_o = Twist::from_vec(g.partialPivLu().solve(nu_o_hand));
      sol.nu_rel = Twist::from_vec(nu_h.vec() - nu_o_hand);
      sol.k1 = std::sqrt(y.dot(a_hat.A * y));
      sol.k2 = *alpha * sol.k1;
      sol.w_h = Wrench::from_vec(-y / sol.k1);
      sol.pivot = pivot_from_twist(sol.nu_rel);
      break;
    }
    case Mode::kSticking:
      sol = sticking_solution(a_hat, b, g, nu_h);
      break;
    case Mode::kSlipping: {
      sol.alpha = std::nullopt;
      sol.nu_o = Twist{};
      sol.nu_rel = nu_h;
      const Vec3 binv_nu = b.A.llt().solve(nu_h.vec());
      sol.k2 = std::sqrt(nu_h.vec().dot(binv_nu));
      sol.k1 = 0.0;
      sol.w_h = Wrench::from_vec(-binv_nu / sol.k2);
      sol.pivot = pivot_from_twist(nu_h);
      break;
    }
  }
  sol.w_o = Wrench::from_vec(g.transpose() * sol.w_h.vec());
  return sol;
}

}  // namespace patchslide
