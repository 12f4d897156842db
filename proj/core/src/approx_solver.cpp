#include "patchslide/approx_solver.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "patchslide/errors.hpp"

namespace patchslide {

namespace {

// First two rows of J(p).
Eigen::Matrix<double, 2, 3> pivot_jacobian(const Vec2& p) {
  Eigen::Matrix<double, 2, 3> jp;
  jp << 1.0, 0.0, -p.y(),
        0.0, 1.0,  p.x();
  return jp;
}

// Closed-form pseudo-inverse: Jp Jp^T is 2x2 with det = 1 + |p|^2.
Eigen::Matrix<double, 3, 2> pivot_jacobian_pinv(const Vec2& p) {
  const double x = p.x();
  const double y = p.y();
  Eigen::Matrix2d gram_inv;
  gram_inv << 1.0 + x * x, x * y,
              x * y,       1.0 + y * y;
  gram_inv /= 1.0 + x * x + y * y;
  return pivot_jacobian(p).transpose() * gram_inv;
}

Vec3 nullspace_dir(const Vec2& p) { return {p.y(), -p.x(), 1.0}; }

}  // namespace

ModeSolution approx_solve(const LimitSurface& a_hat, const LimitSurface& b, const Mat3& g,
                          const Twist& nu_h, const PivotGuess& guess) {
  if (nu_h.is_zero()) throw PreconditionError("approx_solve: nu_h must be nonzero");

  const DiagonalizedPair pair = diagonalize(a_hat, b);
  const Vec3 c = pair.c();

  const auto jp = pivot_jacobian(guess.p);
  const auto jp_pinv = pivot_jacobian_pinv(guess.p);
  const Vec3 n = nullspace_dir(guess.p);
  const Eigen::Vector2d v_p = jp * nu_h.vec();

  const Vec3 w_bar = pair.phi.transpose() * (jp_pinv * v_p);
  const Vec3 w0 = pair.phi.transpose() * n;

  const double qa = w0.dot(c.asDiagonal() * w0);
  const double qb_half = w0.dot(c.asDiagonal() * w_bar);
  const double qc = w_bar.dot(c.asDiagonal() * w_bar);

  double roots[2];
  int n_roots = 0;
  const double scale = std::abs(qa) + std::abs(qb_half) + std::abs(qc);
  if (std::abs(qa) < 1e-15 * scale) {
    if (qb_half == 0.0) throw NoRealRootError("approx_solve: gamma equation is degenerate");
    roots[n_roots++] = -qc / (2.0 * qb_half);
  } else {
    const double disc = qb_half * qb_half - qa * qc;
    if (disc < 0.0) {
      throw NoRealRootError("approx_solve: negative discriminant; guess inconsistent with pivoting");
    }
    const double sq = std::sqrt(disc);
    roots[n_roots++] = (-qb_half + sq) / qa;
    roots[n_roots++] = (-qb_half - sq) / qa;
  }

  const double omega_bias = n.dot(nu_h.vec()) / n.squaredNorm();

  ModeSolution best;
  bool found = false;
  for (int i = 0; i < n_roots; ++i) {
    const double gamma = roots[i];
    const Vec3 w_sum = w_bar + gamma * w0;
    const double k1 = w_sum.norm();
    if (k1 <= 0.0) continue;
    const Vec3 w = -w_sum / k1;
    const Vec3 w_h = pair.phi * w;

    // The relative motion is a pure rotation about the presumed pivot.
    const double omega_r = omega_bias - gamma;
    const double bw3 = (b.A * w_h).z();
    const double k2 = -omega_r / bw3;
    if (k2 <= 0.0) continue;
    if (found && k2 <= best.k2) continue;

    ModeSolution sol;
    sol.mode = Mode::kPivoting;
    sol.k1 = k1;
    sol.k2 = k2;
    sol.alpha = k2 / k1;
    const Vec3 nu_o_hand = jp_pinv * v_p + gamma * n;
    sol.nu_o = Twist::from_vec(g.partialPivLu().solve(nu_o_hand));
    sol.nu_rel = Twist::from_vec(nu_h.vec() - nu_o_hand);  // = omega_r * n
    sol.w_h = Wrench::from_vec(w_h);
    sol.w_o = Wrench::from_vec(g.transpose() * w_h);
    sol.pivot = Pivot{false, guess.p};
    best = sol;
    found = true;
  }
  if (!found) throw NegativeK2Error();
  return best;
}

ModeSolution iterate_pivot(const LimitSurface& a_hat, const LimitSurface& b, const Mat3& g,
                           const Twist& nu_h, const PivotGuess& guess, int max_iter,
                           double tol) {
  Vec2 p = guess.p;
  double prev_step = std::numeric_limits<double>::infinity();
  ModeSolution sol;
  for (int it = 0; it < max_iter; ++it) {
    sol = approx_solve(a_hat, b, g, nu_h, PivotGuess{p});
    // Flow-rule relative twist; its rotation center is the improved pivot.
    const Vec3 nu_rel_flow = -sol.k2 * (b.A * sol.w_h.vec());
    const Pivot next = pivot_from_twist(Twist::from_vec(nu_rel_flow));
    if (next.at_infinity) {
      sol.converged = false;
      return sol;
    }
    Vec2 delta = next.point - p;
    const double step = delta.norm();
    if (step > prev_step) delta *= 0.5;  // damp overshoot
    p += delta;
    prev_step = step;
    if (step < tol) {
      sol.pivot = Pivot{false, p};
      return sol;
    }
  }
  sol.converged = false;
  return sol;
}

double solve_zero_torsion(const LimitSurface& a_hat, const Twist& nu_h, const Vec2& p) {
  if (nu_h.is_zero()) throw PreconditionError("solve_zero_torsion: nu_h must be nonzero");
  const Vec3 n = nullspace_dir(p);
  const Eigen::Vector2d v_p = pivot_jacobian(p) * nu_h.vec();
  const Vec3 jv = pivot_jacobian_pinv(p) * v_p;
  const Eigen::LLT<Mat3> a_fac(a_hat.A);
  const Vec3 ainv_n = a_fac.solve(n);
  return -n.dot(a_fac.solve(jv)) / n.dot(ainv_n);
}

FixedTorsionSolution solve_fixed_torsion(const LimitSurface& a_hat, const Twist& nu_h,
                                         const Vec2& p, double m_p) {
  if (nu_h.is_zero()) throw PreconditionError("solve_fixed_torsion: nu_h must be nonzero");
  const Vec3 n = nullspace_dir(p);
  const Eigen::Vector2d v_p = pivot_jacobian(p) * nu_h.vec();
  const Vec3 jv = pivot_jacobian_pinv(p) * v_p;

  // All inner products reduce to the A_hat^-1 metric.
  const Eigen::LLT<Mat3> a_fac(a_hat.A);
  const double beta = n.dot(a_fac.solve(n));        // |w0|^2
  const double delta0 = n.dot(a_fac.solve(jv));     // w0 . w_bar
  const double wbar2 = jv.dot(a_fac.solve(jv));     // |w_bar|^2

  if (m_p == 0.0) {
    const double gamma = -delta0 / beta;
    const double k1 = std::sqrt(std::max(0.0, wbar2 + 2.0 * gamma * delta0 + gamma * gamma * beta));
    return {gamma, k1};
  }

  // gamma beta + delta0 = -k1 m_p together with k1^2 = |w_bar + gamma w0|^2.
  const double m2 = m_p * m_p;
  const double qa = beta * beta - m2 * beta;
  const double qb = 2.0 * delta0 * (beta - m2);
  const double qc = delta0 * delta0 - m2 * wbar2;

  double cands[2];
  int n_cands = 0;
  if (std::abs(qa) < 1e-15 * (std::abs(qa) + std::abs(qb) + std::abs(qc))) {
    if (qb == 0.0) throw NoRealRootError("solve_fixed_torsion: degenerate quadratic");
    cands[n_cands++] = -qc / qb;
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) throw NoRealRootError("solve_fixed_torsion: negative discriminant");
    const double sq = std::sqrt(disc);
    cands[n_cands++] = (-qb + sq) / (2.0 * qa);
    cands[n_cands++] = (-qb - sq) / (2.0 * qa);
  }
  for (int i = 0; i < n_cands; ++i) {
    const double k1 = -(cands[i] * beta + delta0) / m_p;
    if (k1 > 0.0) return {cands[i], k1};
  }
  throw NoRealRootError("solve_fixed_torsion: no branch with k1 > 0");
}

}  // namespace patchslide
