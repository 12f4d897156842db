#pragma once

#include "patchslide/solver.hpp"

namespace patchslide {

// Approximate pivoting solution with a presumed pivot point, the iterative
// refinement of that point, and the zero/fixed torsional-friction special
// cases that recover classic point pushing.

struct PivotGuess {
  Vec2 p = {0.0, 0.0};  // hand frame
};

/// One pivoting solve with the pivot constrained to guess.p. The quadratic
/// for gamma has two branches; the one giving k2 > 0 is kept. Throws
/// NoRealRootError when the discriminant is negative (the guess is not
/// consistent with pivoting) and NegativeK2Error when neither branch works.
ModeSolution approx_solve(const LimitSurface& a_hat, const LimitSurface& b, const Mat3& g,
                          const Twist& nu_h, const PivotGuess& guess);

/// Alternate approx_solve with pivot updates from the resulting relative
/// twist until the update is below tol or max_iter is hit; overshooting
/// updates are damped by half. A non-converged result is returned with
/// converged = false rather than thrown.
ModeSolution iterate_pivot(const LimitSurface& a_hat, const LimitSurface& b, const Mat3& g,
                           const Twist& nu_h, const PivotGuess& guess, int max_iter = 50,
                           double tol = 1e-9);

/// Object spin rate gamma when the contact transmits no torque about the
/// pivot: gamma = -n^T A_hat^-1 Jp+ v_p / (n^T A_hat^-1 n).
double solve_zero_torsion(const LimitSurface& a_hat, const Twist& nu_h, const Vec2& p);

struct FixedTorsionSolution {
  double gamma = 0.0;
  double k1 = 0.0;
};

/// Like solve_zero_torsion but with a prescribed torque m_p about the pivot;
/// solves the resulting quadratic, keeping the real branch with k1 > 0.
FixedTorsionSolution solve_fixed_torsion(const LimitSurface& a_hat, const Twist& nu_h,
                                         const Vec2& p, double m_p);

}  // namespace patchslide
