#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "patchslide/limit_surface.hpp"
#include "patchslide/se2.hpp"

namespace patchslide {

/// Roots below this are treated as the sticking boundary (alpha = 0).
inline constexpr double kAlphaEps = 1e-10;
/// |c_i| below this marks the pencil degenerate (some eigenvalue on 1).
inline constexpr double kDegenerateCTol = 1e-10;
/// Relative angular-velocity magnitude below which the pivot is at infinity.
inline constexpr double kOmegaEps = 1e-12;

/// Simultaneous diagonalization of the SPD pencil (A_hat, B):
/// phi^T A_hat phi = I and phi^T B phi = diag(lambda), lambda descending.
/// The columns of phi are the principal sliding wrenches.
struct DiagonalizedPair {
  Mat3 phi = Mat3::Identity();
  Vec3 lambda = {1.0, 1.0, 1.0};

  Vec3 c() const { return lambda - Vec3::Ones(); }
  bool degenerate_c(double tol = kDegenerateCTol) const {
    return (c().cwiseAbs().array() < tol).any();
  }
};

enum class Mode { kSticking, kPivoting, kSlipping };

std::string_view to_string(Mode mode);

/// Instantaneous center of rotation of the patch relative to the object,
/// in the hand frame. A pure relative translation puts it at infinity.
struct Pivot {
  bool at_infinity = false;
  Vec2 point = {0.0, 0.0};
};

/// Full quasi-static solution for one hand twist.
struct ModeSolution {
  Mode mode = Mode::kSticking;
  std::optional<double> alpha;  // k2 / k1, pivoting only
  double k1 = 0.0;
  double k2 = 0.0;
  Twist nu_o;    // object twist, object frame
  Twist nu_rel;  // patch twist relative to the object, hand frame
  Wrench w_h;    // friction wrench on the hand, hand frame
  Wrench w_o;    // friction wrench on the object, object frame
  Pivot pivot;
  /// Set when C was rank deficient and the sticking convention was applied.
  bool degenerate_c = false;
  /// Cleared by iterate_pivot when it runs out of iterations.
  bool converged = true;
};

/// Solve the generalized eigenvalue problem B phi = A_hat phi Lambda by
/// symmetric reduction (Cholesky of A_hat, eigendecomposition of the
/// similarity-transformed B). Throws NotPositiveDefiniteError.
DiagonalizedPair diagonalize(const LimitSurface& a_hat, const LimitSurface& b);

/// All real roots (any sign) of the cleared-denominator form of
/// sum_i c_i (nu_i / (alpha lambda_i + 1))^2 = 0, via companion-matrix
/// eigenvalues. Exposed for boundary analysis; most callers want solve_alpha.
std::vector<double> real_alpha_roots(const DiagonalizedPair& pair, const Twist& nu_h_tilde);

/// The unique root alpha > kAlphaEps if one exists (at most one exists when C
/// is full rank). Throws DegenerateCError when C is rank deficient.
std::optional<double> solve_alpha(const DiagonalizedPair& pair, const Twist& nu_h_tilde);

/// Mode selection: for nu_h != 0, pivoting iff a positive alpha root exists,
/// else sticking iff nu~^T C nu~ <= 0, else slipping. For nu_h = 0 the mode
/// follows the sign of C (pivoting when indefinite, alpha undefined).
std::pair<Mode, std::optional<double>> select_mode(const DiagonalizedPair& pair,
                                                   const Twist& nu_h_tilde);

/// Complete quasi-static solve: mode, scale factors, object/relative twists,
/// wrenches on both contacts and the pivot point. g maps object-frame twists
/// to the hand frame. A rank-deficient C is classified sticking (the
/// conservative zero-relative-velocity prediction) and flagged.
ModeSolution solve(const LimitSurface& a_hat, const LimitSurface& b, const Mat3& g,
                   const Twist& nu_h);

/// Center of rotation of a twist: p = [-vy, vx] / omega.
Pivot pivot_from_twist(const Twist& nu);

}  // namespace patchslide
