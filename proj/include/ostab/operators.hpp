#pragma once

#include <optional>
#include <vector>

#include "ostab/grid.hpp"
#include "ostab/profiles.hpp"

namespace ostab {

/// Wavenumber/spectral-parameter bundle for the channel operators.
/// beta = alpha * Reynolds; the spectral parameter lambda has mu = Re lambda
/// (mu < 0 on the unstable side) and nu = Im lambda.
struct SpectralParams {
  double alpha = 0;  ///< streamwise wavenumber, >= 0
  double beta = 0;   ///< alpha times Reynolds number, > 0
  cplx lambda{0, 0};

  [[nodiscard]] double mu() const { return lambda.real(); }
  [[nodiscard]] double nu() const { return lambda.imag(); }
  /// 1 + |lambda| beta^{1/3}, the boundary-layer scale factor (>= 1).
  [[nodiscard]] double lambda_beta() const { return 1.0 + std::abs(lambda) * std::cbrt(beta); }
  /// Reynolds number beta/alpha; requires alpha > 0.
  [[nodiscard]] double reynolds() const { return beta / alpha; }
};

enum class BoundaryKind {
  os_symmetric,       ///< u'(0) = u'''(0) = 0, u(1) = u'(1) = 0
  neumann_dirichlet,  ///< u'(0) = 0, u(1) = 0
  rayleigh_nd,        ///< phi'(0) = 0, phi(1) = 0
  integral_zeta,      ///< <zeta, u> = 0, u'(0) = 0
  natural,            ///< no replaced rows (weak-form assemblies)
};

struct BoundaryConditionSet {
  BoundaryKind kind = BoundaryKind::natural;
  std::optional<Vec> zeta;  ///< constraint function samples for integral_zeta
};

/// Dense collocation matrix with boundary rows replaced in place, plus the
/// metadata needed to treat it as an L^2 operator: the grid, sqrt-quadrature
/// weights, and (for pencils) a mass matrix whose replaced rows are zero.
struct DiscreteOperator {
  Mat a;
  Mat m;  ///< empty when the operator is not a pencil
  BoundaryConditionSet bc;
  std::vector<int> bc_rows;
  const ChebGrid* grid = nullptr;
  RVec weight_sqrt;

  [[nodiscard]] bool has_mass() const { return m.size() != 0; }
  [[nodiscard]] Eigen::Index dim() const { return a.rows(); }
};

/// Fourth-order channel-stability pencil a - lambda m with
///   a = (-D^2 + i beta U)(D^2 - alpha^2) - i beta U'',
///   m = beta (D^2 - alpha^2),
/// on even symmetric modes: u'(0) = u'''(0) = 0, u(1) = u'(1) = 0.
/// Throws std::invalid_argument if the grid is too coarse (n + 1 < 12).
[[nodiscard]] DiscreteOperator assemble_os(const ChebGrid& grid, const Profile& profile,
                                           const SpectralParams& params);

/// Inviscid (Rayleigh) operator (U + i lambda)(-D^2 + alpha^2) + U'' with
/// phi'(0) = 0, phi(1) = 0.  No mass matrix.
[[nodiscard]] DiscreteOperator assemble_rayleigh(const ChebGrid& grid, const Profile& profile,
                                                 double alpha, cplx lambda);

/// Schrodinger operator -D^2 + i beta U, either with u'(0) = 0, u(1) = 0 or
/// with the Dirichlet row replaced by the integral constraint <zeta, u> = 0.
/// The mass matrix is the identity with the replaced rows zeroed, so the
/// pencil eigenvalues are beta * lambda in the paper's normalization.
[[nodiscard]] DiscreteOperator assemble_schrodinger(const ChebGrid& grid, const Profile& profile,
                                                    double beta, const BoundaryConditionSet& bc);

/// Weighted Sturm-Liouville pencil for -U^{-2} (U^2 w')': stiffness
/// a = D1^T diag(w_q U^2) D1 against mass m = diag(w_q U^2), assembled in
/// weak form (the U^2 weight vanishes at the wall, so no row is replaced).
/// Its smallest eigenvalue is 0 with constant eigenvector.
[[nodiscard]] DiscreteOperator assemble_m_u(const ChebGrid& grid, const Profile& profile);

/// Samples of cosh(alpha x)/cosh(alpha), evaluated in scaled exponential
/// form so large alpha cannot overflow.
[[nodiscard]] Vec zeta_cosh(const ChebGrid& grid, double alpha);

/// Constraint-class membership tests for integral-condition functions.
/// u0: zeta'(0) = 0 (spectral derivative) and zeta(1) = 1.
[[nodiscard]] bool u0_member(const ChebGrid& grid, const Vec& zeta, double tol = 1e-8);
/// u2: u0 plus the derivative bound ||zeta'||_2 <= theta beta^{1/6} lambda_beta^{1/4}.
[[nodiscard]] bool u2_member(const ChebGrid& grid, const Vec& zeta, double beta, cplx lambda,
                             double theta, double tol = 1e-8);
/// u3: u2 plus pointwise decay |zeta(x)| <= e^{-alpha(1-x)} max|zeta| at
/// every node (1e-12 slack).  Note cosh(alpha x)/cosh(alpha) satisfies this
/// only up to a factor 2/(1 + e^{-2 alpha}): strict membership fails at the
/// centerline, where cosh(0)/cosh(alpha) = 2 e^{-alpha}/(1 + e^{-2 alpha}).
[[nodiscard]] bool u3_member(const ChebGrid& grid, const Vec& zeta, double beta, cplx lambda,
                             double theta, double alpha, double tol = 1e-8);

}  // namespace ostab
