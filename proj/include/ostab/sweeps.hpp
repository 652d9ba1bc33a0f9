#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ostab/linalg.hpp"
#include "ostab/operators.hpp"
#include "ostab/profiles.hpp"

namespace ostab {

/// Thrown when a stability gate finds an eigenvalue inside the half-plane a
/// supremum was requested over.
struct UnstableRegionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One resolvent evaluation at a fixed spectral point.
struct SweepRecord {
  double alpha = 0.0;
  double beta = 0.0;
  cplx lambda{0.0, 0.0};
  double resolvent_norm = 0.0;   ///< weighted operator norm of the inverse
  double derivative_norm = 0.0;  ///< weighted norm of d/dx composed with the inverse
  bool sigma_min_flag = true;    ///< iteration convergence flag
};

/// Sort key used everywhere records are emitted: (alpha, beta, Im lambda,
/// Re lambda), ascending.
void sort_records(std::vector<SweepRecord>& records);

/// Band of streamwise wavenumbers whose leading mode grows in time at one
/// Reynolds number; the endpoints are zeros of the stability margin
/// Re(lambda) + alpha/R (the temporal eigenvalue is -alpha*(lambda +
/// alpha^2/beta), so neutrality sits at Re(lambda) = -alpha/R).
struct NeutralCurvePoint {
  double reynolds = 0.0;
  double alpha_lower = 0.0;
  double alpha_upper = 0.0;
};

/// Result of the critical-point search.
struct CriticalPoint {
  double reynolds = 0.0;
  double alpha = 0.0;
  cplx c{0.0, 0.0};        ///< classical complex phase speed at the critical point
  cplx lambda{0.0, 0.0};   ///< spectral parameter at the critical point
  bool converged = false;
};

/// Log-log least-squares fit y = exp(intercept) * x^slope.
struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Diagnostics from a half-plane supremum scan.
struct SupDiagnostics {
  double boundary_sup = 0.0;      ///< max over the boundary line after refinement
  double argmax_nu = 0.0;         ///< Im lambda at the boundary maximum
  double interior_max = 0.0;      ///< largest of the interior spot-checks
  bool interior_dominates = true; ///< interior_max <= 1.05 * boundary_sup
  double far_field_minus = 0.0;   ///< norm at Im lambda = -5 on the line
  double far_field_plus = 0.0;    ///< norm at Im lambda = +5 on the line
  int scan_points = 0;
};

/// One classified cell of a parameter-region map.
struct RegionCell {
  double alpha = 0.0;
  double nu = 0.0;
  std::string label;             ///< region name, "unstable", or "uncovered"
  double resolvent_norm = 0.0;   ///< combined norm (inverse plus derivative); 0 when skipped
  double predicted_scale = 0.0;  ///< constant-free bound for the region; 0 when none applies
  double ratio = 0.0;            ///< resolvent_norm / predicted_scale, 0 when skipped
};

/// Grid size used for a given frequency parameter: max(128, ceil(12
/// beta^{1/4})) rounded up to even, so the beta^{-1/4} critical-layer width
/// stays resolved by the endpoint-clustered nodes.
[[nodiscard]] int resolution_for(double beta);

/// Run indexed tasks 0..count-1, splitting across OSTAB_WORKERS threads
/// (default 1).  The callee writes results by index, so the merge order --
/// and therefore all downstream output -- is identical for any worker
/// count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

/// Resolvent data at one spectral point: the operator is assembled at fixed
/// lambda, boundary rows act as hard constraints, and both norms are taken
/// in the quadrature-weighted sense.  A numerically singular solve (lambda
/// is an eigenvalue to machine precision) records +infinity.
/// Throws std::invalid_argument on nonpositive beta, negative alpha, or
/// undersized grids.
[[nodiscard]] SweepRecord resolvent_at(const Profile& profile, const SpectralParams& params,
                                       int n);

/// Resolvent norms along the line Re lambda = upsilon * beta^{-1/2},
/// Im lambda in [-1, U(0)+1], 200 points, sorted.  Derivative norms are
/// filled only when requested (they cost a second iteration per point).
[[nodiscard]] std::vector<SweepRecord> scan_line(const Profile& profile, double alpha,
                                                 double beta, double upsilon, int n,
                                                 bool with_derivative = false);

/// Supremum of resolvent_norm over the half-plane Re lambda < upsilon *
/// beta^{-1/2}, approximated by the boundary-line scan plus golden-section
/// refinement around the maximum.  The operator is analytic in the open
/// half-plane and decays far from the spectrum, so the boundary dominates;
/// 20 interior spot-checks and far-field samples at Im lambda = +-5 verify
/// that heuristic and land in `diag` (a violation widens the returned value
/// rather than being hidden).  Throws UnstableRegionError if the leading
/// eigenvalue lies inside the half-plane.
[[nodiscard]] double sup_resolvent(const Profile& profile, double alpha, double beta,
                                   double upsilon, int n, SupDiagnostics* diag = nullptr);

/// Classical complex phase speed c = -i (lambda + alpha^2 / beta).
/// Throws std::invalid_argument when alpha = 0 (no phase speed exists).
[[nodiscard]] cplx convert_c(const SpectralParams& params, cplx lambda);

/// Leading (smallest real part) eigenvalue of the channel pencil at
/// frequency beta = alpha * reynolds.  Candidates come from a full
/// eigensolve at min(n, 256) and are re-converged on the n-point grid.
[[nodiscard]] cplx growth(const Profile& profile, double alpha, double reynolds, int n);

/// For each Reynolds number, bracket and bisect the sign changes of the
/// stability margin Re(growth) + alpha/R over alpha in [0.1, 2.5] (40-point
/// scan, 1e-3 endpoint tolerance).  Reynolds numbers with no sign change
/// contribute no entry.  Pass n = 0 to size the grid per Reynolds number
/// via resolution_for.
[[nodiscard]] std::vector<NeutralCurvePoint> neutral_curve(const Profile& profile,
                                                           const std::vector<double>& reynolds,
                                                           int n = 0);

/// Critical Reynolds number: minimize the neutral Reynolds over alpha
/// (golden section) with a bisection on the stability margin inside; the
/// returned point satisfies |Re lambda + alpha/R| < 1e-7.  Intended for the
/// parabolic profile, whose neutral curve has a single nose.  n is clamped
/// to >= 128.
[[nodiscard]] CriticalPoint critical_reynolds(const Profile& profile, int n = 128);

/// Least-squares slope of log(value) against log(beta).  Requires at least
/// three pairs, positive entries, and distinct beta; throws
/// std::invalid_argument otherwise.
[[nodiscard]] ExponentFit exponent_fit(const std::vector<std::pair<double, double>>& pairs);

/// Classify each (alpha, nu) cell against the regionwise resolvent bounds
/// at spectral parameter lambda = i nu, evaluate the combined resolvent
/// norm where a bound applies, and report the constant-free ratio.  Cells
/// in the known instability band are labeled "unstable" and cells no bound
/// covers are labeled "uncovered"; neither is solved.
[[nodiscard]] std::vector<RegionCell> region_map(const Profile& profile, double beta,
                                                 const std::vector<double>& alpha_grid,
                                                 const std::vector<double>& nu_grid, int n);

}  // namespace ostab
