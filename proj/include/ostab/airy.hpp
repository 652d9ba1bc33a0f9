#pragma once

#include <complex>

#include "ostab/grid.hpp"
#include "ostab/records.hpp"

namespace ostab {

/// Airy function Ai on the complex plane: Maclaurin series for |z| <= 6.5,
/// asymptotic expansions beyond, rotated into the |arg z| <= 2*pi/3 sector
/// by the three-fold connection identity where needed.  Values whose
/// exponential factor drops below the double-precision floor (exponent
/// beyond ~700) are flushed to zero rather than left to underflow traps.
[[nodiscard]] cplx airy_ai(cplx z);

/// Derivative Ai'(z), same evaluation strategy as airy_ai.
[[nodiscard]] cplx airy_ai_prime(cplx z);

/// Antiderivative-type Airy function
///   A0(z) = e^{i pi/6} Int_z^inf Ai(e^{i pi/6} t) dt,
/// evaluated as 1/3 minus the integral of Ai over the straight segment from
/// 0 to e^{i pi/6} z (Maclaurin antiderivative series near the origin,
/// adaptive Gauss-Kronrod quadrature for the rest).  A0(0) = 1/3 and
/// A0'(z) = -e^{i pi/6} Ai(e^{i pi/6} z).
[[nodiscard]] cplx a0(cplx z);

/// Smallest real part among the zeros of z -> A0(iz), which bounds the
/// admissible spectral region of the wall layer.  Zeros are counted by the
/// argument principle over the box [0,6] x [-1,8], localized by recursive
/// subdivision, and polished by Newton; the value is computed once and
/// cached.  Throws std::runtime_error if the polished roots do not account
/// for every zero the winding number promises.
[[nodiscard]] double theta1r();

/// Smooth cutoff: 1 for t <= 1/2, 0 for t >= 3/4, with the standard
/// exponential partition-of-unity transition in between (infinitely
/// differentiable).
[[nodiscard]] double cutoff_chi(double t);

/// Parameters of the wall boundary layer: spectral offset lambda and the
/// combined frequency beta = alpha * Reynolds.
struct BoundaryLayerParams {
  cplx lambda{0.0, 0.0};
  double beta = 1.0;
  /// Rescaled spectral magnitude 1 + |lambda| beta^{1/3} that sets the
  /// layer's amplitude scales.
  [[nodiscard]] double lambda_beta() const {
    return 1.0 + std::abs(lambda) * std::cbrt(beta);
  }
};

/// Decaying wall-layer solution of
///   -psi'' + i beta [(x - 1) + i lambda] psi = 0   on (-inf, 1),
/// normalized so that its integral over (-inf, 1] equals beta^{-1/3}.
/// Defined whenever Re lambda < (theta1r() - 1e-3) beta^{-1/3}; throws
/// std::domain_error otherwise.
[[nodiscard]] cplx psi_tilde(double x, const BoundaryLayerParams& p);

/// psi_tilde localized to the wall: psi(x) = psi_tilde(x) * chi(1 - x),
/// supported on [1/4, 1] and equal to psi_tilde on [1/2, 1].
[[nodiscard]] cplx psi(double x, const BoundaryLayerParams& p);

/// Airy-ratio wall corrector normalized to 1 at x = 1:
///   psi_hat(x) = Ai(beta^{1/3} e^{-i pi/6} [(1-x) - i lambda])
///                / Ai(e^{-i 2 pi/3} beta^{1/3} lambda) * chi(1 - x).
/// Same admissibility precondition as psi_tilde.
[[nodiscard]] cplx psi_hat(double x, const BoundaryLayerParams& p);

/// Measures ||(1-x)^s psi_hat||_1 against its parameter scale
/// lambda_beta^{-(s+1)/2} beta^{-(s+1)/3} and reports the ratio; the
/// record's p field holds the weight power s.  Requires s in [0, 3].
[[nodiscard]] AuditRecord bound_check_psi(const BoundaryLayerParams& p, double s);

}  // namespace ostab
