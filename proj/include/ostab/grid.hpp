#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

namespace ostab {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Chebyshev–Gauss–Lobatto collocation of the unit interval.
///
/// Nodes are (1 + cos(j*pi/n))/2, j = 0..n, descending from 1 to 0, so that
/// x = 1 (the wall), x = 1/2, and x = 0 (the channel centerline) are all
/// nodes.  Differentiation matrices of orders 1..4 act on point samples;
/// Clenshaw–Curtis weights integrate over [0,1].  Immutable after
/// construction and safe to share across threads.
class ChebGrid {
 public:
  int n = 0;                   ///< node count minus one; even, >= 8
  RVec nodes;                  ///< length n+1, nodes[0]=1 .. nodes[n]=0
  std::array<RMat, 4> diff;    ///< diff[k-1] = k-th derivative matrix
  RVec weights;                ///< Clenshaw–Curtis weights, sum = 1

  /// k-th order differentiation matrix, k in 1..4.
  [[nodiscard]] const RMat& d(int k) const { return diff.at(static_cast<std::size_t>(k - 1)); }
};

/// Build the collocation grid.  Requires n >= 8 and n even (so x = 1/2 is a
/// node); throws std::invalid_argument otherwise.
[[nodiscard]] ChebGrid build_grid(int n);

/// Clenshaw–Curtis estimate of the integral of point samples over [0,1].
/// Throws std::invalid_argument on length mismatch.
[[nodiscard]] cplx integrate(const ChebGrid& grid, const Vec& values);

/// Quadrature-based norm bundle for one sample vector.
struct NormSet {
  double l1 = 0;         ///< integral of |f|
  double l2 = 0;         ///< (integral of |f|^2)^(1/2)
  double lp = 0;         ///< (integral of |f|^p)^(1/p) at the requested p
  double sup = 0;        ///< max |f| over nodes
  double sobolev12 = 0;  ///< (l2(f)^2 + l2(f')^2)^(1/2), f' spectral
};

/// Compute all norms of a sample vector; p parameterizes the lp entry.
/// Throws std::invalid_argument on length mismatch or p < 1.
[[nodiscard]] NormSet norms(const ChebGrid& grid, const Vec& values, double p = 2.0);

}  // namespace ostab
