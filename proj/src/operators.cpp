#include "ostab/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace ostab {
namespace {

RVec sqrt_weights(const ChebGrid& grid) { return grid.weights.array().sqrt(); }

// Zero the mass-matrix rows that were replaced by boundary stencils; the
// pencil then carries one infinite eigenvalue per replaced row.
void zero_mass_rows(Mat& m, const std::vector<int>& rows) {
  for (int r : rows) m.row(r).setZero();
}

}  // namespace

DiscreteOperator assemble_os(const ChebGrid& grid, const Profile& profile,
                             const SpectralParams& params) {
  const Eigen::Index dim = grid.nodes.size();
  if (dim < 12) {
    throw std::invalid_argument("assemble_os: grid too coarse for a fourth-order pencil");
  }
  const cplx ib(0.0, params.beta);
  const Mat d2 = grid.d(2).cast<cplx>();
  const Mat helmholtz = d2 - params.alpha * params.alpha * Mat::Identity(dim, dim);

  Mat advected = -d2;  // -D^2 + i beta U
  advected += (ib * sample(profile, grid, 0).cast<cplx>()).asDiagonal().toDenseMatrix();

  DiscreteOperator op;
  op.a = advected * helmholtz;
  op.a -= (ib * sample(profile, grid, 2).cast<cplx>()).asDiagonal().toDenseMatrix();
  op.m = params.beta * helmholtz;

  // Replaced rows: u(1) and u'(1) at the wall-side rows, u'(0) and u'''(0)
  // at the centerline-side rows (node 0 is x=1, node n is x=0).
  const int n = grid.n;
  op.bc_rows = {0, 1, n - 1, n};
  op.a.row(0).setZero();
  op.a(0, 0) = 1.0;
  op.a.row(1) = grid.d(1).row(0).cast<cplx>();
  op.a.row(n - 1) = grid.d(1).row(n).cast<cplx>();
  op.a.row(n) = grid.d(3).row(n).cast<cplx>();
  zero_mass_rows(op.m, op.bc_rows);

  op.bc.kind = BoundaryKind::os_symmetric;
  op.grid = &grid;
  op.weight_sqrt = sqrt_weights(grid);
  return op;
}

DiscreteOperator assemble_rayleigh(const ChebGrid& grid, const Profile& profile, double alpha,
                                   cplx lambda) {
  const Eigen::Index dim = grid.nodes.size();
  const Mat neg_helmholtz =
      -grid.d(2).cast<cplx>() + alpha * alpha * Mat::Identity(dim, dim);

  const RVec u = sample(profile, grid, 0);
  DiscreteOperator op;
  op.a = (u.cast<cplx>() + Vec::Constant(dim, cplx(0, 1) * lambda)).asDiagonal() * neg_helmholtz;
  op.a += sample(profile, grid, 2).cast<cplx>().asDiagonal().toDenseMatrix();

  const int n = grid.n;
  op.bc_rows = {0, n};
  op.a.row(0).setZero();
  op.a(0, 0) = 1.0;
  op.a.row(n) = grid.d(1).row(n).cast<cplx>();

  op.bc.kind = BoundaryKind::rayleigh_nd;
  op.grid = &grid;
  op.weight_sqrt = sqrt_weights(grid);
  return op;
}

DiscreteOperator assemble_schrodinger(const ChebGrid& grid, const Profile& profile, double beta,
                                      const BoundaryConditionSet& bc) {
  const Eigen::Index dim = grid.nodes.size();
  DiscreteOperator op;
  op.a = -grid.d(2).cast<cplx>();
  op.a += (cplx(0, beta) * sample(profile, grid, 0).cast<cplx>()).asDiagonal().toDenseMatrix();
  op.m = Mat::Identity(dim, dim);

  const int n = grid.n;
  op.bc_rows = {0, n};
  op.bc = bc;
  if (bc.kind == BoundaryKind::integral_zeta) {
    if (!bc.zeta || bc.zeta->size() != dim) {
      throw std::invalid_argument("assemble_schrodinger: integral_zeta requires zeta samples");
    }
    // <zeta, u> = sum_j w_j conj(zeta_j) u_j = 0 replaces the Dirichlet row.
    op.a.row(0) =
        (grid.weights.cast<cplx>().array() * bc.zeta->array().conjugate()).matrix().transpose();
  } else {
    op.bc.kind = BoundaryKind::neumann_dirichlet;
    op.a.row(0).setZero();
    op.a(0, 0) = 1.0;
  }
  op.a.row(n) = grid.d(1).row(n).cast<cplx>();
  zero_mass_rows(op.m, op.bc_rows);

  op.grid = &grid;
  op.weight_sqrt = sqrt_weights(grid);
  return op;
}

DiscreteOperator assemble_m_u(const ChebGrid& grid, const Profile& profile) {
  const RVec u = sample(profile, grid, 0);
  const RVec wu2 = grid.weights.array() * u.array().square();

  DiscreteOperator op;
  const RMat stiffness = grid.d(1).transpose() * wu2.asDiagonal() * grid.d(1);
  op.a = stiffness.cast<cplx>();
  op.m = RMat(wu2.asDiagonal()).cast<cplx>();
  op.bc.kind = BoundaryKind::natural;
  op.grid = &grid;
  op.weight_sqrt = sqrt_weights(grid);
  return op;
}

Vec zeta_cosh(const ChebGrid& grid, double alpha) {
  Vec z(grid.nodes.size());
  for (Eigen::Index j = 0; j < grid.nodes.size(); ++j) {
    const double x = grid.nodes[j];
    // cosh(ax)/cosh(a) = e^{a(x-1)} (1 + e^{-2ax}) / (1 + e^{-2a})
    z[j] = std::exp(alpha * (x - 1.0)) * (1.0 + std::exp(-2.0 * alpha * x)) /
           (1.0 + std::exp(-2.0 * alpha));
  }
  return z;
}

bool u0_member(const ChebGrid& grid, const Vec& zeta, double tol) {
  if (zeta.size() != grid.nodes.size()) return false;
  if (std::abs(zeta[0] - 1.0) > tol) return false;
  const cplx dz0 = grid.d(1).row(grid.n).cast<cplx>().dot(zeta);
  return std::abs(dz0) <= tol;
}

bool u2_member(const ChebGrid& grid, const Vec& zeta, double beta, cplx lambda, double theta,
               double tol) {
  if (!u0_member(grid, zeta, tol)) return false;
  const double lambda_beta = 1.0 + std::abs(lambda) * std::cbrt(beta);
  const double bound = theta * std::pow(beta, 1.0 / 6.0) * std::pow(lambda_beta, 0.25);
  const Vec dz = grid.d(1).cast<cplx>() * zeta;
  const double l2 = std::sqrt(grid.weights.dot(dz.cwiseAbs2()));
  return l2 <= bound + tol;
}

bool u3_member(const ChebGrid& grid, const Vec& zeta, double beta, cplx lambda, double theta,
               double alpha, double tol) {
  if (!u2_member(grid, zeta, beta, lambda, theta, tol)) return false;
  const double sup = zeta.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < grid.nodes.size(); ++j) {
    if (std::abs(zeta[j]) > std::exp(-alpha * (1.0 - grid.nodes[j])) * sup + 1e-12) return false;
  }
  return true;
}

}  // namespace ostab
