#include "ostab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ostab {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() {
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

cplx SplitMix64::gaussian() {
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double t = 2.0 * M_PI * uniform();
  return {r * std::cos(t), r * std::sin(t)};
}

Vec random_unit_vector(Eigen::Index dim, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.gaussian();
  return v / v.norm();
}

Lu::Lu(Mat a) : a_(std::move(a)), lu_(a_) {
  const auto& packed = lu_.matrixLU();
  double min_pivot = std::numeric_limits<double>::infinity();
  double max_pivot = 0.0;
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    const double p = std::abs(packed(i, i));
    min_pivot = std::min(min_pivot, p);
    max_pivot = std::max(max_pivot, p);
  }
  singular_ = !(min_pivot > 1e-300);
  near_singular_ = singular_ || !(min_pivot > 1e-13 * max_pivot);
}

Vec Lu::raw_solve(const Vec& b) const { return lu_.solve(b); }

Vec Lu::raw_solve_adjoint(const Vec& b) const {
  // a = P^{-1} L U, so a^H x = b unwinds as U^H y = b, L^H z = y, x = P^T z.
  const auto& packed = lu_.matrixLU();
  const Vec y = packed.adjoint().triangularView<Eigen::Lower>().solve(b);
  const Vec z = packed.adjoint().triangularView<Eigen::UnitUpper>().solve(y);
  return lu_.permutationP().transpose() * z;
}

Vec Lu::solve(const Vec& b) const {
  Vec x = raw_solve(b);
  x += raw_solve(Vec(b - a_ * x));
  return x;
}

Vec Lu::solve_adjoint(const Vec& b) const {
  Vec x = raw_solve_adjoint(b);
  x += raw_solve_adjoint(Vec(b - a_.adjoint() * x));
  return x;
}

Mat Lu::solve_matrix(const Mat& b) const { return lu_.solve(b); }

Mat Lu::solve_transposed_matrix(const Mat& b) const {
  // a = P^{-1} L U, so a^T x = b unwinds as U^T y = b, L^T z = y, x = P^T z.
  const auto& packed = lu_.matrixLU();
  Mat x = packed.transpose().triangularView<Eigen::Lower>().solve(b);
  packed.transpose().triangularView<Eigen::UnitUpper>().solveInPlace(x);
  return lu_.permutationP().transpose() * x;
}

Vec lu_solve(const Mat& a, const Vec& b, bool adjoint) {
  Lu f(a);
  if (f.singular()) throw SingularMatrixError("lu_solve: pivot underflow");
  return adjoint ? f.solve_adjoint(b) : f.solve(b);
}

namespace {

// Diagonal similarity balancing (Parlett-Reinsch, radix 2) so Hessenberg+QR
// sees comparable row and column norms; without it the shift-inverted
// operator of a stiff pencil can have norm ~1e14 while its eigenvalues are
// O(1), and QR's backward error wipes them out.  Returns d with the matrix
// replaced by D^{-1} C D; eigenvectors of the original are D * (balanced).
RVec balance_in_place(Mat& c) {
  const Eigen::Index n = c.rows();
  RVec d = RVec::Ones(n);
  for (bool again = true; again;) {
    again = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      double row = 0, col = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        row += std::abs(c(i, j));
        col += std::abs(c(j, i));
      }
      if (row == 0.0 || col == 0.0) continue;
      const double before = row + col;
      double f = 1.0;
      while (col < row / 2.0) {
        col *= 2.0;
        row /= 2.0;
        f *= 2.0;
      }
      while (col >= row * 2.0) {
        col /= 2.0;
        row *= 2.0;
        f /= 2.0;
      }
      if (row + col < 0.95 * before) {
        again = true;
        d[i] *= f;
        c.row(i) /= f;
        c.col(i) *= f;
      }
    }
  }
  return d;
}

// Shared inverse-power loop: largest eigenvalue of (B^H B)^{-1} through
// alternating solves, with the Rayleigh quotient ||B^{-H}u||^2 as estimate.
SigmaMinResult sigma_min_loop(const Lu& f, std::uint64_t seed) {
  SigmaMinResult out;
  if (f.singular()) {
    out.value = 0.0;
    return out;
  }
  Vec u = random_unit_vector(f.dim(), seed);
  double prev = -1.0;
  int stable = 0;
  for (int it = 1; it <= 500; ++it) {
    out.iterations = it;
    const Vec v = f.solve_adjoint(u);
    const double vn = v.norm();
    out.value = 1.0 / vn;
    const Vec w = f.solve(Vec(v / vn));
    u = w / w.norm();
    if (prev > 0.0 && std::abs(out.value - prev) <= 1e-8 * out.value) {
      if (++stable >= 2) return out;
    } else {
      stable = 0;
    }
    prev = out.value;
  }
  out.converged = false;
  return out;
}

}  // namespace

SigmaMinResult sigma_min(const Mat& a, const RVec& weight_sqrt, std::uint64_t seed) {
  if (weight_sqrt.size() != 0 && weight_sqrt.size() != a.rows()) {
    throw std::invalid_argument("sigma_min: weight length does not match matrix dimension");
  }
  Mat b = a;
  if (weight_sqrt.size() == a.rows()) {
    b = weight_sqrt.cast<cplx>().asDiagonal() * a *
        weight_sqrt.cwiseInverse().cast<cplx>().asDiagonal();
  }
  return sigma_min_loop(Lu(std::move(b)), seed);
}

SigmaMinResult sigma_min(const Lu& factored, std::uint64_t seed) {
  return sigma_min_loop(factored, seed);
}

OpNormResult op_norm(const LinearMap& apply, const LinearMap& apply_adjoint, Eigen::Index dim,
                     std::uint64_t seed) {
  // Adjoint consistency: <y, S x> must equal <S^H y, x>.
  for (int k = 0; k < 3; ++k) {
    const Vec x = random_unit_vector(dim, seed + 11 * k + 1);
    const Vec sx = apply(x);
    const Vec y = random_unit_vector(sx.size(), seed + 11 * k + 5);
    const cplx lhs = y.dot(sx);
    const cplx rhs = apply_adjoint(y).dot(x);
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});
    if (std::abs(lhs - rhs) > 1e-8 * scale) {
      throw AdjointMismatchError("op_norm: adjoint map is inconsistent with the forward map");
    }
  }

  OpNormResult out;
  Vec u = random_unit_vector(dim, seed);
  double prev = -1.0;
  int stable = 0;
  for (int it = 1; it <= 2000; ++it) {
    out.iterations = it;
    const Vec v = apply(u);
    out.value = v.norm();
    if (out.value == 0.0) return out;  // u in the kernel and S^H S u = 0
    const Vec w = apply_adjoint(v);
    const double wn = w.norm();
    if (wn == 0.0) return out;
    u = w / wn;
    if (prev >= 0.0 && std::abs(out.value - prev) <= 1e-6 * std::max(out.value, 1e-300)) {
      if (++stable >= 2) return out;
    } else {
      stable = 0;
    }
    prev = out.value;
  }
  out.converged = false;
  return out;
}

SpectrumResult spectrum(const Mat& a, const Mat& m, double tol, cplx shift) {
  SpectrumResult out;
  const Eigen::Index dim = a.rows();

  cplx s = shift;
  Lu f(Mat(a - s * m));
  for (int tries = 0; f.near_singular() && tries < 5; ++tries) {
    s += 1e-3 * (1.0 + std::abs(s));
    f = Lu(Mat(a - s * m));
  }

  // Left-sided product M (A - sM)^{-1}: rows of M that were zeroed for
  // boundary conditions stay exactly zero, so the pencil's infinite
  // eigenvalues appear as exact zero thetas instead of roundoff-sized ones.
  // Its eigenpairs (theta, w) map to pencil pairs lambda = s + 1/theta with
  // eigenvector v = (A - sM)^{-1} w.
  Mat c = f.solve_transposed_matrix(m.transpose()).transpose();
  const RVec d = balance_in_place(c);
  Eigen::ComplexEigenSolver<Mat> es(c, /*computeEigvecs=*/true);
  out.complete = es.info() == Eigen::Success;
  if (!out.complete && es.eigenvalues().size() == 0) {
    out.infinite_filtered = static_cast<int>(dim);
    return out;
  }

  // Back-transform and pre-filter.  theta = 0 marks an infinite eigenvalue;
  // wildly large back-transformed magnitudes are screened against the
  // median.
  std::vector<cplx> lambdas(dim, cplx(0, 0));
  std::vector<bool> finite(dim, false);
  std::vector<double> mags;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const cplx theta = es.eigenvalues()[i];
    if (std::abs(theta) < 1e-290) continue;  // 1/theta would overflow
    lambdas[static_cast<std::size_t>(i)] = s + 1.0 / theta;
    finite[static_cast<std::size_t>(i)] = true;
    mags.push_back(std::abs(lambdas[static_cast<std::size_t>(i)]));
  }
  double threshold = std::numeric_limits<double>::infinity();
  if (!mags.empty()) {
    std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
    threshold = 1e8 * std::max(mags[mags.size() / 2], 1e-300);
  }

  // The QR eigendecomposition above is backward stable for the shift-
  // inverted product, not for the pencil; where the resolvent is large (the
  // regime this toolkit exists to measure) that gap spans many orders of
  // magnitude and the raw candidates can be badly off.  Polish each
  // candidate with two-sided inverse iteration, which works directly on
  // (A, M): candidates that cannot be polished below tolerance are dropped
  // as unresolved, and candidates that collapse onto an already-kept
  // eigenvalue are merged.
  std::vector<std::pair<cplx, Eigen::Index>> candidates;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (!finite[static_cast<std::size_t>(i)]) continue;
    if (std::abs(lambdas[static_cast<std::size_t>(i)]) > threshold) continue;
    candidates.emplace_back(lambdas[static_cast<std::size_t>(i)], i);
  }

  std::vector<cplx> values;
  std::vector<double> residuals;
  std::vector<Vec> vectors;
  for (const auto& [lam, idx] : candidates) {
    const Vec w = d.cast<cplx>().asDiagonal() * es.eigenvectors().col(idx);
    const Vec v0 = f.solve(w);
    const EigenPoint p = track_eigenvalue(a, m, lam, &v0, /*max_iters=*/4, 1e-13);
    if (!(p.residual <= tol)) continue;
    if (std::abs(p.lambda) > threshold) continue;
    bool duplicate = false;
    for (const cplx seen : values) {
      if (std::abs(seen - p.lambda) <= 1e-6 * (1.0 + std::abs(seen))) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    values.push_back(p.lambda);
    residuals.push_back(p.residual);
    vectors.push_back(p.v / p.v.norm());
  }

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) {
    if (values[p].real() != values[q].real()) return values[p].real() < values[q].real();
    return values[p].imag() < values[q].imag();
  });

  out.eigenvectors.resize(dim, static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.eigenvalues.push_back(values[order[k]]);
    out.residuals.push_back(residuals[order[k]]);
    out.eigenvectors.col(static_cast<Eigen::Index>(k)) = vectors[order[k]];
  }
  out.infinite_filtered = static_cast<int>(dim) - static_cast<int>(out.eigenvalues.size());
  return out;
}

SpectrumResult spectrum(const DiscreteOperator& pencil, double tol, cplx shift) {
  if (!pencil.has_mass()) {
    throw std::invalid_argument("spectrum: pencil requires a mass matrix");
  }
  return spectrum(pencil.a, pencil.m, tol, shift);
}

EigenPoint track_eigenvalue(const Mat& a, const Mat& m, cplx lambda0, const Vec* v0,
                            int max_iters, double tol) {
  EigenPoint p;
  p.lambda = lambda0;
  p.v = (v0 != nullptr && v0->size() == a.rows()) ? *v0
                                                  : random_unit_vector(a.rows(), kDefaultSeed);
  p.v /= p.v.norm();
  // Two-sided iteration: the left eigenvector steers the Rayleigh quotient,
  // which for a strongly non-normal pencil is the difference between
  // eigenvalues accurate to the residual and accurate to its square.
  Vec z = p.v;
  for (int it = 0; it < max_iters; ++it) {
    Lu f(Mat(a - p.lambda * m));
    if (f.singular()) {
      // lambda sits (numerically) exactly on an eigenvalue; nudge off it so
      // the solve stays meaningful.
      f = Lu(Mat(a - (p.lambda + 1e-12 * (1.0 + std::abs(p.lambda))) * m));
      if (f.singular()) break;
    }
    const Vec w = f.solve(Vec(m * p.v));
    const double wn = w.norm();
    if (!(wn > 0) || !std::isfinite(wn)) break;
    p.v = w / wn;
    const Vec y = f.solve_adjoint(Vec(m.adjoint() * z));
    const double yn = y.norm();
    if (yn > 0 && std::isfinite(yn)) z = y / yn;
    const cplx num = z.dot(a * p.v);
    const cplx den = z.dot(m * p.v);
    if (den == cplx(0, 0)) break;
    const cplx next = num / den;
    const bool settled = std::abs(next - p.lambda) <= tol * (1.0 + std::abs(next));
    p.lambda = next;
    if (settled) break;
  }
  p.residual = (a * p.v - p.lambda * (m * p.v)).norm() /
               (p.v.norm() * (a.norm() + std::abs(p.lambda) * m.norm()));
  p.converged = std::isfinite(p.residual);
  return p;
}

EigenPoint leftmost(const DiscreteOperator& pencil, cplx seed_shift, double tol) {
  const SpectrumResult spec = spectrum(pencil, tol, seed_shift);
  EigenPoint p;
  if (spec.eigenvalues.empty()) {
    p.converged = false;
    return p;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < spec.eigenvalues.size(); ++i) {
    if (spec.eigenvalues[i].real() < spec.eigenvalues[best].real()) best = i;
  }
  const Vec v = spec.eigenvectors.col(static_cast<Eigen::Index>(best));
  EigenPoint refined = track_eigenvalue(pencil.a, pencil.m, spec.eigenvalues[best], &v,
                                        /*max_iters=*/3, tol * 1e-4);
  if (refined.residual <= spec.residuals[best]) return refined;
  p.lambda = spec.eigenvalues[best];
  p.v = v;
  p.residual = spec.residuals[best];
  return p;
}

}  // namespace ostab
