#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ostab/operators.hpp"

namespace ostab {

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AdjointMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Splitmix-style deterministic generator; every iterative routine starts
/// from a vector drawn with a recorded seed so reruns are bit-identical.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();  ///< in (0,1)
  cplx gaussian();   ///< complex normal via Box-Muller
 private:
  std::uint64_t state_;
};

inline constexpr std::uint64_t kDefaultSeed = 0x6f73746162ULL;  // "ostab"

[[nodiscard]] Vec random_unit_vector(Eigen::Index dim, std::uint64_t seed);

/// Partial-pivot LU with direct and adjoint solves; solves apply one step
/// of iterative refinement against the stored matrix.
class Lu {
 public:
  explicit Lu(Mat a);
  [[nodiscard]] bool singular() const { return singular_; }       ///< pivot below 1e-300
  [[nodiscard]] bool near_singular() const { return near_singular_; }  ///< pivot ratio below 1e-13
  [[nodiscard]] Eigen::Index dim() const { return a_.rows(); }
  [[nodiscard]] const Mat& matrix() const { return a_; }
  [[nodiscard]] Vec solve(const Vec& b) const;
  [[nodiscard]] Vec solve_adjoint(const Vec& b) const;
  [[nodiscard]] Mat solve_matrix(const Mat& b) const;  ///< no refinement
  /// Solve a^T x = b columnwise (no refinement); used to form row-sided
  /// products like m a^{-1} without a second factorization.
  [[nodiscard]] Mat solve_transposed_matrix(const Mat& b) const;

 private:
  [[nodiscard]] Vec raw_solve(const Vec& b) const;
  [[nodiscard]] Vec raw_solve_adjoint(const Vec& b) const;
  Mat a_;
  Eigen::PartialPivLU<Mat> lu_;
  bool singular_ = false;
  bool near_singular_ = false;
};

/// Solve a x = b (or a^H x = b) with refinement; throws SingularMatrixError
/// on pivot underflow.
[[nodiscard]] Vec lu_solve(const Mat& a, const Vec& b, bool adjoint = false);

struct SigmaMinResult {
  double value = 0;       ///< smallest singular value estimate
  bool converged = true;  ///< false if 500 iterations elapsed first
  int iterations = 0;
};

/// Smallest singular value of diag(w) a diag(w)^{-1} by inverse power
/// iteration on the factored matrix, alternating adjoint and direct solves;
/// converged when successive estimates agree to 1e-8 relative (twice).
/// Returns value 0 if the factorization is exactly singular.
[[nodiscard]] SigmaMinResult sigma_min(const Mat& a, const RVec& weight_sqrt,
                                       std::uint64_t seed = kDefaultSeed);
/// Same iteration on an existing factorization (weights already applied).
[[nodiscard]] SigmaMinResult sigma_min(const Lu& factored, std::uint64_t seed = kDefaultSeed);

struct OpNormResult {
  double value = 0;
  bool converged = true;
  int iterations = 0;
};

using LinearMap = std::function<Vec(const Vec&)>;

/// Largest singular value of the map by power iteration on the normal map,
/// relative tolerance 1e-6.  The adjoint is verified against the map on
/// three random vector pairs (inner-product identity to 1e-8 relative);
/// throws AdjointMismatchError if that fails.
[[nodiscard]] OpNormResult op_norm(const LinearMap& apply, const LinearMap& apply_adjoint,
                                   Eigen::Index dim, std::uint64_t seed = kDefaultSeed);

struct SpectrumResult {
  std::vector<cplx> eigenvalues;  ///< sorted by real part ascending
  /// Backward-error residuals ||a v - lambda m v||_2 / (||v||_2 (||a||_F +
  /// |lambda| ||m||_F)): the normalization keeps one tolerance meaningful
  /// across operators whose entries range from O(1) to O(1e14).
  std::vector<double> residuals;
  Mat eigenvectors;           ///< columns aligned with eigenvalues
  int infinite_filtered = 0;  ///< eigenvalues dropped (infinite or unresolved)
  bool complete = true;       ///< false if the QR sweep did not converge
};

/// All finite eigenvalues of the pencil (a, m): factor a - s m at the shift
/// s, eigendecompose the shift-inverted standard problem (Hessenberg + QR),
/// back-transform, filter by magnitude (1e8 x median), then polish every
/// candidate by two-sided inverse iteration on the pencil itself and filter
/// by residual; duplicates that collapse onto one eigenvalue are merged.
/// Shifts that make a - s m near-singular are nudged by 1e-3 (1 + |s|).
[[nodiscard]] SpectrumResult spectrum(const Mat& a, const Mat& m, double tol = 1e-8,
                                      cplx shift = cplx(0, 0));
[[nodiscard]] SpectrumResult spectrum(const DiscreteOperator& pencil, double tol = 1e-8,
                                      cplx shift = cplx(0, 0));

struct EigenPoint {
  cplx lambda{0, 0};
  Vec v;
  double residual = 0;  ///< backward-error residual, same normalization as SpectrumResult
  bool converged = true;
};

/// Eigenvalue with the smallest real part among residual-verified pencil
/// eigenvalues, refined by one generalized Rayleigh-quotient step.
[[nodiscard]] EigenPoint leftmost(const DiscreteOperator& pencil, cplx seed_shift = cplx(0, 0),
                                  double tol = 1e-8);

/// Continue a known eigenpair to nearby matrices by Rayleigh-quotient
/// iteration: repeatedly solve (a - lambda m) w = m v and update lambda by
/// the generalized Rayleigh quotient.  Used to trace eigenvalue branches
/// through parameter sweeps without full QR at every point.
[[nodiscard]] EigenPoint track_eigenvalue(const Mat& a, const Mat& m, cplx lambda0,
                                          const Vec* v0 = nullptr, int max_iters = 12,
                                          double tol = 1e-10);

}  // namespace ostab
