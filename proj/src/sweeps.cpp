#include "ostab/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>
#include <stdexcept>

namespace ostab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Singular-value ratios sigma_min/sigma_max at or below this level are
/// reported as exactly singular: lambda is an eigenvalue to working
/// precision and the inverse norm is recorded as +infinity.  The threshold
/// sits ~50x above the SVD roundoff floor (eps) and well below the smallest
/// physical ratio the sweeps produce: sigma_max is dominated by a
/// fourth-derivative boundary mode that grows like basis_size^8, which
/// puts heavily damped points at beta = 1e6 (basis_size 189) near 1.7e-13.
constexpr double kSingularRatio = 1e-14;

int worker_count() {
  const char* env = std::getenv("OSTAB_WORKERS");
  if (env == nullptr) return 1;
  const long v = std::strtol(env, nullptr, 10);
  return static_cast<int>(std::clamp(v, 1L, 64L));
}

// --- Chebyshev coefficient helpers for the boundary-respecting basis ---

/// Coefficient-space derivative for a plain sum c_m T_m.
std::vector<double> cheb_deriv(const std::vector<double>& c) {
  const int len = static_cast<int>(c.size());
  std::vector<double> d(len, 0.0);
  for (int m = len - 1; m >= 1; --m) {
    const double up = (m + 1 <= len - 2) ? d[m + 1] : 0.0;
    d[m - 1] = up + 2.0 * m * c[m];
  }
  d[0] *= 0.5;
  return d;
}

double clenshaw(const std::vector<double>& c, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (int m = static_cast<int>(c.size()) - 1; m >= 1; --m) {
    const double b0 = 2.0 * x * b1 - b2 + c[m];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + c[0];
}

/// Coefficient-space multiplication by x: x T_0 = T_1,
/// x T_m = (T_{m+1} + T_{m-1}) / 2.  Coefficients past len-1 are dropped;
/// callers size len to hold the full product.
std::vector<double> cheb_mulx(const std::vector<double>& c) {
  const int len = static_cast<int>(c.size());
  std::vector<double> out(len, 0.0);
  out[1] += c[0];
  for (int m = 1; m < len; ++m) {
    if (m + 1 < len) out[m + 1] += 0.5 * c[m];
    out[m - 1] += 0.5 * c[m];
  }
  return out;
}

/// Chebyshev coefficients of the basis family
///   phi_k = (1-x^2)^2 C_{2k}^{(9/2)}(x) / sqrt(h_{2k}),  k = 0..k_count-1,
/// where C_m^{(9/2)} are the ultraspherical polynomials for the weight
/// (1-x^2)^4 and h_m their squared norms under that weight.  Because the
/// weight equals the envelope squared, the family is exactly orthonormal in
/// L^2(-1,1); a basis without this property (e.g. the same envelope times
/// plain Chebyshev polynomials) has a Gram condition number growing like
/// k_count^4.3, and inverting its QR factor drowns the smallest singular
/// values in roundoff once k_count exceeds ~150.
///
/// The three-term recurrence is run on the enveloped functions directly:
/// the raw polynomials reach ~1e16 at the endpoints, and multiplying by the
/// envelope afterwards would cancel those digits away.
std::vector<std::vector<double>> basis_family(int k_count, int len) {
  constexpr double lam = 4.5;
  const double log_gamma_lam = std::lgamma(lam);
  auto scale = [&](int m) {
    const double logh = std::log(M_PI) + (1.0 - 2.0 * lam) * std::log(2.0) +
                        std::lgamma(m + 2.0 * lam) - std::lgamma(m + 1.0) -
                        std::log(m + lam) - 2.0 * log_gamma_lam;
    return std::exp(-0.5 * logh);
  };
  auto normalized = [&](const std::vector<double>& c, int m) {
    std::vector<double> out = c;
    const double s = scale(m);
    for (double& v : out) v *= s;
    return out;
  };

  std::vector<std::vector<double>> family;
  family.reserve(k_count);
  // (1-x^2)^2 C_0 = 3/8 - 1/2 T_2 + 1/8 T_4.
  std::vector<double> prev;
  std::vector<double> cur(len, 0.0);
  cur[0] = 3.0 / 8.0;
  cur[2] = -0.5;
  cur[4] = 1.0 / 8.0;
  family.push_back(normalized(cur, 0));
  for (int m = 1; static_cast<int>(family.size()) < k_count; ++m) {
    // m C_m = 2 (m + lam - 1) x C_{m-1} - (m + 2 lam - 2) C_{m-2}.
    std::vector<double> next = cheb_mulx(cur);
    const double a = 2.0 * (m + lam - 1.0) / m;
    const double b = (m + 2.0 * lam - 2.0) / m;
    for (int j = 0; j < len; ++j) next[j] = a * next[j] - (prev.empty() ? 0.0 : b * prev[j]);
    prev = std::move(cur);
    cur = std::move(next);
    if (m % 2 == 0) family.push_back(normalized(cur, m));
  }
  return family;
}

/// Gauss-Legendre rule on (-1,1) via the symmetric tridiagonal eigenproblem;
/// cached per node count because callers rebuild the same sizes repeatedly.
void gauss_legendre(int m, RVec& nodes, RVec& weights) {
  static std::mutex cache_mutex;
  static std::map<int, std::pair<RVec, RVec>> cache;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(m);
    if (it != cache.end()) {
      nodes = it->second.first;
      weights = it->second.second;
      return;
    }
  }
  RMat jac = RMat::Zero(m, m);
  for (int i = 1; i < m; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jac(i, i - 1) = b;
    jac(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<RMat> es(jac);
  RVec x(m), w(m);
  for (int i = 0; i < m; ++i) {
    x[i] = es.eigenvalues()[i];
    w[i] = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache[m] = {x, w};
  nodes = x;
  weights = w;
}

/// Reusable per-(alpha, beta) state for resolvent evaluations along a
/// lambda path.
///
/// The inverse norms are computed as smallest singular values of the
/// operator restricted to a dense basis of the boundary-condition space:
/// the orthonormal family of basis_family on the even extension of (0,1),
/// whose envelope satisfies v(1)=v'(1)=0 and the centerline symmetry
/// conditions v'(0)=v'''(0)=0 exactly. Values, first derivatives, and
/// operator images are sampled on a Gauss-Legendre rule fine enough to
/// integrate every product exactly, so the measured quantities are genuine
/// L^2 norms of polynomials rather than collocation-grid quadratures (which
/// alias high-degree products and inflate inverse norms as the grid is
/// refined). Orthonormalizing the value and derivative samples by thin QR
/// turns both inverse norms into ordinary singular-value problems:
///   1/||B^{-1}||   = min_c ||B phi c|| / ||phi c||   = sigma_min(T R^{-1})
///   1/||D B^{-1}|| = min_c ||B phi c|| / ||phi' c||  = sigma_min(T R1^{-1})
struct LineCore {
  int basis_size = 0;
  Mat c0;      ///< lambda-independent part of the weighted operator image
  Mat mass;    ///< part multiplying lambda (beta times (d^2 - a^2) image)
  RMat rinv;   ///< inverse R factor of the weighted value samples
  RMat r1inv;  ///< inverse R factor of the weighted derivative samples

  LineCore(const Profile& profile, double alpha, double beta, int n) {
    if (n < 16) throw std::invalid_argument("resolvent basis needs n >= 16");
    if (std::abs(profile.u1(0.0)) > 1e-9 || std::abs(profile.u3(0.0)) > 1e-9) {
      throw std::invalid_argument(
          "resolvent norms require a symmetric channel profile (odd derivatives "
          "of U vanish at the centerline)");
    }
    basis_size = std::max(16, n / 2 - 1);
    const int k_count = basis_size;
    const int len = 2 * (k_count - 1) + 5;  // top Chebyshev index 2(K-1)+4
    const int m_count = 4 * k_count + 64;

    RVec gx, gw;
    gauss_legendre(m_count, gx, gw);
    const RVec sq = gw.array().sqrt();

    const std::vector<std::vector<double>> fam = basis_family(k_count, len);
    RMat p(m_count, k_count), p1(m_count, k_count), p2(m_count, k_count), p4(m_count, k_count);
    for (int k = 0; k < k_count; ++k) {
      const std::vector<double>& c0k = fam[k];
      const std::vector<double> c1k = cheb_deriv(c0k);
      const std::vector<double> c2k = cheb_deriv(c1k);
      const std::vector<double> c3k = cheb_deriv(c2k);
      const std::vector<double> c4k = cheb_deriv(c3k);
      for (int i = 0; i < m_count; ++i) {
        p(i, k) = clenshaw(c0k, gx[i]);
        p1(i, k) = clenshaw(c1k, gx[i]);
        p2(i, k) = clenshaw(c2k, gx[i]);
        p4(i, k) = clenshaw(c4k, gx[i]);
      }
    }

    // Operator image per node: with w = (d^2 - a^2)v,
    //   B v = -w'' + (i beta U) w - i beta U'' v - lambda beta w.
    const double a2 = alpha * alpha;
    const RMat wmat = p2 - a2 * p;
    const RMat w2mat = p4 - a2 * p2;
    c0.resize(m_count, k_count);
    mass.resize(m_count, k_count);
    for (int i = 0; i < m_count; ++i) {
      const double x = std::abs(gx[i]);  // even extension of the half channel
      const double u = profile.u(x);
      const double u2 = profile.u2(x);
      for (int k = 0; k < k_count; ++k) {
        c0(i, k) = sq[i] * (cplx(-w2mat(i, k), 0.0) +
                            cplx(0.0, beta) * (u * wmat(i, k) - u2 * p(i, k)));
        mass(i, k) = sq[i] * beta * wmat(i, k);
      }
    }

    const RMat pw = sq.asDiagonal() * p;
    const RMat p1w = sq.asDiagonal() * p1;
    Eigen::HouseholderQR<RMat> qr(pw);
    Eigen::HouseholderQR<RMat> qr1(p1w);
    const RMat r = qr.matrixQR().topRows(k_count).triangularView<Eigen::Upper>();
    const RMat r1 = qr1.matrixQR().topRows(k_count).triangularView<Eigen::Upper>();
    rinv = r.triangularView<Eigen::Upper>().solve(RMat::Identity(k_count, k_count));
    r1inv = r1.triangularView<Eigen::Upper>().solve(RMat::Identity(k_count, k_count));
  }
};

/// Smallest/largest singular values of a tall matrix, by QR reduction to a
/// square triangle followed by a dense SVD of the triangle.
struct SigmaPair {
  double smallest = 0.0;
  double largest = 0.0;
  bool ok = false;
};

SigmaPair sigma_extrema(const Mat& tall) {
  Eigen::HouseholderQR<Mat> qr(tall);
  const Mat r = qr.matrixQR().topRows(tall.cols()).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Mat> svd(r);
  SigmaPair out;
  out.smallest = svd.singularValues().minCoeff();
  out.largest = svd.singularValues().maxCoeff();
  out.ok = svd.info() == Eigen::Success;
  return out;
}

SweepRecord record_at(const LineCore& core, const SpectralParams& params, bool with_derivative) {
  SweepRecord rec;
  rec.alpha = params.alpha;
  rec.beta = params.beta;
  rec.lambda = params.lambda;

  const Mat t = core.c0 - params.lambda * core.mass;
  const SigmaPair sv = sigma_extrema(t * core.rinv);
  rec.sigma_min_flag = sv.ok;
  if (!(sv.smallest > kSingularRatio * sv.largest)) {
    rec.resolvent_norm = kInf;
    rec.derivative_norm = kInf;
    return rec;
  }
  rec.resolvent_norm = 1.0 / sv.smallest;

  if (with_derivative) {
    const SigmaPair sd = sigma_extrema(t * core.r1inv);
    rec.sigma_min_flag = rec.sigma_min_flag && sd.ok;
    rec.derivative_norm =
        sd.smallest > kSingularRatio * sd.largest ? 1.0 / sd.smallest : kInf;
  }
  return rec;
}

/// Leading eigenvalue candidates of the pencil, re-converged at full
/// resolution when the eigensolve grid was coarser.
struct Branch {
  cplx lambda{0, 0};
  Vec v;
};

std::vector<Branch> seed_branches(const Profile& profile, double alpha, double beta, int n,
                                  std::size_t want) {
  const int n_qr = std::min(n, 256);
  const ChebGrid coarse = build_grid(n_qr);
  const DiscreteOperator pencil_qr =
      assemble_os(coarse, profile, SpectralParams{alpha, beta, cplx(0, 0)});
  const SpectrumResult spec = spectrum(pencil_qr);

  std::vector<Branch> out;
  if (spec.eigenvalues.empty()) return out;

  if (n_qr == n) {
    for (std::size_t i = 0; i < spec.eigenvalues.size() && out.size() < want; ++i) {
      out.push_back({spec.eigenvalues[i], spec.eigenvectors.col(static_cast<Eigen::Index>(i))});
    }
    return out;
  }

  const ChebGrid grid = build_grid(n);
  const DiscreteOperator pencil =
      assemble_os(grid, profile, SpectralParams{alpha, beta, cplx(0, 0)});
  for (std::size_t i = 0; i < spec.eigenvalues.size() && out.size() < want; ++i) {
    const EigenPoint p =
        track_eigenvalue(pencil.a, pencil.m, spec.eigenvalues[i], nullptr, 6, 1e-12);
    if (!p.converged || !(p.residual <= 1e-8)) continue;
    bool dup = false;
    for (const Branch& b : out) {
      if (std::abs(b.lambda - p.lambda) <= 1e-6 * (1.0 + std::abs(b.lambda))) dup = true;
    }
    if (!dup) out.push_back({p.lambda, p.v});
  }
  std::sort(out.begin(), out.end(),
            [](const Branch& x, const Branch& y) { return x.lambda.real() < y.lambda.real(); });
  return out;
}

/// Continue every branch to a nearby pencil; drops branches that fail to
/// re-converge or collapse onto an already-tracked eigenvalue.
std::vector<Branch> continue_branches(const DiscreteOperator& pencil,
                                      const std::vector<Branch>& branches) {
  std::vector<Branch> out;
  for (const Branch& b : branches) {
    const EigenPoint p = track_eigenvalue(pencil.a, pencil.m, b.lambda, &b.v, 5, 1e-12);
    if (!p.converged || !(p.residual <= 1e-8)) continue;
    bool dup = false;
    for (const Branch& q : out) {
      if (std::abs(q.lambda - p.lambda) <= 1e-6 * (1.0 + std::abs(q.lambda))) dup = true;
    }
    if (!dup) out.push_back({p.lambda, p.v});
  }
  std::sort(out.begin(), out.end(),
            [](const Branch& x, const Branch& y) { return x.lambda.real() < y.lambda.real(); });
  return out;
}

double leftmost_re(const std::vector<Branch>& branches) {
  double re = kInf;
  for (const Branch& b : branches) re = std::min(re, b.lambda.real());
  return re;
}

cplx leftmost_lambda(const std::vector<Branch>& branches) {
  cplx best(kInf, 0);
  for (const Branch& b : branches)
    if (b.lambda.real() < best.real()) best = b.lambda;
  return best;
}

// A perturbation mode with pencil eigenvalue lambda evolves in time like
// exp(-alpha*(lambda + alpha^2/beta)*t): the fourth-order block enters the
// pencil as D^2(D^2-a^2) rather than (D^2-a^2)^2, which offsets the spectral
// parameter from the temporal eigenvalue by alpha^2/beta = alpha/R.  Neutral
// stability is the zero of this margin, not of Re(lambda) itself; the two
// differ by O(alpha/R), which moves the critical Reynolds number by ~2%.
double neutral_margin(double re_lambda, double alpha, double reynolds) {
  return re_lambda + alpha / reynolds;
}

int even_ceil(double x) {
  int v = static_cast<int>(std::ceil(x));
  if (v % 2 != 0) ++v;
  return v;
}

}  // namespace

int resolution_for(double beta) {
  if (!(beta > 0)) throw std::invalid_argument("resolution_for: beta must be positive");
  return std::max(128, even_ceil(12.0 * std::pow(beta, 0.25)));
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const int workers = std::min<long>(worker_count(), static_cast<long>(count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::mutex mu;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = static_cast<std::size_t>(w); i < count;
           i += static_cast<std::size_t>(workers)) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void sort_records(std::vector<SweepRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const SweepRecord& a, const SweepRecord& b) {
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    if (a.beta != b.beta) return a.beta < b.beta;
    if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() < b.lambda.imag();
    return a.lambda.real() < b.lambda.real();
  });
}

SweepRecord resolvent_at(const Profile& profile, const SpectralParams& params, int n) {
  if (!(params.beta > 0)) throw std::invalid_argument("resolvent_at: beta must be positive");
  if (params.alpha < 0) throw std::invalid_argument("resolvent_at: alpha must be nonnegative");
  const LineCore core(profile, params.alpha, params.beta, n);
  return record_at(core, params, /*with_derivative=*/true);
}

std::vector<SweepRecord> scan_line(const Profile& profile, double alpha, double beta,
                                   double upsilon, int n, bool with_derivative) {
  if (!(beta > 0)) throw std::invalid_argument("scan_line: beta must be positive");
  const LineCore core(profile, alpha, beta, n);
  const double mu_line = upsilon / std::sqrt(beta);
  const double nu_lo = -1.0;
  const double nu_hi = profile.u0 + 1.0;
  constexpr int kPoints = 200;

  std::vector<SweepRecord> records(kPoints);
  parallel_for(kPoints, [&](std::size_t j) {
    const double nu = nu_lo + (nu_hi - nu_lo) * static_cast<double>(j) / (kPoints - 1);
    SpectralParams p{alpha, beta, cplx(mu_line, nu)};
    records[j] = record_at(core, p, with_derivative);
  });
  sort_records(records);
  return records;
}

double sup_resolvent(const Profile& profile, double alpha, double beta, double upsilon, int n,
                     SupDiagnostics* diag) {
  if (!(beta > 0)) throw std::invalid_argument("sup_resolvent: beta must be positive");
  const double mu_line = upsilon / std::sqrt(beta);

  // Stability gate: the supremum over the half-plane is meaningful only
  // when the spectrum stays to its right.  The leading eigenvalue is found
  // on a coarse grid and re-converged at full resolution.
  {
    const std::vector<Branch> lead = seed_branches(profile, alpha, beta, n, 4);
    if (!lead.empty() && leftmost_re(lead) < mu_line) {
      throw UnstableRegionError("unstable at (alpha=" + std::to_string(alpha) +
                                ", beta=" + std::to_string(beta) + ")");
    }
  }

  const LineCore core(profile, alpha, beta, n);
  auto norm_at = [&](double mu, double nu) {
    return record_at(core, SpectralParams{alpha, beta, cplx(mu, nu)}, false).resolvent_norm;
  };

  const std::vector<SweepRecord> scan = scan_line(profile, alpha, beta, upsilon, n, false);
  std::size_t arg = 0;
  for (std::size_t j = 1; j < scan.size(); ++j) {
    if (scan[j].resolvent_norm > scan[arg].resolvent_norm) arg = j;
  }
  double sup = scan[arg].resolvent_norm;
  double sup_nu = scan[arg].lambda.imag();

  // Golden-section refinement around the discrete maximum.
  {
    const double step = (profile.u0 + 2.0) / (scan.size() - 1.0);
    double a = sup_nu - step;
    double b = sup_nu + step;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = norm_at(mu_line, x1), f2 = norm_at(mu_line, x2);
    for (int it = 0; it < 22; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = norm_at(mu_line, x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = norm_at(mu_line, x1);
      }
    }
    if (f1 > sup) {
      sup = f1;
      sup_nu = x1;
    }
    if (f2 > sup) {
      sup = f2;
      sup_nu = x2;
    }
  }

  // Interior spot-checks: the norm is analytic in the open half-plane and
  // decays away from the spectrum, so the boundary should dominate; a
  // violation widens the result instead of being discarded.
  double interior_max = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double nu = -1.0 + (profile.u0 + 2.0) * (k + 0.5) / 20.0;
    const double depth = (1.0 + 3.0 * (k % 4)) / std::sqrt(beta);
    interior_max = std::max(interior_max, norm_at(mu_line - depth, nu));
  }
  const double far_minus = norm_at(mu_line, -5.0);
  const double far_plus = norm_at(mu_line, 5.0);

  if (diag != nullptr) {
    diag->boundary_sup = sup;
    diag->argmax_nu = sup_nu;
    diag->interior_max = interior_max;
    diag->interior_dominates = interior_max <= 1.05 * sup;
    diag->far_field_minus = far_minus;
    diag->far_field_plus = far_plus;
    diag->scan_points = static_cast<int>(scan.size());
  }
  return std::max({sup, interior_max, far_minus, far_plus});
}

cplx convert_c(const SpectralParams& params, cplx lambda) {
  if (!(params.alpha > 0)) {
    throw std::invalid_argument("convert_c: undefined conversion, alpha must be positive");
  }
  if (!(params.beta > 0)) throw std::invalid_argument("convert_c: beta must be positive");
  return cplx(0, -1) * (lambda + params.alpha * params.alpha / params.beta);
}

cplx growth(const Profile& profile, double alpha, double reynolds, int n) {
  if (!(alpha > 0)) throw std::invalid_argument("growth: alpha must be positive");
  if (!(reynolds > 0)) throw std::invalid_argument("growth: reynolds must be positive");
  const double beta = alpha * reynolds;
  std::vector<Branch> lead = seed_branches(profile, alpha, beta, n, 8);
  if (lead.empty()) {
    // Coarse candidates all failed to re-converge; fall back to a full
    // eigensolve at the requested resolution.
    const ChebGrid grid = build_grid(n);
    const DiscreteOperator pencil =
        assemble_os(grid, profile, SpectralParams{alpha, beta, cplx(0, 0)});
    const SpectrumResult spec = spectrum(pencil);
    if (spec.eigenvalues.empty()) throw std::runtime_error("growth: no eigenvalues recovered");
    return spec.eigenvalues.front();
  }
  return leftmost_lambda(lead);
}

namespace {

/// Re(leading eigenvalue) as alpha varies at fixed Reynolds, evaluated by
/// branch continuation from the nearest previously computed alpha.
class AlphaTracker {
 public:
  AlphaTracker(const Profile& profile, double reynolds, int n)
      : profile_(profile), reynolds_(reynolds), n_(n), grid_(build_grid(n)) {}

  double re_leftmost(double alpha) {
    const auto brs = branches_at(alpha);
    return leftmost_re(brs);
  }

  double margin(double alpha) { return neutral_margin(re_leftmost(alpha), alpha, reynolds_); }

  cplx lambda_leftmost(double alpha) { return leftmost_lambda(branches_at(alpha)); }

 private:
  const std::vector<Branch>& branches_at(double alpha) {
    auto it = cache_.find(alpha);
    if (it != cache_.end()) return it->second;

    const double beta = alpha * reynolds_;
    std::vector<Branch> brs;
    if (cache_.empty()) {
      brs = seed_branches(profile_, alpha, beta, n_, 6);
    } else {
      auto nearest = cache_.begin();
      for (auto c = cache_.begin(); c != cache_.end(); ++c) {
        if (std::abs(c->first - alpha) < std::abs(nearest->first - alpha)) nearest = c;
      }
      const DiscreteOperator pencil =
          assemble_os(grid_, profile_, SpectralParams{alpha, beta, cplx(0, 0)});
      brs = continue_branches(pencil, nearest->second);
      if (brs.size() < 3) brs = seed_branches(profile_, alpha, beta, n_, 6);
    }
    if (brs.empty()) throw std::runtime_error("neutral scan: eigenvalue tracking lost");
    // Branches far to the right never participate in a crossing; pruning
    // them keeps the continuation cost bounded.
    while (brs.size() > 2 && brs.back().lambda.real() > 0.5) brs.pop_back();
    return cache_.emplace(alpha, std::move(brs)).first->second;
  }

  const Profile& profile_;
  double reynolds_;
  int n_;
  ChebGrid grid_;
  std::map<double, std::vector<Branch>> cache_;
};

}  // namespace

std::vector<NeutralCurvePoint> neutral_curve(const Profile& profile,
                                             const std::vector<double>& reynolds, int n) {
  std::vector<NeutralCurvePoint> out;
  for (const double r : reynolds) {
    if (!(r > 0)) throw std::invalid_argument("neutral_curve: reynolds must be positive");
    const int n_eff = n > 0 ? n : resolution_for(2.5 * r);
    AlphaTracker tracker(profile, r, n_eff);

    constexpr int kScan = 40;
    const double lo = 0.1, hi = 2.5;
    std::vector<double> alphas(kScan), res(kScan);
    for (int k = 0; k < kScan; ++k) {
      alphas[k] = lo + (hi - lo) * k / (kScan - 1);
      res[k] = tracker.margin(alphas[k]);
    }

    auto bisect = [&](double a, double b, double fa) {
      // Root of the leading mode's stability margin between a and b.
      while (b - a > 1e-3) {
        const double mid = 0.5 * (a + b);
        const double fm = tracker.margin(mid);
        if ((fm < 0) == (fa < 0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      return 0.5 * (a + b);
    };

    int first = -1, last = -1;
    for (int k = 0; k + 1 < kScan; ++k) {
      if ((res[k] < 0) != (res[k + 1] < 0)) {
        if (first < 0) first = k;
        last = k;
      }
    }
    if (first < 0) continue;  // no sign change: no band at this Reynolds number

    NeutralCurvePoint pt;
    pt.reynolds = r;
    pt.alpha_lower = bisect(alphas[first], alphas[first + 1], res[first]);
    pt.alpha_upper = (last == first)
                         ? pt.alpha_lower
                         : bisect(alphas[last], alphas[last + 1], res[last]);
    if (pt.alpha_lower < pt.alpha_upper) out.push_back(pt);
  }
  return out;
}

namespace {

/// Neutral Reynolds number at fixed alpha by bisection on the sign of the
/// leading mode's stability margin, with branch continuation in R.
struct NeutralAtAlpha {
  double reynolds = 0.0;
  cplx lambda{0, 0};
  bool ok = false;
};

NeutralAtAlpha neutral_in_r(const Profile& profile, double alpha, int n) {
  NeutralAtAlpha result;
  std::map<double, std::vector<Branch>> cache;

  auto branches_at = [&](double r) -> const std::vector<Branch>& {
    auto it = cache.find(r);
    if (it != cache.end()) return it->second;
    std::vector<Branch> brs;
    if (cache.empty()) {
      brs = seed_branches(profile, alpha, alpha * r, n, 6);
    } else {
      auto nearest = cache.begin();
      for (auto c = cache.begin(); c != cache.end(); ++c) {
        if (std::abs(c->first - r) < std::abs(nearest->first - r)) nearest = c;
      }
      const ChebGrid grid = build_grid(n);
      const DiscreteOperator pencil =
          assemble_os(grid, profile, SpectralParams{alpha, alpha * r, cplx(0, 0)});
      brs = continue_branches(pencil, nearest->second);
      if (brs.size() < 3) brs = seed_branches(profile, alpha, alpha * r, n, 6);
    }
    if (brs.empty()) throw std::runtime_error("critical search: eigenvalue tracking lost");
    while (brs.size() > 2 && brs.back().lambda.real() > 0.5) brs.pop_back();
    return cache.emplace(r, std::move(brs)).first->second;
  };

  auto margin_at = [&](double r) { return neutral_margin(leftmost_re(branches_at(r)), alpha, r); };

  double r_lo = 9000.0, r_hi = 16000.0;
  double f_lo = margin_at(r_lo);
  double f_hi = margin_at(r_hi);
  for (int guard = 0; guard < 8 && f_lo < 0; ++guard) {
    r_lo /= 1.4;
    if (r_lo < 1500.0) return result;
    f_lo = margin_at(r_lo);
  }
  for (int guard = 0; guard < 8 && f_hi > 0; ++guard) {
    r_hi *= 1.4;
    if (r_hi > 3e5) return result;
    f_hi = margin_at(r_hi);
  }
  if (!(f_lo > 0) || !(f_hi < 0)) return result;

  while (r_hi - r_lo > 0.1) {
    const double mid = 0.5 * (r_lo + r_hi);
    const double fm = margin_at(mid);
    if (fm > 0) {
      r_lo = mid;
    } else {
      r_hi = mid;
    }
  }
  result.reynolds = 0.5 * (r_lo + r_hi);
  result.lambda = leftmost_lambda(branches_at(result.reynolds));
  result.ok = true;
  return result;
}

}  // namespace

CriticalPoint critical_reynolds(const Profile& profile, int n) {
  const int n_eff = std::max(128, n % 2 == 0 ? n : n + 1);
  CriticalPoint out;

  std::map<double, NeutralAtAlpha> cache;
  auto eval = [&](double alpha) -> const NeutralAtAlpha& {
    auto it = cache.find(alpha);
    if (it != cache.end()) return it->second;
    return cache.emplace(alpha, neutral_in_r(profile, alpha, n_eff)).first->second;
  };
  auto value = [&](double alpha) {
    const NeutralAtAlpha& r = eval(alpha);
    return r.ok ? r.reynolds : kInf;
  };

  // Golden-section minimization of the neutral Reynolds number over the
  // wavenumber; the parabolic profile's neutral curve has a single nose.
  double a = 0.9, b = 1.15;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = value(x1), f2 = value(x2);
  while (b - a > 4e-4) {
    if (f1 > f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = value(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = value(x1);
    }
    if (!std::isfinite(f1) && !std::isfinite(f2)) return out;
  }
  const double alpha_c = f1 < f2 ? x1 : x2;
  const NeutralAtAlpha& best = eval(alpha_c);
  if (!best.ok) return out;

  out.reynolds = best.reynolds;
  out.alpha = alpha_c;
  out.lambda = best.lambda;
  out.c = convert_c(SpectralParams{alpha_c, alpha_c * best.reynolds, best.lambda}, best.lambda);
  out.converged = std::abs(neutral_margin(best.lambda.real(), alpha_c, best.reynolds)) < 1e-7;
  return out;
}

ExponentFit exponent_fit(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw std::invalid_argument("exponent_fit: need at least three points");
  for (const auto& [x, y] : pairs) {
    if (!(x > 0) || !(y > 0)) {
      throw std::invalid_argument("exponent_fit: values must be positive");
    }
  }
  std::vector<double> xs;
  xs.reserve(pairs.size());
  for (const auto& [x, y] : pairs) xs.push_back(x);
  std::sort(xs.begin(), xs.end());
  if (std::adjacent_find(xs.begin(), xs.end()) != xs.end()) {
    throw std::invalid_argument("exponent_fit: duplicate abscissae");
  }

  const double m = static_cast<double>(pairs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pairs) {
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  ExponentFit fit;
  fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / m;

  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / m;
  for (const auto& [x, y] : pairs) {
    const double ly = std::log(y);
    const double fitted = fit.intercept + fit.slope * std::log(x);
    ss_res += (ly - fitted) * (ly - fitted);
    ss_tot += (ly - mean_y) * (ly - mean_y);
  }
  fit.r2 = ss_tot > 1e-30 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

namespace {

/// Region classification for the map: thresholds are fixed representatives
/// chosen inside each bound's admissible parameter ranges (documented
/// inline), with the instability band taking precedence.
struct Region {
  std::string label;
  double scale = 0.0;  ///< 0 when the cell is not solved
};

Region classify(const Profile& profile, double alpha, double nu, double beta) {
  const double u0 = profile.u0;
  const double b12 = std::sqrt(beta);
  const double b13 = std::cbrt(beta);
  const double log_b = std::log(beta);
  const bool odd_profile = std::abs(profile.u3(0.0)) < 1e-9;  // centerline symmetry

  if (std::pow(beta, -1.0 / 6.0) <= alpha && alpha <= std::pow(beta, -1.0 / 10.0)) {
    return {"unstable", 0.0};
  }
  // Offsets below the spectrum: kappa = 10, alpha cap at beta^{1/3}/2.
  if (nu <= -10.0 / b13 && alpha <= 0.5 * b13) {
    return {"negative-offset", log_b / (beta * std::abs(nu))};
  }
  // Above the centerline speed by at least 10 beta^{-1/2}.
  if (nu >= u0 + 10.0 / b12 && alpha <= 0.5 * b13) {
    return {"above-centerline", 1.0 / b12};
  }
  // Within 10 beta^{-1/2} of the centerline speed (needs U'''(0) = 0).
  if (odd_profile && std::abs(nu - u0) <= 10.0 / b12 && alpha <= 0.5 * b13) {
    return {"centerline-layer", std::pow(beta, -3.0 / 8.0)};
  }
  // Interior critical layer: nu in [U(0)/4, U(0) - 10 beta^{-1/2}].
  if (nu >= 0.25 * u0 && nu <= u0 - 10.0 / b12 && alpha <= 0.5 * b13) {
    return {"interior-layer", log_b / b12};
  }
  // Large wavenumbers: alpha >= 2 beta^{1/3}.
  if (alpha >= 2.0 * b13) {
    return {"large-alpha", std::pow(beta, -5.0 / 6.0)};
  }
  // Mid wavenumbers: 2 <= alpha <= 2 beta^{1/3}, |nu| <= 0.8 U(0).
  if (alpha >= 2.0 && alpha <= 2.0 * b13 && std::abs(nu) <= 0.8 * u0) {
    return {"mid-alpha", std::pow(beta, -5.0 / 6.0)};
  }
  // Small-alpha core: alpha <= beta^{-1/6}/2, |nu| <= 0.05.
  if (alpha <= 0.5 * std::pow(beta, -1.0 / 6.0) && std::abs(nu) <= 0.05) {
    return {"small-alpha-core", std::pow(beta, -2.0 / 3.0)};
  }
  // Lower interior: beta^{-1/5+delta} <= nu <= U(0)/4 at delta = 0.05
  // (needs U'''(0) = 0); the bound carries a 1/nu factor.
  if (odd_profile && alpha <= 2.0 && nu >= std::pow(beta, -0.15) && nu <= 0.25 * u0) {
    return {"lower-interior", std::pow(beta, -0.45) / nu};
  }
  // Right of the band: 1.5 beta^{-1/10+delta/2} <= alpha <= 2 at delta =
  // 0.05 (needs U'''(0) = 0), small offsets.
  if (odd_profile && alpha >= 1.5 * std::pow(beta, -0.075) && alpha <= 2.0 &&
      std::abs(nu) <= std::pow(beta, -0.15)) {
    return {"band-right", std::pow(beta, -0.45)};
  }
  return {"uncovered", 0.0};
}

}  // namespace

std::vector<RegionCell> region_map(const Profile& profile, double beta,
                                   const std::vector<double>& alpha_grid,
                                   const std::vector<double>& nu_grid, int n) {
  if (!(beta > 0)) throw std::invalid_argument("region_map: beta must be positive");
  std::vector<RegionCell> cells(alpha_grid.size() * nu_grid.size());

  // One pencil assembly per alpha, shared by its nu cells.
  for (std::size_t ia = 0; ia < alpha_grid.size(); ++ia) {
    const double alpha = alpha_grid[ia];
    std::unique_ptr<LineCore> core;
    for (std::size_t iv = 0; iv < nu_grid.size(); ++iv) {
      const double nu = nu_grid[iv];
      RegionCell& cell = cells[ia * nu_grid.size() + iv];
      cell.alpha = alpha;
      cell.nu = nu;
      const Region region = classify(profile, alpha, nu, beta);
      cell.label = region.label;
      cell.predicted_scale = region.scale;
      if (region.scale <= 0.0) continue;
      if (!core) core = std::make_unique<LineCore>(profile, alpha, beta, n);
      const SweepRecord rec =
          record_at(*core, SpectralParams{alpha, beta, cplx(0.0, nu)}, true);
      cell.resolvent_norm = rec.resolvent_norm + rec.derivative_norm;
      cell.ratio = cell.resolvent_norm / region.scale;
    }
  }
  return cells;
}

}  // namespace ostab
