#include "ostab/airy.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ostab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAiZero = 0.35502805388781723926;    // Ai(0)
constexpr double kAiPrimeZero = -0.25881940379280679841;  // Ai'(0)
constexpr double kSeriesRadius = 6.5;

const cplx kRotSixth = std::polar(1.0, kPi / 6.0);        // e^{i pi/6}
const cplx kRotThird = std::polar(1.0, 2.0 * kPi / 3.0);  // e^{2 i pi/3}

// Maclaurin series of Ai and Ai' through the two classical solutions
// f = sum a_k z^{3k} and g = sum b_k z^{3k+1} of w'' = z w.
void ai_series(cplx z, cplx* ai, cplx* aip) {
  if (z == cplx(0.0, 0.0)) {
    *ai = kAiZero;
    *aip = kAiPrimeZero;
    return;
  }
  const cplx z3 = z * z * z;
  cplx tf(1.0, 0.0);  // a_k z^{3k}
  cplx tg = z;        // b_k z^{3k+1}
  cplx f = tf, g = tg;
  cplx fp(0.0, 0.0), gp(1.0, 0.0);
  for (int k = 1; k <= 300; ++k) {
    const double r = 3.0 * (k - 1);
    tf *= z3 / ((r + 2.0) * (r + 3.0));
    tg *= z3 / ((r + 3.0) * (r + 4.0));
    f += tf;
    g += tg;
    fp += 3.0 * k * tf / z;
    gp += (3.0 * k + 1.0) * tg / z;
    if (std::abs(tf) + std::abs(tg) <
        1e-18 * (std::abs(f) + std::abs(g) + 1e-300)) {
      break;
    }
  }
  *ai = kAiZero * f + kAiPrimeZero * g;
  *aip = kAiZero * fp + kAiPrimeZero * gp;
}

// Asymptotic expansions, valid for |arg z| <= 2 pi/3 (the caller rotates
// into this sector via the connection identity).  Truncated at the smallest
// term; exponentially underflowing values are flushed to zero.
void ai_asym(cplx z, cplx* ai, cplx* aip) {
  const cplx sz = std::sqrt(z);
  const cplx zeta = (2.0 / 3.0) * z * sz;
  if (zeta.real() > 700.0) {  // |Ai| < e^{-700}: below double range
    *ai = cplx(0.0, 0.0);
    *aip = cplx(0.0, 0.0);
    return;
  }
  const cplx inv = 1.0 / zeta;
  cplx pw(1.0, 0.0);  // (-1)^k zeta^{-k}
  double u = 1.0;     // u_k
  cplx su(1.0, 0.0), sv(1.0, 0.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 60; ++k) {
    u *= (6.0 * k - 5.0) * (6.0 * k - 1.0) / (72.0 * k);
    pw *= -inv;
    const double mag = u * std::abs(pw);
    if (mag >= prev || mag < 1e-18) break;  // optimal truncation
    prev = mag;
    su += u * pw;
    sv += -u * (6.0 * k + 1.0) / (6.0 * k - 1.0) * pw;
  }
  const cplx pref = std::exp(-zeta) / (2.0 * std::sqrt(kPi));
  *ai = pref * su / std::sqrt(sz);
  *aip = -pref * std::sqrt(sz) * sv;
}

void ai_eval(cplx z, cplx* ai, cplx* aip) {
  if (std::abs(z) <= kSeriesRadius) {
    ai_series(z, ai, aip);
    return;
  }
  if (std::abs(std::arg(z)) <= 2.0 * kPi / 3.0 + 1e-14) {
    ai_asym(z, ai, aip);
    return;
  }
  // Rotate out of the cut sector: Ai(z) = -w Ai(wz) - w^2 Ai(w^2 z) with
  // w = e^{2 i pi/3}; both rotated arguments land in |arg| <= 2 pi/3.
  const cplx w = kRotThird;
  const cplx wb = std::conj(kRotThird);
  cplx a1, a1p, a2, a2p;
  ai_asym(w * z, &a1, &a1p);
  ai_asym(wb * z, &a2, &a2p);
  *ai = -w * a1 - wb * a2;
  *aip = -w * w * a1p - wb * wb * a2p;
}

// Integral of Ai over the straight segment from 0 to w: termwise
// antiderivative of the Maclaurin series within its radius, adaptive
// Gauss-Kronrod on the remaining straight piece.
cplx segment_integral_ai(cplx w) {
  const double r = std::abs(w);
  const cplx w0 = (r <= kSeriesRadius) ? w : cplx(kSeriesRadius / r) * w;

  cplx series_part(0.0, 0.0);
  if (w0 != cplx(0.0, 0.0)) {
    const cplx z3 = w0 * w0 * w0;
    cplx tf(1.0, 0.0);
    cplx tg = w0;
    cplx sf = tf * w0;        // a_k w^{3k+1}/(3k+1)
    cplx sg = tg * w0 / 2.0;  // b_k w^{3k+2}/(3k+2)
    for (int k = 1; k <= 300; ++k) {
      const double q = 3.0 * (k - 1);
      tf *= z3 / ((q + 2.0) * (q + 3.0));
      tg *= z3 / ((q + 3.0) * (q + 4.0));
      const cplx df = tf * w0 / (3.0 * k + 1.0);
      const cplx dg = tg * w0 / (3.0 * k + 2.0);
      sf += df;
      sg += dg;
      if (std::abs(df) + std::abs(dg) <
          1e-18 * (std::abs(sf) + std::abs(sg) + 1e-300)) {
        break;
      }
    }
    series_part = kAiZero * sf + kAiPrimeZero * sg;
  }
  if (r <= kSeriesRadius) return series_part;

  const cplx step = w - w0;
  auto f = [&](double t) { return airy_ai(w0 + t * step) * step; };
  double err = 0.0;
  const cplx tail = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, 0.0, 1.0, /*max_depth=*/12, /*tol=*/1e-12, &err);
  return series_part + tail;
}

// ---- zero hunt for z -> A0(iz) --------------------------------------------

cplx a0_of_iz(cplx z) { return a0(cplx(0.0, 1.0) * z); }

// d/dz A0(iz) = -i e^{i pi/6} Ai(e^{2 i pi/3} z)
cplx a0_of_iz_prime(cplx z) {
  return -cplx(0.0, 1.0) * kRotSixth * airy_ai(kRotThird * z);
}

// Continuous phase increment of h along the segment [a, b]; splits until
// each step turns by less than pi/2 so the winding cannot alias.
double phase_delta(cplx a, cplx b, cplx ha, cplx hb, int depth) {
  if (std::abs(ha) < 1e-13 || std::abs(hb) < 1e-13) {
    throw std::runtime_error("winding: zero too close to the contour");
  }
  const double d = std::arg(hb / ha);
  if (std::abs(d) < kPi / 2.0) return d;
  if (depth > 48) {
    throw std::runtime_error("winding: phase refinement did not settle");
  }
  const cplx mid = 0.5 * (a + b);
  const cplx hm = a0_of_iz(mid);
  return phase_delta(a, mid, ha, hm, depth + 1) +
         phase_delta(mid, b, hm, hb, depth + 1);
}

struct ZeroBox {
  double x0, x1, y0, y1;
};

// Winding number of A0(iz) around the rectangle boundary (counterclockwise).
int box_winding(const ZeroBox& b) {
  const double step = 0.25;
  std::vector<cplx> pts;
  auto edge = [&](cplx from, cplx to) {
    const int m = std::max(2, static_cast<int>(std::ceil(std::abs(to - from) / step)));
    for (int i = 0; i < m; ++i) {
      pts.push_back(from + (static_cast<double>(i) / m) * (to - from));
    }
  };
  const cplx c0(b.x0, b.y0), c1(b.x1, b.y0), c2(b.x1, b.y1), c3(b.x0, b.y1);
  edge(c0, c1);
  edge(c1, c2);
  edge(c2, c3);
  edge(c3, c0);
  pts.push_back(c0);

  std::vector<cplx> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = a0_of_iz(pts[i]);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    total += phase_delta(pts[i], pts[i + 1], vals[i], vals[i + 1], 0);
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

bool newton_zero(cplx guess, cplx* root) {
  cplx z = guess;
  for (int it = 0; it < 80; ++it) {
    const cplx h = a0_of_iz(z);
    const cplx hp = a0_of_iz_prime(z);
    if (std::abs(hp) < 1e-30) return false;
    const cplx dz = h / hp;
    z -= dz;
    if (std::abs(dz) <= 1e-13 * (1.0 + std::abs(z))) {
      *root = z;
      return std::abs(a0_of_iz(z)) < 1e-10;
    }
  }
  return false;
}

void locate_zeros(const ZeroBox& box, int count, std::vector<cplx>* roots) {
  if (count <= 0) return;
  const double wx = box.x1 - box.x0;
  const double wy = box.y1 - box.y0;
  if (std::max(wx, wy) <= 0.2) {
    cplx root;
    if (newton_zero(cplx(box.x0 + 0.5 * wx, box.y0 + 0.5 * wy), &root)) {
      roots->push_back(root);
    }
    return;
  }
  // Split along the longer side, slightly off-center so a zero cannot sit
  // on the shared edge.
  ZeroBox lo = box, hi = box;
  if (wx >= wy) {
    const double cut = box.x0 + wx * 0.5 + 0.013;
    lo.x1 = cut;
    hi.x0 = cut;
  } else {
    const double cut = box.y0 + wy * 0.5 + 0.013;
    lo.y1 = cut;
    hi.y0 = cut;
  }
  const int nlo = box_winding(lo);
  locate_zeros(lo, nlo, roots);
  locate_zeros(hi, count - nlo, roots);
}

double compute_theta1r() {
  const ZeroBox box{0.0, 6.0, -1.0, 8.0};
  const int expected = box_winding(box);
  std::vector<cplx> roots;
  locate_zeros(box, expected, &roots);

  std::vector<cplx> distinct;
  for (const cplx r : roots) {
    bool dup = false;
    for (const cplx s : distinct) {
      if (std::abs(r - s) < 1e-6) dup = true;
    }
    if (!dup) distinct.push_back(r);
  }
  if (static_cast<int>(distinct.size()) != expected) {
    throw std::runtime_error(
        "theta1r: located zeros do not match the winding count");
  }
  std::sort(distinct.begin(), distinct.end(), [](cplx a, cplx b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return a.real() < b.real();
  });
  if (distinct.size() > 8) distinct.resize(8);

  double inf_re = std::numeric_limits<double>::infinity();
  for (const cplx r : distinct) inf_re = std::min(inf_re, r.real());
  if (!(inf_re > 0.0)) {
    throw std::runtime_error("theta1r: expected a strictly positive infimum");
  }
  return inf_re;
}

}  // namespace

cplx airy_ai(cplx z) {
  cplx ai, aip;
  ai_eval(z, &ai, &aip);
  return ai;
}

cplx airy_ai_prime(cplx z) {
  cplx ai, aip;
  ai_eval(z, &ai, &aip);
  return aip;
}

cplx a0(cplx z) {
  const cplx w = kRotSixth * z;
  // Where Ai decays hard along the integration ray, 1/3 minus the segment
  // integral cancels to roundoff (both sides approach 1/3 while the value
  // can be as small as e^{-Re zeta}); integrate the tail directly instead.
  // The tail ray w + t (t real, increasing) stays inside the decay sector
  // |arg| < pi/3 whenever w starts there.
  if (std::abs(w) > kSeriesRadius) {
    const cplx zeta = (2.0 / 3.0) * w * std::sqrt(w);
    if (zeta.real() > 4.0) {
      const double span =
          std::min(50.0, std::max(6.0, 45.0 / std::sqrt(std::abs(w))));
      auto f = [&](double t) { return airy_ai(w + cplx(t, 0.0)); };
      double err = 0.0;
      return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
          f, 0.0, span, /*max_depth=*/15, /*tol=*/1e-12, &err);
    }
  }
  return cplx(1.0 / 3.0, 0.0) - segment_integral_ai(w);
}

double theta1r() {
  static const double value = compute_theta1r();
  return value;
}

double cutoff_chi(double t) {
  if (t <= 0.5) return 1.0;
  if (t >= 0.75) return 0.0;
  const double u = (t - 0.5) * 4.0;
  const double qa = std::exp(-1.0 / (1.0 - u));
  const double qb = std::exp(-1.0 / u);
  return qa / (qa + qb);
}

namespace {

void require_admissible(const BoundaryLayerParams& p) {
  if (!(p.beta > 0.0)) {
    throw std::domain_error("wall layer: beta must be positive");
  }
  const double line = (theta1r() - 1e-3) * std::pow(p.beta, -1.0 / 3.0);
  if (!(p.lambda.real() < line)) {
    throw std::domain_error(
        "wall layer: Re lambda reaches the admissibility line");
  }
}

// Common Airy argument beta^{1/3} e^{-i pi/6} [(1-x) - i lambda]; the x = 1
// value doubles as the psi_hat denominator so the wall ratio is exactly 1.
cplx layer_argument(double x, const BoundaryLayerParams& p) {
  const double b13 = std::cbrt(p.beta);
  return b13 * std::conj(kRotSixth) * (cplx(1.0 - x, 0.0) - cplx(0.0, 1.0) * p.lambda);
}

}  // namespace

cplx psi_tilde(double x, const BoundaryLayerParams& p) {
  require_admissible(p);
  const double b13 = std::cbrt(p.beta);
  const cplx denom = std::conj(a0(cplx(0.0, 1.0) * b13 * std::conj(p.lambda)));
  return std::conj(kRotSixth) * airy_ai(layer_argument(x, p)) / denom;
}

cplx psi(double x, const BoundaryLayerParams& p) {
  return psi_tilde(x, p) * cutoff_chi(1.0 - x);
}

cplx psi_hat(double x, const BoundaryLayerParams& p) {
  require_admissible(p);
  const double chi = cutoff_chi(1.0 - x);
  if (chi == 0.0) return cplx(0.0, 0.0);
  return airy_ai(layer_argument(x, p)) / airy_ai(layer_argument(1.0, p)) * chi;
}

AuditRecord bound_check_psi(const BoundaryLayerParams& p, double s) {
  if (!(s >= 0.0 && s <= 3.0)) {
    throw std::invalid_argument("bound_check_psi: weight power outside [0, 3]");
  }
  require_admissible(p);

  // ||(1-x)^s psi_hat||_1 over the cutoff support [1/4, 1]; the integrand
  // is a wall layer of width ~beta^{-1/3}, so the wall piece is integrated
  // separately from the tail.
  auto f = [&](double x) { return std::pow(1.0 - x, s) * std::abs(psi_hat(x, p)); };
  const double layer = 60.0 * std::pow(p.beta, -1.0 / 3.0);
  const double split = std::max(0.25, 1.0 - layer);
  double err = 0.0;
  double norm = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, split, 1.0, /*max_depth=*/15, /*tol=*/1e-10, &err);
  if (split > 0.25) {
    norm += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, 0.25, split, /*max_depth=*/15, /*tol=*/1e-10, &err);
  }

  AuditRecord rec;
  rec.case_id = "psi-hat-weighted-l1";
  rec.beta = p.beta;
  rec.lambda = p.lambda;
  rec.p = s;
  rec.lhs = norm;
  rec.rhs_scale =
      std::pow(p.lambda_beta(), -(s + 1.0) / 2.0) * std::pow(p.beta, -(s + 1.0) / 3.0);
  rec.ratio = rec.lhs / rec.rhs_scale;
  return rec;
}

}  // namespace ostab
