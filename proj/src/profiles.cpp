#include "ostab/profiles.hpp"

#include <cmath>
#include <stdexcept>

namespace ostab {

Profile poiseuille() {
  Profile p;
  p.name = "poiseuille";
  p.u = [](double x) { return (1.0 - x * x) / 2.0; };
  p.u1 = [](double x) { return -x; };
  p.u2 = [](double) { return -1.0; };
  p.u3 = [](double) { return 0.0; };
  p.u4 = [](double) { return 0.0; };
  p.u0 = 0.5;
  return p;
}

Profile cosine() {
  Profile p;
  p.name = "cosine";
  const double h = M_PI / 2.0;
  p.u = [h](double x) { return (2.0 / M_PI) * std::cos(h * x); };
  p.u1 = [h](double x) { return -std::sin(h * x); };
  p.u2 = [h](double x) { return -h * std::cos(h * x); };
  p.u3 = [h](double x) { return h * h * std::sin(h * x); };
  p.u4 = [h](double x) { return h * h * h * std::cos(h * x); };
  p.u0 = 2.0 / M_PI;
  return p;
}

Profile linear() {
  Profile p;
  p.name = "linear";
  p.u = [](double x) { return 1.0 - x; };
  p.u1 = [](double) { return -1.0; };
  p.u2 = [](double) { return 0.0; };
  p.u3 = [](double) { return 0.0; };
  p.u4 = [](double) { return 0.0; };
  p.u0 = 1.0;
  return p;
}

RVec sample(const Profile& profile, const ChebGrid& grid, int deriv) {
  const std::function<double(double)>* f = nullptr;
  switch (deriv) {
    case 0: f = &profile.u; break;
    case 1: f = &profile.u1; break;
    case 2: f = &profile.u2; break;
    case 3: f = &profile.u3; break;
    case 4: f = &profile.u4; break;
    default: throw std::invalid_argument("sample: derivative order must be 0..4");
  }
  RVec out(grid.nodes.size());
  for (Eigen::Index j = 0; j < grid.nodes.size(); ++j) out[j] = (*f)(grid.nodes[j]);
  return out;
}

ValidationReport validate(const Profile& profile, const ChebGrid& grid) {
  constexpr double tol = 1e-12;
  ValidationReport r;
  auto track = [&r](bool ok, double magnitude) {
    if (!ok) r.worst_violation = std::max(r.worst_violation, magnitude);
    return ok;
  };

  r.u_wall_zero = track(std::abs(profile.u(1.0)) < tol, std::abs(profile.u(1.0)));
  r.u1_center_zero = track(std::abs(profile.u1(0.0)) < tol, std::abs(profile.u1(0.0)));
  r.u1_wall_normalized =
      track(std::abs(profile.u1(1.0) + 1.0) < tol, std::abs(profile.u1(1.0) + 1.0));

  const double max_u2 = sample(profile, grid, 2).maxCoeff();
  r.u2_negative = track(max_u2 < 0.0, std::abs(max_u2));

  double worst_envelope = 0.0;
  for (Eigen::Index j = 0; j < grid.nodes.size(); ++j) {
    const double x = grid.nodes[j];
    const double ux = profile.u(x);
    worst_envelope = std::max(worst_envelope, profile.u0 * (1.0 - x) - ux);
    worst_envelope = std::max(worst_envelope, ux - (1.0 - x));
  }
  r.concavity_envelope = track(worst_envelope < tol, worst_envelope);

  r.u3_center_zero = std::abs(profile.u3(0.0)) < tol;
  return r;
}

double x_nu(const Profile& profile, double nu) {
  if (nu <= 0.0) return 1.0;
  // At nu = U(0) the root is exactly the centerline; bisection cannot
  // resolve it there because U is flat (U'(0) = 0), so clamp directly.
  if (nu >= profile.u0) return 0.0;
  // U is strictly decreasing on (0,1] for admissible profiles; bracket the
  // root, then polish with safeguarded Newton.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (profile.u(mid) >= nu) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {
    const double f = profile.u(x) - nu;
    if (std::abs(f) < 1e-15) break;
    const double df = profile.u1(x);
    if (df == 0.0) break;
    double step = f / df;
    const double next = x - step;
    if (next < 0.0 || next > 1.0) break;
    x = next;
  }
  return std::clamp(x, 0.0, 1.0);
}

double j_nu(const Profile& profile, double nu) { return std::abs(profile.u1(x_nu(profile, nu))); }

}  // namespace ostab
