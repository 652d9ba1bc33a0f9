#pragma once

#include <functional>
#include <string>

#include "ostab/grid.hpp"

namespace ostab {

/// Symmetric channel velocity profile on [0,1] (x = 0 centerline, x = 1
/// wall), with derivative evaluators through fourth order.  The admissible
/// class is: U(1) = 0, U'(0) = 0, U'' < 0, normalized so U'(1) = -1.
struct Profile {
  std::string name;
  std::function<double(double)> u;   ///< U
  std::function<double(double)> u1;  ///< U'
  std::function<double(double)> u2;  ///< U''
  std::function<double(double)> u3;  ///< U'''
  std::function<double(double)> u4;  ///< U''''
  double u0 = 0;                     ///< U(0), cached centerline speed
};

/// Plane Poiseuille profile U(x) = (1 - x^2)/2.
[[nodiscard]] Profile poiseuille();

/// Cosine profile U(x) = (2/pi) cos(pi x / 2).
[[nodiscard]] Profile cosine();

/// Linear shear U(x) = 1 - x.  Violates strict concavity (U'' = 0) and
/// U'(0) = 0; kept as the canonical rejection example and as the profile
/// whose weighted-operator spectral gap has a closed form.
[[nodiscard]] Profile linear();

/// Node-sampled values of the profile's derivative of order 0..4.
[[nodiscard]] RVec sample(const Profile& profile, const ChebGrid& grid, int deriv = 0);

/// Per-invariant outcome of checking a profile against the admissible class.
struct ValidationReport {
  bool u_wall_zero = false;        ///< |U(1)| < 1e-12
  bool u1_center_zero = false;     ///< |U'(0)| < 1e-12
  bool u1_wall_normalized = false; ///< |U'(1) + 1| < 1e-12
  bool u2_negative = false;        ///< max over nodes of U'' < 0
  bool concavity_envelope = false; ///< U(0)(1-x) <= U(x) <= 1-x at nodes (1e-12 slack)
  bool u3_center_zero = false;     ///< informational: |U'''(0)| < 1e-12
  double worst_violation = 0;      ///< largest magnitude among failed checks
  [[nodiscard]] bool pass() const {
    return u_wall_zero && u1_center_zero && u1_wall_normalized && u2_negative &&
           concavity_envelope;
  }
};

/// Check the admissible-class invariants on the grid's nodes.
[[nodiscard]] ValidationReport validate(const Profile& profile, const ChebGrid& grid);

/// Critical-layer position: the root of U(x) = nu for 0 < nu < U(0)
/// (|U(x_nu) - nu| < 1e-13), clamped to 1 for nu <= 0 and 0 for nu > U(0).
[[nodiscard]] double x_nu(const Profile& profile, double nu);

/// Shear magnitude at the critical layer, |U'(x_nu(nu))|.
[[nodiscard]] double j_nu(const Profile& profile, double nu);

}  // namespace ostab
