#include <doctest.h>

#include <cmath>

#include "ostab/grid.hpp"
#include "ostab/profiles.hpp"

using namespace ostab;

TEST_SUITE("profiles") {

TEST_CASE("poiseuille normalization") {
  const auto p = poiseuille();
  CHECK(p.u(0.0) == 0.5);
  CHECK(p.u0 == 0.5);
  CHECK(p.u(1.0) == 0.0);
  CHECK(p.u1(1.0) == -1.0);
  CHECK(p.u1(0.0) == 0.0);
}

TEST_CASE("cosine normalization") {
  const auto p = cosine();
  CHECK(std::abs(p.u(1.0)) < 1e-12);
  CHECK(std::abs(p.u1(1.0) + 1.0) < 1e-12);
  CHECK(std::abs(p.u(0.0) - 2.0 / M_PI) < 1e-15);
  CHECK(std::abs(p.u1(0.0)) < 1e-15);
}

TEST_CASE("validate accepts the admissible profiles") {
  const auto g = build_grid(32);
  const auto rp = validate(poiseuille(), g);
  CHECK(rp.pass());
  CHECK(rp.worst_violation == 0.0);
  const auto rc = validate(cosine(), g);
  CHECK(rc.pass());
  CHECK(rc.u3_center_zero);
}

TEST_CASE("validate rejects the linear shear for lack of concavity") {
  const auto g = build_grid(32);
  const auto r = validate(linear(), g);
  CHECK_FALSE(r.u2_negative);
  CHECK_FALSE(r.pass());
}

TEST_CASE("critical layer position solves U(x)=nu and clamps outside") {
  const auto p = poiseuille();
  CHECK(std::abs(x_nu(p, 3.0 / 8.0) - 0.5) < 1e-12);
  CHECK(x_nu(p, -0.1) == 1.0);
  CHECK(x_nu(p, 0.7) == 0.0);
  for (double nu : {0.01, 0.1, 0.25, 0.4, 0.49, 0.499999}) {
    CHECK(std::abs(p.u(x_nu(p, nu)) - nu) < 1e-13);
  }
  const auto c = cosine();
  for (double nu : {0.01, 0.3, 0.6, 0.63}) {
    CHECK(std::abs(c.u(x_nu(c, nu)) - nu) < 1e-13);
  }
}

TEST_CASE("critical layer position matches the closed form for poiseuille") {
  const auto p = poiseuille();
  for (double nu = 0.01; nu < 0.5; nu += 0.02) {
    CHECK(std::abs(x_nu(p, nu) - std::sqrt(1.0 - 2.0 * nu)) < 1e-12);
  }
}

TEST_CASE("critical layer position is monotone non-increasing in nu") {
  for (const auto& p : {poiseuille(), cosine()}) {
    double prev = 2.0;
    for (double nu = -0.2; nu <= p.u0 + 0.2; nu += 0.01) {
      const double x = x_nu(p, nu);
      CHECK(x <= prev + 1e-15);
      prev = x;
    }
  }
}

TEST_CASE("critical shear values and comparability with the layer position") {
  const auto p = poiseuille();
  CHECK(j_nu(p, -0.3) == 1.0);
  CHECK(j_nu(p, 0.0) == 1.0);
  CHECK(std::abs(j_nu(p, 3.0 / 8.0) - 0.5) < 1e-12);
  CHECK(j_nu(p, p.u0) < 1e-12);
  // Shear vanishes approaching the centerline speed, and stays comparable
  // to the layer position in between.
  CHECK(j_nu(p, p.u0 - 1e-8) < 2e-4);
  for (double nu = 0.005; nu < p.u0; nu += 0.005) {
    const double ratio = j_nu(p, nu) / x_nu(p, nu);
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 2.0);
  }
}

}  // TEST_SUITE
