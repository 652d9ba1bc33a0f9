#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ostab/grid.hpp"

using namespace ostab;

namespace {

Vec sample_fn(const ChebGrid& g, double (*f)(double)) {
  Vec v(g.nodes.size());
  for (Eigen::Index j = 0; j < g.nodes.size(); ++j) v[j] = f(g.nodes[j]);
  return v;
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("construction validates arguments") {
  CHECK_THROWS_AS((void)build_grid(7), std::invalid_argument);
  CHECK_THROWS_AS((void)build_grid(6), std::invalid_argument);
  CHECK_THROWS_AS((void)build_grid(9), std::invalid_argument);
  CHECK_NOTHROW((void)build_grid(8));
}

TEST_CASE("nodes descend from 1 to 0 and hit the midpoint exactly") {
  const auto g = build_grid(8);
  CHECK(g.nodes[0] == 1.0);
  CHECK(g.nodes[8] == 0.0);
  CHECK(g.nodes[4] == 0.5);
  for (int j = 0; j < 8; ++j) CHECK(g.nodes[j] > g.nodes[j + 1]);
}

TEST_CASE("first derivative annihilates constants") {
  const auto g = build_grid(16);
  Vec ones = Vec::Ones(17);
  CHECK((g.d(1) * ones).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("second derivative of x^2 is the constant 2") {
  const auto g = build_grid(16);
  Vec x2(17);
  for (int j = 0; j <= 16; ++j) x2[j] = g.nodes[j] * g.nodes[j];
  Vec d2 = g.d(2) * x2;
  CHECK((d2.array() - 2.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("first derivative is exact on monomials up to degree n") {
  const auto g = build_grid(16);
  for (int k = 1; k <= 16; ++k) {
    Vec xk(17), dxk(17);
    for (int j = 0; j <= 16; ++j) {
      xk[j] = std::pow(g.nodes[j], k);
      dxk[j] = k * std::pow(g.nodes[j], k - 1);
    }
    CHECK((g.d(1) * xk - dxk).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("quadrature weights are positive and sum to the interval length") {
  for (int n : {8, 16, 32, 64}) {
    const auto g = build_grid(n);
    CHECK(g.weights.minCoeff() > 0.0);
    CHECK(std::abs(g.weights.sum() - 1.0) < 1e-14);
  }
}

TEST_CASE("integration of low-degree polynomials is exact") {
  const auto g = build_grid(8);
  CHECK(std::abs(integrate(g, Vec::Ones(9)) - 1.0) < 1e-14);
  Vec x(9), x3(9);
  for (int j = 0; j <= 8; ++j) {
    x[j] = g.nodes[j];
    x3[j] = std::pow(g.nodes[j], 3);
  }
  CHECK(std::abs(integrate(g, x) - 0.5) < 1e-14);
  CHECK(std::abs(integrate(g, x3) - 0.25) < 1e-14);
  // Exactness through degree n-1.
  for (int k = 0; k <= 7; ++k) {
    Vec xk(9);
    for (int j = 0; j <= 8; ++j) xk[j] = std::pow(g.nodes[j], k);
    CHECK(std::abs(integrate(g, xk) - 1.0 / (k + 1)) < 1e-14);
  }
  CHECK_THROWS_AS((void)integrate(g, Vec::Ones(5)), std::invalid_argument);
}

TEST_CASE("norm bundle matches analytic values") {
  const auto g = build_grid(16);
  CHECK(norms(g, Vec::Ones(17)).l2 == doctest::Approx(1.0).epsilon(1e-13));
  Vec x(17);
  for (int j = 0; j <= 16; ++j) x[j] = g.nodes[j];
  const auto nx = norms(g, x, 4.0);
  CHECK(std::abs(nx.l2 - 1.0 / std::sqrt(3.0)) < 1e-12);
  CHECK(std::abs(nx.l1 - 0.5) < 1e-12);
  CHECK(std::abs(nx.lp - std::pow(0.2, 0.25)) < 1e-12);
  CHECK(nx.sup == 1.0);
  CHECK(std::abs(nx.sobolev12 - std::sqrt(1.0 / 3.0 + 1.0)) < 1e-10);
  CHECK_THROWS_AS((void)norms(g, x, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)norms(g, Vec::Ones(5)), std::invalid_argument);
}

TEST_CASE("differentiation of exp converges geometrically to a roundoff plateau") {
  double prev = 1e300;
  for (int n : {8, 12, 16, 20}) {
    const auto g = build_grid(n);
    Vec f = sample_fn(g, [](double x) { return std::exp(x); });
    const double err = (g.d(1) * f - f).cwiseAbs().maxCoeff();
    CHECK(err < std::max(0.25 * prev, 5e-12));
    prev = err;
  }
}

TEST_CASE("higher-order matrices agree with composed first derivatives") {
  const auto g = build_grid(32);
  RMat power = g.d(1);
  for (int k = 2; k <= 4; ++k) {
    power = g.d(1) * power;
    const double kappa = power.cwiseAbs().rowwise().sum().maxCoeff();
    CHECK((g.d(k) - power).cwiseAbs().maxCoeff() < 1e-8 * kappa);
  }
}

}  // TEST_SUITE
