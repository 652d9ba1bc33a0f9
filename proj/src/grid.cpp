#include "ostab/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace ostab {
namespace {

// First-order Chebyshev differentiation matrix on [-1,1] nodes
// t_j = cos(j*pi/n) (descending), by the barycentric closed form, followed
// by the Welfert recursion for higher orders.  The diagonal uses the
// negative-sum trick throughout: row sums of every derivative matrix vanish
// because derivatives annihilate constants.
std::array<RMat, 4> chebyshev_derivatives(const RVec& t) {
  const auto n = static_cast<int>(t.size()) - 1;
  const int m = n + 1;

  // Barycentric weights for CGL nodes: w_j = (-1)^j d_j, d_0 = d_n = 1/2.
  RVec w(m);
  for (int j = 0; j <= n; ++j) {
    double d = (j == 0 || j == n) ? 0.5 : 1.0;
    w[j] = ((j % 2) == 0 ? d : -d);
  }

  std::array<RMat, 4> D;
  RMat prev = RMat::Identity(m, m);
  for (int order = 1; order <= 4; ++order) {
    RMat cur = RMat::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      double row_sum = 0.0;
      for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        double val = order / (t[i] - t[j]) * ((w[j] / w[i]) * prev(i, i) - prev(i, j));
        cur(i, j) = val;
        row_sum += val;
      }
      cur(i, i) = -row_sum;
    }
    D[static_cast<std::size_t>(order - 1)] = cur;
    prev = std::move(cur);
  }
  return D;
}

// Clenshaw–Curtis weights on [-1,1] for even n (cosine-sum form); the
// caller halves them for the unit interval.
RVec clenshaw_curtis(int n) {
  RVec w(n + 1);
  const double endpoint = 1.0 / (static_cast<double>(n) * n - 1.0);
  w[0] = endpoint;
  w[n] = endpoint;
  for (int i = 1; i < n; ++i) {
    const double theta = M_PI * i / n;
    double v = 1.0;
    for (int k = 1; k <= n / 2 - 1; ++k) {
      v -= 2.0 * std::cos(2.0 * k * theta) / (4.0 * static_cast<double>(k) * k - 1.0);
    }
    v -= std::cos(n * theta) * endpoint;
    w[i] = 2.0 * v / n;
  }
  return w;
}

}  // namespace

ChebGrid build_grid(int n) {
  if (n < 8 || (n % 2) != 0) {
    throw std::invalid_argument("build_grid: n must be even and >= 8");
  }
  ChebGrid g;
  g.n = n;
  g.nodes.resize(n + 1);
  // Fill the upper half and mirror so x_j + x_{n-j} = 1 exactly and the
  // midpoint is exactly 1/2.
  for (int j = 0; j <= n / 2; ++j) {
    g.nodes[j] = (1.0 + std::cos(M_PI * j / n)) / 2.0;
  }
  g.nodes[n / 2] = 0.5;
  for (int j = n / 2 + 1; j <= n; ++j) {
    g.nodes[j] = 1.0 - g.nodes[n - j];
  }

  // Differentiate on [-1,1] and rescale: d/dx = 2 d/dt under x = (1+t)/2.
  RVec t = 2.0 * g.nodes.array() - 1.0;
  g.diff = chebyshev_derivatives(t);
  double scale = 2.0;
  for (auto& D : g.diff) {
    D *= scale;
    scale *= 2.0;
  }

  g.weights = clenshaw_curtis(n) / 2.0;
  return g;
}

cplx integrate(const ChebGrid& grid, const Vec& values) {
  if (values.size() != grid.nodes.size()) {
    throw std::invalid_argument("integrate: length mismatch");
  }
  return grid.weights.cast<cplx>().dot(values);  // dot conjugates the (real) weights
}

NormSet norms(const ChebGrid& grid, const Vec& values, double p) {
  if (values.size() != grid.nodes.size()) {
    throw std::invalid_argument("norms: length mismatch");
  }
  if (p < 1.0) {
    throw std::invalid_argument("norms: p must be >= 1");
  }
  NormSet out;
  const RVec a = values.cwiseAbs();
  out.l1 = grid.weights.dot(a);
  out.l2 = std::sqrt(grid.weights.dot(RVec(a.array().square())));
  if (std::isinf(p)) {
    out.lp = a.maxCoeff();
  } else {
    out.lp = std::pow(grid.weights.dot(RVec(a.array().pow(p))), 1.0 / p);
  }
  out.sup = a.maxCoeff();
  const RVec da = (grid.d(1) * values).cwiseAbs();
  const double dl2 = std::sqrt(grid.weights.dot(RVec(da.array().square())));
  out.sobolev12 = std::sqrt(out.l2 * out.l2 + dl2 * dl2);
  return out;
}

}  // namespace ostab
