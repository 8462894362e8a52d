#include "vstokes/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "vstokes/error.hpp"

namespace vstokes {

GaussRule1D gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: n must be positive");
  GaussRule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    // map [-1, 1] -> [0, 1]
    r.nodes[i] = 0.5 * (1.0 - x);
    r.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

SimplexRule simplex_rule(int dim, int n) {
  const GaussRule1D g = gauss_legendre(n);
  SimplexRule r;
  if (dim == 2) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double u = g.nodes[i], v = g.nodes[j];
        const double x = u, y = v * (1.0 - u);
        r.bary.push_back({1.0 - x - y, x, y, 0.0});
        r.weights.push_back(2.0 * g.weights[i] * g.weights[j] * (1.0 - u));
      }
  } else if (dim == 3) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const double u = g.nodes[i], v = g.nodes[j], w = g.nodes[k];
          const double x = u, y = v * (1.0 - u), z = w * (1.0 - u) * (1.0 - v);
          r.bary.push_back({1.0 - x - y - z, x, y, z});
          r.weights.push_back(6.0 * g.weights[i] * g.weights[j] * g.weights[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
        }
  } else {
    throw InvalidArgument("simplex_rule: dim must be 2 or 3");
  }
  return r;
}

}  // namespace vstokes
