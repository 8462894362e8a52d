#include <gtest/gtest.h>

#include <cmath>

#include "vstokes/error.hpp"
#include "vstokes/quadrature.hpp"

using namespace vstokes;

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int n = 1; n <= 5; ++n) {
    const GaussRule1D r = gauss_legendre(n);
    ASSERT_EQ(r.nodes.size(), static_cast<size_t>(n));
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
    }
  }
  EXPECT_THROW(gauss_legendre(0), InvalidArgument);
}

// Reference-simplex monomial integrals: int x^a y^b z^c = a! b! c! / (a+b+c+d)!,
// divided by the simplex measure 1/d! since the weights sum to one.
double monomial_fraction(int d, int a, int b, int c) {
  auto fact = [](int n) { return std::tgamma(n + 1.0); };
  return fact(a) * fact(b) * fact(c) * fact(d) / fact(a + b + c + d);
}

TEST(SimplexRule, ExactForLowDegreeMonomials) {
  for (int d : {2, 3}) {
    const SimplexRule r = simplex_rule(d, 4);
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-14);
    for (int a = 0; a <= 5; ++a)
      for (int b = 0; a + b <= 5; ++b)
        for (int c = 0; a + b + c <= 5; ++c) {
          if (d == 2 && c > 0) continue;
          double s = 0.0;
          for (size_t q = 0; q < r.weights.size(); ++q) {
            // barycentric coordinate k+1 is the Cartesian coordinate k on the reference simplex
            const auto& l = r.bary[q];
            s += r.weights[q] * std::pow(l[1], a) * std::pow(l[2], b) * (d == 3 ? std::pow(l[3], c) : 1.0);
          }
          EXPECT_NEAR(s, monomial_fraction(d, a, b, c), 1e-14) << d << a << b << c;
        }
  }
}

TEST(SimplexRule, BarycentricCoordinatesSumToOne) {
  const SimplexRule r = simplex_rule(3, 3);
  for (const auto& l : r.bary) EXPECT_NEAR(l[0] + l[1] + l[2] + l[3], 1.0, 1e-15);
}
