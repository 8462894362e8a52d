#pragma once

#include <array>
#include <vector>

namespace vstokes {

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule1D gauss_legendre(int n);

/// Quadrature on the reference simplex in barycentric coordinates. Weights
/// are fractions of the simplex measure (they sum to one).
struct SimplexRule {
  std::vector<std::array<double, 4>> bary;
  std::vector<double> weights;
};

/// Collapsed (Duffy) tensor rule with n Gauss points per direction; exact
/// for polynomials of total degree 2n - dim + 1 or less (n = 4 covers
/// degree 5 on tetrahedra).
SimplexRule simplex_rule(int dim, int n);

}  // namespace vstokes
