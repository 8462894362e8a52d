#pragma once

// Error norms against exact or discrete references, convergence tables and
// the locally mass-conservative flux post-process.

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "vstokes/mesh.hpp"
#include "vstokes/operators.hpp"
#include "vstokes/tensor.hpp"

namespace vstokes {

struct ExactSolution {
  std::function<Point(const Point&)> velocity;
  /// Velocity Jacobian, grad(i, j) = d u_i / d x_j.
  std::function<Mat(const Point&)> gradient;
  std::function<double(const Point&, int subdomain)> pressure;
};

/// e_L2 = ||u||_0, e_V = sqrt(a_sym(u, u)), e_Q = sqrt((q / (2 mu), q))
/// with q the pressure minus its 1/(2 mu)-weighted mean.
struct ErrorTriple {
  double e_L2 = 0.0;
  double e_V = 0.0;
  double e_Q = 0.0;
};

/// Errors of (u_h, p_h) against closed-form fields with a collapsed Gauss
/// rule (4 points per direction).
ErrorTriple error_norms(const MeshLevel& mesh, const SaddleSystem& sys, std::span<const double> u,
                        std::span<const double> p, const ExactSolution& exact);

/// Norms of the exact fields themselves, for relative errors.
ErrorTriple exact_norms(const MeshLevel& mesh, const SaddleSystem& sys, const ExactSolution& exact);

/// Norm matrices for discrete comparisons on one mesh: consistent P1 mass,
/// unconstrained A_SYM and the diagonal Q weight.
struct NormOperators {
  int dim = 3;
  CsrMatrix mass;
  CsrMatrix a_sym;
  Vector q_weight;
};

NormOperators build_norm_operators(const MeshLevel& mesh, const SaddleSystem& sys);

/// Norms of a discrete (u, p).
ErrorTriple discrete_norms(const NormOperators& norms, std::span<const double> u, std::span<const double> p);

struct DiscreteSolution {
  FormKind form = FormKind::Sym;
  int level = 0;
  Vector u;
  Vector p;
};

/// Relative differences ||a - b|| / ||b|| in the three norms. Throws
/// InvalidArgument when the solutions live in different spaces.
ErrorTriple compare_forms(const NormOperators& norms, const DiscreteSolution& a, const DiscreteSolution& b);

struct ConvergenceRow {
  int level = 0;
  long long dofs = 0;
  ErrorTriple error;
  /// log2(e_{l-1} / e_l); NaN when undefined.
  double rate_L2 = 0.0;
  double rate_V = 0.0;
  double rate_Q = 0.0;
};

class ConvergenceTable {
 public:
  void add(int level, long long dofs, const ErrorTriple& e);
  const std::vector<ConvergenceRow>& rows() const { return rows_; }
  /// level,e_L2,rate_L2,e_V,rate_V,e_Q,rate_Q with blanks for undefined rates.
  void write_csv(std::ostream& os) const;

 private:
  std::vector<ConvergenceRow> rows_;
};

/// log2(coarse / fine), NaN when either is zero or not finite.
double observed_rate(double coarse, double fine);

/// Per (cell, local facet k opposite vertex k): integral of the corrected
/// outward flux j = u.n_T + Delta j over the facet, stored at
/// cell * (dim + 1) + k.
struct FluxField {
  int dim = 3;
  std::vector<double> flux;

  double at(int cell, int k) const { return flux[cell * (dim + 1) + k]; }
};

/// Requires P0 pressure with facet stabilization (InvalidArgument otherwise).
FluxField flux_correct(const MeshLevel& mesh, const SaddleSystem& sys, std::span<const double> u,
                       std::span<const double> p);

/// Sum of corrected fluxes over the boundary of each cell.
std::vector<double> flux_mass_residuals(const MeshLevel& mesh, const FluxField& flux);

/// Relative L2 difference of two velocity traces on the boundary facets
/// lying in the plane x_axis = value, with ub as reference.
double boundary_trace_difference(const MeshLevel& mesh, const DofMap& dofs, std::span<const double> ua,
                                 std::span<const double> ub, int axis, double value);

}  // namespace vstokes
