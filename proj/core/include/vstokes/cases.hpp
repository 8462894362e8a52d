#pragma once

// Desk-scale benchmark problems: Couette flow across a viscosity jump,
// viscosity layers, viscosity columns and a traction-free channel.

#include <optional>
#include <string>
#include <vector>

#include "vstokes/analysis.hpp"
#include "vstokes/fem.hpp"
#include "vstokes/mesh.hpp"

namespace vstokes {

struct BenchmarkCase {
  std::string name;
  std::string description;
  DomainSpec spec;
  int cells_per_unit = 4;
  std::optional<ExactSolution> exact;
  /// Form of the reference solution in comparisons without exact data.
  FormKind reference_form = FormKind::Sym;
  int default_min_level = 0;
  int default_max_level = 2;
};

BenchmarkCase case_couette3d();
BenchmarkCase case_layers3d();
BenchmarkCase case_columns3d();
BenchmarkCase case_channel2d();
/// Channel with the exact Poiseuille trace imposed on the outflow.
BenchmarkCase case_poiseuille2d();

std::vector<std::string> case_names();
/// Throws InvalidArgument for an unknown name.
BenchmarkCase make_case(const std::string& name);

/// Pointwise strong-form residuals of an exact solution, sampled on a grid
/// (central differences for derivatives of the exact fields).
struct ExactCheck {
  double divergence = 0.0;      ///< max |div u|
  double momentum = 0.0;        ///< max |-div(2 mu sym grad u) + grad p - f|
  double interface_stress = 0.0;  ///< max jump of sigma n across Gamma_12
};

/// Throws InvalidArgument if the case has no exact solution.
ExactCheck check_exact_solution(const BenchmarkCase& bc);

}  // namespace vstokes
