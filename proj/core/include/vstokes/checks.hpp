#pragma once

// Algebraic identity checks shared by the self-test and the test suites.

#include <string>

#include "vstokes/cases.hpp"

namespace vstokes {

/// Max residuals of the rotation-basis identities over `samples` random
/// tensors with entries in [-1, 1].
DecompositionResiduals random_decomposition_residuals(int dim, int samples, unsigned seed);

/// Operator identities on one mesh level of a case. All quantities are
/// relative to max |A_TR| (or to |a_tr(x, x)| for the last one).
struct OperatorIdentities {
  double tr_vs_sym_minus_div = 0.0;  ///< max |A_TR - (A_SYM - D)|
  double tr_vs_dev = 0.0;            ///< max |A_TR - (A_DEV - (1 - 2/d) D)|
  double surface_vs_tr = 0.0;        ///< max |A_TR - (A_GRAD + S)| on free rows and columns
  double split_parity = 0.0;         ///< max |P (split - A_TR) P v| / |v| over random v
  double interior_rows = 0.0;        ///< max |A_TR - A_GRAD| on free non-interface rows
  /// |x^T A_TR x + d (d - 2) sum mu_i |Omega_i|| relative to the expected
  /// value (3D) or to d^2 sum mu_i |Omega_i| (2D, where the value is 0).
  double x_identity = 0.0;
  double tr_symmetry = 0.0;          ///< max |A_TR - A_TR^T|
  long long correction_nnz = 0;
  long long tr_nnz = 0;
};

OperatorIdentities check_operator_identities(const BenchmarkCase& bc, int level, unsigned seed, int samples = 20);

}  // namespace vstokes
