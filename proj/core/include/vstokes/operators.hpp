#pragma once

// Global saddle-point systems ((A, B^T), (B, -C)) per mesh level, constraint
// handling, the split viscous backend and sparsity accounting.

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vstokes/fem.hpp"
#include "vstokes/mesh.hpp"
#include "vstokes/sparse.hpp"

namespace vstokes {

/// Viscous block as seen by the smoother and residual computations.
/// Operations act on the unconstrained matrix; Gauss-Seidel leaves rows
/// marked in `fixed` untouched.
class ViscousOperator {
 public:
  virtual ~ViscousOperator() = default;
  virtual int size() const = 0;
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
  virtual void gauss_seidel(std::span<double> x, std::span<const double> b, const std::vector<char>& fixed,
                            bool forward) const = 0;
  virtual double diagonal(int i) const = 0;
  virtual long long nnz() const = 0;
  virtual long long bytes() const = 0;
  virtual std::string backend() const = 0;
};

class CsrViscousOperator final : public ViscousOperator {
 public:
  explicit CsrViscousOperator(CsrMatrix a);
  int size() const override { return a_.rows; }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void gauss_seidel(std::span<double> x, std::span<const double> b, const std::vector<char>& fixed,
                    bool forward) const override;
  double diagonal(int i) const override { return diag_[i]; }
  long long nnz() const override { return a_.nnz(); }
  long long bytes() const override;
  std::string backend() const override { return "csr"; }
  const CsrMatrix& matrix() const { return a_; }

 private:
  CsrMatrix a_;
  std::vector<double> diag_;
};

/// A = L (x) I_d + correction, where L is the mu-weighted scalar Laplacian
/// stored once for all components and the correction lives on
/// interface x interface velocity DoF pairs.
class SplitViscousOperator final : public ViscousOperator {
 public:
  SplitViscousOperator(int dim, CsrMatrix scalar, CsrMatrix correction, std::vector<char> interface_dof);
  int size() const override { return dim_ * nv_; }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void gauss_seidel(std::span<double> x, std::span<const double> b, const std::vector<char>& fixed,
                    bool forward) const override;
  double diagonal(int i) const override { return diag_[i]; }
  long long nnz() const override { return static_cast<long long>(dim_) * scalar_.nnz() + correction_.nnz(); }
  long long bytes() const override;
  std::string backend() const override { return "split"; }

  int dim() const { return dim_; }
  const CsrMatrix& scalar() const { return scalar_; }
  const CsrMatrix& correction() const { return correction_; }
  const std::vector<char>& interface_dof() const { return interface_; }

 private:
  int dim_;
  int nv_;
  CsrMatrix scalar_;
  CsrMatrix correction_;
  std::vector<char> interface_;
  std::vector<double> diag_;
};

struct SaddleSystem {
  int level = 0;
  FormKind form = FormKind::Tr;
  Stabilization stab;
  DofMap dofs;
  std::vector<double> viscosity;   ///< per subdomain
  std::vector<double> cell_mu;     ///< per cell
  CsrMatrix A;                     ///< assembled viscous block, unconstrained
  std::shared_ptr<const ViscousOperator> op;  ///< backend used by the solver
  CsrMatrix B;                     ///< pressure x velocity, -(div v, q)
  CsrMatrix Bt;
  CsrMatrix C;                     ///< stabilization
  Vector mass;                     ///< lumped pressure mass
  Vector gauge_weight;             ///< lumped mass weighted by 1/(2 mu)
  Vector mass_inv_mu;              ///< lumped mass weighted by 1/mu
  Vector f;                        ///< momentum rhs, unconstrained
  Vector g;                        ///< mass rhs (zero)

  const ConstraintSet& constraints() const { return dofs.constraints; }
  bool pressure_kernel() const { return dofs.constraints.pressure_gauge; }
  int num_velocity() const { return dofs.num_velocity(); }
  int num_pressure() const { return dofs.num_pressure(); }
};

/// mu-weighted scalar P1 Laplacian on the vertex adjacency pattern.
CsrMatrix assemble_scalar_laplacian(const MeshLevel& mesh, const std::vector<double>& viscosity);

/// Consistent scalar P1 mass matrix.
CsrMatrix assemble_scalar_mass(const MeshLevel& mesh);

/// Viscous block for one form over the full (or, for GRAD, block-diagonal)
/// vertex-adjacency pattern.
CsrMatrix assemble_viscous(const MeshLevel& mesh, const DofMap& dofs, FormKind form, const std::vector<double>& viscosity);

/// Global (mu div u, div v).
CsrMatrix assemble_divdiv(const MeshLevel& mesh, const DofMap& dofs, const std::vector<double>& viscosity);

/// Sum of tangential surface terms over Gamma_12 and Gamma_F.
CsrMatrix assemble_surface_form(const MeshLevel& mesh, const EntityTags& tags, const DofMap& dofs,
                                const std::vector<double>& viscosity);

/// Assembles every block; constraints are recorded in dofs but not applied.
/// TR and GRAD use the split backend, SYM and DEV the plain CSR matrix.
SaddleSystem assemble_system(const MeshLevel& mesh, const EntityTags& tags, const DomainSpec& spec, FormKind form,
                             const Stabilization& stab, int level = 0);

/// Explicitly constrained blocks: A_c = P A P + (I - P), B_c = B P,
/// f_c = P (f - A u_D) + (I - P) u_D, g_c = g - B u_D.
struct ConstrainedSystem {
  CsrMatrix A;
  CsrMatrix B;
  CsrMatrix C;
  Vector f;
  Vector g;
  bool pressure_kernel = true;
};

ConstrainedSystem apply_constraints(const SaddleSystem& sys);
CsrMatrix constrain_viscous(const CsrMatrix& A, const ConstraintSet& con);

/// Splits an assembled TR block into L (x) I + interface correction.
/// Throws AssemblyError if A_TR - L (x) I has an entry above
/// 1e-12 max|A| in a free row outside the interface x interface block.
std::shared_ptr<SplitViscousOperator> build_split_operator(const MeshLevel& mesh, const SaddleSystem& tr);

/// r1 - B^T (M^{-1} r2). Throws InvalidArgument on a non-positive mass entry.
Vector coarse_rhs_correction(std::span<const double> r1, std::span<const double> r2, const CsrMatrix& Bt,
                             std::span<const double> mass);

struct NnzRow {
  std::string form;
  int level = 0;
  long long nnz_A = 0;
  long long nnz_correction = 0;
  double ratio = 1.0;  ///< nnz_A / nnz_A(GRAD) on the same level
  long long bytes = 0;
};

std::vector<NnzRow> nnz_report(const std::vector<const SaddleSystem*>& systems);
void write_nnz_csv(std::ostream& os, const std::vector<NnzRow>& rows);

}  // namespace vstokes
