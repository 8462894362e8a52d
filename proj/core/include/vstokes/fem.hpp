#pragma once

// Element- and facet-level forms for P1 vector velocity with P0 or P1
// pressure: viscous forms, divergence, stabilizations, lumped masses and
// the tangential interface surface form.

#include <string>
#include <vector>

#include "vstokes/geometry.hpp"
#include "vstokes/mesh.hpp"

namespace vstokes {

/// Viscous bilinear forms.
///   Grad: (mu grad u, grad v)
///   Sym:  (2 mu sym grad u, sym grad v)
///   Tr:   Sym - (mu div u, div v)
///   Dev:  (2 mu dev sym grad u, dev sym grad v)
enum class FormKind { Grad, Sym, Tr, Dev };

std::string to_string(FormKind form);
FormKind parse_form(const std::string& name);

enum class PressureSpace { P0, P1 };

enum class StabType { FacetJump, BrezziPitkaranta, None };

struct Stabilization {
  StabType type = StabType::FacetJump;
  double gamma = 1.0;

  PressureSpace pressure_space() const {
    return type == StabType::BrezziPitkaranta ? PressureSpace::P1 : PressureSpace::P0;
  }
};

std::string to_string(const Stabilization& stab);

/// Prescribed velocity DoFs. Dirichlet vertices fix all components to the
/// boundary data; free-slip vertices fix the normal component to zero.
struct ConstraintSet {
  std::vector<char> fixed;
  std::vector<double> value;
  /// Pressure determined up to a constant; the solver projects onto the
  /// weighted zero-mean subspace.
  bool pressure_gauge = true;

  int count() const;
  bool is_fixed(int dof) const { return fixed[dof] != 0; }
};

/// Velocity DoFs are component-blocked: dof(vertex, c) = c * nv + vertex.
/// Pressure DoFs are cells (P0) or vertices (P1).
struct DofMap {
  int dim = 3;
  int num_vertices = 0;
  int num_cells = 0;
  PressureSpace pressure = PressureSpace::P0;
  /// Velocity DoFs whose vertex lies on the closure of Gamma_12 or Gamma_F.
  std::vector<char> interface_dof;
  ConstraintSet constraints;

  int num_velocity() const { return dim * num_vertices; }
  int num_pressure() const { return pressure == PressureSpace::P0 ? num_cells : num_vertices; }
  int velocity(int vertex, int comp) const { return comp * num_vertices + vertex; }
  int num_interface() const;
};

/// Throws InvalidArgument if free-slip is requested on a facet that is not
/// axis-aligned.
DofMap build_dof_map(const MeshLevel& mesh, const EntityTags& tags, const DomainSpec& spec, PressureSpace pressure);

/// Barycentric gradients and measure of a simplex.
struct CellGeometry {
  int dim = 3;
  double volume = 0.0;
  std::array<Point, 4> grad{};
};

/// Throws DegenerateCell on zero volume.
CellGeometry cell_geometry(const MeshLevel& mesh, int cell);

/// Dense local matrix with local-to-global index maps.
struct ElementMatrix {
  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<double> values;  // row-major

  ElementMatrix() = default;
  ElementMatrix(std::vector<int> r, std::vector<int> c)
      : rows(std::move(r)), cols(std::move(c)), values(rows.size() * cols.size(), 0.0) {}

  int num_rows() const { return static_cast<int>(rows.size()); }
  int num_cols() const { return static_cast<int>(cols.size()); }
  double& operator()(int i, int j) { return values[i * cols.size() + j]; }
  double operator()(int i, int j) const { return values[i * cols.size() + j]; }
};

/// Local velocity DoFs of a cell in (component, local vertex) order.
std::vector<int> cell_velocity_dofs(const MeshLevel& mesh, int cell, const DofMap& dofs);

/// Exact P1 viscous element matrix (integrands are constant).
ElementMatrix element_viscous(FormKind form, const MeshLevel& mesh, int cell, double mu, const DofMap& dofs);

/// -(div v, q) with rows = pressure DoFs, cols = velocity DoFs.
ElementMatrix element_divergence(const MeshLevel& mesh, int cell, const DofMap& dofs);

/// gamma / (2 mu) |T1||T2| / (|T1| + |T2|) [p][q] on a facet interior to one
/// subdomain. Throws InvalidArgument on interface or boundary facets.
ElementMatrix facet_stabilization(const MeshLevel& mesh, int facet, double mu, double gamma, const DofMap& dofs);

/// gamma_bp h_T^2 / (2 mu) (grad p, grad q)_T with h_T the longest edge.
ElementMatrix bp_stabilization(const MeshLevel& mesh, int cell, double mu, double gamma_bp, const DofMap& dofs);

/// Tangential surface term -kappa sum_j (d_{t_j} u, R_j v)_F with
/// t_j = R_j n. kappa = [mu] = mu(cells[0]) - mu(cells[1]) on Gamma_12 and
/// mu on Gamma_F. Throws InvalidArgument for other facets.
ElementMatrix interface_surface_form(const MeshLevel& mesh, int facet, const std::vector<double>& viscosity,
                                     const DofMap& dofs);

enum class MassWeight {
  Unit,                 ///< int psi_q
  HalfInverseViscosity, ///< int psi_q / (2 mu), the Q inner product
  InverseViscosity,     ///< int psi_q / mu
};

/// Diagonal lumped pressure mass (P0: cell volume; P1: row-sum lumping).
std::vector<double> lumped_mass(const MeshLevel& mesh, const DofMap& dofs, const std::vector<double>& viscosity,
                                MassWeight weight);

/// Largest lambda of  2|dev sym grad v|^2 = lambda (2|dev sym grad v|^2 -
/// 1/3 |div v - Pi_0 div v|^2)  over trilinear vector fields on the cube
/// (lo, hi)^3, after removing the common kernel.
double verify_q1p0_constant(double lo = -1.0, double hi = 1.0);

}  // namespace vstokes
