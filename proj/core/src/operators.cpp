#include "vstokes/operators.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <ostream>

#include "vstokes/error.hpp"
#include "vstokes/quadrature.hpp"

namespace vstokes {

namespace {

std::vector<std::vector<int>> vertex_adjacency(const MeshLevel& mesh) {
  std::vector<std::vector<int>> adj(mesh.num_vertices());
  const int nb = mesh.dim + 1;
  for (const auto& cell : mesh.cells)
    for (int a = 0; a < nb; ++a)
      for (int b = 0; b < nb; ++b) adj[cell[a]].push_back(cell[b]);
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return adj;
}

CsrMatrix pattern_from_rows(int rows, int cols, const std::vector<std::vector<int>>& row_cols) {
  std::vector<int> ptr(rows + 1, 0);
  std::vector<int> idx;
  for (int i = 0; i < rows; ++i) ptr[i + 1] = ptr[i] + static_cast<int>(row_cols[i].size());
  idx.reserve(ptr.back());
  for (const auto& r : row_cols) idx.insert(idx.end(), r.begin(), r.end());
  return CsrMatrix::from_pattern(rows, cols, std::move(ptr), std::move(idx));
}

/// Scalar pattern replicated over d x d component blocks (or only the
/// diagonal blocks).
CsrMatrix block_pattern(const std::vector<std::vector<int>>& adj, int dim, bool full) {
  const int nv = static_cast<int>(adj.size());
  std::vector<int> ptr(dim * nv + 1, 0);
  std::vector<int> idx;
  for (int c = 0; c < dim; ++c)
    for (int v = 0; v < nv; ++v) {
      const int i = c * nv + v;
      const int blocks = full ? dim : 1;
      ptr[i + 1] = ptr[i] + blocks * static_cast<int>(adj[v].size());
    }
  idx.reserve(ptr.back());
  for (int c = 0; c < dim; ++c)
    for (int v = 0; v < nv; ++v) {
      for (int e = 0; e < dim; ++e) {
        if (!full && e != c) continue;
        for (int w : adj[v]) idx.push_back(e * nv + w);
      }
    }
  return CsrMatrix::from_pattern(dim * nv, dim * nv, std::move(ptr), std::move(idx));
}

void add_element(CsrMatrix& M, const ElementMatrix& K) {
  for (int i = 0; i < K.num_rows(); ++i)
    for (int j = 0; j < K.num_cols(); ++j) {
      const double v = K(i, j);
      const int k = M.find(K.rows[i], K.cols[j]);
      if (k < 0) {
        if (v == 0.0) continue;
        throw AssemblyError("element entry outside the sparsity pattern");
      }
      M.values[k] += v;
    }
}

double cell_mu(const MeshLevel& mesh, const std::vector<double>& viscosity, int c) {
  return viscosity.at(mesh.cell_subdomain[c]);
}

}  // namespace

// ---------------------------------------------------------------------------

CsrViscousOperator::CsrViscousOperator(CsrMatrix a) : a_(std::move(a)), diag_(a_.rows, 0.0) {
  for (int i = 0; i < a_.rows; ++i) diag_[i] = a_.at(i, i);
}

void CsrViscousOperator::apply(std::span<const double> x, std::span<double> y) const { a_.multiply(x, y); }

void CsrViscousOperator::gauss_seidel(std::span<double> x, std::span<const double> b, const std::vector<char>& fixed,
                                      bool forward) const {
  const int n = a_.rows;
  const int* ptr = a_.row_ptr.data();
  const int* col = a_.col_idx.data();
  const double* val = a_.values.data();
  for (int s = 0; s < n; ++s) {
    const int i = forward ? s : n - 1 - s;
    if (fixed[i]) continue;
    double r = b[i];
    for (int k = ptr[i]; k < ptr[i + 1]; ++k) r -= val[k] * x[col[k]];
    x[i] += r / diag_[i];
  }
}

long long CsrViscousOperator::bytes() const {
  return 12LL * a_.nnz() + 4LL * (a_.rows + 1);
}

SplitViscousOperator::SplitViscousOperator(int dim, CsrMatrix scalar, CsrMatrix correction,
                                           std::vector<char> interface_dof)
    : dim_(dim),
      nv_(scalar.rows),
      scalar_(std::move(scalar)),
      correction_(std::move(correction)),
      interface_(std::move(interface_dof)) {
  if (correction_.rows != dim_ * nv_) throw InvalidArgument("correction block has the wrong size");
  diag_.assign(dim_ * nv_, 0.0);
  for (int c = 0; c < dim_; ++c)
    for (int v = 0; v < nv_; ++v) diag_[c * nv_ + v] = scalar_.at(v, v);
  for (int i = 0; i < dim_ * nv_; ++i) diag_[i] += correction_.at(i, i);
}

void SplitViscousOperator::apply(std::span<const double> x, std::span<double> y) const {
  for (int c = 0; c < dim_; ++c) scalar_.multiply(x.subspan(c * nv_, nv_), y.subspan(c * nv_, nv_));
  if (correction_.nnz() > 0) correction_.multiply_add(1.0, x, y);
}

void SplitViscousOperator::gauss_seidel(std::span<double> x, std::span<const double> b,
                                        const std::vector<char>& fixed, bool forward) const {
  const int n = dim_ * nv_;
  const int* lp = scalar_.row_ptr.data();
  const int* lc = scalar_.col_idx.data();
  const double* lv = scalar_.values.data();
  const int* cp = correction_.row_ptr.data();
  const int* cc = correction_.col_idx.data();
  const double* cv = correction_.values.data();
  for (int s = 0; s < n; ++s) {
    const int i = forward ? s : n - 1 - s;
    if (fixed[i]) continue;
    const int c = i / nv_;
    const int v = i - c * nv_;
    const double* xc = x.data() + static_cast<std::ptrdiff_t>(c) * nv_;
    double r = b[i];
    for (int k = lp[v]; k < lp[v + 1]; ++k) r -= lv[k] * xc[lc[k]];
    for (int k = cp[i]; k < cp[i + 1]; ++k) r -= cv[k] * x[cc[k]];
    x[i] += r / diag_[i];
  }
}

long long SplitViscousOperator::bytes() const {
  return 12LL * scalar_.nnz() + 4LL * (nv_ + 1) + 12LL * correction_.nnz() + 4LL * (correction_.rows + 1);
}

// ---------------------------------------------------------------------------

CsrMatrix assemble_scalar_laplacian(const MeshLevel& mesh, const std::vector<double>& viscosity) {
  CsrMatrix L = pattern_from_rows(mesh.num_vertices(), mesh.num_vertices(), vertex_adjacency(mesh));
  const int nb = mesh.dim + 1;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry geo = cell_geometry(mesh, c);
    const double w = cell_mu(mesh, viscosity, c) * geo.volume;
    for (int a = 0; a < nb; ++a)
      for (int b = 0; b < nb; ++b) L.values[L.find(mesh.cells[c][a], mesh.cells[c][b])] += w * dot(geo.grad[a], geo.grad[b]);
  }
  return L;
}

CsrMatrix assemble_scalar_mass(const MeshLevel& mesh) {
  CsrMatrix M = pattern_from_rows(mesh.num_vertices(), mesh.num_vertices(), vertex_adjacency(mesh));
  const int nb = mesh.dim + 1;
  const int d = mesh.dim;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double V = mesh.cell_volume(c);
    // int lambda_a lambda_b = V (1 + delta_ab) d! / (d + 2)!
    const double base = V / ((d + 1.0) * (d + 2.0));
    for (int a = 0; a < nb; ++a)
      for (int b = 0; b < nb; ++b)
        M.values[M.find(mesh.cells[c][a], mesh.cells[c][b])] += base * (a == b ? 2.0 : 1.0);
  }
  return M;
}

CsrMatrix assemble_viscous(const MeshLevel& mesh, const DofMap& dofs, FormKind form,
                           const std::vector<double>& viscosity) {
  CsrMatrix A = block_pattern(vertex_adjacency(mesh), mesh.dim, form != FormKind::Grad);
  for (int c = 0; c < mesh.num_cells(); ++c)
    add_element(A, element_viscous(form, mesh, c, cell_mu(mesh, viscosity, c), dofs));
  return A;
}

CsrMatrix assemble_divdiv(const MeshLevel& mesh, const DofMap& dofs, const std::vector<double>& viscosity) {
  CsrMatrix D = block_pattern(vertex_adjacency(mesh), mesh.dim, true);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double mu = cell_mu(mesh, viscosity, c);
    ElementMatrix S = element_viscous(FormKind::Sym, mesh, c, mu, dofs);
    const ElementMatrix T = element_viscous(FormKind::Tr, mesh, c, mu, dofs);
    for (size_t k = 0; k < S.values.size(); ++k) S.values[k] -= T.values[k];
    add_element(D, S);
  }
  return D;
}

CsrMatrix assemble_surface_form(const MeshLevel& mesh, const EntityTags& tags, const DofMap& dofs,
                                const std::vector<double>& viscosity) {
  std::vector<Triplet> trip;
  auto add = [&](int f) {
    const ElementMatrix S = interface_surface_form(mesh, f, viscosity, dofs);
    for (int i = 0; i < S.num_rows(); ++i)
      for (int j = 0; j < S.num_cols(); ++j) trip.push_back({S.rows[i], S.cols[j], S(i, j)});
  };
  for (int f : tags.interface_facets) add(f);
  for (int f : tags.gamma_f_facets()) add(f);
  const int n = dofs.num_velocity();
  return CsrMatrix::from_triplets(n, n, std::move(trip));
}

std::shared_ptr<SplitViscousOperator> build_split_operator(const MeshLevel& mesh, const SaddleSystem& tr) {
  if (tr.form != FormKind::Tr) throw InvalidArgument("split operator requires the TR form");
  const int d = mesh.dim;
  const int nv = mesh.num_vertices();
  CsrMatrix L = assemble_scalar_laplacian(mesh, tr.viscosity);
  const CsrMatrix& A = tr.A;
  double amax = 0.0;
  for (double v : A.values) amax = std::max(amax, std::abs(v));
  const double tol = 1e-12 * amax;
  const auto& fixed = tr.dofs.constraints.fixed;
  const auto& iface = tr.dofs.interface_dof;

  std::vector<Triplet> corr;
  for (int i = 0; i < A.rows; ++i) {
    const int c = i / nv;
    const int v = i - c * nv;
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      const int j = A.col_idx[k];
      double diff = A.values[k];
      if (j / nv == c) diff -= L.at(v, j - c * nv);
      if (std::abs(diff) <= tol) continue;
      if (iface[i] && iface[j]) {
        corr.push_back({i, j, diff});
      } else if (!fixed[i]) {
        throw AssemblyError("TR and GRAD blocks differ outside the interface block (row " + std::to_string(i) +
                            ", col " + std::to_string(j) + ", diff " + std::to_string(diff) + ")");
      }
    }
  }
  CsrMatrix C = CsrMatrix::from_triplets(d * nv, d * nv, std::move(corr));
  return std::make_shared<SplitViscousOperator>(d, std::move(L), std::move(C), iface);
}

SaddleSystem assemble_system(const MeshLevel& mesh, const EntityTags& tags, const DomainSpec& spec, FormKind form,
                             const Stabilization& stab, int level) {
  spec.validate();
  if (!(stab.gamma > 0.0) && stab.type != StabType::None) throw InvalidArgument("stabilization parameter must be positive");
  if (stab.type == StabType::FacetJump && mesh.dim == 3 && stab.gamma >= 1.5)
    std::cerr << "warning: facet stabilization gamma = " << stab.gamma << " is outside the range gamma < 3/2\n";

  SaddleSystem sys;
  sys.level = level;
  sys.form = form;
  sys.stab = stab;
  sys.viscosity = spec.viscosity;
  sys.dofs = build_dof_map(mesh, tags, spec, stab.pressure_space());
  const DofMap& dofs = sys.dofs;
  const int d = mesh.dim;
  const int nb = d + 1;
  const int nu = dofs.num_velocity();
  const int np = dofs.num_pressure();
  sys.cell_mu.resize(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) sys.cell_mu[c] = cell_mu(mesh, spec.viscosity, c);

  sys.A = assemble_viscous(mesh, dofs, form, spec.viscosity);

  // Divergence.
  if (dofs.pressure == PressureSpace::P0) {
    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(mesh.num_cells()) * d * nb);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const ElementMatrix Be = element_divergence(mesh, c, dofs);
      for (int j = 0; j < Be.num_cols(); ++j) trip.push_back({Be.rows[0], Be.cols[j], Be(0, j)});
    }
    sys.B = CsrMatrix::from_triplets(np, nu, std::move(trip));
  } else {
    const auto adj = vertex_adjacency(mesh);
    std::vector<std::vector<int>> rows(np);
    for (int q = 0; q < np; ++q)
      for (int c = 0; c < d; ++c)
        for (int w : adj[q]) rows[q].push_back(c * dofs.num_vertices + w);
    sys.B = pattern_from_rows(np, nu, rows);
    for (int c = 0; c < mesh.num_cells(); ++c) add_element(sys.B, element_divergence(mesh, c, dofs));
  }
  sys.Bt = sys.B.transpose();

  // Stabilization.
  {
    std::vector<Triplet> trip;
    if (stab.type == StabType::FacetJump) {
      for (int f = 0; f < mesh.num_facets(); ++f) {
        if (mesh.facets[f].kind != FacetKind::Interior) continue;
        const ElementMatrix Ce = facet_stabilization(mesh, f, sys.cell_mu[mesh.facets[f].cells[0]], stab.gamma, dofs);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) trip.push_back({Ce.rows[i], Ce.cols[j], Ce(i, j)});
      }
    } else if (stab.type == StabType::BrezziPitkaranta) {
      for (int c = 0; c < mesh.num_cells(); ++c) {
        const ElementMatrix Ce = bp_stabilization(mesh, c, sys.cell_mu[c], stab.gamma, dofs);
        for (int i = 0; i < nb; ++i)
          for (int j = 0; j < nb; ++j) trip.push_back({Ce.rows[i], Ce.cols[j], Ce(i, j)});
      }
    }
    sys.C = CsrMatrix::from_triplets(np, np, std::move(trip));
  }

  sys.mass = lumped_mass(mesh, dofs, spec.viscosity, MassWeight::Unit);
  sys.gauge_weight = lumped_mass(mesh, dofs, spec.viscosity, MassWeight::HalfInverseViscosity);
  sys.mass_inv_mu = lumped_mass(mesh, dofs, spec.viscosity, MassWeight::InverseViscosity);

  // Momentum rhs (f, v) with a degree-4 rule; exact for piecewise-cubic forcing.
  sys.f.assign(nu, 0.0);
  sys.g.assign(np, 0.0);
  if (spec.forcing) {
    const SimplexRule rule = simplex_rule(d, 3);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const double V = mesh.cell_volume(c);
      const int sd = mesh.cell_subdomain[c];
      const auto& cv = mesh.cells[c];
      for (size_t q = 0; q < rule.weights.size(); ++q) {
        Point x{0.0, 0.0, 0.0};
        for (int a = 0; a < nb; ++a) x = x + rule.bary[q][a] * mesh.vertices[cv[a]];
        const Point fx = spec.forcing(x, sd);
        const double w = rule.weights[q] * V;
        for (int comp = 0; comp < d; ++comp)
          for (int a = 0; a < nb; ++a) sys.f[dofs.velocity(cv[a], comp)] += w * fx[comp] * rule.bary[q][a];
      }
    }
  }

  if (form == FormKind::Tr) {
    sys.op = build_split_operator(mesh, sys);
  } else if (form == FormKind::Grad) {
    CsrMatrix L = assemble_scalar_laplacian(mesh, spec.viscosity);
    CsrMatrix empty = CsrMatrix::from_triplets(nu, nu, {});
    sys.op = std::make_shared<SplitViscousOperator>(d, std::move(L), std::move(empty), dofs.interface_dof);
  } else {
    sys.op = std::make_shared<CsrViscousOperator>(sys.A);
  }
  return sys;
}

CsrMatrix constrain_viscous(const CsrMatrix& A, const ConstraintSet& con) {
  std::vector<Triplet> trip;
  trip.reserve(A.nnz());
  for (int i = 0; i < A.rows; ++i) {
    if (con.fixed[i]) {
      trip.push_back({i, i, 1.0});
      continue;
    }
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      if (!con.fixed[A.col_idx[k]]) trip.push_back({i, A.col_idx[k], A.values[k]});
  }
  return CsrMatrix::from_triplets(A.rows, A.cols, std::move(trip));
}

ConstrainedSystem apply_constraints(const SaddleSystem& sys) {
  const ConstraintSet& con = sys.constraints();
  const int nu = sys.num_velocity();
  ConstrainedSystem out;
  out.pressure_kernel = con.pressure_gauge;
  out.A = constrain_viscous(sys.A, con);
  out.C = sys.C;

  Vector uD(nu, 0.0);
  for (int i = 0; i < nu; ++i)
    if (con.fixed[i]) uD[i] = con.value[i];
  Vector AuD(nu, 0.0);
  sys.A.multiply(uD, AuD);
  out.f.resize(nu);
  for (int i = 0; i < nu; ++i) out.f[i] = con.fixed[i] ? uD[i] : sys.f[i] - AuD[i];

  Vector BuD(sys.num_pressure(), 0.0);
  sys.B.multiply(uD, BuD);
  out.g.resize(sys.num_pressure());
  for (int q = 0; q < sys.num_pressure(); ++q) out.g[q] = sys.g[q] - BuD[q];

  std::vector<Triplet> trip;
  trip.reserve(sys.B.nnz());
  for (int q = 0; q < sys.B.rows; ++q)
    for (int k = sys.B.row_ptr[q]; k < sys.B.row_ptr[q + 1]; ++k)
      if (!con.fixed[sys.B.col_idx[k]]) trip.push_back({q, sys.B.col_idx[k], sys.B.values[k]});
  out.B = CsrMatrix::from_triplets(sys.B.rows, sys.B.cols, std::move(trip));
  return out;
}

Vector coarse_rhs_correction(std::span<const double> r1, std::span<const double> r2, const CsrMatrix& Bt,
                             std::span<const double> mass) {
  if (r2.size() != mass.size() || static_cast<int>(r2.size()) != Bt.cols || static_cast<int>(r1.size()) != Bt.rows)
    throw InvalidArgument("coarse_rhs_correction: size mismatch");
  Vector s(r2.size());
  for (size_t q = 0; q < r2.size(); ++q) {
    if (!(mass[q] > 0.0)) throw InvalidArgument("coarse_rhs_correction: non-positive mass entry");
    s[q] = r2[q] / mass[q];
  }
  Vector out(r1.begin(), r1.end());
  Bt.multiply_add(-1.0, s, out);
  return out;
}

std::vector<NnzRow> nnz_report(const std::vector<const SaddleSystem*>& systems) {
  std::vector<NnzRow> rows;
  for (const SaddleSystem* s : systems) {
    NnzRow r;
    r.form = to_string(s->form);
    r.level = s->level;
    r.nnz_A = s->op->nnz();
    if (auto split = std::dynamic_pointer_cast<const SplitViscousOperator>(s->op)) r.nnz_correction = split->correction().nnz();
    r.bytes = s->op->bytes();
    rows.push_back(r);
  }
  for (auto& r : rows) {
    for (const auto& g : rows)
      if (g.form == "GRAD" && g.level == r.level && g.nnz_A > 0) r.ratio = static_cast<double>(r.nnz_A) / g.nnz_A;
  }
  return rows;
}

void write_nnz_csv(std::ostream& os, const std::vector<NnzRow>& rows) {
  os << "form,level,nnz_A,nnz_correction,ratio,bytes_estimate\n";
  for (const auto& r : rows)
    os << r.form << ',' << r.level << ',' << r.nnz_A << ',' << r.nnz_correction << ',' << r.ratio << ',' << r.bytes
       << '\n';
}

}  // namespace vstokes
