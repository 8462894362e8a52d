#include "vstokes/fem.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include <Eigen/Dense>

#include "vstokes/error.hpp"
#include "vstokes/quadrature.hpp"
#include "vstokes/tensor.hpp"

namespace vstokes {

std::string to_string(FormKind form) {
  switch (form) {
    case FormKind::Grad: return "GRAD";
    case FormKind::Sym: return "SYM";
    case FormKind::Tr: return "TR";
    case FormKind::Dev: return "DEV";
  }
  return "?";
}

FormKind parse_form(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::toupper(ch); });
  if (s == "GRAD") return FormKind::Grad;
  if (s == "SYM") return FormKind::Sym;
  if (s == "TR") return FormKind::Tr;
  if (s == "DEV") return FormKind::Dev;
  throw InvalidArgument("unknown form '" + name + "' (expected GRAD, SYM, TR or DEV)");
}

std::string to_string(const Stabilization& stab) {
  switch (stab.type) {
    case StabType::FacetJump: return "FACET_JUMP";
    case StabType::BrezziPitkaranta: return "BP";
    case StabType::None: return "NONE";
  }
  return "?";
}

int ConstraintSet::count() const {
  return static_cast<int>(std::count(fixed.begin(), fixed.end(), 1));
}

int DofMap::num_interface() const {
  return static_cast<int>(std::count(interface_dof.begin(), interface_dof.end(), 1));
}

DofMap build_dof_map(const MeshLevel& mesh, const EntityTags& tags, const DomainSpec& spec, PressureSpace pressure) {
  DofMap dofs;
  dofs.dim = mesh.dim;
  dofs.num_vertices = mesh.num_vertices();
  dofs.num_cells = mesh.num_cells();
  dofs.pressure = pressure;
  const int nv = dofs.num_vertices;
  const int n = dofs.num_velocity();

  dofs.interface_dof.assign(n, 0);
  for (int v = 0; v < nv; ++v) {
    if (!tags.interface_vertex[v]) continue;
    for (int c = 0; c < mesh.dim; ++c) dofs.interface_dof[dofs.velocity(v, c)] = 1;
  }

  auto& con = dofs.constraints;
  con.fixed.assign(n, 0);
  con.value.assign(n, 0.0);
  for (int v = 0; v < nv; ++v) {
    if (!tags.dirichlet_vertex[v]) continue;
    Point g{0.0, 0.0, 0.0};
    if (spec.dirichlet) g = spec.dirichlet(mesh.vertices[v]);
    for (int c = 0; c < mesh.dim; ++c) {
      con.fixed[dofs.velocity(v, c)] = 1;
      con.value[dofs.velocity(v, c)] = g[c];
    }
  }
  for (int f : tags.freeslip_facets) {
    const Point nrm = mesh.facet_normal(f);
    int axis = -1;
    for (int k = 0; k < mesh.dim; ++k)
      if (std::abs(std::abs(nrm[k]) - 1.0) < 1e-9) axis = k;
    if (axis < 0) throw InvalidArgument("free-slip requires axis-aligned boundary facets");
    for (int k = 0; k < mesh.dim; ++k) {
      const int v = mesh.facets[f].vertices[k];
      if (tags.dirichlet_vertex[v]) continue;
      con.fixed[dofs.velocity(v, axis)] = 1;
      con.value[dofs.velocity(v, axis)] = 0.0;
    }
  }
  con.pressure_gauge = tags.traction_facets.empty();
  return dofs;
}

CellGeometry cell_geometry(const MeshLevel& mesh, int cell) {
  const int d = mesh.dim;
  const auto& cv = mesh.cells[cell];
  const Point& x0 = mesh.vertices[cv[0]];
  Eigen::Matrix3d J = Eigen::Matrix3d::Identity();
  for (int k = 0; k < d; ++k) {
    const Point e = mesh.vertices[cv[k + 1]] - x0;
    J.col(k) = Eigen::Vector3d(e[0], e[1], e[2]);
  }
  // 2D points have z = 0, so the identity third column leaves det unchanged
  const double det = J.determinant();
  double scale = 0.0;
  for (int k = 0; k < d; ++k) {
    const Point e = mesh.vertices[cv[k + 1]] - x0;
    scale = std::max(scale, norm(e));
  }
  if (!(std::abs(det) > 1e-14 * std::pow(scale, d))) throw DegenerateCell("cell " + std::to_string(cell) + " has zero volume");

  CellGeometry geo;
  geo.dim = d;
  geo.volume = std::abs(det) / (d == 2 ? 2.0 : 6.0);
  // Rows of J^{-1} are the gradients of lambda_1..lambda_d.
  Eigen::Matrix3d Jinv = Eigen::Matrix3d::Identity();
  Jinv.topLeftCorner(d, d) = J.topLeftCorner(d, d).inverse();
  Point g0{0.0, 0.0, 0.0};
  for (int a = 1; a <= d; ++a) {
    Point g{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) g[i] = Jinv(a - 1, i);
    geo.grad[a] = g;
    g0 = g0 - g;
  }
  geo.grad[0] = g0;
  return geo;
}

std::vector<int> cell_velocity_dofs(const MeshLevel& mesh, int cell, const DofMap& dofs) {
  const int nb = mesh.dim + 1;
  std::vector<int> idx(mesh.dim * nb);
  for (int c = 0; c < mesh.dim; ++c)
    for (int a = 0; a < nb; ++a) idx[c * nb + a] = dofs.velocity(mesh.cells[cell][a], c);
  return idx;
}

ElementMatrix element_viscous(FormKind form, const MeshLevel& mesh, int cell, double mu, const DofMap& dofs) {
  const int d = mesh.dim;
  const int nb = d + 1;
  const CellGeometry geo = cell_geometry(mesh, cell);
  std::vector<int> idx = cell_velocity_dofs(mesh, cell, dofs);
  ElementMatrix K(idx, idx);
  const double w = mu * geo.volume;
  // Coefficient of the div-div term subtracted from SYM.
  double div_coef = 0.0;
  if (form == FormKind::Tr) div_coef = 1.0;
  if (form == FormKind::Dev) div_coef = 2.0 / d;
  const bool full = form != FormKind::Grad;

  for (int c = 0; c < d; ++c)
    for (int a = 0; a < nb; ++a)
      for (int e = 0; e < d; ++e)
        for (int b = 0; b < nb; ++b) {
          const Point& ga = geo.grad[a];
          const Point& gb = geo.grad[b];
          double v = 0.0;
          if (c == e) v += dot(ga, gb);
          if (full) v += ga[e] * gb[c] - div_coef * ga[c] * gb[e];
          K(c * nb + a, e * nb + b) = w * v;
        }
  return K;
}

ElementMatrix element_divergence(const MeshLevel& mesh, int cell, const DofMap& dofs) {
  const int d = mesh.dim;
  const int nb = d + 1;
  const CellGeometry geo = cell_geometry(mesh, cell);
  std::vector<int> cols = cell_velocity_dofs(mesh, cell, dofs);
  if (dofs.pressure == PressureSpace::P0) {
    ElementMatrix B({cell}, cols);
    for (int c = 0; c < d; ++c)
      for (int a = 0; a < nb; ++a) B(0, c * nb + a) = -geo.volume * geo.grad[a][c];
    return B;
  }
  std::vector<int> rows(nb);
  for (int q = 0; q < nb; ++q) rows[q] = mesh.cells[cell][q];
  ElementMatrix B(rows, cols);
  const double w = -geo.volume / nb;
  for (int q = 0; q < nb; ++q)
    for (int c = 0; c < d; ++c)
      for (int a = 0; a < nb; ++a) B(q, c * nb + a) = w * geo.grad[a][c];
  return B;
}

ElementMatrix facet_stabilization(const MeshLevel& mesh, int facet, double mu, double gamma, const DofMap& dofs) {
  const Facet& f = mesh.facets[facet];
  if (f.kind != FacetKind::Interior) throw InvalidArgument("facet stabilization is only defined on facets interior to a subdomain");
  if (dofs.pressure != PressureSpace::P0) throw InvalidArgument("facet stabilization requires P0 pressure");
  const double v1 = mesh.cell_volume(f.cells[0]);
  const double v2 = mesh.cell_volume(f.cells[1]);
  const double w = gamma / (2.0 * mu) * v1 * v2 / (v1 + v2);
  ElementMatrix C({f.cells[0], f.cells[1]}, {f.cells[0], f.cells[1]});
  C(0, 0) = w;
  C(0, 1) = -w;
  C(1, 0) = -w;
  C(1, 1) = w;
  return C;
}

ElementMatrix bp_stabilization(const MeshLevel& mesh, int cell, double mu, double gamma_bp, const DofMap& dofs) {
  if (dofs.pressure != PressureSpace::P1) throw InvalidArgument("pressure-gradient stabilization requires P1 pressure");
  const int nb = mesh.dim + 1;
  const CellGeometry geo = cell_geometry(mesh, cell);
  const double h = mesh.longest_edge(cell);
  std::vector<int> idx(nb);
  for (int a = 0; a < nb; ++a) idx[a] = mesh.cells[cell][a];
  ElementMatrix C(idx, idx);
  const double w = gamma_bp * h * h / (2.0 * mu) * geo.volume;
  for (int a = 0; a < nb; ++a)
    for (int b = 0; b < nb; ++b) C(a, b) = w * dot(geo.grad[a], geo.grad[b]);
  return C;
}

ElementMatrix interface_surface_form(const MeshLevel& mesh, int facet, const std::vector<double>& viscosity,
                                     const DofMap& dofs) {
  const Facet& f = mesh.facets[facet];
  double kappa = 0.0;
  const double mu0 = viscosity.at(mesh.cell_subdomain[f.cells[0]]);
  if (f.kind == FacetKind::Interface) {
    kappa = mu0 - viscosity.at(mesh.cell_subdomain[f.cells[1]]);
  } else if (f.kind == FacetKind::Boundary &&
             (f.boundary == BoundaryKind::FreeSlip || f.boundary == BoundaryKind::Traction)) {
    kappa = mu0;
  } else {
    throw InvalidArgument("surface form requires an interface or free-slip/traction facet");
  }
  const int d = mesh.dim;
  const CellGeometry geo = cell_geometry(mesh, f.cells[0]);
  const Point n = mesh.facet_normal(facet);
  const RotationBasis basis = rotation_basis(d);
  const double area = mesh.facet_area(facet);

  // Local vertex index within cells[0] of each facet vertex.
  std::array<int, 3> local{};
  for (int k = 0; k < d; ++k) {
    local[k] = -1;
    for (int a = 0; a <= d; ++a)
      if (mesh.cells[f.cells[0]][a] == f.vertices[k]) local[k] = a;
    if (local[k] < 0) throw MeshError("facet vertex not found in adjacent cell");
  }

  std::vector<int> idx(d * d);
  for (int c = 0; c < d; ++c)
    for (int k = 0; k < d; ++k) idx[c * d + k] = dofs.velocity(f.vertices[k], c);
  ElementMatrix S(idx, idx);
  const double w = -kappa * area / d;
  for (const Mat& R : basis.mats) {
    const Vec3 t = R.apply(n);
    for (int kb = 0; kb < d; ++kb) {
      const double dt = dot(geo.grad[local[kb]], t);
      for (int ka = 0; ka < d; ++ka)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) S(c * d + ka, e * d + kb) += w * dt * R(e, c);
    }
  }
  return S;
}

std::vector<double> lumped_mass(const MeshLevel& mesh, const DofMap& dofs, const std::vector<double>& viscosity,
                                MassWeight weight) {
  std::vector<double> m(dofs.num_pressure(), 0.0);
  const int nb = mesh.dim + 1;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    double v = mesh.cell_volume(c);
    const double mu = viscosity.at(mesh.cell_subdomain[c]);
    if (weight == MassWeight::HalfInverseViscosity) v /= 2.0 * mu;
    if (weight == MassWeight::InverseViscosity) v /= mu;
    if (dofs.pressure == PressureSpace::P0) {
      m[c] += v;
    } else {
      for (int a = 0; a < nb; ++a) m[mesh.cells[c][a]] += v / nb;
    }
  }
  return m;
}

double verify_q1p0_constant(double lo, double hi) {
  if (!(hi > lo)) throw InvalidArgument("empty cube");
  const double h = hi - lo;
  const GaussRule1D g = gauss_legendre(3);
  const int nq = static_cast<int>(g.nodes.size());
  constexpr int kNodes = 8;
  constexpr int kDim = 24;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(kDim, kDim);
  Eigen::MatrixXd Dd = Eigen::MatrixXd::Zero(kDim, kDim);  // (div v, div w)
  Eigen::VectorXd Dm = Eigen::VectorXd::Zero(kDim);        // int div v
  double vol = 0.0;

  for (int i = 0; i < nq; ++i)
    for (int j = 0; j < nq; ++j)
      for (int k = 0; k < nq; ++k) {
        const double s[3] = {g.nodes[i], g.nodes[j], g.nodes[k]};
        const double wq = g.weights[i] * g.weights[j] * g.weights[k] * h * h * h;
        vol += wq;
        // grad[node][axis] of the trilinear hat on the unit cube, scaled to (lo, hi).
        double grad[kNodes][3];
        for (int nd = 0; nd < kNodes; ++nd) {
          const int bits[3] = {nd & 1, (nd >> 1) & 1, (nd >> 2) & 1};
          double f[3], df[3];
          for (int ax = 0; ax < 3; ++ax) {
            f[ax] = bits[ax] ? s[ax] : 1.0 - s[ax];
            df[ax] = (bits[ax] ? 1.0 : -1.0) / h;
          }
          grad[nd][0] = df[0] * f[1] * f[2];
          grad[nd][1] = f[0] * df[1] * f[2];
          grad[nd][2] = f[0] * f[1] * df[2];
        }
        // Basis function (node, comp) has index comp * 8 + node.
        std::vector<Mat> E(kDim, Mat(3));
        std::vector<double> div(kDim);
        for (int c = 0; c < 3; ++c)
          for (int nd = 0; nd < kNodes; ++nd) {
            Mat G(3);
            for (int ax = 0; ax < 3; ++ax) G(c, ax) = grad[nd][ax];
            E[c * kNodes + nd] = dev(sym(G));
            div[c * kNodes + nd] = grad[nd][c];
          }
        for (int p = 0; p < kDim; ++p) {
          Dm(p) += wq * div[p];
          for (int q = 0; q < kDim; ++q) {
            double ee = 0.0;
            for (int r = 0; r < 3; ++r)
              for (int t = 0; t < 3; ++t) ee += E[p](r, t) * E[q](r, t);
            A(p, q) += 2.0 * wq * ee;
            Dd(p, q) += wq * div[p] * div[q];
          }
        }
      }

  // ||div v - Pi_0 div v||^2 = (div v, div v) - (int div v)^2 / |K|
  const Eigen::MatrixXd Dev = Dd - Dm * Dm.transpose() / vol;
  const Eigen::MatrixXd Bm = A - Dev / 3.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(A);
  if (ea.info() != Eigen::Success) throw SolverError("eigen decomposition failed");
  const double amax = ea.eigenvalues().maxCoeff();
  std::vector<int> keep;
  for (int p = 0; p < kDim; ++p)
    if (ea.eigenvalues()(p) > 1e-10 * amax) keep.push_back(p);
  Eigen::MatrixXd Q(kDim, keep.size());
  for (size_t p = 0; p < keep.size(); ++p) Q.col(p) = ea.eigenvectors().col(keep[p]);
  const Eigen::MatrixXd Ar = Q.transpose() * A * Q;
  const Eigen::MatrixXd Br = Q.transpose() * Bm * Q;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ge(Ar, Br);
  if (ge.info() != Eigen::Success) throw SolverError("generalized eigen solve failed");
  return ge.eigenvalues().maxCoeff();
}

}  // namespace vstokes
