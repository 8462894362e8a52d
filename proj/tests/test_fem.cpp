#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <numeric>

#include "vstokes/cases.hpp"
#include "vstokes/error.hpp"
#include "vstokes/fem.hpp"
#include "vstokes/mesh.hpp"

using namespace vstokes;

namespace {

MeshLevel single_cell(int dim, double scale = 1.0) {
  MeshLevel m;
  m.dim = dim;
  if (dim == 2) {
    m.vertices = {{0, 0, 0}, {scale, 0, 0}, {0, scale, 0}};
    m.cells = {{0, 1, 2, -1}};
  } else {
    m.vertices = {{0, 0, 0}, {scale, 0, 0}, {0.3 * scale, scale, 0}, {0.2 * scale, 0.4 * scale, scale}};
    m.cells = {{0, 1, 2, 3}};
  }
  m.cell_subdomain = {0};
  return m;
}

DofMap plain_dofs(const MeshLevel& m, PressureSpace p = PressureSpace::P0) {
  DofMap d;
  d.dim = m.dim;
  d.num_vertices = m.num_vertices();
  d.num_cells = m.num_cells();
  d.pressure = p;
  return d;
}

// Local quadratic form v^T K v for a vertex field given as a function.
template <class F>
double local_energy(const ElementMatrix& k, const MeshLevel& m, const DofMap& dofs, F field) {
  std::vector<double> g(dofs.num_velocity(), 0.0);
  for (int v = 0; v < m.num_vertices(); ++v) {
    const Point u = field(m.vertices[v]);
    for (int c = 0; c < m.dim; ++c) g[dofs.velocity(v, c)] = u[c];
  }
  double e = 0.0;
  for (int i = 0; i < k.num_rows(); ++i)
    for (int j = 0; j < k.num_cols(); ++j) e += g[k.rows[i]] * k(i, j) * g[k.cols[j]];
  return e;
}

Point identity_field(const Point& x) { return x; }

DomainSpec two_block_spec(double mu0, double mu1) {
  DomainSpec s;
  s.dim = 3;
  s.viscosity = {mu0, mu1};
  s.subdomain = [](const Point& x) { return x[0] < 0.5 ? 0 : 1; };
  s.boundary = [](const Point&, const Point&) -> std::optional<BoundaryKind> { return BoundaryKind::Dirichlet; };
  s.forcing = [](const Point&, int) { return Point{0, 0, 0}; };
  s.dirichlet = [](const Point&) { return Point{0, 0, 0}; };
  return s;
}

}  // namespace

TEST(FormKind, ParseAndPrint) {
  EXPECT_EQ(parse_form("tr"), FormKind::Tr);
  EXPECT_EQ(parse_form("SYM"), FormKind::Sym);
  EXPECT_EQ(parse_form("Grad"), FormKind::Grad);
  EXPECT_EQ(parse_form("dev"), FormKind::Dev);
  EXPECT_EQ(to_string(FormKind::Tr), "TR");
  EXPECT_THROW(parse_form("laplace"), InvalidArgument);
}

TEST(ElementViscous, Dimensions) {
  for (int d : {2, 3}) {
    const MeshLevel m = single_cell(d);
    const DofMap dofs = plain_dofs(m);
    for (FormKind f : {FormKind::Grad, FormKind::Sym, FormKind::Tr, FormKind::Dev}) {
      const ElementMatrix k = element_viscous(f, m, 0, 1.0, dofs);
      EXPECT_EQ(k.num_rows(), d * (d + 1));
      EXPECT_EQ(k.num_cols(), d * (d + 1));
    }
  }
}

TEST(ElementViscous, GradIsComponentDecoupled) {
  const MeshLevel m = single_cell(3);
  const DofMap dofs = plain_dofs(m);
  const ElementMatrix k = element_viscous(FormKind::Grad, m, 0, 2.0, dofs);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) {
      if (i / 4 != j / 4) EXPECT_EQ(k(i, j), 0.0);
      else EXPECT_EQ(k(i, j), k(i % 4, j % 4));
    }
}

TEST(ElementViscous, SolenoidalFieldSeesNoTraceTerm) {
  const MeshLevel m = single_cell(3);
  const DofMap dofs = plain_dofs(m);
  auto rot = [](const Point& x) { return Point{x[1], -x[0], 0.0}; };
  const double tr = local_energy(element_viscous(FormKind::Tr, m, 0, 1.0, dofs), m, dofs, rot);
  const double sy = local_energy(element_viscous(FormKind::Sym, m, 0, 1.0, dofs), m, dofs, rot);
  EXPECT_NEAR(tr, sy, 1e-14);
}

TEST(ElementViscous, IdentityFieldEnergies) {
  for (int d : {2, 3}) {
    const MeshLevel m = single_cell(d);
    const DofMap dofs = plain_dofs(m);
    const double vol = cell_geometry(m, 0).volume;
    const double mu = 3.0;
    // a_tr(x,x) = mu |T| (2d - d^2); the 2D value vanishes.
    const double tr = local_energy(element_viscous(FormKind::Tr, m, 0, mu, dofs), m, dofs, identity_field);
    EXPECT_NEAR(tr, -d * (d - 2) * mu * vol, 1e-13) << "d=" << d;
    const double dv = local_energy(element_viscous(FormKind::Dev, m, 0, mu, dofs), m, dofs, identity_field);
    EXPECT_NEAR(dv, 0.0, 1e-13);
    const double sy = local_energy(element_viscous(FormKind::Sym, m, 0, mu, dofs), m, dofs, identity_field);
    EXPECT_NEAR(sy, 2.0 * d * mu * vol, 1e-13);
  }
}

TEST(ElementViscous, DegenerateCellThrows) {
  MeshLevel m = single_cell(3);
  m.vertices[3] = {0.5, 0.5, 0.0};
  EXPECT_THROW(element_viscous(FormKind::Sym, m, 0, 1.0, plain_dofs(m)), DegenerateCell);
}

TEST(ElementDivergence, IdentityFieldAndConstants) {
  for (int d : {2, 3}) {
    const MeshLevel m = single_cell(d);
    const DofMap dofs = plain_dofs(m);
    const ElementMatrix b = element_divergence(m, 0, dofs);
    ASSERT_EQ(b.num_rows(), 1);
    std::vector<double> x(dofs.num_velocity()), c(dofs.num_velocity());
    for (int v = 0; v < m.num_vertices(); ++v)
      for (int k = 0; k < d; ++k) {
        x[dofs.velocity(v, k)] = m.vertices[v][k];
        c[dofs.velocity(v, k)] = 1.0 + k;
      }
    double sx = 0.0, sc = 0.0;
    for (int j = 0; j < b.num_cols(); ++j) {
      sx += b(0, j) * x[b.cols[j]];
      sc += b(0, j) * c[b.cols[j]];
    }
    EXPECT_NEAR(sx, -d * cell_geometry(m, 0).volume, 1e-14);
    EXPECT_NEAR(sc, 0.0, 1e-14);
  }
}

TEST(FacetStabilization, WeightsAndRowSums) {
  const BenchmarkCase bc = make_case("layers3d");
  const MeshLevel m = build_case_mesh(bc.spec, bc.cells_per_unit);
  const DofMap dofs = plain_dofs(m);
  int interior = -1;
  for (int f = 0; f < m.num_facets(); ++f)
    if (m.facets[f].kind == FacetKind::Interior &&
        m.cell_subdomain[m.facets[f].cells[0]] == m.cell_subdomain[m.facets[f].cells[1]]) {
      interior = f;
      break;
    }
  ASSERT_GE(interior, 0);
  const double v = m.cell_volume(m.facets[interior].cells[0]);
  const ElementMatrix c1 = facet_stabilization(m, interior, 1.0, 1.0, dofs);
  // gamma / (2 mu) * V^2 / (2V)
  EXPECT_NEAR(c1(0, 0), v / 4.0, 1e-16);
  EXPECT_NEAR(c1(0, 1), -v / 4.0, 1e-16);
  EXPECT_NEAR(c1(0, 0) + c1(0, 1), 0.0, 1e-18);
  const ElementMatrix c10 = facet_stabilization(m, interior, 10.0, 1.0, dofs);
  EXPECT_NEAR(c10(0, 0), c1(0, 0) / 10.0, 1e-16);

  const EntityTags tags = classify_entities(m, bc.spec);
  EXPECT_THROW(facet_stabilization(m, tags.interface_facets[0], 1.0, 1.0, dofs), InvalidArgument);
  EXPECT_THROW(facet_stabilization(m, tags.freeslip_facets[0], 1.0, 1.0, dofs), InvalidArgument);
}

TEST(BpStabilization, ConstantsAndScaling) {
  for (int d : {2, 3}) {
    const MeshLevel m = single_cell(d), half = single_cell(d, 0.5);
    const DofMap dofs = plain_dofs(m, PressureSpace::P1);
    const ElementMatrix c = bp_stabilization(m, 0, 1.0, 1.0, dofs);
    const ElementMatrix ch = bp_stabilization(half, 0, 1.0, 1.0, dofs);
    for (int i = 0; i <= d; ++i) {
      double row = 0.0;
      for (int j = 0; j <= d; ++j) {
        row += c(i, j);
        EXPECT_NEAR(c(i, j), c(j, i), 1e-15);
        // h^2 quarters; (grad, grad)_T scales by 2^(2-d)
        EXPECT_NEAR(ch(i, j), c(i, j) * 0.25 * std::pow(2.0, 2 - d), 1e-14);
      }
      EXPECT_NEAR(row, 0.0, 1e-14);
    }
    Eigen::MatrixXd dense(d + 1, d + 1);
    for (int i = 0; i <= d; ++i)
      for (int j = 0; j <= d; ++j) dense(i, j) = c(i, j);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense).eigenvalues().minCoeff(), -1e-14);
  }
}

TEST(InterfaceSurfaceForm, EqualViscosityGivesZero) {
  const DomainSpec s = two_block_spec(2.0, 2.0);
  const MeshLevel m = build_case_mesh(s, 2);
  const EntityTags tags = classify_entities(m, s);
  const DofMap dofs = build_dof_map(m, tags, s, PressureSpace::P0);
  ASSERT_FALSE(tags.interface_facets.empty());
  for (int f : tags.interface_facets) {
    const ElementMatrix k = interface_surface_form(m, f, s.viscosity, dofs);
    for (double v : k.values) EXPECT_EQ(v, 0.0);
  }
  const DomainSpec s2 = two_block_spec(1.0, 5.0);
  const ElementMatrix k2 = interface_surface_form(m, tags.interface_facets[0], s2.viscosity, dofs);
  double mx = 0.0;
  for (double v : k2.values) mx = std::max(mx, std::abs(v));
  EXPECT_GT(mx, 0.0);
  EXPECT_THROW(interface_surface_form(m, tags.dirichlet_facets[0], s.viscosity, dofs), InvalidArgument);
}

TEST(LumpedMass, PressureSpaces) {
  const DomainSpec s = two_block_spec(1.0, 4.0);
  const MeshLevel m = build_case_mesh(s, 2);
  const EntityTags tags = classify_entities(m, s);
  for (PressureSpace ps : {PressureSpace::P0, PressureSpace::P1}) {
    const DofMap dofs = build_dof_map(m, tags, s, ps);
    const auto unit = lumped_mass(m, dofs, s.viscosity, MassWeight::Unit);
    const auto q = lumped_mass(m, dofs, s.viscosity, MassWeight::HalfInverseViscosity);
    EXPECT_EQ(static_cast<int>(unit.size()), dofs.num_pressure());
    EXPECT_NEAR(std::accumulate(unit.begin(), unit.end(), 0.0), 1.0, 1e-14);
    EXPECT_NEAR(std::accumulate(q.begin(), q.end(), 0.0), 0.5 / 2.0 + 0.5 / 8.0, 1e-14);
    for (double v : unit) EXPECT_GT(v, 0.0);
  }
  const DofMap p0 = build_dof_map(m, tags, s, PressureSpace::P0);
  const auto unit = lumped_mass(m, p0, s.viscosity, MassWeight::Unit);
  for (int c = 0; c < m.num_cells(); ++c) EXPECT_EQ(unit[c], m.cell_volume(c));
}

TEST(DofMap, CouetteConstraints) {
  const BenchmarkCase bc = make_case("couette3d");
  const MeshLevel m = build_case_mesh(bc.spec, bc.cells_per_unit);
  const EntityTags tags = classify_entities(m, bc.spec);
  const DofMap dofs = build_dof_map(m, tags, bc.spec, PressureSpace::P0);
  EXPECT_EQ(dofs.num_velocity(), 375);
  EXPECT_EQ(dofs.num_pressure(), 384);
  // 5^3 - 3^3 boundary vertices, all components fixed
  EXPECT_EQ(dofs.constraints.count(), 3 * (125 - 27));
  EXPECT_TRUE(dofs.constraints.pressure_gauge);
  for (int v = 0; v < m.num_vertices(); ++v)
    if (dofs.constraints.is_fixed(dofs.velocity(v, 0))) {
      const Point u = bc.spec.dirichlet(m.vertices[v]);
      for (int c = 0; c < 3; ++c) EXPECT_EQ(dofs.constraints.value[dofs.velocity(v, c)], u[c]);
    }
}

TEST(DofMap, FreeSlipFixesNormalComponentOnly) {
  const BenchmarkCase bc = make_case("columns3d");
  const MeshLevel m = build_case_mesh(bc.spec, bc.cells_per_unit);
  const EntityTags tags = classify_entities(m, bc.spec);
  const DofMap dofs = build_dof_map(m, tags, bc.spec, PressureSpace::P0);
  for (int v = 0; v < m.num_vertices(); ++v)
    for (int c = 0; c < 3; ++c) {
      const double x = m.vertices[v][c];
      EXPECT_EQ(dofs.constraints.is_fixed(dofs.velocity(v, c)), x == 0.0 || x == 1.0);
    }
  // interface and interior velocity DoFs partition the velocity space
  EXPECT_GT(dofs.num_interface(), 0);
  EXPECT_LT(dofs.num_interface(), dofs.num_velocity());
}

TEST(DofMap, TractionDisablesPressureGauge) {
  const BenchmarkCase bc = make_case("channel2d");
  const MeshLevel m = build_case_mesh(bc.spec, bc.cells_per_unit);
  const DofMap dofs = build_dof_map(m, classify_entities(m, bc.spec), bc.spec, PressureSpace::P0);
  EXPECT_FALSE(dofs.constraints.pressure_gauge);
}

TEST(Q1P0Constant, FiveThirds) {
  EXPECT_NEAR(verify_q1p0_constant(), 5.0 / 3.0, 1e-8);
  EXPECT_NEAR(verify_q1p0_constant(0.0, 2.0), 5.0 / 3.0, 1e-8);
}
