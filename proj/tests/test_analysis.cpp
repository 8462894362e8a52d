#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "vstokes/analysis.hpp"
#include "vstokes/cases.hpp"
#include "vstokes/error.hpp"
#include "vstokes/mg.hpp"

using namespace vstokes;

namespace {

struct Level {
  MeshLevel mesh;
  SaddleSystem sys;
};

Level make_level(const BenchmarkCase& bc, int level, FormKind form = FormKind::Tr, Stabilization stab = {}) {
  MeshLevel m = build_hierarchy(bc.spec, bc.cells_per_unit, level + 1).finest();
  const EntityTags tags = classify_entities(m, bc.spec);
  SaddleSystem s = assemble_system(m, tags, bc.spec, form, stab, level);
  return {std::move(m), std::move(s)};
}

// Nodal velocity interpolant and centroid pressure of the exact solution.
void interpolate(const Level& l, const ExactSolution& ex, Vector& u, Vector& p) {
  const int d = l.mesh.dim;
  u.assign(l.sys.num_velocity(), 0.0);
  p.assign(l.sys.num_pressure(), 0.0);
  for (int v = 0; v < l.mesh.num_vertices(); ++v) {
    const Point x = ex.velocity(l.mesh.vertices[v]);
    for (int c = 0; c < d; ++c) u[l.sys.dofs.velocity(v, c)] = x[c];
  }
  for (int c = 0; c < l.mesh.num_cells(); ++c) p[c] = ex.pressure(l.mesh.cell_centroid(c), l.mesh.cell_subdomain[c]);
}

}  // namespace

TEST(ObservedRate, Log2Ratio) {
  EXPECT_DOUBLE_EQ(observed_rate(4e-3, 1e-3), 2.0);
  EXPECT_TRUE(std::isnan(observed_rate(1.0, 0.0)));
  EXPECT_TRUE(std::isnan(observed_rate(0.0, 1.0)));
}

TEST(ConvergenceTable, RatesAndCsv) {
  ConvergenceTable t;
  t.add(0, 10, {4e-3, 1e-1, 0.0});
  t.add(1, 80, {1e-3, 5e-2, 0.0});
  ASSERT_EQ(t.rows().size(), 2u);
  EXPECT_TRUE(std::isnan(t.rows()[0].rate_L2));
  EXPECT_DOUBLE_EQ(t.rows()[1].rate_L2, 2.0);
  EXPECT_DOUBLE_EQ(t.rows()[1].rate_V, 1.0);
  std::ostringstream os;
  t.write_csv(os);
  EXPECT_EQ(os.str(),
            "level,e_L2,rate_L2,e_V,rate_V,e_Q,rate_Q\n"
            "0,4.000000e-03,,1.000000e-01,,0.000000e+00,\n"
            "1,1.000000e-03,2.0000,5.000000e-02,1.0000,0.000000e+00,\n");
  EXPECT_EQ(os.str().find("nan"), std::string::npos);
}

TEST(ErrorNorms, InterpolantConvergesQuadratically) {
  const BenchmarkCase bc = make_case("couette3d");
  std::vector<double> e;
  for (int l = 0; l <= 2; ++l) {
    const Level lv = make_level(bc, l);
    Vector u, p;
    interpolate(lv, *bc.exact, u, p);
    e.push_back(error_norms(lv.mesh, lv.sys, u, p, *bc.exact).e_L2);
  }
  EXPECT_NEAR(observed_rate(e[0], e[1]), 2.0, 0.1);
  EXPECT_NEAR(observed_rate(e[1], e[2]), 2.0, 0.1);
}

TEST(ErrorNorms, PressureGaugeInvariance) {
  const BenchmarkCase bc = make_case("couette3d");
  const Level lv = make_level(bc, 0);
  Vector u, p;
  interpolate(lv, *bc.exact, u, p);
  const ErrorTriple a = error_norms(lv.mesh, lv.sys, u, p, *bc.exact);
  for (double& q : p) q += 7.5;
  const ErrorTriple b = error_norms(lv.mesh, lv.sys, u, p, *bc.exact);
  EXPECT_NEAR(a.e_Q, b.e_Q, 1e-12);
  EXPECT_EQ(a.e_L2, b.e_L2);
}

TEST(ErrorNorms, ExactLinearFieldHasNoVelocityError) {
  const BenchmarkCase bc = make_case("poiseuille2d");
  const Level lv = make_level(bc, 0);
  ExactSolution lin;
  lin.velocity = [](const Point& x) { return Point{2.0 * x[0] - x[1], x[1] + 1.0, 0.0}; };
  lin.gradient = [](const Point&) { return Mat(2, {2.0, -1.0, 0.0, 1.0}); };
  lin.pressure = [](const Point&, int) { return 0.0; };
  Vector u, p;
  interpolate(lv, lin, u, p);
  const ErrorTriple e = error_norms(lv.mesh, lv.sys, u, p, lin);
  EXPECT_LE(e.e_L2, 1e-13);
  EXPECT_LE(e.e_V, 1e-12);
  EXPECT_LE(e.e_Q, 1e-14);
}

TEST(CompareForms, IdenticalAndMismatched) {
  const BenchmarkCase bc = make_case("columns3d");
  const Level lv = make_level(bc, 0);
  Vector u, p;
  direct_solve(lv.sys, u, p);
  const NormOperators norms = build_norm_operators(lv.mesh, lv.sys);
  const DiscreteSolution a{FormKind::Tr, 0, u, p};
  const ErrorTriple z = compare_forms(norms, a, a);
  EXPECT_EQ(z.e_L2, 0.0);
  EXPECT_EQ(z.e_V, 0.0);
  EXPECT_EQ(z.e_Q, 0.0);
  DiscreteSolution b = a;
  b.u.pop_back();
  EXPECT_THROW(compare_forms(norms, a, b), InvalidArgument);
  DiscreteSolution c = a;
  c.level = 1;
  EXPECT_THROW(compare_forms(norms, a, c), InvalidArgument);
  // shifting the pressure by a constant does not change the comparison
  DiscreteSolution d = a;
  for (double& q : d.p) q += 3.0;
  EXPECT_LE(compare_forms(norms, d, a).e_Q, 1e-10);
  const ErrorTriple n = discrete_norms(norms, u, p);
  EXPECT_GT(n.e_L2, 0.0);
  EXPECT_GT(n.e_V, 0.0);
}

TEST(CompareForms, GradIsFarFromSymOnLayers) {
  const BenchmarkCase bc = make_case("layers3d");
  const Level g = make_level(bc, 1, FormKind::Grad), s = make_level(bc, 1, FormKind::Sym);
  Vector ug, pg, us, ps;
  direct_solve(g.sys, ug, pg);
  direct_solve(s.sys, us, ps);
  const NormOperators norms = build_norm_operators(s.mesh, s.sys);
  const ErrorTriple e = compare_forms(norms, {FormKind::Grad, 1, ug, pg}, {FormKind::Sym, 1, us, ps});
  EXPECT_GT(e.e_V, 0.3);
}

TEST(FluxCorrect, UniformPressureGivesRawFlux) {
  const BenchmarkCase bc = make_case("columns3d");
  const Level lv = make_level(bc, 0);
  Vector u(lv.sys.num_velocity()), p0(lv.sys.num_pressure(), 0.0), p1(lv.sys.num_pressure(), 2.0);
  for (size_t i = 0; i < u.size(); ++i) u[i] = std::sin(0.37 * i);
  const FluxField a = flux_correct(lv.mesh, lv.sys, u, p0), b = flux_correct(lv.mesh, lv.sys, u, p1);
  EXPECT_EQ(a.flux, b.flux);
}

TEST(FluxCorrect, AntisymmetricAcrossFacets) {
  const BenchmarkCase bc = make_case("columns3d");
  const Level lv = make_level(bc, 0);
  Vector u(lv.sys.num_velocity()), p(lv.sys.num_pressure());
  for (size_t i = 0; i < u.size(); ++i) u[i] = std::cos(0.11 * i);
  for (size_t i = 0; i < p.size(); ++i) p[i] = std::sin(0.7 * i);
  const FluxField fl = flux_correct(lv.mesh, lv.sys, u, p);
  const MeshLevel& m = lv.mesh;
  std::vector<double> side_sum(m.num_facets(), 0.0);
  for (int c = 0; c < m.num_cells(); ++c)
    for (int k = 0; k <= m.dim; ++k) side_sum[m.cell_facets[c][k]] += fl.at(c, k);
  for (int f = 0; f < m.num_facets(); ++f)
    if (m.facets[f].kind == FacetKind::Interior) EXPECT_NEAR(side_sum[f], 0.0, 1e-15);
}

TEST(FluxCorrect, LocalMassConservationCouette) {
  const BenchmarkCase bc = make_case("couette3d");
  const Level lv = make_level(bc, 1);
  Vector u, p;
  direct_solve(lv.sys, u, p);
  const auto res = flux_mass_residuals(lv.mesh, flux_correct(lv.mesh, lv.sys, u, p));
  double mx = 0.0;
  for (double r : res) mx = std::max(mx, std::abs(r));
  EXPECT_LE(mx, 1e-11);
}

TEST(FluxCorrect, RejectsContinuousPressure) {
  const BenchmarkCase bc = make_case("couette3d");
  Stabilization bp;
  bp.type = StabType::BrezziPitkaranta;
  const Level lv = make_level(bc, 0, FormKind::Tr, bp);
  const Vector u(lv.sys.num_velocity(), 0.0), p(lv.sys.num_pressure(), 0.0);
  EXPECT_THROW(flux_correct(lv.mesh, lv.sys, u, p), InvalidArgument);
}

TEST(BoundaryTrace, IdenticalIsZero) {
  const BenchmarkCase bc = make_case("channel2d");
  const Level lv = make_level(bc, 0);
  Vector u(lv.sys.num_velocity(), 1.0), w = u;
  EXPECT_EQ(boundary_trace_difference(lv.mesh, lv.sys.dofs, u, w, 0, 5.0), 0.0);
  for (double& x : w) x = 2.0;
  EXPECT_NEAR(boundary_trace_difference(lv.mesh, lv.sys.dofs, u, w, 0, 5.0), 0.5, 1e-14);
}
