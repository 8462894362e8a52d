#include "vstokes/cases.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vstokes/error.hpp"

namespace vstokes {

namespace {

constexpr double kPi = std::numbers::pi;

bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

std::optional<BoundaryKind> all_dirichlet(const Point&, const Point&) { return BoundaryKind::Dirichlet; }
std::optional<BoundaryKind> all_freeslip(const Point&, const Point&) { return BoundaryKind::FreeSlip; }

Point layered_forcing(const Point& x, int) {
  return {0.0, 0.0, -std::cos(2.0 * kPi * x[0]) * std::cos(2.0 * kPi * x[1]) * std::sin(kPi * x[2])};
}

}  // namespace

BenchmarkCase case_couette3d() {
  BenchmarkCase bc;
  bc.name = "couette3d";
  bc.description = "Couette-type flow across a horizontal viscosity jump (1 : 1e-3), exact solution";
  DomainSpec& s = bc.spec;
  s.dim = 3;
  s.lo = {0.0, -0.5, 0.0};
  s.hi = {1.0, 0.5, 1.0};
  s.viscosity = {1.0, 1e-3};
  s.subdomain = [](const Point& x) { return x[1] < 0.0 ? 0 : 1; };
  s.boundary = all_dirichlet;
  const std::vector<double> mu = s.viscosity;
  s.forcing = [mu](const Point&, int sd) { return Point{3.0 * mu[sd], 0.0, 0.0}; };
  s.dirichlet = [](const Point& x) { return Point{0.5 * (1.0 - x[0] * x[0]), x[0] * x[1], 0.0}; };
  ExactSolution ex;
  ex.velocity = s.dirichlet;
  ex.gradient = [](const Point& x) { return Mat(3, {-x[0], 0.0, 0.0, x[1], x[0], 0.0, 0.0, 0.0, 0.0}); };
  ex.pressure = [mu](const Point& x, int sd) { return 2.0 * x[0] * mu[sd] - 0.5 * (mu[0] + mu[1]); };
  bc.exact = ex;
  bc.cells_per_unit = 4;
  bc.default_min_level = 0;
  bc.default_max_level = 3;
  return bc;
}

BenchmarkCase case_layers3d() {
  BenchmarkCase bc;
  bc.name = "layers3d";
  bc.description = "four horizontal layers, viscosity 10^i, free slip on the whole boundary";
  DomainSpec& s = bc.spec;
  s.dim = 3;
  s.lo = {0.0, 0.0, 0.0};
  s.hi = {1.0, 1.0, 1.0};
  s.viscosity = {1.0, 10.0, 100.0, 1000.0};
  s.subdomain = [](const Point& x) { return std::clamp(static_cast<int>(std::floor(4.0 * x[2])), 0, 3); };
  s.boundary = all_freeslip;
  s.forcing = layered_forcing;
  s.dirichlet = [](const Point&) { return Point{0.0, 0.0, 0.0}; };
  bc.cells_per_unit = 4;
  bc.default_min_level = 0;
  bc.default_max_level = 3;
  return bc;
}

BenchmarkCase case_columns3d() {
  BenchmarkCase bc;
  bc.name = "columns3d";
  bc.description = "two vertical high-viscosity columns (ratio 10), free slip on the whole boundary";
  DomainSpec& s = bc.spec;
  s.dim = 3;
  s.lo = {0.0, 0.0, 0.0};
  s.hi = {1.0, 1.0, 1.0};
  s.viscosity = {1.0, 10.0};
  s.subdomain = [](const Point& x) {
    const bool a = x[0] < 0.25 && x[1] < 0.25;
    const bool b = x[0] > 0.75 && x[1] > 0.75;
    return a || b ? 1 : 0;
  };
  s.boundary = all_freeslip;
  s.forcing = layered_forcing;
  s.dirichlet = [](const Point&) { return Point{0.0, 0.0, 0.0}; };
  bc.cells_per_unit = 4;
  bc.default_min_level = 0;
  bc.default_max_level = 3;
  return bc;
}

BenchmarkCase case_channel2d() {
  BenchmarkCase bc;
  bc.name = "channel2d";
  bc.description = "2D channel, parabolic inflow, no-slip walls, traction-free outflow at x = 5";
  DomainSpec& s = bc.spec;
  s.dim = 2;
  s.lo = {0.0, -1.0, 0.0};
  s.hi = {5.0, 1.0, 0.0};
  s.viscosity = {1.0};
  s.subdomain = [](const Point&) { return 0; };
  s.boundary = [](const Point&, const Point& n) -> std::optional<BoundaryKind> {
    if (n[0] > 0.5) return BoundaryKind::Traction;
    return BoundaryKind::Dirichlet;
  };
  s.forcing = [](const Point&, int) { return Point{0.0, 0.0, 0.0}; };
  s.dirichlet = [](const Point& x) {
    if (near(x[0], 0.0)) return Point{1.0 - x[1] * x[1], 0.0, 0.0};
    return Point{0.0, 0.0, 0.0};
  };
  bc.cells_per_unit = 10;
  bc.default_min_level = 0;
  bc.default_max_level = 3;
  return bc;
}

BenchmarkCase case_poiseuille2d() {
  BenchmarkCase bc = case_channel2d();
  bc.name = "poiseuille2d";
  bc.description = "2D channel with the Poiseuille profile imposed on the whole boundary, exact solution";
  bc.spec.boundary = all_dirichlet;
  bc.spec.dirichlet = [](const Point& x) { return Point{1.0 - x[1] * x[1], 0.0, 0.0}; };
  ExactSolution ex;
  ex.velocity = bc.spec.dirichlet;
  ex.gradient = [](const Point& x) { return Mat(2, {0.0, -2.0 * x[1], 0.0, 0.0}); };
  ex.pressure = [](const Point& x, int) { return 5.0 - 2.0 * x[0]; };
  bc.exact = ex;
  bc.default_max_level = 2;
  return bc;
}

std::vector<std::string> case_names() { return {"couette3d", "layers3d", "columns3d", "channel2d", "poiseuille2d"}; }

BenchmarkCase make_case(const std::string& name) {
  if (name == "couette3d") return case_couette3d();
  if (name == "layers3d") return case_layers3d();
  if (name == "columns3d") return case_columns3d();
  if (name == "channel2d") return case_channel2d();
  if (name == "poiseuille2d") return case_poiseuille2d();
  std::string known;
  for (const auto& n : case_names()) known += (known.empty() ? "" : ", ") + n;
  throw InvalidArgument("unknown case '" + name + "' (known: " + known + ")");
}

ExactCheck check_exact_solution(const BenchmarkCase& bc) {
  if (!bc.exact) throw InvalidArgument("case '" + bc.name + "' has no exact solution");
  const ExactSolution& ex = *bc.exact;
  const DomainSpec& s = bc.spec;
  const int d = s.dim;
  const MeshLevel mesh = build_case_mesh(s, bc.cells_per_unit);
  const EntityTags tags = classify_entities(mesh, s);
  ExactCheck out;
  const double h = 1e-5;

  auto stress = [&](const Point& x, int sd) {
    const Mat G = ex.gradient(x);
    Mat S = 2.0 * s.viscosity[sd] * sym(G);
    const double p = ex.pressure(x, sd);
    for (int i = 0; i < d; ++i) S(i, i) -= p;
    return S;
  };

  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Point x = mesh.cell_centroid(c);
    const int sd = mesh.cell_subdomain[c];
    out.divergence = std::max(out.divergence, std::abs(ex.gradient(x).trace()));
    // -div sigma - f by central differences.
    const Point f = s.forcing(x, sd);
    for (int i = 0; i < d; ++i) {
      double divs = 0.0;
      for (int j = 0; j < d; ++j) {
        Point xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        divs += (stress(xp, sd)(i, j) - stress(xm, sd)(i, j)) / (2.0 * h);
      }
      out.momentum = std::max(out.momentum, std::abs(-divs - f[i]));
    }
  }
  for (int fct : tags.interface_facets) {
    const Facet& F = mesh.facets[fct];
    const Point x = mesh.facet_centroid(fct);
    const Point n = mesh.facet_normal(fct);
    const Mat S0 = stress(x, mesh.cell_subdomain[F.cells[0]]);
    const Mat S1 = stress(x, mesh.cell_subdomain[F.cells[1]]);
    const Vec3 t = (S0 - S1).apply(n);
    out.interface_stress = std::max(out.interface_stress, norm(t));
  }
  return out;
}

}  // namespace vstokes
