#include "vstokes/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "vstokes/error.hpp"
#include "vstokes/quadrature.hpp"

namespace vstokes {

namespace {

constexpr int kQuadPoints = 4;

double frob2(const Mat& m) {
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) s += m(i, j) * m(i, j);
  return s;
}

struct FieldSums {
  double l2 = 0.0, v = 0.0, q = 0.0;
};

/// Integrates |u - u_h|^2, 2 mu |sym grad (u - u_h)|^2 and the weighted
/// pressure error after removing its weighted mean. Null exact fields
/// count as zero.
FieldSums integrate_errors(const MeshLevel& mesh, const SaddleSystem& sys, std::span<const double> u,
                           std::span<const double> p, const ExactSolution& exact) {
  const int d = mesh.dim;
  const int nb = d + 1;
  const DofMap& dofs = sys.dofs;
  const SimplexRule rule = simplex_rule(d, kQuadPoints);
  FieldSums s;
  double pw_sum = 0.0, w_sum = 0.0;
  // First pass: pressure error mean.
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double V = mesh.cell_volume(c);
    const double mu = sys.cell_mu[c];
    const int sd = mesh.cell_subdomain[c];
    const auto& cv = mesh.cells[c];
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      Point x{0.0, 0.0, 0.0};
      double ph = 0.0;
      for (int a = 0; a < nb; ++a) {
        x = x + rule.bary[q][a] * mesh.vertices[cv[a]];
        if (dofs.pressure == PressureSpace::P1 && !p.empty()) ph += rule.bary[q][a] * p[cv[a]];
      }
      if (dofs.pressure == PressureSpace::P0 && !p.empty()) ph = p[c];
      const double e = (exact.pressure ? exact.pressure(x, sd) : 0.0) - ph;
      const double w = rule.weights[q] * V / (2.0 * mu);
      pw_sum += w * e;
      w_sum += w;
    }
  }
  const double mean = w_sum > 0.0 ? pw_sum / w_sum : 0.0;

  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry geo = cell_geometry(mesh, c);
    const double V = geo.volume;
    const double mu = sys.cell_mu[c];
    const int sd = mesh.cell_subdomain[c];
    const auto& cv = mesh.cells[c];
    Mat Gh(d);
    if (!u.empty())
      for (int comp = 0; comp < d; ++comp)
        for (int a = 0; a < nb; ++a) {
          const double ua = u[dofs.velocity(cv[a], comp)];
          for (int k = 0; k < d; ++k) Gh(comp, k) += ua * geo.grad[a][k];
        }
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      Point x{0.0, 0.0, 0.0};
      Point uh{0.0, 0.0, 0.0};
      double ph = 0.0;
      for (int a = 0; a < nb; ++a) {
        const double la = rule.bary[q][a];
        x = x + la * mesh.vertices[cv[a]];
        if (!u.empty())
          for (int comp = 0; comp < d; ++comp) uh[comp] += la * u[dofs.velocity(cv[a], comp)];
        if (dofs.pressure == PressureSpace::P1 && !p.empty()) ph += la * p[cv[a]];
      }
      if (dofs.pressure == PressureSpace::P0 && !p.empty()) ph = p[c];
      const double w = rule.weights[q] * V;
      const Point ue = exact.velocity ? exact.velocity(x) : Point{0.0, 0.0, 0.0};
      const Point du = ue - uh;
      s.l2 += w * dot(du, du);
      Mat G = exact.gradient ? exact.gradient(x) : Mat(d);
      G -= Gh;
      s.v += w * 2.0 * mu * frob2(sym(G));
      const double e = (exact.pressure ? exact.pressure(x, sd) : 0.0) - ph - mean;
      s.q += w * e * e / (2.0 * mu);
    }
  }
  return s;
}

void check_sizes(const SaddleSystem& sys, std::span<const double> u, std::span<const double> p) {
  if (static_cast<int>(u.size()) != sys.num_velocity() || static_cast<int>(p.size()) != sys.num_pressure())
    throw InvalidArgument("solution vectors do not match the discretization");
}

}  // namespace

ErrorTriple error_norms(const MeshLevel& mesh, const SaddleSystem& sys, std::span<const double> u,
                        std::span<const double> p, const ExactSolution& exact) {
  check_sizes(sys, u, p);
  const FieldSums s = integrate_errors(mesh, sys, u, p, exact);
  return {std::sqrt(s.l2), std::sqrt(s.v), std::sqrt(s.q)};
}

ErrorTriple exact_norms(const MeshLevel& mesh, const SaddleSystem& sys, const ExactSolution& exact) {
  const FieldSums s = integrate_errors(mesh, sys, {}, {}, exact);
  return {std::sqrt(s.l2), std::sqrt(s.v), std::sqrt(s.q)};
}

NormOperators build_norm_operators(const MeshLevel& mesh, const SaddleSystem& sys) {
  NormOperators n;
  n.dim = mesh.dim;
  n.mass = assemble_scalar_mass(mesh);
  n.a_sym = sys.form == FormKind::Sym ? sys.A : assemble_viscous(mesh, sys.dofs, FormKind::Sym, sys.viscosity);
  n.q_weight = sys.gauge_weight;
  return n;
}

ErrorTriple discrete_norms(const NormOperators& norms, std::span<const double> u, std::span<const double> p) {
  const int nv = norms.mass.rows;
  if (static_cast<int>(u.size()) != norms.dim * nv || p.size() != norms.q_weight.size())
    throw InvalidArgument("solution vectors do not match the norm operators");
  ErrorTriple e;
  Vector t(nv);
  double l2 = 0.0;
  for (int c = 0; c < norms.dim; ++c) {
    norms.mass.multiply(u.subspan(c * nv, nv), t);
    l2 += dot(u.subspan(c * nv, nv), t);
  }
  Vector au(u.size());
  norms.a_sym.multiply(u, au);
  const double v = dot(u, au);
  double sw = 0.0, swp = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    sw += norms.q_weight[i];
    swp += norms.q_weight[i] * p[i];
  }
  const double mean = sw > 0.0 ? swp / sw : 0.0;
  double q = 0.0;
  for (size_t i = 0; i < p.size(); ++i) q += norms.q_weight[i] * (p[i] - mean) * (p[i] - mean);
  e.e_L2 = std::sqrt(std::max(0.0, l2));
  e.e_V = std::sqrt(std::max(0.0, v));
  e.e_Q = std::sqrt(std::max(0.0, q));
  return e;
}

ErrorTriple compare_forms(const NormOperators& norms, const DiscreteSolution& a, const DiscreteSolution& b) {
  if (a.u.size() != b.u.size() || a.p.size() != b.p.size() || a.level != b.level)
    throw InvalidArgument("compared solutions live in different discrete spaces");
  Vector du(a.u.size()), dp(a.p.size());
  for (size_t i = 0; i < du.size(); ++i) du[i] = a.u[i] - b.u[i];
  for (size_t i = 0; i < dp.size(); ++i) dp[i] = a.p[i] - b.p[i];
  const ErrorTriple diff = discrete_norms(norms, du, dp);
  const ErrorTriple ref = discrete_norms(norms, b.u, b.p);
  auto rel = [](double x, double r) { return r > 0.0 ? x / r : x; };
  return {rel(diff.e_L2, ref.e_L2), rel(diff.e_V, ref.e_V), rel(diff.e_Q, ref.e_Q)};
}

double observed_rate(double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0) || !std::isfinite(coarse) || !std::isfinite(fine))
    return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

void ConvergenceTable::add(int level, long long dofs, const ErrorTriple& e) {
  ConvergenceRow r;
  r.level = level;
  r.dofs = dofs;
  r.error = e;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.rate_L2 = r.rate_V = r.rate_Q = nan;
  if (!rows_.empty()) {
    const ErrorTriple& prev = rows_.back().error;
    r.rate_L2 = observed_rate(prev.e_L2, e.e_L2);
    r.rate_V = observed_rate(prev.e_V, e.e_V);
    r.rate_Q = observed_rate(prev.e_Q, e.e_Q);
  }
  rows_.push_back(r);
}

void ConvergenceTable::write_csv(std::ostream& os) const {
  auto num = [](double v, const char* fmt) {
    if (!std::isfinite(v)) return std::string();
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return std::string(buf);
  };
  os << "level,e_L2,rate_L2,e_V,rate_V,e_Q,rate_Q\n";
  for (const auto& r : rows_) {
    os << r.level << ',' << num(r.error.e_L2, "%.6e") << ',' << num(r.rate_L2, "%.4f") << ','
       << num(r.error.e_V, "%.6e") << ',' << num(r.rate_V, "%.4f") << ',' << num(r.error.e_Q, "%.6e") << ','
       << num(r.rate_Q, "%.4f") << '\n';
  }
}

FluxField flux_correct(const MeshLevel& mesh, const SaddleSystem& sys, std::span<const double> u,
                       std::span<const double> p) {
  if (sys.dofs.pressure != PressureSpace::P0) throw InvalidArgument("flux correction requires P0 pressure");
  check_sizes(sys, u, p);
  const int d = mesh.dim;
  const int nb = d + 1;
  const double gamma = sys.stab.type == StabType::FacetJump ? sys.stab.gamma : 0.0;
  FluxField out;
  out.dim = d;
  out.flux.assign(static_cast<size_t>(mesh.num_cells()) * nb, 0.0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (int k = 0; k < nb; ++k) {
      const int f = mesh.cell_facets[c][k];
      const Facet& F = mesh.facets[f];
      Point n = mesh.facet_normal(f);
      if (F.cells[0] != c) n = -1.0 * n;
      const double area = mesh.facet_area(f);
      Point um{0.0, 0.0, 0.0};
      for (int j = 0; j < d; ++j)
        for (int comp = 0; comp < d; ++comp) um[comp] += u[sys.dofs.velocity(F.vertices[j], comp)] / d;
      double j_int = area * dot(um, n);
      if (F.kind == FacetKind::Interior && gamma > 0.0) {
        const int other = F.cells[0] == c ? F.cells[1] : F.cells[0];
        const double v1 = mesh.cell_volume(c), v2 = mesh.cell_volume(other);
        j_int += gamma / (2.0 * sys.cell_mu[c]) * v1 * v2 / (v1 + v2) * (p[c] - p[other]);
      }
      out.flux[c * nb + k] = j_int;
    }
  }
  return out;
}

std::vector<double> flux_mass_residuals(const MeshLevel& mesh, const FluxField& flux) {
  const int nb = mesh.dim + 1;
  std::vector<double> r(mesh.num_cells(), 0.0);
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int k = 0; k < nb; ++k) r[c] += flux.at(c, k);
  return r;
}

double boundary_trace_difference(const MeshLevel& mesh, const DofMap& dofs, std::span<const double> ua,
                                 std::span<const double> ub, int axis, double value) {
  const int d = mesh.dim;
  double diff = 0.0, ref = 0.0;
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& F = mesh.facets[f];
    if (F.kind != FacetKind::Boundary) continue;
    bool on = true;
    for (int j = 0; j < d; ++j) on = on && std::abs(mesh.vertices[F.vertices[j]][axis] - value) < 1e-12;
    if (!on) continue;
    const double scale = mesh.facet_area(f) / (d * (d + 1.0));
    for (int comp = 0; comp < d; ++comp) {
      double se = 0.0, se2 = 0.0, sr = 0.0, sr2 = 0.0;
      for (int j = 0; j < d; ++j) {
        const int i = dofs.velocity(F.vertices[j], comp);
        const double e = ua[i] - ub[i];
        se += e;
        se2 += e * e;
        sr += ub[i];
        sr2 += ub[i] * ub[i];
      }
      diff += scale * (se2 + se * se);
      ref += scale * (sr2 + sr * sr);
    }
  }
  if (ref == 0.0) return std::sqrt(diff);
  return std::sqrt(diff / ref);
}

}  // namespace vstokes
