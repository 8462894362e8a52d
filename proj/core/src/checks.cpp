#include "vstokes/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vstokes/operators.hpp"

namespace vstokes {

DecompositionResiduals random_decomposition_residuals(int dim, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DecompositionResiduals worst{0.0, 0.0};
  for (int s = 0; s < samples; ++s) {
    Mat t(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) t(i, j) = dist(rng);
    const DecompositionResiduals r = decomposition_residuals(t);
    worst.r1 = std::max(worst.r1, r.r1);
    worst.r2 = std::max(worst.r2, r.r2);
  }
  return worst;
}

namespace {

double max_abs_diff(const CsrMatrix& a, const CsrMatrix& b, const std::vector<char>* fixed) {
  double m = 0.0;
  auto scan = [&](const CsrMatrix& x, const CsrMatrix& y) {
    for (int i = 0; i < x.rows; ++i)
      for (int k = x.row_ptr[i]; k < x.row_ptr[i + 1]; ++k) {
        const int j = x.col_idx[k];
        if (fixed && ((*fixed)[i] || (*fixed)[j])) continue;
        m = std::max(m, std::abs(x.values[k] - y.at(i, j)));
      }
  };
  scan(a, b);
  scan(b, a);
  return m;
}

CsrMatrix combine(const CsrMatrix& a, double sa, const CsrMatrix& b, double sb) {
  std::vector<Triplet> t;
  for (int i = 0; i < a.rows; ++i)
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) t.push_back({i, a.col_idx[k], sa * a.values[k]});
  for (int i = 0; i < b.rows; ++i)
    for (int k = b.row_ptr[i]; k < b.row_ptr[i + 1]; ++k) t.push_back({i, b.col_idx[k], sb * b.values[k]});
  return CsrMatrix::from_triplets(a.rows, a.cols, std::move(t));
}

}  // namespace

OperatorIdentities check_operator_identities(const BenchmarkCase& bc, int level, unsigned seed, int samples) {
  const MeshHierarchy mh = build_hierarchy(bc.spec, bc.cells_per_unit, level + 1);
  const MeshLevel& mesh = mh.levels[level];
  const EntityTags tags = classify_entities(mesh, bc.spec);
  const SaddleSystem tr = assemble_system(mesh, tags, bc.spec, FormKind::Tr, Stabilization{}, level);
  const auto& mu = bc.spec.viscosity;
  const int d = mesh.dim;
  const CsrMatrix sym_A = assemble_viscous(mesh, tr.dofs, FormKind::Sym, mu);
  const CsrMatrix dev_A = assemble_viscous(mesh, tr.dofs, FormKind::Dev, mu);
  const CsrMatrix grad_A = assemble_viscous(mesh, tr.dofs, FormKind::Grad, mu);
  const CsrMatrix D = assemble_divdiv(mesh, tr.dofs, mu);
  const CsrMatrix S = assemble_surface_form(mesh, tags, tr.dofs, mu);
  const auto& fixed = tr.dofs.constraints.fixed;

  double amax = 0.0;
  for (double v : tr.A.values) amax = std::max(amax, std::abs(v));

  OperatorIdentities out;
  out.tr_vs_sym_minus_div = max_abs_diff(tr.A, combine(sym_A, 1.0, D, -1.0), nullptr) / amax;
  out.tr_vs_dev = max_abs_diff(tr.A, combine(dev_A, 1.0, D, -(1.0 - 2.0 / d)), nullptr) / amax;
  out.surface_vs_tr = max_abs_diff(tr.A, combine(grad_A, 1.0, S, 1.0), &fixed) / amax;
  out.tr_symmetry = max_abs_diff(tr.A, tr.A.transpose(), nullptr) / amax;

  double interior = 0.0;
  for (int i = 0; i < tr.A.rows; ++i) {
    if (fixed[i] || tr.dofs.interface_dof[i]) continue;
    for (int k = tr.A.row_ptr[i]; k < tr.A.row_ptr[i + 1]; ++k)
      interior = std::max(interior, std::abs(tr.A.values[k] - grad_A.at(i, tr.A.col_idx[k])));
    for (int k = grad_A.row_ptr[i]; k < grad_A.row_ptr[i + 1]; ++k)
      interior = std::max(interior, std::abs(grad_A.values[k] - tr.A.at(i, grad_A.col_idx[k])));
  }
  out.interior_rows = interior / amax;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const int n = tr.num_velocity();
  Vector v(n), y1(n), y2(n);
  double parity = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) v[i] = fixed[i] ? 0.0 : dist(rng);
    tr.A.multiply(v, y1);
    tr.op->apply(v, y2);
    double diff = 0.0;
    for (int i = 0; i < n; ++i)
      if (!fixed[i]) diff += (y1[i] - y2[i]) * (y1[i] - y2[i]);
    parity = std::max(parity, std::sqrt(diff) / norm2(v));
  }
  out.split_parity = parity / amax;

  const int nv = mesh.num_vertices();
  Vector x(n), ax(n);
  for (int c = 0; c < d; ++c)
    for (int vtx = 0; vtx < nv; ++vtx) x[c * nv + vtx] = mesh.vertices[vtx][c];
  tr.A.multiply(x, ax);
  double expected = 0.0, weight = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    expected -= d * (d - 2.0) * tr.cell_mu[c] * mesh.cell_volume(c);
    weight += d * d * tr.cell_mu[c] * mesh.cell_volume(c);
  }
  // In 2D the identity value is zero; scale by the size of the div-div term.
  const double got = dot(x, ax);
  out.x_identity = std::abs(got - expected) / (expected != 0.0 ? std::abs(expected) : weight);

  if (auto split = std::dynamic_pointer_cast<const SplitViscousOperator>(tr.op)) out.correction_nnz = split->correction().nnz();
  out.tr_nnz = tr.op->nnz();
  return out;
}

}  // namespace vstokes
