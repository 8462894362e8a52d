#include "vstokes/mg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <Eigen/SparseLU>
#ifdef VSTOKES_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "vstokes/error.hpp"

namespace vstokes {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void zero_fixed(std::span<double> x, const std::vector<char>& fixed) {
  for (size_t i = 0; i < x.size(); ++i)
    if (fixed[i]) x[i] = 0.0;
}

}  // namespace

std::string to_string(CoarseKind kind) {
  return kind == CoarseKind::MinresSymCorrected ? "MINRES_SYM_CORRECTED" : "DIRECT_TR";
}

CoarseKind parse_coarse(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  if (s == "MINRES_SYM_CORRECTED" || s == "MINRES") return CoarseKind::MinresSymCorrected;
  if (s == "DIRECT_TR" || s == "DIRECT") return CoarseKind::DirectTr;
  throw InvalidArgument("unknown coarse solver '" + name + "'");
}

void SolverConfig::validate() const {
  if (pre_smooth < 1 || post_smooth < 1) throw InvalidArgument("smoothing steps must be at least 1");
  if (!(omega > 0.0 && omega <= 1.0)) throw InvalidArgument("omega must lie in (0, 1]");
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (!(coarse_tol > 0.0) || !(inner_cg_tol > 0.0)) throw InvalidArgument("coarse tolerances must be positive");
  if (max_cycles < 1) throw InvalidArgument("max cycles must be at least 1");
  if (rate_window < 1) throw InvalidArgument("rate window must be at least 1");
}

void write_report_csv(std::ostream& os, const SolveReport& report) {
  os << "cycle,residual,reduction_factor\n";
  for (size_t k = 0; k < report.residuals.size(); ++k) {
    os << k << ',' << report.residuals[k] << ',';
    if (k > 0 && report.residuals[k - 1] > 0.0) os << report.residuals[k] / report.residuals[k - 1];
    os << '\n';
  }
  os << "rho,cycles,wall_time_s\n";
  os << report.rate << ',' << report.cycles << ',' << report.wall_time << '\n';
}

double estimate_rate(std::span<const double> residuals, int window) {
  if (residuals.size() < 5) throw InvalidArgument("rate estimate needs at least 5 residuals");
  const int n = static_cast<int>(residuals.size());
  const int k = std::min(window, n - 1);
  double log_sum = 0.0;
  int used = 0;
  for (int i = n - k; i < n; ++i) {
    if (!(residuals[i - 1] > 0.0)) continue;
    if (residuals[i] <= 0.0) return 0.0;
    log_sum += std::log(residuals[i] / residuals[i - 1]);
    ++used;
  }
  if (used == 0) return 0.0;
  return std::exp(log_sum / used);
}

// ---------------------------------------------------------------------------
// Transfers

void TransferOps::prolong_velocity(std::span<const double> coarse, std::span<double> fine) const {
  const int nc = velocity.cols, nf = velocity.rows;
  for (int c = 0; c < dim; ++c) velocity.multiply(coarse.subspan(c * nc, nc), fine.subspan(c * nf, nf));
}

void TransferOps::restrict_velocity(std::span<const double> fine, std::span<double> coarse) const {
  const int nc = velocity.cols, nf = velocity.rows;
  for (int c = 0; c < dim; ++c) velocity_t.multiply(fine.subspan(c * nf, nf), coarse.subspan(c * nc, nc));
}

void TransferOps::prolong_pressure(std::span<const double> coarse, std::span<double> fine) const {
  pressure_p.multiply(coarse, fine);
}

void TransferOps::restrict_pressure(std::span<const double> fine, std::span<double> coarse) const {
  pressure_t.multiply(fine, coarse);
}

void TransferOps::restrict_pressure_values(std::span<const double> fine, std::span<double> coarse) const {
  if (pressure == PressureSpace::P1) {
    // Injection at the coarse vertices, which keep their indices.
    for (size_t i = 0; i < coarse.size(); ++i) coarse[i] = fine[i];
    return;
  }
  Vector weighted(fine.size());
  for (size_t i = 0; i < fine.size(); ++i) weighted[i] = fine_volume[i] * fine[i];
  pressure_t.multiply(weighted, coarse);
  for (size_t i = 0; i < coarse.size(); ++i) coarse[i] /= coarse_volume[i];
}

TransferOps build_transfer(const MeshLevel& coarse, const MeshLevel& fine, PressureSpace pressure) {
  if (static_cast<int>(fine.vertex_parents.size()) != fine.num_vertices() ||
      static_cast<int>(fine.parent_cell.size()) != fine.num_cells())
    throw InvalidArgument("fine level carries no parent links");
  TransferOps t;
  t.dim = fine.dim;
  t.pressure = pressure;
  std::vector<Triplet> trip;
  for (int v = 0; v < fine.num_vertices(); ++v) {
    const auto [a, b] = fine.vertex_parents[v];
    if (a == b) {
      trip.push_back({v, a, 1.0});
    } else {
      trip.push_back({v, a, 0.5});
      trip.push_back({v, b, 0.5});
    }
  }
  t.velocity = CsrMatrix::from_triplets(fine.num_vertices(), coarse.num_vertices(), trip);
  t.velocity_t = t.velocity.transpose();
  if (pressure == PressureSpace::P1) {
    t.pressure_p = t.velocity;
  } else {
    std::vector<Triplet> pt;
    for (int c = 0; c < fine.num_cells(); ++c) pt.push_back({c, fine.parent_cell[c], 1.0});
    t.pressure_p = CsrMatrix::from_triplets(fine.num_cells(), coarse.num_cells(), std::move(pt));
  }
  t.pressure_t = t.pressure_p.transpose();
  t.fine_volume.resize(fine.num_cells());
  t.coarse_volume.resize(coarse.num_cells());
  for (int c = 0; c < fine.num_cells(); ++c) t.fine_volume[c] = fine.cell_volume(c);
  for (int c = 0; c < coarse.num_cells(); ++c) t.coarse_volume[c] = coarse.cell_volume(c);
  return t;
}

SystemHierarchy build_system_hierarchy(const MeshHierarchy& meshes, const DomainSpec& spec, FormKind form,
                                       const Stabilization& stab) {
  SystemHierarchy h;
  for (int l = 0; l < meshes.num_levels(); ++l) {
    const MeshLevel& m = meshes.levels[l];
    const EntityTags tags = classify_entities(m, spec);
    h.levels.push_back(assemble_system(m, tags, spec, form, stab, l));
    if (l > 0) h.transfers.push_back(build_transfer(meshes.levels[l - 1], m, stab.pressure_space()));
  }
  const MeshLevel& m0 = meshes.levels[0];
  if (form == FormKind::Grad || form == FormKind::Sym) {
    h.coarse_spd = std::make_shared<SaddleSystem>(h.levels[0]);
  } else {
    h.coarse_spd = std::make_shared<SaddleSystem>(
        assemble_system(m0, classify_entities(m0, spec), spec, FormKind::Sym, stab, 0));
  }
  return h;
}

// ---------------------------------------------------------------------------
// Residuals and smoothing

void gauge_project(std::span<double> q, std::span<const double> weight) {
  double sw = 0.0, swq = 0.0;
  for (size_t i = 0; i < q.size(); ++i) {
    sw += weight[i];
    swq += weight[i] * q[i];
  }
  if (sw <= 0.0) return;
  const double mean = swq / sw;
  for (double& v : q) v -= mean;
}

void saddle_residual(const SaddleSystem& sys, std::span<const double> u, std::span<const double> p,
                     std::span<const double> f, std::span<const double> g, std::span<double> r1,
                     std::span<double> r2) {
  const int nu = sys.num_velocity();
  const int np = sys.num_pressure();
  sys.op->apply(u, r1);
  sys.Bt.multiply_add(1.0, p, r1);
  const auto& fixed = sys.constraints().fixed;
  for (int i = 0; i < nu; ++i) r1[i] = fixed[i] ? 0.0 : f[i] - r1[i];
  sys.B.multiply(u, r2);
  sys.C.multiply_add(-1.0, p, r2);
  for (int q = 0; q < np; ++q) r2[q] = g[q] - r2[q];
}

double residual_norm(const SaddleSystem& sys, std::span<const double> u, std::span<const double> p,
                     std::span<const double> f, std::span<const double> g) {
  Vector r1(sys.num_velocity()), r2(sys.num_pressure());
  saddle_residual(sys, u, p, f, g, r1, r2);
  return std::sqrt(dot(r1, r1) + dot(r2, r2));
}

void uzawa_smooth(const SaddleSystem& sys, std::span<double> u, std::span<double> p, std::span<const double> f,
                  std::span<const double> g, int steps, double omega) {
  const int nu = sys.num_velocity();
  const int np = sys.num_pressure();
  const auto& fixed = sys.constraints().fixed;
  const CsrMatrix& C = sys.C;
  Vector bu(nu), rp(np), delta(np);
  for (int s = 0; s < steps; ++s) {
    for (int i = 0; i < nu; ++i) bu[i] = f[i];
    sys.Bt.multiply_add(-1.0, p, bu);
    sys.op->gauss_seidel(u, bu, fixed, true);
    sys.op->gauss_seidel(u, bu, fixed, false);

    sys.B.multiply(u, rp);
    C.multiply_add(-1.0, p, rp);
    for (int q = 0; q < np; ++q) rp[q] -= g[q];
    // Forward sweep with (D_C + L_C); rows without a diagonal act as identity.
    for (int i = 0; i < np; ++i) {
      double r = rp[i];
      double diag = 0.0;
      for (int k = C.row_ptr[i]; k < C.row_ptr[i + 1]; ++k) {
        const int j = C.col_idx[k];
        if (j < i) r -= C.values[k] * delta[j];
        else if (j == i) diag = C.values[k];
      }
      delta[i] = diag != 0.0 ? r / diag : r;
    }
    for (int i = 0; i < np; ++i) p[i] += omega * delta[i];
  }
}

// ---------------------------------------------------------------------------
// Direct coarse solver

struct DirectSaddleSolver::Impl {
  int nu = 0;
  int np = 0;
  bool bordered = false;
  // Kept alive: the UMFPACK wrapper reads the matrix arrays again in solve().
  Eigen::SparseMatrix<double> K;
#ifdef VSTOKES_HAVE_UMFPACK
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu;
#else
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
#endif
};

DirectSaddleSolver::DirectSaddleSolver(const SaddleSystem& sys) : impl_(std::make_unique<Impl>()) {
  const ConstrainedSystem cs = apply_constraints(sys);
  impl_->nu = sys.num_velocity();
  impl_->np = sys.num_pressure();
  impl_->bordered = cs.pressure_kernel;
  const int nu = impl_->nu, np = impl_->np;
  const int n = nu + np + (impl_->bordered ? 1 : 0);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(cs.A.nnz() + 2 * cs.B.nnz() + cs.C.nnz() + 2 * np);
  for (int i = 0; i < nu; ++i)
    for (int k = cs.A.row_ptr[i]; k < cs.A.row_ptr[i + 1]; ++k) trip.emplace_back(i, cs.A.col_idx[k], cs.A.values[k]);
  for (int q = 0; q < np; ++q)
    for (int k = cs.B.row_ptr[q]; k < cs.B.row_ptr[q + 1]; ++k) {
      trip.emplace_back(nu + q, cs.B.col_idx[k], cs.B.values[k]);
      trip.emplace_back(cs.B.col_idx[k], nu + q, cs.B.values[k]);
    }
  for (int q = 0; q < np; ++q)
    for (int k = cs.C.row_ptr[q]; k < cs.C.row_ptr[q + 1]; ++k) trip.emplace_back(nu + q, nu + cs.C.col_idx[k], -cs.C.values[k]);
  if (impl_->bordered) {
    for (int q = 0; q < np; ++q) {
      trip.emplace_back(nu + np, nu + q, sys.gauge_weight[q]);
      trip.emplace_back(nu + q, nu + np, sys.gauge_weight[q]);
    }
  }
  Eigen::SparseMatrix<double>& K = impl_->K;
  K.resize(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();
  impl_->lu.compute(K);
  if (impl_->lu.info() != Eigen::Success) throw SolverError("sparse LU factorization of the saddle system failed");
}

DirectSaddleSolver::~DirectSaddleSolver() = default;

void DirectSaddleSolver::solve(std::span<const double> r1, std::span<const double> r2, std::span<double> z,
                               std::span<double> q) const {
  const int nu = impl_->nu, np = impl_->np;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(nu + np + (impl_->bordered ? 1 : 0));
  for (int i = 0; i < nu; ++i) b[i] = r1[i];
  for (int i = 0; i < np; ++i) b[nu + i] = r2[i];
  const Eigen::VectorXd x = impl_->lu.solve(b);
  if (impl_->lu.info() != Eigen::Success) throw SolverError("sparse LU solve failed");
  for (int i = 0; i < nu; ++i) z[i] = x[i];
  for (int i = 0; i < np; ++i) q[i] = x[nu + i];
}

void direct_solve(const SaddleSystem& sys, Vector& u, Vector& p) {
  const ConstrainedSystem cs = apply_constraints(sys);
  DirectSaddleSolver solver(sys);
  u.assign(sys.num_velocity(), 0.0);
  p.assign(sys.num_pressure(), 0.0);
  Vector g = cs.g;
  if (cs.pressure_kernel) {
    // Remove the inconsistent part so the bordered multiplier stays zero.
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    for (double& v : g) v -= mean;
  }
  solver.solve(cs.f, g, u, p);
  if (cs.pressure_kernel) gauge_project(p, sys.gauge_weight);
}

// ---------------------------------------------------------------------------
// MINRES

namespace {

/// Jacobi-preconditioned CG to relative tolerance `tol`.
void pcg(const CsrMatrix& A, const Vector& dinv, std::span<const double> b, std::span<double> x, double tol,
         int max_iter) {
  const int n = A.rows;
  std::fill(x.begin(), x.end(), 0.0);
  Vector r(b.begin(), b.end()), z(n), p(n), Ap(n);
  const double bnorm = norm2(r);
  if (bnorm == 0.0) return;
  for (int i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
  p = z;
  double rz = dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    A.multiply(p, Ap);
    const double alpha = rz / dot(p, Ap);
    axpy(alpha, p, x);
    axpy(-alpha, Ap, r);
    if (norm2(r) <= tol * bnorm) break;
    for (int i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
}

}  // namespace

MinresResult minres_solve(const ConstrainedSystem& cs, std::span<const double> pressure_weight,
                          std::span<const double> r1, std::span<const double> r2, std::span<double> z,
                          std::span<double> q, double tol, int max_iter, double inner_tol) {
  const int nu = cs.A.rows;
  const int np = cs.B.rows;
  const int n = nu + np;
  Vector dinv(nu);
  for (int i = 0; i < nu; ++i) {
    const double d = cs.A.at(i, i);
    if (!(d > 0.0)) throw SolverError("velocity block has a non-positive diagonal");
    dinv[i] = 1.0 / d;
  }
  auto apply_K = [&](const Vector& x, Vector& y) {
    std::span<const double> xu(x.data(), nu), xp(x.data() + nu, np);
    std::span<double> yu(y.data(), nu), yp(y.data() + nu, np);
    cs.A.multiply(xu, yu);
    Vector t(nu);
    // B^T xp via the rows of B.
    std::fill(t.begin(), t.end(), 0.0);
    for (int r = 0; r < np; ++r)
      for (int k = cs.B.row_ptr[r]; k < cs.B.row_ptr[r + 1]; ++k) t[cs.B.col_idx[k]] += cs.B.values[k] * xp[r];
    for (int i = 0; i < nu; ++i) yu[i] += t[i];
    cs.B.multiply(xu, yp);
    cs.C.multiply_add(-1.0, xp, yp);
  };
  auto apply_P = [&](const Vector& v, Vector& w) {
    pcg(cs.A, dinv, std::span<const double>(v.data(), nu), std::span<double>(w.data(), nu), inner_tol, 10 * nu + 100);
    for (int i = 0; i < np; ++i) w[nu + i] = v[nu + i] / pressure_weight[i];
  };

  Vector b(n);
  std::copy(r1.begin(), r1.end(), b.begin());
  std::copy(r2.begin(), r2.end(), b.begin() + nu);
  const double bnorm = norm2(b);
  Vector x(n, 0.0);
  MinresResult res;
  if (bnorm == 0.0) {
    std::fill(z.begin(), z.end(), 0.0);
    std::fill(q.begin(), q.end(), 0.0);
    res.converged = true;
    return res;
  }

  Vector Kx(n), rvec(n);
  auto true_residual = [&]() {
    apply_K(x, Kx);
    for (int i = 0; i < n; ++i) rvec[i] = b[i] - Kx[i];
    return norm2(rvec) / bnorm;
  };

  // Restarted from the current iterate whenever the recurrence estimate
  // reaches the tolerance but the true residual does not.
  int total = 0;
  while (total < max_iter) {
    true_residual();
    Vector v_old(n, 0.0), v = rvec, zv(n), w_old(n, 0.0), w(n, 0.0), w_new(n), Kz(n), v_new(n);
    apply_P(v, zv);
    double gamma = std::sqrt(std::max(0.0, dot(zv, v)));
    const double gamma1 = gamma;
    if (gamma1 == 0.0) break;
    double gamma_old = 1.0;
    double eta = gamma;
    double s_old = 0.0, s = 0.0, c_old = 1.0, c = 1.0;
    const double stop = tol * 0.1;
    for (; total < max_iter; ++total) {
      for (double& e : zv) e /= gamma;
      apply_K(zv, Kz);
      const double delta = dot(Kz, zv);
      for (int i = 0; i < n; ++i) v_new[i] = Kz[i] - (delta / gamma) * v[i] - (gamma / gamma_old) * v_old[i];
      Vector z_new(n);
      apply_P(v_new, z_new);
      const double gamma_new = std::sqrt(std::max(0.0, dot(z_new, v_new)));
      const double a0 = c * delta - c_old * s * gamma;
      const double a1 = std::sqrt(a0 * a0 + gamma_new * gamma_new);
      const double a2 = s * delta + c_old * c * gamma;
      const double a3 = s_old * gamma;
      if (a1 == 0.0) break;
      const double c_new = a0 / a1;
      const double s_new = gamma_new / a1;
      for (int i = 0; i < n; ++i) w_new[i] = (zv[i] - a3 * w_old[i] - a2 * w[i]) / a1;
      axpy(c_new * eta, w_new, x);
      eta = -s_new * eta;
      w_old.swap(w);
      w.swap(w_new);
      v_old.swap(v);
      v.swap(v_new);
      zv.swap(z_new);
      gamma_old = gamma;
      gamma = gamma_new;
      c_old = c;
      c = c_new;
      s_old = s;
      s = s_new;
      if (std::abs(eta) <= stop * gamma1 || gamma == 0.0) {
        ++total;
        break;
      }
    }
    res.relative_residual = true_residual();
    if (res.relative_residual <= tol) {
      res.converged = true;
      break;
    }
  }
  res.iterations = total;
  if (!res.converged) res.relative_residual = true_residual();
  std::copy(x.begin(), x.begin() + nu, z.begin());
  std::copy(x.begin() + nu, x.end(), q.begin());
  return res;
}

// ---------------------------------------------------------------------------
// Multigrid

MultigridSolver::MultigridSolver(const SystemHierarchy& hierarchy, SolverConfig config, int finest_level)
    : h_(hierarchy), config_(config) {
  config_.validate();
  if (h_.levels.empty()) throw InvalidArgument("empty system hierarchy");
  finest_ = finest_level < 0 ? h_.num_levels() - 1 : finest_level;
  if (finest_ >= h_.num_levels()) throw InvalidArgument("finest level exceeds the hierarchy");
  work_.resize(finest_ + 1);
  for (int l = 0; l <= finest_; ++l) {
    const auto& s = h_.levels[l];
    Work& w = work_[l];
    w.r1.assign(s.num_velocity(), 0.0);
    w.r2.assign(s.num_pressure(), 0.0);
    w.tu.assign(s.num_velocity(), 0.0);
    w.tp.assign(s.num_pressure(), 0.0);
    w.cu.assign(s.num_velocity(), 0.0);
    w.cp.assign(s.num_pressure(), 0.0);
    w.cf.assign(s.num_velocity(), 0.0);
    w.cg.assign(s.num_pressure(), 0.0);
  }
  stats_.level_time.assign(finest_ + 1, 0.0);
}

MultigridSolver::~MultigridSolver() = default;

int MultigridSolver::smoothing_steps(int level) const {
  return config_.variable_cycle ? config_.pre_smooth << (finest_ - level) : config_.pre_smooth;
}

void MultigridSolver::coarse_solve(std::span<const double> r1, std::span<const double> r2, std::span<double> z,
                                   std::span<double> q) {
  const SaddleSystem& sys = h_.levels[0];
  const auto& fixed = sys.constraints().fixed;
  ++stats_.coarse_solves;
  if (config_.coarse == CoarseKind::MinresSymCorrected) {
    const SaddleSystem& spd = *h_.coarse_spd;
    if (!coarse_cs_) coarse_cs_ = std::make_unique<ConstrainedSystem>(apply_constraints(spd));
    Vector c1(r1.begin(), r1.end());
    Vector c2(r2.begin(), r2.end());
    double kappa = 0.0;
    if (sys.form == FormKind::Tr) kappa = 1.0;
    if (sys.form == FormKind::Dev) kappa = 2.0 / sys.dofs.dim;
    if (kappa > 0.0) {
      // The residual r2 = g - B u + C p enters with the opposite sign of the
      // defect used by coarse_rhs_correction.
      Vector defect(c2.size()), m(c2.size());
      for (size_t i = 0; i < c2.size(); ++i) {
        defect[i] = -c2[i];
        m[i] = sys.mass_inv_mu[i] / kappa;
      }
      c1 = coarse_rhs_correction(c1, defect, sys.Bt, m);
    }
    zero_fixed(c1, fixed);
    if (sys.pressure_kernel()) {
      const double mean = std::accumulate(c2.begin(), c2.end(), 0.0) / static_cast<double>(c2.size());
      for (double& v : c2) v -= mean;
    }
    const MinresResult res = minres_solve(*coarse_cs_, spd.gauge_weight, c1, c2, z, q, config_.coarse_tol,
                                          config_.coarse_max_iter, config_.inner_cg_tol);
    stats_.minres_iterations += res.iterations;
    if (res.converged || !config_.coarse_fallback) {
      zero_fixed(z, fixed);
      return;
    }
    ++stats_.coarse_fallbacks;
  }
  if (!direct_) direct_ = std::make_unique<DirectSaddleSolver>(sys);
  Vector c1(r1.begin(), r1.end());
  zero_fixed(c1, fixed);
  Vector c2(r2.begin(), r2.end());
  if (sys.pressure_kernel()) {
    const double mean = std::accumulate(c2.begin(), c2.end(), 0.0) / static_cast<double>(c2.size());
    for (double& v : c2) v -= mean;
  }
  direct_->solve(c1, c2, z, q);
}

void MultigridSolver::vcycle(int level, std::span<double> u, std::span<double> p, std::span<const double> f,
                             std::span<const double> g) {
  const SaddleSystem& sys = h_.levels[level];
  Work& w = work_[level];
  auto t0 = Clock::now();
  if (level == 0) {
    saddle_residual(sys, u, p, f, g, w.r1, w.r2);
    coarse_solve(w.r1, w.r2, w.tu, w.tp);
    axpy(1.0, w.tu, u);
    axpy(1.0, w.tp, p);
    stats_.level_time[0] += seconds_since(t0);
    return;
  }
  const int nu_steps = smoothing_steps(level);
  uzawa_smooth(sys, u, p, f, g, nu_steps, config_.omega);
  saddle_residual(sys, u, p, f, g, w.r1, w.r2);

  const TransferOps& T = h_.transfers[level - 1];
  Work& wc = work_[level - 1];
  const SaddleSystem& cs = h_.levels[level - 1];
  T.restrict_velocity(w.r1, wc.cf);
  zero_fixed(wc.cf, cs.constraints().fixed);
  T.restrict_pressure(w.r2, wc.cg);
  std::fill(wc.cu.begin(), wc.cu.end(), 0.0);
  std::fill(wc.cp.begin(), wc.cp.end(), 0.0);
  stats_.level_time[level] += seconds_since(t0);

  vcycle(level - 1, wc.cu, wc.cp, wc.cf, wc.cg);

  t0 = Clock::now();
  T.prolong_velocity(wc.cu, w.tu);
  zero_fixed(w.tu, sys.constraints().fixed);
  axpy(1.0, w.tu, u);
  T.prolong_pressure(wc.cp, w.tp);
  axpy(1.0, w.tp, p);
  const int post = config_.variable_cycle ? config_.post_smooth << (finest_ - level) : config_.post_smooth;
  uzawa_smooth(sys, u, p, f, g, post, config_.omega);
  stats_.level_time[level] += seconds_since(t0);
}

SolveReport MultigridSolver::solve(Vector& u, Vector& p, bool use_initial) {
  const SaddleSystem& sys = h_.levels[finest_];
  const auto& con = sys.constraints();
  const int L = finest_;
  if (!use_initial || static_cast<int>(u.size()) != sys.num_velocity() ||
      static_cast<int>(p.size()) != sys.num_pressure()) {
    u.assign(sys.num_velocity(), 0.0);
    p.assign(sys.num_pressure(), 0.0);
  }
  for (int i = 0; i < sys.num_velocity(); ++i)
    if (con.fixed[i]) u[i] = con.value[i];

  stats_ = SolveReport{};
  stats_.level_time.assign(finest_ + 1, 0.0);
  const double r0 = residual_norm(sys, u, p, sys.f, sys.g);
  stats_.residuals.push_back(r0);
  if (r0 == 0.0) {
    stats_.converged = true;
    stats_.rate = 0.0;
    return stats_;
  }
  const auto t0 = Clock::now();
  for (int k = 0; k < config_.max_cycles; ++k) {
    vcycle(L, u, p, sys.f, sys.g);
    if (sys.pressure_kernel()) gauge_project(p, sys.gauge_weight);
    const double r = residual_norm(sys, u, p, sys.f, sys.g);
    stats_.residuals.push_back(r);
    ++stats_.cycles;
    if (!std::isfinite(r)) break;
    if (r <= config_.tol * r0) {
      stats_.converged = true;
      break;
    }
  }
  stats_.wall_time = seconds_since(t0);
  stats_.rate = stats_.residuals.size() >= 5 ? estimate_rate(stats_.residuals, config_.rate_window)
                                             : std::numeric_limits<double>::quiet_NaN();
  return stats_;
}

double MultigridSolver::power_rate(int cycles, unsigned seed, std::vector<double>* factors) {
  const SaddleSystem& sys = h_.levels[finest_];
  const auto& fixed = sys.constraints().fixed;
  const int L = finest_;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector u(sys.num_velocity()), p(sys.num_pressure());
  for (int i = 0; i < sys.num_velocity(); ++i) u[i] = fixed[i] ? 0.0 : dist(rng);
  for (double& v : p) v = dist(rng);
  if (sys.pressure_kernel()) gauge_project(p, sys.gauge_weight);
  const Vector f0(sys.num_velocity(), 0.0), g0(sys.num_pressure(), 0.0);
  double r = residual_norm(sys, u, p, f0, g0);
  std::vector<double> fac;
  for (int k = 0; k < cycles; ++k) {
    for (double& v : u) v /= r;
    for (double& v : p) v /= r;
    vcycle(L, u, p, f0, g0);
    if (sys.pressure_kernel()) gauge_project(p, sys.gauge_weight);
    r = residual_norm(sys, u, p, f0, g0);
    fac.push_back(r);
    if (!(r > 0.0)) break;
  }
  if (factors) *factors = fac;
  const int k = std::min<int>(config_.rate_window, static_cast<int>(fac.size()));
  if (k == 0) return 0.0;
  double s = 0.0;
  for (int i = static_cast<int>(fac.size()) - k; i < static_cast<int>(fac.size()); ++i) s += std::log(std::max(fac[i], 1e-300));
  return std::exp(s / k);
}

}  // namespace vstokes
