#pragma once

// All-at-once geometric multigrid for the stabilized saddle-point system:
// Uzawa smoother, variable V-cycle, nested-mesh transfers and a coarse
// solver (preconditioned MINRES on the strain form with a rhs correction, or
// a sparse direct solve).

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vstokes/mesh.hpp"
#include "vstokes/operators.hpp"

namespace vstokes {

enum class CoarseKind { MinresSymCorrected, DirectTr };

std::string to_string(CoarseKind kind);
CoarseKind parse_coarse(const std::string& name);

enum class RateMode {
  Tail,   ///< geometric mean of the last reduction factors of the solve
  Power,  ///< rescaled cycles on a zero right-hand side from a random start
};

struct SolverConfig {
  int pre_smooth = 3;
  int post_smooth = 3;
  bool variable_cycle = true;  ///< steps on level l: steps * 2^(L - l)
  double omega = 0.3;
  CoarseKind coarse = CoarseKind::MinresSymCorrected;
  double coarse_tol = 1e-8;
  double inner_cg_tol = 1e-2;
  int coarse_max_iter = 2000;
  bool coarse_fallback = true;
  int max_cycles = 100;
  double tol = 1e-8;
  int rate_window = 50;

  /// Throws InvalidArgument when out of range.
  void validate() const;
};

struct SolveReport {
  std::vector<double> residuals;  ///< residuals[0] is the initial residual
  double rate = 0.0;              ///< NaN when fewer than 5 residuals exist
  int cycles = 0;
  double wall_time = 0.0;         ///< seconds spent in V-cycles
  std::vector<double> level_time; ///< seconds per level
  bool converged = false;
  int coarse_solves = 0;
  int coarse_fallbacks = 0;
  int minres_iterations = 0;

  double time_per_cycle() const { return cycles > 0 ? wall_time / cycles : 0.0; }
};

void write_report_csv(std::ostream& os, const SolveReport& report);

/// Geometric mean of the last min(window, n - 1) reduction factors.
/// Throws InvalidArgument for fewer than 5 residuals.
double estimate_rate(std::span<const double> residuals, int window = 50);

/// Transfers between nested levels. Velocity uses the scalar vertex
/// interpolation P applied per component; restriction is P^T.
struct TransferOps {
  int dim = 3;
  PressureSpace pressure = PressureSpace::P0;
  CsrMatrix velocity;     ///< nv_fine x nv_coarse
  CsrMatrix velocity_t;
  CsrMatrix pressure_p;   ///< np_fine x np_coarse
  CsrMatrix pressure_t;
  Vector fine_volume;     ///< P0 cell volumes on the fine level
  Vector coarse_volume;

  void prolong_velocity(std::span<const double> coarse, std::span<double> fine) const;
  void restrict_velocity(std::span<const double> fine, std::span<double> coarse) const;
  void prolong_pressure(std::span<const double> coarse, std::span<double> fine) const;
  /// Residual (dual) restriction, P^T.
  void restrict_pressure(std::span<const double> fine, std::span<double> coarse) const;
  /// Value restriction: volume-weighted average for P0, P^T for P1.
  void restrict_pressure_values(std::span<const double> fine, std::span<double> coarse) const;
};

TransferOps build_transfer(const MeshLevel& coarse, const MeshLevel& fine, PressureSpace pressure);

struct SystemHierarchy {
  std::vector<SaddleSystem> levels;  ///< level 0 is the coarsest
  std::vector<TransferOps> transfers;  ///< transfers[l] maps level l to l + 1
  /// Strain-form (GRAD for the GRAD form) coarse system used by MINRES.
  std::shared_ptr<SaddleSystem> coarse_spd;

  int num_levels() const { return static_cast<int>(levels.size()); }
  const SaddleSystem& finest() const { return levels.back(); }
};

SystemHierarchy build_system_hierarchy(const MeshHierarchy& meshes, const DomainSpec& spec, FormKind form,
                                       const Stabilization& stab);

/// Weighted zero mean: q <- q - sum(w q) / sum(w).
void gauge_project(std::span<double> q, std::span<const double> weight);

/// r1 = f - A u - B^T p on free rows (zero on fixed rows), r2 = g - B u + C p.
void saddle_residual(const SaddleSystem& sys, std::span<const double> u, std::span<const double> p,
                     std::span<const double> f, std::span<const double> g, std::span<double> r1,
                     std::span<double> r2);

double residual_norm(const SaddleSystem& sys, std::span<const double> u, std::span<const double> p,
                     std::span<const double> f, std::span<const double> g);

/// `steps` Uzawa iterations: symmetric Gauss-Seidel on A for the velocity,
/// then an omega-damped forward Gauss-Seidel sweep on C for the pressure.
/// Fixed velocity DoFs are left unchanged.
void uzawa_smooth(const SaddleSystem& sys, std::span<double> u, std::span<double> p, std::span<const double> f,
                  std::span<const double> g, int steps, double omega);

/// Sparse LU of the constrained saddle matrix; bordered with the gauge
/// weights when the pressure has a kernel. Solves for corrections with
/// homogeneous constraints or, via solve_full, the full problem.
class DirectSaddleSolver {
 public:
  explicit DirectSaddleSolver(const SaddleSystem& sys);
  ~DirectSaddleSolver();
  DirectSaddleSolver(const DirectSaddleSolver&) = delete;
  DirectSaddleSolver& operator=(const DirectSaddleSolver&) = delete;

  /// Rows of r1 at fixed DoFs are treated as prescribed values.
  void solve(std::span<const double> r1, std::span<const double> r2, std::span<double> z, std::span<double> q) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Direct solution of the full constrained problem (Dirichlet values
/// included); the pressure is gauge-projected when it has a kernel.
void direct_solve(const SaddleSystem& sys, Vector& u, Vector& p);

struct MinresResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Block-diagonal preconditioned MINRES on ((A_c, B_c^T), (B_c, -C)) with
/// Jacobi-PCG on the velocity block and the diagonal `pressure_weight` on
/// the pressure. Stops when the Euclidean residual drops below tol times
/// the rhs norm. Rhs rows at fixed DoFs must be zero.
MinresResult minres_solve(const ConstrainedSystem& cs, std::span<const double> pressure_weight,
                          std::span<const double> r1, std::span<const double> r2, std::span<double> z,
                          std::span<double> q, double tol, int max_iter, double inner_tol);

class MultigridSolver {
 public:
  /// Cycles on levels 0..finest_level (default: the whole hierarchy).
  MultigridSolver(const SystemHierarchy& hierarchy, SolverConfig config, int finest_level = -1);
  ~MultigridSolver();

  /// Solves on the finest level in use. u is overwritten with the boundary values
  /// at fixed DoFs and zero elsewhere unless `use_initial` is set.
  SolveReport solve(Vector& u, Vector& p, bool use_initial = false);

  /// Rate by rescaled cycles on a zero rhs from a seeded random start.
  double power_rate(int cycles, unsigned seed, std::vector<double>* factors = nullptr);

  /// One V-cycle on `level` for the system with rhs (f, g).
  void vcycle(int level, std::span<double> u, std::span<double> p, std::span<const double> f,
              std::span<const double> g);

  /// Coarse correction for residual (r1, r2).
  void coarse_solve(std::span<const double> r1, std::span<const double> r2, std::span<double> z,
                    std::span<double> q);

  int smoothing_steps(int level) const;
  int finest_level() const { return finest_; }
  const SolverConfig& config() const { return config_; }
  const SolveReport& last_stats() const { return stats_; }

 private:
  struct Work {
    Vector r1, r2, cu, cp, cf, cg, tu, tp;
  };
  const SystemHierarchy& h_;
  SolverConfig config_;
  int finest_ = 0;
  std::vector<Work> work_;
  std::unique_ptr<DirectSaddleSolver> direct_;
  std::unique_ptr<ConstrainedSystem> coarse_cs_;
  SolveReport stats_;
};

}  // namespace vstokes
