// Per-form cost of the viscous matvec, the Uzawa smoother and one V-cycle
// on the columns case. Range argument 0 is the form (0 grad, 1 sym, 2 tr),
// argument 1 the level.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

#include "vstokes/cases.hpp"
#include "vstokes/mg.hpp"

namespace {

using namespace vstokes;

constexpr FormKind kForms[] = {FormKind::Grad, FormKind::Sym, FormKind::Tr};

struct Fixture {
  MeshHierarchy meshes;
  SystemHierarchy systems;
};

const Fixture& fixture(int form, int levels) {
  static std::map<std::pair<int, int>, std::unique_ptr<Fixture>> cache;
  auto& slot = cache[{form, levels}];
  if (!slot) {
    const BenchmarkCase bc = make_case("columns3d");
    slot = std::make_unique<Fixture>();
    slot->meshes = build_hierarchy(bc.spec, bc.cells_per_unit, levels);
    slot->systems = build_system_hierarchy(slot->meshes, bc.spec, kForms[form], Stabilization{});
  }
  return *slot;
}

Vector random_vector(int n) {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = d(gen);
  return v;
}

void BM_Matvec(benchmark::State& state) {
  const Fixture& fx = fixture(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)) + 1);
  const SaddleSystem& s = fx.systems.finest();
  const Vector x = random_vector(s.num_velocity());
  Vector y(x.size());
  for (auto _ : state) {
    s.op->apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.counters["dofs"] = s.num_velocity();
}

void BM_Smooth(benchmark::State& state) {
  const Fixture& fx = fixture(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)) + 1);
  const SaddleSystem& s = fx.systems.finest();
  Vector u = random_vector(s.num_velocity());
  Vector p(s.num_pressure(), 0.0);
  const Vector f(u.size(), 0.0), g(p.size(), 0.0);
  for (auto _ : state) {
    uzawa_smooth(s, u, p, f, g, 1, 0.3);
    benchmark::DoNotOptimize(u.data());
  }
}

void BM_VCycle(benchmark::State& state) {
  const Fixture& fx = fixture(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)) + 1);
  SolverConfig cfg;
  MultigridSolver mg(fx.systems, cfg);
  const SaddleSystem& s = fx.systems.finest();
  Vector u = random_vector(s.num_velocity());
  Vector p(s.num_pressure(), 0.0);
  const Vector f(u.size(), 0.0), g(p.size(), 0.0);
  for (auto _ : state) {
    mg.vcycle(mg.finest_level(), u, p, f, g);
    benchmark::DoNotOptimize(u.data());
  }
}

void form_level_args(benchmark::internal::Benchmark* b) {
  for (int form = 0; form < 3; ++form)
    for (int level = 1; level <= 3; ++level) b->Args({form, level});
}

}  // namespace

BENCHMARK(BM_Matvec)->Apply(form_level_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Smooth)->Apply(form_level_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VCycle)->Apply(form_level_args)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
