// Assembly, Krylov and ACE step costs on the cavity mesh.
#include <map>
#include <memory>

#include <benchmark/benchmark.h>

#include "ace/ace.hpp"
#include "ace/perturb.hpp"

namespace {

struct Setup {
  std::shared_ptr<const ace::Mesh> mesh;
  ace::FeSystem fe;
  ace::SparseOperatorSet ops;
  explicit Setup(int n)
      : mesh(std::make_shared<const ace::Mesh>(ace::build_structured_mesh(n, ace::LabelScheme::Cavity))),
        fe(mesh, ace::ProblemKind::Cavity),
        ops(ace::assemble_static_operators(fe)) {}
};

const Setup& setup(int n) {
  static std::map<int, std::unique_ptr<Setup>> cache;
  auto& s = cache[n];
  if (!s) s = std::make_unique<Setup>(n);
  return *s;
}

ace::EnsembleState bootstrap_state(const Setup& s, int members) {
  const auto prev = ace::constant_fields(s.fe);
  ace::BredVector bv;
  ace::EnsembleState st = ace::build_cavity_initial_conditions(s.fe, s.ops, ace::cavity_problem(), prev, bv, 0.0, 1e-3);
  st.u.resize(members, st.u[0]);
  st.T.resize(members, st.T[0]);
  st.p.resize(members, st.p[0]);
  return st;
}

void BM_StaticAssembly(benchmark::State& state) {
  const auto& s = setup(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ace::assemble_static_operators(s.fe));
}
BENCHMARK(BM_StaticAssembly)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Convection(benchmark::State& state) {
  const auto& s = setup(static_cast<int>(state.range(0)));
  const auto st = bootstrap_state(s, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(ace::assemble_convection(s.fe, st.u[0], ace::ConvectionSpace::Velocity));
}
BENCHMARK(BM_Convection)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_GmresTemperature(benchmark::State& state) {
  const auto& s = setup(32);
  const auto st = bootstrap_state(s, 1);
  const auto a = ace::build_temperature_matrix(s.fe, s.ops, 1e-3, st.u[0]);
  const auto rhs = s.ops.M_T.multiply(st.T[0]);
  const auto kind = static_cast<ace::PreconditionerKind>(state.range(0));
  const auto pc = ace::make_preconditioner(kind, a);
  for (auto _ : state) benchmark::DoNotOptimize(ace::gmres_solve(a, rhs, {}, ace::GmresSettings{}, *pc));
}
BENCHMARK(BM_GmresTemperature)
    ->Arg(static_cast<int>(ace::PreconditionerKind::Jacobi))
    ->Arg(static_cast<int>(ace::PreconditionerKind::Ilu0))
    ->Unit(benchmark::kMillisecond);

void BM_AceStep(benchmark::State& state) {
  const auto& s = setup(static_cast<int>(state.range(0)));
  ace::SimConfig cfg;
  cfg.ensemble_size = static_cast<int>(state.range(1));
  const auto st = bootstrap_state(s, cfg.ensemble_size);
  ace::AceStepper stepper(s.fe, s.ops, cfg, ace::cavity_problem());
  stepper.step(st);  // first factorization outside the timed loop
  for (auto _ : state) benchmark::DoNotOptimize(stepper.step(st));
}
BENCHMARK(BM_AceStep)->Args({16, 1})->Args({16, 2})->Args({32, 2})->Unit(benchmark::kMillisecond);

void BM_Bdf1Step(benchmark::State& state) {
  const auto& s = setup(static_cast<int>(state.range(0)));
  ace::SimConfig cfg;
  cfg.ensemble_size = 1;
  const auto st = bootstrap_state(s, 1);
  ace::Bdf1Stepper stepper(s.fe, s.ops, cfg, ace::cavity_problem());
  stepper.step(st);
  for (auto _ : state) benchmark::DoNotOptimize(stepper.step(st));
}
BENCHMARK(BM_Bdf1Step)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
