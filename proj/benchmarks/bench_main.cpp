#include <benchmark/benchmark.h>

#include "bdy/abm.hpp"
#include "bdy/analysis.hpp"
#include "bdy/equilibrium.hpp"
#include "bdy/lyapunov.hpp"
#include "bdy/meanfield.hpp"
#include "bdy/model_params.hpp"
#include "bdy/rng.hpp"

namespace {

const bdy::ModelParams& params() {
  static const bdy::ModelParams p(5.0, 0.5, 0.5, 2000);
  return p;
}

void BM_SolveEquilibrium(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(bdy::solve_equilibrium(params(), 500));
  }
}
BENCHMARK(BM_SolveEquilibrium);

void BM_Rk4Step(benchmark::State& state) {
  const auto n_max = static_cast<int>(state.range(0));
  bdy::MeanFieldState s{bdy::WealthPMF::dirac(5, n_max),
                        bdy::WealthPMF::dirac(5, n_max), params(), 0.0};
  s = bdy::integrate(std::move(s), 1.0, 0.01);
  for (auto _ : state) {
    s = bdy::rk4_step(s, 0.01);
    benchmark::DoNotOptimize(s.pc[0]);
  }
}
BENCHMARK(BM_Rk4Step)->Arg(100)->Arg(500);

void BM_AbmEvents(benchmark::State& state) {
  bdy::PopulationState pop = bdy::PopulationState::uniform_initial(params());
  bdy::Rng rng(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bdy::step_inplace(pop, rng, params()));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_AbmEvents);

void BM_HFunctional(benchmark::State& state) {
  const bdy::EquilibriumPair eq = bdy::solve_equilibrium(params(), 500);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        bdy::h_functional(eq.p_bar_c, eq.p_bar_h, params()));
  }
}
BENCHMARK(BM_HFunctional);

void BM_HProduction(benchmark::State& state) {
  const bdy::EquilibriumPair eq = bdy::solve_equilibrium(params(), 500);
  const bdy::MeanFieldState s{eq.p_bar_c, eq.p_bar_h, params(), 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(bdy::h_production_rate(s));
  }
}
BENCHMARK(BM_HProduction);

void BM_GiniPmf(benchmark::State& state) {
  const bdy::EquilibriumPair eq =
      bdy::solve_equilibrium(params(), static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(bdy::gini_pmf(eq.p_bar_mix));
  }
}
BENCHMARK(BM_GiniPmf)->Arg(500)->Arg(2000);

void BM_EmpiricalGini(benchmark::State& state) {
  bdy::PopulationState pop = bdy::PopulationState::uniform_initial(params());
  bdy::Rng rng(11);
  for (int i = 0; i < 200000; ++i) bdy::step_inplace(pop, rng, params());
  for (auto _ : state) {
    benchmark::DoNotOptimize(bdy::empirical_gini(pop));
  }
}
BENCHMARK(BM_EmpiricalGini);

void BM_EnergyDissipationRate(benchmark::State& state) {
  const bdy::EquilibriumPair eq = bdy::solve_equilibrium(params(), 300);
  bdy::Rng rng(3);
  const bdy::PerturbationPair w = bdy::sample_admissible(eq, params(), 60, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bdy::energy_dissipation_rate(w, eq, params()));
  }
}
BENCHMARK(BM_EnergyDissipationRate);

}  // namespace

BENCHMARK_MAIN();
