#include <benchmark/benchmark.h>

#include <cmath>

#include "chemolab/experiment.hpp"
#include "chemolab/radial.hpp"
#include "chemolab/solver.hpp"
#include "chemolab/subsolution.hpp"

using namespace chemolab;

namespace {

ProblemParams params(double p, double q) {
  ProblemParams pp;
  pp.n = 3;
  pp.R = 1;
  pp.p = p;
  pp.q = q;
  return pp;
}

void BM_TransformedStep(benchmark::State& st) {
  const std::size_t nodes = static_cast<std::size_t>(st.range(0));
  const ProblemParams pp = params(0.2, 0.2);
  const InitialPair b = bump_data(DataRecipe{}, pp, nodes);
  SolverState s = make_state(b.U0, b.W0);
  TransformedStepper stepper(s.U.s, pp);
  const double dt = stepper.stable_dt(s, 0.4);
  for (auto _ : st) {
    stepper.advance(s, dt);
    benchmark::DoNotOptimize(s.U.values.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(nodes));
}
BENCHMARK(BM_TransformedStep)->Arg(512)->Arg(1024)->Arg(2048);

void BM_StableDt(benchmark::State& st) {
  const ProblemParams pp = params(0.2, 0.2);
  const InitialPair b = bump_data(DataRecipe{}, pp, 1024);
  const SolverState s = make_state(b.U0, b.W0);
  TransformedStepper stepper(s.U.s, pp);
  for (auto _ : st) benchmark::DoNotOptimize(stepper.stable_dt(s, 0.4));
}
BENCHMARK(BM_StableDt);

void BM_MassTransform(benchmark::State& st) {
  const RadialProfile u =
      sample_radial([](double r) { return 2.0 + std::cos(3 * r); }, 1.0, 1024);
  for (auto _ : st) {
    const MassProfile U = to_mass_profile(u, 3);
    benchmark::DoNotOptimize(from_mass_profile(U, 3).values.data());
  }
}
BENCHMARK(BM_MassTransform);

void BM_VerifyNonpositivity(benchmark::State& st) {
  const SubsolutionSpec spec = assemble_constants(params(0, 0), 3, 3);
  VerifyOptions opts;
  opts.samples = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(verify_nonpositivity(spec, opts).pass);
}
BENCHMARK(BM_VerifyNonpositivity)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

// the packaged benchmark_main archive carries LTO bytecode from another GCC
BENCHMARK_MAIN();
