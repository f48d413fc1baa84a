#include <benchmark/benchmark.h>

#include "rkhsbound/bounds.hpp"
#include "rkhsbound/oracle.hpp"
#include "rkhsbound/synth.hpp"

namespace {

using namespace rkhsbound;

ProblemData make_data(int n, uint64_t seed) {
  const KernelSpec kf = KernelSpec::squared_exponential(1.0);
  const Box domain = interval(0.0, 4.0);
  const RkhsSample f = sample_rkhs_function(kf, domain, 50, 1.0, derive_seed(seed, 0));
  const Matrix inputs = sample_distinct_inputs(domain, n, derive_seed(seed, 1));
  NoiseModel noise;
  noise.seed = derive_seed(seed, 2);
  return make_dataset(f, noise, inputs);
}

void BM_PosteriorState(benchmark::State& state) {
  const ProblemData data = make_data(static_cast<int>(state.range(0)), 7);
  Point query(1);
  query[0] = 1.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(posterior_state(data, 0.01, query));
  }
}
BENCHMARK(BM_PosteriorState)->Arg(10)->Arg(50)->Arg(200);

void BM_SigmaSweepProbe(benchmark::State& state) {
  const ProblemData data = make_data(static_cast<int>(state.range(0)), 7);
  const SigmaSweep sweep(data);
  Point query(1);
  query[0] = 1.7;
  const auto qc = sweep.make_query_cache(query);
  double sigma = 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sweep.state(qc, sigma));
    sigma *= 1.001;
    if (sigma > 1e3) sigma = 1e-3;
  }
}
BENCHMARK(BM_SigmaSweepProbe)->Arg(10)->Arg(50)->Arg(200);

void BM_OptimalBound(benchmark::State& state) {
  const ProblemData data = make_data(static_cast<int>(state.range(0)), 7);
  const BoundSolver solver(data);
  Point query(1);
  double x = 0.0;
  for (auto _ : state) {
    query[0] = x;
    benchmark::DoNotOptimize(solver.at(query));
    x += 0.37;
    if (x > 4.0) x -= 4.0;
  }
}
BENCHMARK(BM_OptimalBound)->Arg(10)->Arg(50)->Arg(200);

void BM_OracleUpper(benchmark::State& state) {
  const ProblemData data = make_data(static_cast<int>(state.range(0)), 7);
  Point query(1);
  query[0] = 1.7;
  const QcqpInstance inst = make_qcqp_instance(data, query);
  for (auto _ : state) {
    benchmark::DoNotOptimize(oracle_upper(inst));
  }
}
BENCHMARK(BM_OracleUpper)->Arg(5)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
