#include <benchmark/benchmark.h>

#include "nuhlab/hyperbolicity.hpp"
#include "nuhlab/lyapunov.hpp"
#include "nuhlab/pipeline.hpp"

using namespace nuhlab;

namespace {

const Pipeline& pipeline() {
  static const Pipeline p = build_pipeline(RunConfig{});
  return p;
}

const TorusPoint kPoint{0.3, 0.7, 0.1, 0.1};

}  // namespace

static void BM_EvalFull(benchmark::State& state) {
  const MapExpr& f = pipeline().full.f;
  TorusPoint x = kPoint;
  for (auto _ : state) {
    x = f.eval(x);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_EvalFull);

static void BM_EvalAK(benchmark::State& state) {
  const MapExpr& t = pipeline().full.t;
  TorusPoint x{0.1, 0.1};
  for (auto _ : state) {
    x = t.eval(x);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_EvalAK);

static void BM_EvalWithJacobian(benchmark::State& state) {
  const MapExpr& f = pipeline().full.f;
  TorusPoint x = kPoint;
  for (auto _ : state) {
    auto r = f.eval_with_jacobian(x);
    x = r.first;
    benchmark::DoNotOptimize(r.second);
  }
}
BENCHMARK(BM_EvalWithJacobian);

static void BM_Benettin(benchmark::State& state) {
  const MapExpr& f = pipeline().full.f;
  for (auto _ : state) benchmark::DoNotOptimize(benettin_spectrum(f, kPoint, static_cast<int>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Benettin)->Arg(1000);

static void BM_CentralExponents(benchmark::State& state) {
  const Pipeline& p = pipeline();
  for (auto _ : state)
    benchmark::DoNotOptimize(central_exponents(p.full.f, p.full.f_inverse, kPoint, static_cast<int>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CentralExponents)->Arg(1000);

static void BM_Quadrilateral(benchmark::State& state) {
  const Pipeline& p = pipeline();
  ReferenceSplitting s = ReferenceSplitting::of(config_matrix(p.config), 4);
  LeafOptions o;
  o.refinement = 64;
  for (auto _ : state) benchmark::DoNotOptimize(su_quadrilateral(p.full.f, p.full.f_inverse, s, kPoint, 0.02, 0.02, o));
}
BENCHMARK(BM_Quadrilateral)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
