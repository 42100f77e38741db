#include <benchmark/benchmark.h>

#include "sublap/ball_quadrature.hpp"
#include "sublap/cc_distance.hpp"
#include "sublap/rng.hpp"
#include "sublap/roots.hpp"
#include "sublap/solver.hpp"

using namespace sublap;

namespace {

PolyField random_poly(Rng& rng) {
  const auto basis = MonomialBasis::get(3, 2);
  Eigen::VectorXd c(basis->size());
  for (int k = 0; k < c.size(); ++k) c(k) = rng.normal();
  return PolyField(basis, c);
}

void BM_ApplyField(benchmark::State& state) {
  Rng rng(1);
  const PolyField u = random_poly(rng);
  const auto fields = su3_frame_fields();
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(apply_field(fields[i++ % fields.size()], u));
}
BENCHMARK(BM_ApplyField);

void BM_EnergyAndGradient(benchmark::State& state) {
  SolveConfig cfg;
  cfg.flux = {static_cast<double>(state.range(0)), 1.0};
  cfg.epsilon = 0.5;
  cfg.quadrature_points = 20000;
  cfg.source = 4.0 * PolyField::entry(3, 2, 0, 0, Part::Real);
  const EnergyFunctional e(cfg);
  Rng rng(2);
  Eigen::VectorXd c(e.dimension()), g;
  for (int k = 0; k < c.size(); ++k) c(k) = 0.1 * rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(e.value_and_gradient(c, g));
}
BENCHMARK(BM_EnergyAndGradient)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_CcUpperBound(benchmark::State& state) {
  Rng rng(3);
  const GroupElement x = haar_random(3, rng);
  const GroupElement y = x * exp(0.2 * su3_frame_fields()[6]);
  DistanceBudget budget;
  budget.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(cc_upper_bound(x, y, budget, 4).T);
}
BENCHMARK(BM_CcUpperBound)->Unit(benchmark::kMillisecond);

void BM_BallVolume(benchmark::State& state) {
  const std::vector<double> radii = {0.4, 0.2};
  for (auto _ : state) benchmark::DoNotOptimize(ball_volume_estimate(radii, 2000, 5).slope);
}
BENCHMARK(BM_BallVolume)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
