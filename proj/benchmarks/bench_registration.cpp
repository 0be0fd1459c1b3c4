#include "hsaicp/assignment.hpp"
#include "hsaicp/registration.hpp"
#include "hsaicp/simulation.hpp"
#include "hsaicp/solver.hpp"

#include <benchmark/benchmark.h>

using namespace hsaicp;

namespace {

struct BenchPair {
  SimulatedPair pair;
  RigidTransform init;
};

const BenchPair& shared_pair(double xi_target) {
  static const PointCloud source = synthetic_surface(5000, 21);
  static const double d_src = mean_resolution(source);
  static BenchPair cache;
  static double cached_xi = -1.0;
  if (cached_xi != xi_target) {
    cache.pair = generate_pair(source, cut_for_overlap(source.size(), xi_target),
                               0.5 * d_src, 23);
    cache.init = apply_perturbation(random_perturbation(5.0, 1.0, cache.pair.d, 29),
                                    cache.pair.ground_truth);
    cached_xi = xi_target;
  }
  return cache;
}

void BM_Register(benchmark::State& state, Algorithm algorithm, double xi_target) {
  const BenchPair& bp = shared_pair(xi_target);
  RegistrationParams params;
  params.algorithm = algorithm;
  for (auto _ : state) {
    const RegistrationResult result =
        register_clouds(bp.pair.data, bp.pair.model, bp.init, params);
    benchmark::DoNotOptimize(result.iterations);
  }
}

void BM_HardAssignment(benchmark::State& state) {
  Rng rng(31);
  std::vector<double> dists(static_cast<std::size_t>(state.range(0)));
  for (double& d : dists) d = rng.uniform(0.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hard_assignment(dists, 2.0, 0.25).inlier_count);
  }
}

void BM_WeightedSolve(benchmark::State& state) {
  Rng rng(37);
  const RigidTransform truth = random_perturbation(30.0, 1.0, 1.0, 41);
  WeightedPairSet pairs;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    const Point3 s(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    pairs.source.push_back(s);
    pairs.target.push_back(truth(s));
    pairs.weight.push_back(rng.uniform(0.0, 1.0));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(weighted_rigid_solve(pairs).translation);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Register, hsa_overlap80, Algorithm::Hsa, 0.8)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Register, hsa_overlap60, Algorithm::Hsa, 0.6)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Register, ftricp_overlap60, Algorithm::FtrIcp, 0.6)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Register, icp_overlap60, Algorithm::Icp, 0.6)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Register, wicp_overlap60, Algorithm::WIcp, 0.6)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Register, cticp_overlap60, Algorithm::CtIcp, 0.6)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HardAssignment)->Arg(5000)->Arg(50000);
BENCHMARK(BM_WeightedSolve)->Arg(1000)->Arg(10000);
