#include "hsaicp/kdtree.hpp"
#include "hsaicp/simulation.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace hsaicp;

namespace {

PointCloud bench_cloud(std::size_t n) { return synthetic_surface(n, 7); }

std::vector<Point3> bench_queries(std::size_t n) {
  Rng rng(13);
  std::vector<Point3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(rng.uniform(-1.3, 1.3), rng.uniform(-1.3, 1.3),
                     rng.uniform(-1.3, 1.3));
  }
  return out;
}

void BM_KdTreeBuild(benchmark::State& state) {
  const PointCloud cloud = bench_cloud(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    KdTree tree(cloud);
    benchmark::DoNotOptimize(tree.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_KdTreeNearest(benchmark::State& state) {
  const PointCloud cloud = bench_cloud(static_cast<std::size_t>(state.range(0)));
  const KdTree tree(cloud);
  const std::vector<Point3> queries = bench_queries(1024);
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree.nearest(queries[k++ & 1023]).index);
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_LinearNearest(benchmark::State& state) {
  const PointCloud cloud = bench_cloud(static_cast<std::size_t>(state.range(0)));
  const std::vector<Point3> queries = bench_queries(1024);
  std::size_t k = 0;
  for (auto _ : state) {
    const Point3& q = queries[k++ & 1023];
    std::size_t best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const double sq = (cloud[i] - q).squaredNorm();
      if (sq < best_sq) {
        best_sq = sq;
        best = i;
      }
    }
    benchmark::DoNotOptimize(best);
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_MeanResolution(benchmark::State& state) {
  const PointCloud cloud = bench_cloud(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mean_resolution(cloud));
  }
}

}  // namespace

BENCHMARK(BM_KdTreeBuild)->Arg(1000)->Arg(10000)->Arg(100000);
BENCHMARK(BM_KdTreeNearest)->Arg(1000)->Arg(10000)->Arg(100000);
BENCHMARK(BM_LinearNearest)->Arg(1000)->Arg(10000);
BENCHMARK(BM_MeanResolution)->Arg(10000);
