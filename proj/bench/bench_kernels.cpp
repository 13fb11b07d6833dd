// Throughput comparison of the parallel kernels against their serial
// reference twins, on a shared mid-sized fixture. The parallel variants are
// the ones wired into the pipeline; the serial ones exist as oracles, and
// this target is where their cost gap is visible.

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "hyperhier/analysis.hpp"
#include "hyperhier/embeddings.hpp"
#include "hyperhier/metrics.hpp"
#include "hyperhier/mlr.hpp"
#include "hyperhier/synthetic.hpp"
#include "hyperhier/train.hpp"

namespace {

using namespace hyperhier;

struct Fixture {
  SyntheticData data;
  FlatModel hyperbolic;
  FlatModel euclidean;
  LabeledEmbeddings ball_points;
  PredictionBatch batch;
  std::vector<std::uint32_t> rows;

  Fixture() {
    SyntheticConfig cfg;
    cfg.dim = 8;
    cfg.classes = 8;
    cfg.train_per_class = 2000;
    cfg.test_per_class = 250;
    cfg.seed = 9;
    data = generate_synthetic(cfg);
    const BallConfig ball;
    hyperbolic = init_flat_model(Geometry::hyperbolic, cfg.classes, cfg.dim, ball, 9);
    euclidean = init_flat_model(Geometry::euclidean, cfg.classes, cfg.dim, ball, 9);
    ball_points = map_to_ball(data.train, ball);
    batch.classes = cfg.classes;
    batch.posteriors = posterior_batch(hyperbolic, data.train);
    batch.labels = data.train.labels;
    rows.resize(4096);
    std::iota(rows.begin(), rows.end(), 0);
  }
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

void posterior_parallel(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(posterior_batch(f.hyperbolic, f.data.train));
  state.SetItemsProcessed(state.iterations() * f.data.train.count());
}

void posterior_serial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(posterior_batch_serial(f.hyperbolic, f.data.train));
  state.SetItemsProcessed(state.iterations() * f.data.train.count());
}

void metrics_parallel(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    ConfusionMatrix cm(f.batch.classes);
    CalibrationBins cb(f.batch.classes, 15);
    accumulate_parallel(f.batch, cm, cb);
    benchmark::DoNotOptimize(cm.counts.data());
  }
  state.SetItemsProcessed(state.iterations() * f.batch.count());
}

void metrics_serial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    ConfusionMatrix cm(f.batch.classes);
    CalibrationBins cb(f.batch.classes, 15);
    accumulate(f.batch, cm, cb);
    benchmark::DoNotOptimize(cm.counts.data());
  }
  state.SetItemsProcessed(state.iterations() * f.batch.count());
}

void pair_cv_parallel(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(interclass_distance_cv(f.ball_points, 0, 8));
}

void pair_cv_serial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(interclass_distance_cv_serial(f.ball_points, 0, 8));
}

void gradients_parallel(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(batch_gradients(f.hyperbolic, f.ball_points, f.rows));
  state.SetItemsProcessed(state.iterations() * f.rows.size());
}

void gradients_serial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(batch_gradients_serial(f.hyperbolic, f.ball_points, f.rows));
  state.SetItemsProcessed(state.iterations() * f.rows.size());
}

void gradients_euclidean_parallel(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(batch_gradients(f.euclidean, f.data.train, f.rows));
  state.SetItemsProcessed(state.iterations() * f.rows.size());
}

void gradients_euclidean_serial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(batch_gradients_serial(f.euclidean, f.data.train, f.rows));
  state.SetItemsProcessed(state.iterations() * f.rows.size());
}

}  // namespace

BENCHMARK(posterior_parallel);
BENCHMARK(posterior_serial);
BENCHMARK(metrics_parallel);
BENCHMARK(metrics_serial);
BENCHMARK(pair_cv_parallel);
BENCHMARK(pair_cv_serial);
BENCHMARK(gradients_parallel);
BENCHMARK(gradients_serial);
BENCHMARK(gradients_euclidean_parallel);
BENCHMARK(gradients_euclidean_serial);

BENCHMARK_MAIN();
