#include "actnow/drift_stream.hpp"
#include "actnow/engine.hpp"
#include "actnow/lade.hpp"
#include "actnow/rss.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace actnow;

namespace {

Matrix random_window(Index rows, Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
}

LadeConfig config(Index hidden) {
    LadeConfig c;
    c.hidden = hidden;
    return c;
}

} // namespace

// range(0) = hidden width, range(1) = series per batch
static void BM_LadeForward(benchmark::State& state) {
    const LadeModel m = LadeModel::init(config(state.range(0)), 1);
    const Matrix x = random_window(36, state.range(1), 2);
    for (auto _ : state) benchmark::DoNotOptimize(lade_forward(m, x).y_hat.data());
    state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_LadeForward)->Args({64, 20})->Args({512, 20})->Args({512, 400});

static void BM_LadeTrainStep(benchmark::State& state) {
    LadeModel m = LadeModel::init(config(state.range(0)), 1);
    const Matrix x = random_window(36, state.range(1), 2);
    const Matrix y = random_window(24, state.range(1), 3);
    for (auto _ : state) benchmark::DoNotOptimize(train_on(m, x, y).norm);
    state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_LadeTrainStep)->Args({64, 20})->Args({512, 20})->Args({512, 400});

static void BM_FsbUpdate(benchmark::State& state) {
    LadeModel m = LadeModel::init(config(512), 1);
    const Index d = state.range(0);
    FsbItem item;
    item.old.input = random_window(36, 10, 4);
    item.old.y_hat = lade_forward(m, item.old.input).y_hat;
    item.y_part = random_window(d, 10, 5);
    item.overlap_len = 24 - d;
    const Matrix y_new = random_window(24, 10, 6);
    for (auto _ : state) benchmark::DoNotOptimize(fsb_update(m, item, y_new, true));
}
BENCHMARK(BM_FsbUpdate)->Arg(1)->Arg(8);

static void BM_SampleTrain(benchmark::State& state) {
    DriftStreamConfig s;
    s.n_nodes = state.range(0);
    s.length = 3000;
    const Graph g = gen_drift_stream(s);
    RssConfig cfg;
    cfg.partitions = 4;
    Rng rng(7);
    std::int64_t iter = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sample_train(g, {0, 2000}, cfg, rng, iter++).x.data());
}
BENCHMARK(BM_SampleTrain)->Arg(20)->Arg(400);

BENCHMARK_MAIN();
