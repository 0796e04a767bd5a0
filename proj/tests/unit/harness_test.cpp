#include "actnow/drift_stream.hpp"
#include "actnow/errors.hpp"
#include "actnow/experiments.hpp"
#include "actnow/report.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace fs = std::filesystem;
using namespace actnow;

namespace {

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "actnow_harness_test";
    fs::create_directories(dir);
    return dir / name;
}

StepLog step(Phase p, TimeIndex t, double mse, double mae = 0.0) {
    StepLog l;
    l.phase = p;
    l.t = t;
    l.mse = mse;
    l.mae = mae;
    return l;
}

// A noiseless constant-plus-sinusoid obeys
//   s(t+3) - (1 + 2c) s(t+2) + (1 + 2c) s(t+1) - s(t) = 0,  c = cos(omega).
// Estimating c from four points and predicting the fifth flags every window
// that straddles a parameter change. Returns the first index of each run of
// flagged windows plus 4, i.e. the first index of the new regime.
std::vector<TimeIndex> changepoints(const Matrix& v, double tol) {
    std::vector<TimeIndex> out;
    bool in_run = false;
    for (TimeIndex t = 0; t + 4 < v.rows(); ++t) {
        bool flagged = false;
        for (Index i = 0; i < v.cols(); ++i) {
            const double s0 = v(t, i), s1 = v(t + 1, i), s2 = v(t + 2, i), s3 = v(t + 3, i), s4 = v(t + 4, i);
            const double den = s2 - s1;
            if (std::abs(den) < 1e-2) continue;
            const double k = (s3 - s0) / den; // 1 + 2c
            const double pred = k * s3 - k * s2 + s1;
            if (std::abs(pred - s4) > tol) flagged = true;
        }
        if (flagged && !in_run) out.push_back(t + 4);
        in_run = flagged;
    }
    return out;
}

} // namespace

TEST(DriftStream, NoiselessMeanShiftRegimes) {
    DriftStreamConfig c;
    c.n_nodes = 5;
    c.length = 960;
    c.base_period = 24;
    c.drift_interval = 480;
    c.drift_kind = DriftKind::mean_shift;
    c.noise_std = 0.0;
    c.mean_shift = 1.5;
    c.seed = 3;
    const Graph g = gen_drift_stream(c);
    ASSERT_EQ(drift_regimes(c).size(), 2u);
    for (Index i = 0; i < 5; ++i) {
        // Both regimes span whole periods, so the sinusoid averages out.
        const double first = g.values.col(i).head(480).mean();
        const double second = g.values.col(i).tail(480).mean();
        EXPECT_NEAR(std::abs(second - first), 1.5, 1e-9);
        // Same waveform, shifted.
        const double d0 = g.values(480, i) - g.values(456, i);
        EXPECT_NEAR(std::abs(d0), 1.5, 1e-9);
    }
}

TEST(DriftStream, SameSeedSameGraph) {
    DriftStreamConfig c;
    c.length = 700;
    c.seed = 42;
    const Graph a = gen_drift_stream(c);
    const Graph b = gen_drift_stream(c);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(*a.adjacency, *b.adjacency);
    c.seed = 43;
    EXPECT_NE(gen_drift_stream(c).values, a.values);
}

TEST(DriftStream, ChangepointsAtDriftIntervalMultiples) {
    DriftStreamConfig c;
    c.n_nodes = 20;
    c.length = 2000;
    c.drift_kind = DriftKind::mixed;
    c.drift_interval = 500;
    c.noise_std = 0.0;
    c.seed = 17;
    const Graph g = gen_drift_stream(c);
    EXPECT_EQ(changepoints(g.values, 1e-6), (std::vector<TimeIndex>{500, 1000, 1500}));
    const auto regimes = drift_regimes(c);
    ASSERT_EQ(regimes.size(), 4u);
    for (std::size_t k = 1; k < regimes.size(); ++k) {
        EXPECT_EQ(regimes[k].begin, static_cast<TimeIndex>(500 * k));
        EXPECT_NE(regimes[k].period, regimes[k - 1].period);
        EXPECT_NE(regimes[k].level, regimes[k - 1].level);
    }
}

TEST(DriftStream, AdjacencyIsSymmetricRing) {
    DriftStreamConfig c;
    c.n_nodes = 10;
    c.length = 100;
    c.drift_interval = 50;
    const Graph g = gen_drift_stream(c);
    const Matrix& a = *g.adjacency;
    EXPECT_EQ(a, a.transpose());
    for (Index i = 0; i < 10; ++i) {
        EXPECT_EQ(a(i, i), 0.0);
        EXPECT_EQ(a.row(i).sum(), 4.0);
    }
    g.validate();
}

TEST(DriftStream, ConfigValidation) {
    DriftStreamConfig c;
    c.drift_interval = 10;
    EXPECT_THROW(gen_drift_stream(c), ConfigError);
    c = {};
    c.noise_std = -1.0;
    EXPECT_THROW(gen_drift_stream(c), ConfigError);
}

TEST(Evaluate, CumulativeMeans) {
    RunReport r = evaluate({step(Phase::test, 0, 2.0)});
    EXPECT_EQ(r.test.mse, 2.0);
    EXPECT_EQ(r.test.steps, 1);
    r = evaluate({step(Phase::val, 0, 100.0), step(Phase::test, 0, 1.0, 0.5), step(Phase::test, 1, 3.0, 1.5)});
    EXPECT_EQ(r.test.mse, 2.0);
    EXPECT_EQ(r.test.mae, 1.0);
    EXPECT_EQ(r.val.mse, 100.0);
    EXPECT_EQ(r.test.steps, 2);
    EXPECT_THROW(evaluate({step(Phase::val, 0, 1.0)}), Error);
}

TEST(RunReportCsv, RoundTrip) {
    std::vector<StepLog> logs = {step(Phase::val, 35, 0.1, 0.2), step(Phase::test, 36, 1.0 / 3.0, 2.0 / 3.0)};
    logs[1].fsb_loss = 0.125;
    logs[1].ssb_loss = 1e-17;
    const fs::path p = scratch("run_report.csv");
    write_run_report(p, logs);
    std::ifstream in(p);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "phase,t,mse,mae,fsb_loss,ssb_loss");
    const auto back = read_run_report(p);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].phase, Phase::val);
    EXPECT_FALSE(back[0].fsb_loss.has_value());
    EXPECT_EQ(back[1].mse, logs[1].mse);
    EXPECT_EQ(back[1].mae, logs[1].mae);
    EXPECT_EQ(back[1].fsb_loss, logs[1].fsb_loss);
    EXPECT_EQ(back[1].ssb_loss, logs[1].ssb_loss);
}

TEST(SummaryCsv, RecomputableFromRunReport) {
    DriftStreamConfig s;
    s.n_nodes = 6;
    s.length = 600;
    s.base_period = 12;
    s.drift_interval = 100;
    s.seed = 5;
    const Graph g = gen_drift_stream(s);
    EngineConfig cfg;
    cfg.rss.partitions = 2;
    cfg.rss.in_len = cfg.lade.in_len = 12;
    cfg.rss.out_len = cfg.lade.out_len = 6;
    cfg.rss.freq = 2;
    cfg.lade.hidden = 8;
    cfg.seed = 5;
    const StreamSplit split = split_stream(g.length(), {10, 2, 3}, 12, 6);
    const LadeModel m = LadeModel::init(cfg.lade, 5);
    const ArmResult r = run_protocol(g, split, cfg, m, "ssb+fsb+val");
    EXPECT_EQ(r.summary.run, "ssb+fsb+val_seed5_freq2");
    EXPECT_EQ(r.leakage_violations, 0u);

    const fs::path report = scratch("recompute_report.csv");
    const fs::path summary = scratch("recompute_summary.csv");
    write_run_report(report, r.report.logs);
    write_summary(summary, {r.summary});
    const auto logs = read_run_report(report);
    const auto rows = read_summary(summary);
    ASSERT_EQ(rows.size(), 1u);
    double mse = 0.0, mae = 0.0;
    std::int64_t n = 0;
    for (const auto& l : logs)
        if (l.phase == Phase::test) {
            mse += l.mse;
            mae += l.mae;
            ++n;
        }
    EXPECT_EQ(rows[0].test.steps, n);
    EXPECT_NEAR(rows[0].test.mse, mse / static_cast<double>(n), 1e-12);
    EXPECT_NEAR(rows[0].test.mae, mae / static_cast<double>(n), 1e-12);
    EXPECT_EQ(rows[0].arm, "ssb+fsb+val");
    EXPECT_EQ(rows[0].freq, 2);
}

TEST(Experiments, StandardBenchmarkShape) {
    const ExperimentConfig c = standard_benchmark(7);
    EXPECT_EQ(c.stream.n_nodes, 20);
    EXPECT_EQ(c.stream.length, 3000);
    EXPECT_EQ(c.stream.drift_interval, 500);
    EXPECT_EQ(c.stream.noise_std, 0.1);
    EXPECT_EQ(c.engine.rss.out_len, 24);
    EXPECT_EQ(c.engine.lade.hidden, 512);
    EXPECT_EQ(c.engine.lade.lr_norm, 1e-4);
    EXPECT_EQ(c.engine.epochs, 10);
    EXPECT_EQ(ablation_arms().size(), 4u);
    EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_EQ(median({4.0, 1.0}), 2.5);
}
