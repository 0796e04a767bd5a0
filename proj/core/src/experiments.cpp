#include "actnow/experiments.hpp"

#include "actnow/errors.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace actnow {

ExperimentConfig standard_benchmark(std::uint64_t seed) {
    ExperimentConfig c;
    c.stream.n_nodes = 20;
    c.stream.length = 3000;
    c.stream.base_period = 24;
    c.stream.drift_kind = DriftKind::mixed;
    c.stream.drift_interval = 500;
    c.stream.noise_std = 0.1;
    c.stream.seed = seed;

    c.engine.rss.partitions = 2;
    c.engine.rss.in_len = 36;
    c.engine.rss.out_len = 24;
    c.engine.rss.freq = 1;
    c.engine.lade.in_len = 36;
    c.engine.lade.out_len = 24;
    c.engine.seed = seed;
    c.ratios = SplitRatios{10, 2, 3};
    return c;
}

std::string describe(const EngineConfig& cfg) {
    std::ostringstream os;
    os << "partitions=" << cfg.rss.partitions << " in_len=" << cfg.rss.in_len
       << " out_len=" << cfg.rss.out_len << " freq=" << cfg.rss.freq
       << " hidden=" << cfg.lade.hidden << " lr=" << cfg.lade.lr_norm << " epochs=" << cfg.epochs
       << " batch=" << cfg.batch_size
       << " ssb_mode=" << (cfg.ssb_mode == SsbMode::interleaved ? "interleaved" : "replica")
       << " sync_every=" << cfg.sync_every << " seed=" << cfg.seed
       << " fsb=" << cfg.mechanisms.fsb << " ssb=" << cfg.mechanisms.ssb
       << " val=" << cfg.mechanisms.val_updates;
    if (cfg.online_lr) os << " online_lr=" << *cfg.online_lr;
    return os.str();
}

ArmResult run_protocol(const Graph& g, const StreamSplit& split, const EngineConfig& cfg,
                       const LadeModel& pretrained, const std::string& arm) {
    const auto start = std::chrono::steady_clock::now();
    OnlineEngine engine(g, split, cfg);
    LadeModel model = pretrained.clone_params();

    std::vector<StepLog> logs = engine.run_online(model, Phase::val);
    std::vector<StepLog> test = engine.run_online(model, Phase::test);
    logs.insert(logs.end(), test.begin(), test.end());

    ArmResult r;
    r.arm = arm;
    r.report = evaluate(std::move(logs));
    r.report.config_echo = describe(cfg);
    r.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.leakage_violations = engine.leakage_violations();
    r.ssb_items = engine.ssb_items();
    r.events = engine.events();

    r.summary.run = arm + "_seed" + std::to_string(cfg.seed) + "_freq" + std::to_string(cfg.rss.freq);
    r.summary.arm = arm;
    r.summary.seed = cfg.seed;
    r.summary.freq = cfg.rss.freq;
    r.summary.partitions = cfg.rss.partitions;
    r.summary.hidden = cfg.lade.hidden;
    r.summary.epochs = cfg.epochs;
    r.summary.val = r.report.val;
    r.summary.test = r.report.test;
    r.summary.leakage_violations = r.leakage_violations;
    r.summary.seconds = r.report.seconds;
    r.model = std::move(model);
    return r;
}

double median(std::vector<double> v) {
    if (v.empty()) throw Error("median of empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace actnow
