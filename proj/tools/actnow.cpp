// actnow: command-line driver for the online streaming-forecast engine.
//
//   actnow gen        write a synthetic drift stream as raw_f64
//   actnow pretrain   offline training on the train split, save a checkpoint
//   actnow online     stream val + test through the buffers, write reports
//   actnow ablate     frozen | ssb | ssb+fsb | ssb+fsb+val over several seeds
//   actnow freqsweep  one arm over a list of update frequencies
//   actnow verify     invariant self-checks
//
// Exit codes: 0 ok, 1 configuration/runtime error, 2 invariant-suite
// failure, 3 leakage audit violation.

#include "actnow/diagnostics.hpp"
#include "actnow/drift_stream.hpp"
#include "actnow/engine.hpp"
#include "actnow/errors.hpp"
#include "actnow/experiments.hpp"
#include "actnow/graph.hpp"
#include "actnow/report.hpp"
#include "actnow/runtime.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace actnow;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitLeakage = 3;

struct LeakageViolation {
    std::uint64_t count;
};

struct Options {
    // data source
    std::string values;
    std::string adjacency;
    std::string format = "raw_f64";
    DriftStreamConfig stream = standard_benchmark(0).stream;
    std::string drift_kind = "mixed";
    std::vector<int> ratios = {10, 2, 3};

    // engine
    EngineConfig engine = standard_benchmark(0).engine;
    std::string tail = "drop";
    std::string ssb_mode = "interleaved";
    std::string scheduling = "serialized";
    std::string sync_every = "8";
    double lr = 1e-4;
    std::optional<double> online_lr;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds;
    std::string arm = "ssb+fsb+val";
    std::vector<std::string> arms;
    std::vector<Index> freqs = {1, 2, 4, 8};

    std::string out = ".";
    std::string checkpoint;
    bool quiet = false;
};

void add_data_flags(CLI::App* app, Options& o) {
    app->add_option("--values", o.values, "Node values file (rows = time, cols = nodes); synthetic stream when omitted");
    app->add_option("--adjacency", o.adjacency, "Adjacency file, same format as --values");
    app->add_option("--format", o.format, "File format")->check(CLI::IsMember({"csv", "raw_f64"}));
    app->add_option("--nodes", o.stream.n_nodes, "Synthetic: node count");
    app->add_option("--length", o.stream.length, "Synthetic: time steps");
    app->add_option("--base-period", o.stream.base_period, "Synthetic: base sinusoid period");
    app->add_option("--drift-kind", o.drift_kind, "Synthetic: drift kind")
        ->check(CLI::IsMember({"mean_shift", "variance_shift", "period_shift", "mixed"}));
    app->add_option("--drift-interval", o.stream.drift_interval, "Synthetic: steps between regime switches");
    app->add_option("--noise-std", o.stream.noise_std, "Synthetic: Gaussian noise std");
    app->add_option("--mean-shift", o.stream.mean_shift, "Synthetic: level change per regime");
    app->add_option("--variance-factor", o.stream.variance_factor, "Synthetic: amplitude ratio per regime");
    app->add_option("--ratios", o.ratios, "Train/val/test ratios")->expected(3)->delimiter(',');
}

void add_engine_flags(CLI::App* app, Options& o) {
    app->add_option("--partitions", o.engine.rss.partitions, "Subgraphs per pass (N_part)");
    app->add_option("--in-len", o.engine.rss.in_len, "Look-back window L_in");
    app->add_option("--out-len", o.engine.rss.out_len, "Forecast horizon L_out");
    app->add_option("--freq", o.engine.rss.freq, "Stream update frequency D_freq");
    app->add_option("--tail", o.tail, "Leftover nodes when N_part does not divide N_node")
        ->check(CLI::IsMember({"drop", "append"}));
    app->add_option("--hidden", o.engine.lade.hidden, "Hidden units of every MLP");
    app->add_option("--lr", o.lr, "Adam learning rate (both optimizers)");
    app->add_option("--online-lr", o.online_lr, "Learning rate for the online phases");
    app->add_option("--eps", o.engine.lade.eps, "Decomposition epsilon");
    app->add_option("--epochs", o.engine.epochs, "Offline epochs");
    app->add_option("--batch-size", o.engine.batch_size, "Offline mini-batch size");
    app->add_option("--ssb-mode", o.ssb_mode, "Slow-buffer update placement")
        ->check(CLI::IsMember({"interleaved", "replica"}));
    app->add_option("--scheduling", o.scheduling, "Replica scheduling")
        ->check(CLI::IsMember({"serialized", "threaded"}));
    app->add_option("--sync-every", o.sync_every, "Replica sync period in slow-buffer items, or 'inf'");
    app->add_option("--capacity", o.engine.store_capacity, "Stream store capacity (0 = 4*(L_in+L_out))");
    app->add_option("--fsb-stat-loss", o.engine.fsb_stat_loss, "Statistical loss on fast-update labels");
    app->add_option("--seed", o.seed, "Random seed (ACTNOW_SEED overrides)");
    app->add_flag("--canary-future-read", o.engine.canary_future_read,
                  "Deliberately read one future step (audit self-test)")
        ->group("");
}

void finalize(Options& o) {
    if (const char* env = std::getenv("ACTNOW_SEED")) {
        try {
            o.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError(std::string("ACTNOW_SEED is not an integer: ") + env);
        }
    }
    o.stream.drift_kind = *parse_drift_kind(o.drift_kind);
    o.stream.seed = o.seed;
    o.engine.seed = o.seed;
    o.engine.lade.in_len = o.engine.rss.in_len;
    o.engine.lade.out_len = o.engine.rss.out_len;
    o.engine.lade.lr_stat = o.lr;
    o.engine.lade.lr_norm = o.lr;
    o.engine.online_lr = o.online_lr;
    o.engine.rss.tail = o.tail == "append" ? PartitionTail::append : PartitionTail::drop;
    o.engine.ssb_mode = o.ssb_mode == "replica" ? SsbMode::replica : SsbMode::interleaved;
    o.engine.scheduling =
        o.scheduling == "threaded" ? ReplicaScheduling::threaded : ReplicaScheduling::serialized;
    if (o.sync_every == "inf") {
        o.engine.sync_every = EngineConfig::kSyncNever;
    } else {
        try {
            o.engine.sync_every = std::stoll(o.sync_every);
        } catch (const std::exception&) {
            throw ConfigError("--sync-every must be an integer or 'inf'");
        }
    }
    if (o.ratios.size() != 3) throw ConfigError("--ratios needs three values");
    if (o.seeds.empty()) o.seeds = {o.seed, o.seed + 1, o.seed + 2};
    if (o.arms.empty()) o.arms = ablation_arms();
    for (const auto& a : o.arms) {
        if (!OnlineMechanisms::from_arm(a)) throw ConfigError("unknown arm '" + a + "'");
    }
    if (!OnlineMechanisms::from_arm(o.arm)) throw ConfigError("unknown arm '" + o.arm + "'");
}

Graph load_or_generate(const Options& o, std::uint64_t seed) {
    if (!o.values.empty()) {
        std::optional<fs::path> adj;
        if (!o.adjacency.empty()) adj = o.adjacency;
        return load_graph(o.values, adj, o.format == "csv" ? GraphFormat::csv : GraphFormat::raw_f64);
    }
    DriftStreamConfig sc = o.stream;
    sc.seed = seed;
    return gen_drift_stream(sc);
}

StreamSplit split_for(const Graph& g, const Options& o) {
    return split_stream(g.length(), SplitRatios{o.ratios[0], o.ratios[1], o.ratios[2]},
                        o.engine.rss.in_len, o.engine.rss.out_len);
}

LadeModel pretrain(const Graph& g, const StreamSplit& split, const EngineConfig& cfg, bool quiet) {
    OfflineReport r = run_offline(g, split.train, cfg);
    if (!quiet) {
        for (std::size_t e = 0; e < r.epoch_loss.size(); ++e) {
            std::cerr << "  epoch " << e + 1 << " loss " << r.epoch_loss[e] << '\n';
        }
    }
    if (r.aborted) {
        throw Divergence("offline training aborted: " + r.message);
    }
    return std::move(r.model);
}

void write_outputs(const fs::path& dir, const ArmResult& r) {
    fs::create_directories(dir);
    write_run_report(dir / "run_report.csv", r.report.logs);
}

void check_audit(const ArmResult& r) {
    if (r.leakage_violations != 0) throw LeakageViolation{r.leakage_violations};
}

void print_row(const SummaryRow& s) {
    std::cout << s.run << "  test_mse=" << s.test.mse << "  test_mae=" << s.test.mae
              << "  steps=" << s.test.steps << "  " << s.seconds << "s\n";
}

int cmd_gen(const Options& o) {
    DriftStreamConfig sc = o.stream;
    sc.seed = o.seed;
    const Graph g = gen_drift_stream(sc);
    fs::create_directories(o.out);
    write_raw_f64(fs::path(o.out) / "values.f64", g.values);
    write_raw_f64(fs::path(o.out) / "adjacency.f64", *g.adjacency);
    std::cout << "wrote " << g.length() << "x" << g.node_count() << " stream to " << o.out << '\n';
    return 0;
}

int cmd_pretrain(const Options& o) {
    const Graph g = load_or_generate(o, o.seed);
    const StreamSplit split = split_for(g, o);
    const LadeModel model = pretrain(g, split, o.engine, o.quiet);
    const fs::path ckpt = o.checkpoint.empty() ? fs::path(o.out) / "model.ckpt" : fs::path(o.checkpoint);
    if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
    save_checkpoint(model, ckpt);
    std::cout << "saved checkpoint " << ckpt.string() << '\n';
    return 0;
}

int cmd_online(const Options& o) {
    const Graph g = load_or_generate(o, o.seed);
    const StreamSplit split = split_for(g, o);
    EngineConfig cfg = o.engine;
    cfg.mechanisms = *OnlineMechanisms::from_arm(o.arm);
    const LadeModel model = o.checkpoint.empty() ? pretrain(g, split, cfg, o.quiet)
                                                 : load_checkpoint(o.checkpoint);
    const ArmResult r = run_protocol(g, split, cfg, model, o.arm);
    write_outputs(o.out, r);
    write_summary(fs::path(o.out) / "summary.csv", {r.summary});
    print_row(r.summary);
    check_audit(r);
    return 0;
}

int cmd_ablate(const Options& o) {
    std::vector<SummaryRow> rows;
    fs::create_directories(o.out);
    for (std::uint64_t seed : o.seeds) {
        Options run = o;
        run.engine.seed = seed;
        const Graph g = load_or_generate(o, seed);
        const StreamSplit split = split_for(g, run);
        const LadeModel model = pretrain(g, split, run.engine, o.quiet);
        for (const auto& arm : o.arms) {
            EngineConfig cfg = run.engine;
            cfg.mechanisms = *OnlineMechanisms::from_arm(arm);
            const ArmResult r = run_protocol(g, split, cfg, model, arm);
            write_outputs(fs::path(o.out) / r.summary.run, r);
            rows.push_back(r.summary);
            print_row(r.summary);
            check_audit(r);
        }
    }
    write_summary(fs::path(o.out) / "summary.csv", rows);
    return 0;
}

int cmd_freqsweep(const Options& o) {
    std::vector<SummaryRow> rows;
    fs::create_directories(o.out);
    for (std::uint64_t seed : o.seeds) {
        Options run = o;
        run.engine.seed = seed;
        const Graph g = load_or_generate(o, seed);
        const StreamSplit split = split_for(g, run);
        const LadeModel model = pretrain(g, split, run.engine, o.quiet);
        for (Index freq : o.freqs) {
            EngineConfig cfg = run.engine;
            cfg.rss.freq = freq;
            cfg.mechanisms = *OnlineMechanisms::from_arm(o.arm);
            const ArmResult r = run_protocol(g, split, cfg, model, o.arm);
            write_outputs(fs::path(o.out) / r.summary.run, r);
            rows.push_back(r.summary);
            print_row(r.summary);
            check_audit(r);
        }
    }
    write_summary(fs::path(o.out) / "summary.csv", rows);
    return 0;
}

int cmd_verify(const Options& o) {
    bool ok = true;
    for (const CheckResult& c : run_invariant_suite(o.seed)) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  metric=" << c.metric
                  << "  threshold=" << c.threshold << "  (" << c.detail << ")\n";
        ok = ok && c.passed;
    }
    return ok ? 0 : kExitInvariant;
}

} // namespace

int main(int argc, char** argv) {
    tune_allocator();
    CLI::App app{"Online streaming forecasting with fast/slow stream buffers"};
    app.require_subcommand(1);
    Options o;

    auto* gen = app.add_subcommand("gen", "Write a synthetic drift stream (raw_f64)");
    auto* pre = app.add_subcommand("pretrain", "Offline training on the train split");
    auto* online = app.add_subcommand("online", "Online val + test phases for one arm");
    auto* ablate = app.add_subcommand("ablate", "Component ablation over seeds");
    auto* sweep = app.add_subcommand("freqsweep", "Update-frequency sweep over seeds");
    auto* verify = app.add_subcommand("verify", "Run the invariant self-checks");

    for (auto* sub : {gen, pre, online, ablate, sweep}) {
        add_data_flags(sub, o);
        sub->add_option("--out", o.out, "Output directory");
        sub->add_flag("--quiet", o.quiet, "Suppress progress output");
    }
    gen->add_option("--seed", o.seed, "Random seed (ACTNOW_SEED overrides)");
    for (auto* sub : {pre, online, ablate, sweep}) {
        add_engine_flags(sub, o);
    }
    pre->add_option("--checkpoint", o.checkpoint, "Checkpoint path (default <out>/model.ckpt)");
    online->add_option("--checkpoint", o.checkpoint, "Start from this checkpoint instead of pretraining");
    online->add_option("--arm", o.arm, "Online mechanisms: frozen | ssb | ssb+fsb | ssb+fsb+val");
    ablate->add_option("--seeds", o.seeds, "Seeds (default: seed, seed+1, seed+2)")->delimiter(',');
    ablate->add_option("--arms", o.arms, "Arms to run")->delimiter(',');
    sweep->add_option("--seeds", o.seeds, "Seeds (default: seed, seed+1, seed+2)")->delimiter(',');
    sweep->add_option("--freqs", o.freqs, "Update frequencies")->delimiter(',');
    sweep->add_option("--arm", o.arm, "Online mechanisms for every run");
    verify->add_option("--seed", o.seed, "Random seed (ACTNOW_SEED overrides)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        finalize(o);
        if (*gen) return cmd_gen(o);
        if (*pre) return cmd_pretrain(o);
        if (*online) return cmd_online(o);
        if (*ablate) return cmd_ablate(o);
        if (*sweep) return cmd_freqsweep(o);
        if (*verify) return cmd_verify(o);
    } catch (const LeakageAttempt& e) {
        std::cerr << "leakage audit: " << e.what() << '\n';
        return kExitLeakage;
    } catch (const LeakageViolation& v) {
        std::cerr << "leakage audit: " << v.count << " violation(s)\n";
        return kExitLeakage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
