#include "actnow/engine.hpp"

#include "actnow/errors.hpp"

#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>

namespace actnow {

const char* to_string(Phase p) {
    switch (p) {
    case Phase::train: return "train";
    case Phase::val: return "val";
    case Phase::test: return "test";
    }
    return "?";
}

std::optional<OnlineMechanisms> OnlineMechanisms::from_arm(const std::string& arm) {
    if (arm == "frozen") return OnlineMechanisms{false, false, false};
    if (arm == "ssb") return OnlineMechanisms{false, true, false};
    if (arm == "ssb+fsb") return OnlineMechanisms{true, true, false};
    if (arm == "ssb+fsb+val") return OnlineMechanisms{true, true, true};
    return std::nullopt;
}

void EngineConfig::validate(Index node_count) const {
    rss.validate(node_count);
    lade.validate();
    if (lade.in_len != rss.in_len || lade.out_len != rss.out_len) {
        throw ConfigError("model and sampler window lengths differ");
    }
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (sync_every < 1) throw ConfigError("sync_every must be >= 1");
    if (online_lr && !(*online_lr > 0.0)) throw ConfigError("online lr must be positive");
    if (effective_capacity() < rss.in_len + rss.out_len + rss.freq) {
        throw ConfigError("store capacity must be >= L_in + L_out + D_freq");
    }
}

Index EngineConfig::effective_capacity() const {
    return store_capacity > 0 ? store_capacity
                              : StreamStore::default_capacity(rss.in_len, rss.out_len);
}

// ---------------------------------------------------------------------------
// Offline phase

OfflineReport run_offline(const Graph& g, const TimeRange& train, const EngineConfig& cfg) {
    return run_offline(g, train, cfg, LadeModel::init(cfg.lade, cfg.seed));
}

OfflineReport run_offline(const Graph& g, const TimeRange& train, const EngineConfig& cfg,
                          LadeModel model) {
    cfg.validate(g.node_count());
    const TimeIndex windows = window_count(train, cfg.rss);
    if (windows < 1) {
        throw RangeTooShort("training range admits no window");
    }
    OfflineReport report{std::move(model), {}, false, {}};
    std::seed_seq seq{cfg.seed, std::uint64_t{0x5eed}};
    Rng rng(seq);

    const std::int64_t iterations = windows * cfg.rss.partitions;
    const Index n_sub = cfg.rss.subgraph_size(g.node_count());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        LadeModel snapshot = report.model;
        double loss_sum = 0.0;
        std::int64_t batches = 0;
        try {
            for (std::int64_t it = 0; it < iterations; it += cfg.batch_size) {
                const std::int64_t count = std::min<std::int64_t>(cfg.batch_size, iterations - it);
                Matrix x(cfg.rss.in_len, count * n_sub);
                Matrix y(cfg.rss.out_len, count * n_sub);
                for (std::int64_t b = 0; b < count; ++b) {
                    SampleBatch s = sample_train(g, train, cfg.rss, rng, it + b);
                    x.middleCols(b * n_sub, n_sub) = s.x;
                    y.middleCols(b * n_sub, n_sub) = s.y;
                }
                const StepLosses l = train_on(report.model, x, y);
                loss_sum += *l.norm;
                ++batches;
            }
        } catch (const Divergence& e) {
            report.model = std::move(snapshot);
            report.aborted = true;
            report.message = "epoch " + std::to_string(epoch) + ": " + e.what();
            return report;
        }
        report.epoch_loss.push_back(loss_sum / static_cast<double>(std::max<std::int64_t>(batches, 1)));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Fast buffer update

Matrix fsb_target(const FsbItem& item, const Matrix& y_new) {
    const Index out_len = item.old.horizon();
    const Index freq = item.y_part.rows();
    if (y_new.rows() != out_len || y_new.cols() != item.y_part.cols() ||
        item.overlap_len != out_len - freq) {
        throw ShapeMismatch("fsb_target: forecast and label shapes disagree");
    }
    Matrix target(out_len, y_new.cols());
    target.topRows(freq) = item.y_part;
    target.bottomRows(item.overlap_len) = y_new.topRows(item.overlap_len);
    return target;
}

double fsb_update(LadeModel& model, const FsbItem& item, const Matrix& y_new, bool stat_loss) {
    const Matrix target = fsb_target(item, y_new);
    std::optional<DecompParts> stat_target;
    if (stat_loss && item.y_part.rows() >= 2) {
        stat_target = decompose(item.y_part, model.config().eps);
    }
    const LadeTape tape = lade_forward(model, item.old.input);
    return *backward_and_step(model, tape, stat_target ? &*stat_target : nullptr, &target).norm;
}

void merge_replica(LadeModel& live, const LadeModel& base, const LadeModel& replica) {
    if (!live.same_architecture(replica) || !live.same_architecture(base)) {
        throw ShapeMismatch("merge_replica: architectures differ");
    }
    auto lp = live.named_params();
    const auto bp = base.named_params();
    bool moved = false;
    for (std::size_t i = 0; i < lp.size() && !moved; ++i) {
        moved = *lp[i].second != *bp[i].second;
    }
    if (!moved) {
        live.adopt_params(replica);
        return;
    }
    const auto rp = replica.named_params();
    for (std::size_t i = 0; i < lp.size(); ++i) {
        *lp[i].second += *rp[i].second - *bp[i].second;
    }
    auto merge_opt = [](AdamState& l, const AdamState& b, const AdamState& r) {
        for (std::size_t i = 0; i < l.m.size(); ++i) {
            l.m[i] += r.m[i] - b.m[i];
            l.v[i] = (l.v[i] + r.v[i] - b.v[i]).cwiseMax(0.0);
        }
        l.step += r.step - b.step;
    };
    merge_opt(live.opt_stat, base.opt_stat, replica.opt_stat);
    merge_opt(live.opt_norm, base.opt_norm, replica.opt_norm);
}

// ---------------------------------------------------------------------------
// Replica worker (threaded scheduling)

class OnlineEngine::ReplicaWorker {
public:
    ReplicaWorker(const LadeModel& live, Index sync_every)
        : replica_(live.clone_params()), base_(live.clone_params()), sync_every_(sync_every),
          thread_([this] { loop(); }) {}

    ~ReplicaWorker() {
        {
            std::lock_guard lock(mutex_);
            stop_ = true;
        }
        cv_.notify_all();
        thread_.join();
    }

    void submit(SsbItem item) {
        {
            std::lock_guard lock(mutex_);
            queue_.push_back(std::move(item));
        }
        cv_.notify_all();
    }

    /// Called by the live thread at a step boundary.
    void maybe_sync(LadeModel& live) {
        std::lock_guard lock(mutex_);
        if (since_sync_ >= sync_every_) {
            merge_replica(live, base_, replica_);
            replica_ = live.clone_params();
            base_ = live.clone_params();
            since_sync_ = 0;
        }
    }

    void drain() {
        std::unique_lock lock(mutex_);
        idle_cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
    }

    std::vector<std::string> take_events() {
        std::lock_guard lock(mutex_);
        return std::exchange(events_, {});
    }

    bool needs_reseed() {
        std::lock_guard lock(mutex_);
        return std::exchange(pending_reseed_, false);
    }

    void reseed(const LadeModel& live) {
        std::lock_guard lock(mutex_);
        replica_ = live.clone_params();
        base_ = live.clone_params();
        since_sync_ = 0;
    }

private:
    void loop() {
        std::unique_lock lock(mutex_);
        for (;;) {
            cv_.wait(lock, [this] { return stop_ || !queue_.empty(); });
            if (queue_.empty() && stop_) {
                return;
            }
            SsbItem item = std::move(queue_.front());
            queue_.pop_front();
            busy_ = true;
            // The replica is only touched under the lock, so the live thread
            // never observes a half-applied step when it adopts.
            try {
                train_on(replica_, item.x, item.y_full);
                ++since_sync_;
            } catch (const Divergence& e) {
                events_.push_back(std::string("replica diverged, discarded: ") + e.what());
                pending_reseed_ = true;
            }
            busy_ = false;
            if (queue_.empty()) {
                idle_cv_.notify_all();
            }
        }
    }

    LadeModel replica_;
    LadeModel base_;
    Index sync_every_;
    Index since_sync_ = 0;
    bool stop_ = false;
    bool busy_ = false;
    bool pending_reseed_ = false;
    std::deque<SsbItem> queue_;
    std::vector<std::string> events_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable idle_cv_;
    std::thread thread_;
};

// ---------------------------------------------------------------------------
// Online phases

PartitionState::PartitionState(std::vector<Index> nodes_, Index in_len, Index out_len, Index freq,
                               Index capacity)
    : nodes(std::move(nodes_)),
      store(static_cast<Index>(nodes.size()), capacity),
      ledger(out_len, freq),
      cursor{0, freq} {
    (void)in_len;
}

OnlineEngine::OnlineEngine(const Graph& g, StreamSplit split, EngineConfig cfg)
    : graph_(g), split_(split), cfg_(std::move(cfg)) {
    cfg_.validate(g.node_count());
    const Index count = cfg_.rss.partition_count(g.node_count());
    for (Index p = 0; p < count; ++p) {
        partitions_.emplace_back(partition_nodes(g.node_count(), cfg_.rss, p), cfg_.rss.in_len,
                                 cfg_.rss.out_len, cfg_.rss.freq, cfg_.effective_capacity());
    }
}

OnlineEngine::~OnlineEngine() = default;

std::uint64_t OnlineEngine::leakage_violations() const {
    std::uint64_t total = 0;
    for (const auto& p : partitions_) {
        total += p.store.violations();
    }
    return total;
}

std::vector<StepLog> OnlineEngine::run_online(LadeModel& model, Phase phase) {
    if (phase == Phase::train) {
        throw ConfigError("run_online streams the val or test split only");
    }
    if (model.config().in_len != cfg_.rss.in_len || model.config().out_len != cfg_.rss.out_len) {
        throw ShapeMismatch("model window lengths do not match the engine configuration");
    }
    if (phase == Phase::test && val_streamed_) {
        for (const auto& p : partitions_) {
            if (p.store.empty()) {
                throw Error("stream buffers lost across the val -> test switch");
            }
        }
    }
    if (cfg_.online_lr) {
        model.opt_stat.lr = *cfg_.online_lr;
        model.opt_norm.lr = *cfg_.online_lr;
    }

    const TimeRange range = phase == Phase::val ? split_.val : split_.test;
    const bool updates = phase == Phase::test ? cfg_.mechanisms.any()
                                              : cfg_.mechanisms.any() && cfg_.mechanisms.val_updates;

    const bool threaded =
        cfg_.ssb_mode == SsbMode::replica && cfg_.scheduling == ReplicaScheduling::threaded;
    if (threaded) {
        worker_ = std::make_unique<ReplicaWorker>(model, cfg_.sync_every);
    }

    std::vector<StepLog> logs;
    for (std::size_t p = 0; p < partitions_.size(); ++p) {
        run_partition(model, partitions_[p], static_cast<Index>(p), range, phase, updates, logs);
    }

    if (worker_) {
        worker_->drain();
        worker_->maybe_sync(model);
        for (auto& e : worker_->take_events()) {
            events_.push_back(std::move(e));
        }
        worker_.reset();
    } else if (replica_) {
        sync_replica(model, false);
    }

    if (phase == Phase::val) {
        val_streamed_ = true;
    }
    return logs;
}

void OnlineEngine::run_partition(LadeModel& model, PartitionState& ps, Index partition,
                                 const TimeRange& range, Phase phase, bool updates,
                                 std::vector<StepLog>& logs) {
    const Index in_len = cfg_.rss.in_len;
    const Index freq = cfg_.rss.freq;
    const TimeIndex windows = window_count(range, cfg_.rss);
    if (windows < 1) {
        throw RangeTooShort(std::string(to_string(phase)) + " range admits no window");
    }
    const TimeIndex steps = windows / freq;
    const bool fsb = updates && cfg_.mechanisms.fsb;
    const bool ssb = updates && cfg_.mechanisms.ssb;

    for (TimeIndex k = 0; k < steps; ++k) {
        const TimeIndex now = range.begin + k * freq + in_len - 1;
        if (worker_) {
            worker_->maybe_sync(model);
            if (worker_->needs_reseed()) {
                worker_->reseed(model);
            }
        }
        ingest(ps, now, partition, logs);

        if (cfg_.canary_future_read && phase == Phase::test && k == 0) {
            (void)ps.store.window(now + 1, 1);
        }

        const Matrix x = ps.store.window(now, in_len);
        const Matrix y_new = lade_forward(model, x).y_hat;

        std::optional<double> fsb_loss;
        if (fsb) {
            fsb_loss = fast_update(model, ps, y_new);
        }
        if (!ps.cursor_ready) {
            ps.cursor = SsbCursor{now, freq};
            ps.cursor_ready = true;
        }
        const std::optional<double> ssb_loss = slow_updates(model, ps, ssb);

        ps.ledger.append(PredictionRecord{now, y_new, x});
        ps.pending.push_back({now, y_new, phase, fsb_loss, ssb_loss});
    }

    // The rest of the range still streams in so every forecast gets its labels.
    ingest(ps, range.end - 1, partition, logs);
    slow_updates(model, ps, ssb);
}

void OnlineEngine::ingest(PartitionState& ps, TimeIndex until, Index partition,
                          std::vector<StepLog>& logs) {
    const Index out_len = cfg_.rss.out_len;
    TimeIndex t = ps.store.empty() ? until : ps.store.now() + 1;
    if (ps.store.empty()) {
        // A fresh partition starts with exactly one input window.
        t = until - cfg_.rss.in_len + 1;
    }
    Vector row(static_cast<Index>(ps.nodes.size()));
    for (; t <= until; ++t) {
        for (std::size_t j = 0; j < ps.nodes.size(); ++j) {
            row(static_cast<Index>(j)) = graph_.values(t, ps.nodes[j]);
        }
        ps.store.push(t, row);

        while (!ps.pending.empty() && ps.pending.front().made_at + out_len <= t) {
            auto& f = ps.pending.front();
            const Matrix labels = ps.store.window(f.made_at + out_len, out_len);
            const auto n = static_cast<double>(labels.size());
            StepLog log;
            log.phase = f.phase;
            log.t = f.made_at;
            log.partition = partition;
            log.mse = (f.y_hat - labels).squaredNorm() / n;
            log.mae = (f.y_hat - labels).cwiseAbs().sum() / n;
            log.fsb_loss = f.fsb_loss;
            log.ssb_loss = f.ssb_loss;
            logs.push_back(log);
            ps.pending.pop_front();
        }
    }
}

std::optional<double> OnlineEngine::fast_update(LadeModel& model, PartitionState& ps,
                                                const Matrix& y_new) {
    std::optional<FsbItem> item = fsb_view(ps.store, ps.ledger, cfg_.rss.out_len, cfg_.rss.freq);
    if (!item) {
        return std::nullopt;
    }
    return guarded([&] { return fsb_update(model, *item, y_new, cfg_.fsb_stat_loss); }, model);
}

std::optional<double> OnlineEngine::slow_updates(LadeModel& model, PartitionState& ps,
                                                 bool consume) {
    if (!ps.cursor_ready) {
        return std::nullopt;
    }
    const Index in_len = cfg_.rss.in_len;
    while (ps.cursor.position - in_len + 1 < ps.store.oldest()) {
        ps.cursor.advance();
    }
    double sum = 0.0;
    int count = 0;
    while (auto item = ssb_view(ps.store, in_len, cfg_.rss.out_len, ps.cursor.position)) {
        if (consume) {
            ++ssb_items_;
            if (auto loss = slow_update(model, *item)) {
                sum += *loss;
                ++count;
            }
        }
        ps.cursor.advance();
    }
    if (count == 0) {
        return std::nullopt;
    }
    return sum / count;
}

std::optional<double> OnlineEngine::slow_update(LadeModel& model, const SsbItem& item) {
    if (cfg_.ssb_mode == SsbMode::interleaved) {
        return guarded([&] { return *train_on(model, item.x, item.y_full).norm; }, model);
    }
    if (worker_) {
        worker_->submit(item);
        return std::nullopt;
    }
    if (!replica_) {
        replica_ = model.clone_params();
        replica_base_ = model.clone_params();
    }
    std::optional<double> loss;
    try {
        loss = train_on(*replica_, item.x, item.y_full).norm;
        ++since_sync_;
    } catch (const Divergence& e) {
        events_.push_back(std::string("replica diverged, re-cloned from live model: ") + e.what());
        replica_ = model.clone_params();
        replica_base_ = model.clone_params();
        since_sync_ = 0;
        return std::nullopt;
    }
    sync_replica(model, false);
    return loss;
}

void OnlineEngine::sync_replica(LadeModel& model, bool force) {
    if (!replica_) {
        return;
    }
    if (force || (cfg_.sync_every != EngineConfig::kSyncNever && since_sync_ >= cfg_.sync_every)) {
        merge_replica(model, *replica_base_, *replica_);
        replica_.reset();
        replica_base_.reset();
        since_sync_ = 0;
    }
}

double OnlineEngine::guarded(const std::function<double()>& update, LadeModel& model) {
    // Updates leave the model untouched when they throw, so a retry starts
    // from the same parameters.
    try {
        return update();
    } catch (const Divergence& first) {
        model.opt_norm.lr *= 0.5;
        events_.push_back(std::string("divergence, halved normalization lr to ") +
                          std::to_string(model.opt_norm.lr) + ": " + first.what());
        try {
            return update();
        } catch (const Divergence& second) {
            throw Divergence(std::string("online update diverged twice, aborting: ") +
                             second.what());
        }
    }
}

} // namespace actnow
