#pragma once

#include "actnow/graph.hpp"
#include "actnow/lade.hpp"
#include "actnow/rss.hpp"
#include "actnow/stream_buffers.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace actnow {

enum class Phase { train, val, test };
const char* to_string(Phase p);

/// Where slow-buffer updates run.
enum class SsbMode {
    interleaved, ///< inline on the live model, after the fast update
    replica,     ///< on a cloned model, adopted by the live model every sync_every items
};

/// How replica work is scheduled. Serialized runs the replica inline (and is
/// deterministic); threaded runs it on a worker thread.
enum class ReplicaScheduling { serialized, threaded };

/// Which online mechanisms are active. The four ablation arms are
/// frozen {}, ssb {ssb}, ssb+fsb {ssb, fsb}, ssb+fsb+val {ssb, fsb, val}.
struct OnlineMechanisms {
    bool fsb = true;
    bool ssb = true;
    bool val_updates = true; ///< also update while streaming the validation split

    bool any() const { return fsb || ssb; }
    static std::optional<OnlineMechanisms> from_arm(const std::string& arm);
};

struct EngineConfig {
    static constexpr Index kSyncNever = std::numeric_limits<Index>::max();

    RssConfig rss;
    LadeConfig lade;
    int epochs = 10;
    int batch_size = 64;
    SsbMode ssb_mode = SsbMode::interleaved;
    ReplicaScheduling scheduling = ReplicaScheduling::serialized;
    Index sync_every = 8;
    std::uint64_t seed = 0;
    OnlineMechanisms mechanisms;
    /// Statistical loss on the real-label part of a fast update (D_freq >= 2).
    bool fsb_stat_loss = true;
    /// Step size for both optimizers during online phases; the offline rate
    /// is kept when unset.
    std::optional<double> online_lr;
    /// 0 selects StreamStore::default_capacity.
    Index store_capacity = 0;
    /// Test hook: attempt one read of the future at the first test step.
    bool canary_future_read = false;

    void validate(Index node_count) const;
    Index effective_capacity() const;
};

struct StepLog {
    Phase phase = Phase::test;
    TimeIndex t = 0; ///< made_at of the evaluated forecast
    Index partition = 0;
    double mse = 0.0;
    double mae = 0.0;
    std::optional<double> fsb_loss;
    std::optional<double> ssb_loss;
};

struct OfflineReport {
    LadeModel model;
    std::vector<double> epoch_loss; ///< mean normalization-flow loss per epoch
    bool aborted = false;
    std::string message;
};

/// Offline pretraining on the training range: each epoch draws T * N_part
/// training subgraphs in mini-batches and steps both optimizers per batch.
/// On divergence the last completed epoch's model is returned with
/// aborted = true.
OfflineReport run_offline(const Graph& g, const TimeRange& train, const EngineConfig& cfg,
                          LadeModel model);
OfflineReport run_offline(const Graph& g, const TimeRange& train, const EngineConfig& cfg);

/// Target for correcting an old forecast: the D_freq revealed labels
/// followed by the first L_out - D_freq steps of the newer forecast, which
/// act as constant pseudo-labels for the rest of the old horizon.
Matrix fsb_target(const FsbItem& item, const Matrix& y_new);

/// Recomputes the old forecast from its stored input and takes one step of
/// both optimizers toward fsb_target. The statistical loss uses only the
/// revealed labels and is skipped when `stat_loss` is false or fewer than two
/// labels have arrived. Returns the normalization-flow loss.
double fsb_update(LadeModel& model, const FsbItem& item, const Matrix& y_new, bool stat_loss);

/// Folds slow-buffer progress made on `replica` (cloned from `base`) into
/// the live model. When the live model has not moved since the clone it
/// simply adopts the replica; otherwise the replica's parameter delta is
/// added so concurrent fast updates survive. Optimizer state stays with the
/// live model in that case.
void merge_replica(LadeModel& live, const LadeModel& base, const LadeModel& replica);

/// Per-partition stream state. It survives phase switches; partitions never
/// share buffers.
struct PartitionState {
    PartitionState(std::vector<Index> nodes, Index in_len, Index out_len, Index freq,
                   Index capacity);

    std::vector<Index> nodes;
    StreamStore store;
    PredictionLedger ledger;
    SsbCursor cursor;
    bool cursor_ready = false;

    struct Pending {
        TimeIndex made_at;
        Matrix y_hat;
        Phase phase;
        std::optional<double> fsb_loss;
        std::optional<double> ssb_loss;
    };
    std::deque<Pending> pending; ///< forecasts awaiting their full horizon
};

/// Streams the validation and test splits through the fast/slow buffers.
/// Partitions are processed one after another; within a partition the
/// stream is continuous across the val -> test switch.
class OnlineEngine {
public:
    OnlineEngine(const Graph& g, StreamSplit split, EngineConfig cfg);
    ~OnlineEngine();

    OnlineEngine(const OnlineEngine&) = delete;
    OnlineEngine& operator=(const OnlineEngine&) = delete;

    /// Streams `phase`'s range for every partition, updating `model` when
    /// the configured mechanisms allow it. Throws LeakageAttempt on any
    /// future read.
    std::vector<StepLog> run_online(LadeModel& model, Phase phase);

    const EngineConfig& config() const { return cfg_; }
    const StreamSplit& split() const { return split_; }
    const std::deque<PartitionState>& partitions() const { return partitions_; }
    std::uint64_t leakage_violations() const;
    /// Replica resets, learning-rate halvings and similar notable events.
    const std::vector<std::string>& events() const { return events_; }
    /// Number of slow-buffer items consumed so far.
    std::int64_t ssb_items() const { return ssb_items_; }

private:
    class ReplicaWorker;

    void run_partition(LadeModel& model, PartitionState& ps, Index partition,
                       const TimeRange& range, Phase phase, bool updates,
                       std::vector<StepLog>& logs);
    void ingest(PartitionState& ps, TimeIndex until, Index partition, std::vector<StepLog>& logs);
    std::optional<double> fast_update(LadeModel& model, PartitionState& ps, const Matrix& y_new);
    std::optional<double> slow_updates(LadeModel& model, PartitionState& ps, bool consume);
    std::optional<double> slow_update(LadeModel& model, const SsbItem& item);
    void sync_replica(LadeModel& model, bool force);
    /// Runs `update`; on divergence halves the normalization learning rate
    /// and retries once before giving up.
    double guarded(const std::function<double()>& update, LadeModel& model);

    const Graph& graph_;
    StreamSplit split_;
    EngineConfig cfg_;
    std::deque<PartitionState> partitions_;
    bool val_streamed_ = false;

    std::optional<LadeModel> replica_;
    std::optional<LadeModel> replica_base_; // live model at clone time
    Index since_sync_ = 0;
    std::unique_ptr<ReplicaWorker> worker_;

    std::int64_t ssb_items_ = 0;
    std::vector<std::string> events_;
};

} // namespace actnow
