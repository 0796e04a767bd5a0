#pragma once

#include "actnow/types.hpp"

#include <atomic>
#include <deque>
#include <optional>
#include <shared_mutex>
#include <vector>

namespace actnow {

/// Incremental per-time-step store: each time index is saved exactly once
/// into a bounded ring. Every read is audited against the latest ingested
/// index; a read of the future throws LeakageAttempt and bumps the counter.
///
/// One writer, any number of readers.
class StreamStore {
public:
    StreamStore(Index width, Index capacity);

    StreamStore(const StreamStore&) = delete;
    StreamStore& operator=(const StreamStore&) = delete;

    /// Default capacity for a given window geometry: 4 * (L_in + L_out).
    static Index default_capacity(Index in_len, Index out_len);

    /// t must be now() + 1, or anything when the store is empty.
    void push(TimeIndex t, const Eigen::Ref<const Vector>& values);

    /// Rows (end_t - len, end_t] stacked in time order, [len x width].
    Matrix window(TimeIndex end_t, Index len) const;

    bool empty() const;
    TimeIndex now() const;    ///< latest ingested index, -1 when empty
    TimeIndex oldest() const; ///< oldest retained index, 0 when empty
    Index size() const;
    Index width() const { return width_; }
    Index capacity() const { return capacity_; }

    std::uint64_t violations() const { return violations_.load(); }

    /// Drops every record; the violation counter survives.
    void clear();

private:
    Index width_;
    Index capacity_;
    Matrix ring_; // [capacity x width], row = t mod capacity
    TimeIndex now_ = -1;
    TimeIndex oldest_ = 0;
    Index size_ = 0;
    mutable std::shared_mutex mutex_;
    mutable std::atomic<std::uint64_t> violations_{0};
};

/// A forecast waiting for its labels. The input window is kept so the
/// forecast can be recomputed differentiably later.
struct PredictionRecord {
    TimeIndex made_at = 0; ///< last observed index when the forecast was made
    Matrix y_hat;          ///< [L_out x N_sub], covers (made_at, made_at + L_out]
    Matrix input;          ///< [L_in x N_sub], ends at made_at

    Index horizon() const { return y_hat.rows(); }
    TimeIndex horizon_first() const { return made_at + 1; }
    TimeIndex horizon_last() const { return made_at + y_hat.rows(); }
};

/// Keeps the ceil(L_out / D_freq) most recent forecasts.
class PredictionLedger {
public:
    PredictionLedger(Index out_len, Index freq);

    static Index retention(Index out_len, Index freq);

    void append(PredictionRecord record);
    const PredictionRecord* find(TimeIndex made_at) const;

    const std::deque<PredictionRecord>& records() const { return records_; }
    Index capacity() const { return capacity_; }
    void clear() { records_.clear(); }

private:
    Index capacity_;
    std::deque<PredictionRecord> records_;
};

/// Partial labels for the forecast made D_freq steps ago.
struct FsbItem {
    PredictionRecord old;  ///< the forecast being corrected
    Matrix y_part;         ///< [D_freq x N_sub], rows (made_at, made_at + D_freq]
    Index overlap_len = 0; ///< L_out - D_freq slots filled by pseudo-labels

    TimeIndex label_first() const { return old.made_at + 1; }
    TimeIndex label_last() const { return old.made_at + y_part.rows(); }
};

/// Returns nothing when no forecast was made exactly D_freq steps before now.
std::optional<FsbItem> fsb_view(const StreamStore& store, const PredictionLedger& ledger,
                                Index out_len, Index freq);

/// Fully labelled window: x ends at cursor, y_full covers (cursor, cursor + L_out].
struct SsbItem {
    TimeIndex cursor = 0;
    Matrix x;
    Matrix y_full;
};

/// Position of the next slow-buffer window; advances by D_freq per item.
struct SsbCursor {
    TimeIndex position = 0;
    Index stride = 1;

    void advance() { position += stride; }
};

/// Returns nothing while the labels are incomplete (cursor + L_out > now)
/// or the input has been evicted.
std::optional<SsbItem> ssb_view(const StreamStore& store, Index in_len, Index out_len,
                                TimeIndex cursor);

} // namespace actnow
