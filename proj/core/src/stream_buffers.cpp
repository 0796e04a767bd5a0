#include "actnow/stream_buffers.hpp"

#include "actnow/errors.hpp"

#include <mutex>
#include <string>

namespace actnow {

StreamStore::StreamStore(Index width, Index capacity) : width_(width), capacity_(capacity) {
    if (width < 1 || capacity < 1) {
        throw ConfigError("stream store needs positive width and capacity");
    }
    ring_.setZero(capacity, width);
}

Index StreamStore::default_capacity(Index in_len, Index out_len) { return 4 * (in_len + out_len); }

void StreamStore::push(TimeIndex t, const Eigen::Ref<const Vector>& values) {
    if (values.size() != width_) {
        throw ShapeMismatch("push: expected " + std::to_string(width_) + " values, got " +
                            std::to_string(values.size()));
    }
    std::unique_lock lock(mutex_);
    if (size_ > 0) {
        if (t <= now_) {
            throw NonSequential("push: duplicate or stale t=" + std::to_string(t) +
                                " (now=" + std::to_string(now_) + ")");
        }
        if (t != now_ + 1) {
            throw NonSequential("push: t=" + std::to_string(t) + " skips ahead of now=" +
                                std::to_string(now_));
        }
    } else {
        oldest_ = t;
    }
    ring_.row(t % capacity_) = values.transpose();
    now_ = t;
    if (size_ == capacity_) {
        ++oldest_;
    } else {
        ++size_;
    }
}

Matrix StreamStore::window(TimeIndex end_t, Index len) const {
    std::shared_lock lock(mutex_);
    if (size_ == 0 || end_t > now_) {
        violations_.fetch_add(1);
        throw LeakageAttempt(end_t, now_);
    }
    const TimeIndex first = end_t - len + 1;
    if (len < 1 || first < oldest_) {
        throw Evicted("window (" + std::to_string(end_t - len) + ", " + std::to_string(end_t) +
                      "] reaches before oldest retained t=" + std::to_string(oldest_));
    }
    Matrix out(len, width_);
    for (Index i = 0; i < len; ++i) {
        out.row(i) = ring_.row((first + i) % capacity_);
    }
    return out;
}

bool StreamStore::empty() const {
    std::shared_lock lock(mutex_);
    return size_ == 0;
}

TimeIndex StreamStore::now() const {
    std::shared_lock lock(mutex_);
    return size_ == 0 ? -1 : now_;
}

TimeIndex StreamStore::oldest() const {
    std::shared_lock lock(mutex_);
    return size_ == 0 ? 0 : oldest_;
}

Index StreamStore::size() const {
    std::shared_lock lock(mutex_);
    return size_;
}

void StreamStore::clear() {
    std::unique_lock lock(mutex_);
    size_ = 0;
    now_ = -1;
    oldest_ = 0;
}

PredictionLedger::PredictionLedger(Index out_len, Index freq)
    : capacity_(retention(out_len, freq)) {}

Index PredictionLedger::retention(Index out_len, Index freq) {
    if (out_len < 1 || freq < 1) {
        throw ConfigError("ledger needs positive horizon and frequency");
    }
    return (out_len + freq - 1) / freq;
}

void PredictionLedger::append(PredictionRecord record) {
    if (!record.y_hat.allFinite()) {
        throw Divergence("ledger: non-finite forecast at t=" + std::to_string(record.made_at));
    }
    if (!records_.empty() && record.made_at <= records_.back().made_at) {
        throw NonSequential("ledger: forecasts must be appended in time order");
    }
    records_.push_back(std::move(record));
    while (static_cast<Index>(records_.size()) > capacity_) {
        records_.pop_front();
    }
}

const PredictionRecord* PredictionLedger::find(TimeIndex made_at) const {
    for (const auto& r : records_) {
        if (r.made_at == made_at) {
            return &r;
        }
    }
    return nullptr;
}

std::optional<FsbItem> fsb_view(const StreamStore& store, const PredictionLedger& ledger,
                                Index out_len, Index freq) {
    if (store.empty()) {
        return std::nullopt;
    }
    const TimeIndex now = store.now();
    const PredictionRecord* old = ledger.find(now - freq);
    if (old == nullptr) {
        return std::nullopt;
    }
    if (old->horizon() != out_len) {
        throw ShapeMismatch("fsb_view: ledger horizon does not match out_len");
    }
    FsbItem item;
    item.old = *old;
    item.y_part = store.window(now, freq);
    item.overlap_len = out_len - freq;
    return item;
}

std::optional<SsbItem> ssb_view(const StreamStore& store, Index in_len, Index out_len,
                                TimeIndex cursor) {
    if (store.empty() || cursor + out_len > store.now()) {
        return std::nullopt;
    }
    if (cursor - in_len + 1 < store.oldest()) {
        return std::nullopt;
    }
    SsbItem item;
    item.cursor = cursor;
    item.x = store.window(cursor, in_len);
    item.y_full = store.window(cursor + out_len, out_len);
    return item;
}

} // namespace actnow
