#include "actnow/errors.hpp"
#include "actnow/stream_buffers.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <thread>

using namespace actnow;

namespace {

// Row t holds (t, 10 t) so windows reveal which indices they came from.
Vector row(TimeIndex t) {
    Vector v(2);
    v << static_cast<double>(t), 10.0 * static_cast<double>(t);
    return v;
}

void fill(StreamStore& s, TimeIndex from, TimeIndex to) {
    for (TimeIndex t = from; t <= to; ++t) s.push(t, row(t));
}

PredictionRecord forecast(TimeIndex made_at, Index out_len, Index in_len = 2, Index width = 2) {
    PredictionRecord r;
    r.made_at = made_at;
    r.y_hat = Matrix::Constant(out_len, width, static_cast<double>(made_at));
    r.input = Matrix::Zero(in_len, width);
    return r;
}

} // namespace

TEST(StreamStore, FirstPushSetsNow) {
    StreamStore s(2, 3);
    EXPECT_TRUE(s.empty());
    EXPECT_EQ(s.now(), -1);
    s.push(0, row(0));
    EXPECT_EQ(s.now(), 0);
    EXPECT_EQ(s.size(), 1);
}

TEST(StreamStore, RingEvictsOldest) {
    StreamStore s(2, 3);
    fill(s, 2, 4);
    EXPECT_EQ(s.oldest(), 2);
    s.push(5, row(5));
    EXPECT_EQ(s.now(), 5);
    EXPECT_EQ(s.size(), 3);
    EXPECT_EQ(s.oldest(), 3);
    EXPECT_THROW(s.window(5, 4), Evicted);
    EXPECT_EQ(s.window(5, 3).col(0), (Vector(3) << 3, 4, 5).finished());
}

TEST(StreamStore, SkippingAheadIsRejected) {
    StreamStore s(2, 3);
    fill(s, 0, 5);
    EXPECT_THROW(s.push(7, row(7)), NonSequential);
    EXPECT_THROW(s.push(5, row(5)), NonSequential);
    EXPECT_EQ(s.now(), 5);
}

TEST(StreamStore, WindowReturnsTrailingRows) {
    StreamStore s(2, 16);
    fill(s, 0, 10);
    const Matrix w = s.window(10, 3);
    EXPECT_EQ(w.col(0), (Vector(3) << 8, 9, 10).finished());
    EXPECT_EQ(w.col(1), (Vector(3) << 80, 90, 100).finished());
    EXPECT_EQ(s.violations(), 0u);
}

TEST(StreamStore, FutureReadIsCountedAndThrown) {
    StreamStore s(2, 16);
    fill(s, 0, 10);
    try {
        s.window(12, 3);
        FAIL() << "expected LeakageAttempt";
    } catch (const LeakageAttempt& e) {
        EXPECT_EQ(e.requested(), 12);
        EXPECT_EQ(e.now(), 10);
    }
    EXPECT_EQ(s.violations(), 1u);
    EXPECT_THROW(s.window(11, 1), LeakageAttempt);
    EXPECT_EQ(s.violations(), 2u);
    s.clear();
    EXPECT_EQ(s.violations(), 2u);
}

TEST(StreamStore, EvictedWindow) {
    StreamStore s(2, 3);
    fill(s, 0, 4);
    EXPECT_THROW(s.window(2, 3), Evicted);
    EXPECT_EQ(s.violations(), 0u);
}

TEST(StreamStoreProperty, SizeNeverExceedsCapacity) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const Index cap = std::uniform_int_distribution<Index>(1, 40)(rng);
        StreamStore s(2, cap);
        const TimeIndex start = std::uniform_int_distribution<TimeIndex>(0, 1000)(rng);
        const TimeIndex len = std::uniform_int_distribution<TimeIndex>(1, 500)(rng);
        for (TimeIndex t = start; t < start + len; ++t) {
            s.push(t, row(t));
            ASSERT_LE(s.size(), cap);
            ASSERT_EQ(s.now() - s.oldest() + 1, s.size());
            const Index k = std::uniform_int_distribution<Index>(1, s.size())(rng);
            ASSERT_EQ(s.window(t, k)(0, 0), static_cast<double>(t - k + 1));
        }
    }
}

TEST(StreamStore, ConcurrentReadersSeeWholeRecords) {
    StreamStore s(64, 32);
    Vector v(64);
    v.setConstant(0.0);
    s.push(0, v);
    std::atomic<bool> done{false};
    std::atomic<int> torn{0};
    std::thread reader([&] {
        while (!done.load()) {
            const TimeIndex now = s.now();
            Matrix w;
            try {
                w = s.window(now, 1);
            } catch (const Evicted&) {
                continue;
            }
            if ((w.array() != w(0, 0)).any()) ++torn;
        }
    });
    for (TimeIndex t = 1; t < 20000; ++t) {
        v.setConstant(static_cast<double>(t));
        s.push(t, v);
    }
    done = true;
    reader.join();
    EXPECT_EQ(torn.load(), 0);
    EXPECT_EQ(s.violations(), 0u);
}

TEST(Ledger, RetainsCeilHorizonOverFrequency) {
    EXPECT_EQ(PredictionLedger::retention(24, 1), 24);
    EXPECT_EQ(PredictionLedger::retention(24, 5), 5);
    EXPECT_EQ(PredictionLedger::retention(24, 24), 1);
    PredictionLedger l(4, 3);
    for (TimeIndex t = 0; t < 30; t += 3) l.append(forecast(t, 4));
    ASSERT_EQ(l.records().size(), 2u);
    EXPECT_EQ(l.records().front().made_at, 24);
    EXPECT_EQ(l.find(21), nullptr);
    EXPECT_THROW(l.append(forecast(27, 4)), NonSequential);
}

TEST(Ledger, RejectsNonFiniteForecast) {
    PredictionLedger l(4, 1);
    PredictionRecord r = forecast(0, 4);
    r.y_hat(1, 1) = std::nan("");
    EXPECT_THROW(l.append(r), Divergence);
}

TEST(FsbView, PartialLabelsAndOverlap) {
    const TimeIndex t0 = 20;
    StreamStore s(2, 64);
    fill(s, 0, t0);
    PredictionLedger l(4, 2);
    l.append(forecast(t0, 4));
    fill(s, t0 + 1, t0 + 2);
    const auto item = fsb_view(s, l, 4, 2);
    ASSERT_TRUE(item.has_value());
    EXPECT_EQ(item->label_first(), t0 + 1);
    EXPECT_EQ(item->label_last(), t0 + 2);
    EXPECT_EQ(item->y_part.col(0), (Vector(2) << 21, 22).finished());
    EXPECT_EQ(item->overlap_len, 2);
    EXPECT_EQ(item->old.made_at, t0);
}

TEST(FsbView, FullHorizonHasNoOverlap) {
    StreamStore s(2, 64);
    fill(s, 0, 10);
    PredictionLedger l(4, 4);
    l.append(forecast(10, 4));
    fill(s, 11, 14);
    const auto item = fsb_view(s, l, 4, 4);
    ASSERT_TRUE(item.has_value());
    EXPECT_EQ(item->overlap_len, 0);
    EXPECT_EQ(item->y_part.rows(), 4);
}

TEST(FsbView, ColdStartYieldsNothing) {
    StreamStore s(2, 64);
    PredictionLedger l(4, 2);
    EXPECT_FALSE(fsb_view(s, l, 4, 2).has_value());
    fill(s, 0, 5);
    EXPECT_FALSE(fsb_view(s, l, 4, 2).has_value());
}

TEST(FsbViewProperty, LabelsAndPseudoLabelsTileTheOldHorizon) {
    for (Index out_len = 1; out_len <= 12; ++out_len) {
        for (Index freq = 1; freq <= out_len; ++freq) {
            StreamStore s(2, 4 * (out_len + 4));
            PredictionLedger l(out_len, freq);
            TimeIndex now = -1;
            for (int step = 0; step < 6; ++step) {
                fill(s, now + 1, now + freq);
                now += freq;
                if (auto item = fsb_view(s, l, out_len, freq)) {
                    std::set<TimeIndex> slots;
                    for (TimeIndex t = item->label_first(); t <= item->label_last(); ++t) {
                        ASSERT_LE(t, s.now());
                        slots.insert(t);
                    }
                    for (Index k = 0; k < item->overlap_len; ++k)
                        ASSERT_TRUE(slots.insert(item->label_last() + 1 + k).second);
                    ASSERT_EQ(static_cast<Index>(slots.size()), out_len);
                    ASSERT_EQ(*slots.begin(), item->old.horizon_first());
                    ASSERT_EQ(*slots.rbegin(), item->old.horizon_last());
                }
                l.append(forecast(now, out_len));
            }
        }
    }
}

TEST(SsbView, FullyLabelledWindow) {
    StreamStore s(2, 64);
    fill(s, 0, 10);
    const auto item = ssb_view(s, 3, 4, 6);
    ASSERT_TRUE(item.has_value());
    EXPECT_EQ(item->x.col(0), (Vector(3) << 4, 5, 6).finished());
    EXPECT_EQ(item->y_full.col(0), (Vector(4) << 7, 8, 9, 10).finished());
}

TEST(SsbView, IncompleteLabelsYieldNothing) {
    StreamStore s(2, 64);
    fill(s, 0, 5);
    EXPECT_FALSE(ssb_view(s, 3, 4, 6).has_value());
    EXPECT_EQ(s.violations(), 0u);
}

TEST(SsbView, CursorEnumerationOverPushSequence) {
    // L_in 3, L_out 4, D_freq 2: replay pushes one at a time and record every
    // item the cursor can emit, advancing by D_freq after each.
    const Index in_len = 3, out_len = 4, freq = 2;
    StreamStore s(2, 64);
    SsbCursor cur{6, freq};
    std::vector<std::pair<TimeIndex, TimeIndex>> emitted; // (now, cursor)
    for (TimeIndex t = 0; t <= 11; ++t) {
        s.push(t, row(t));
        while (auto item = ssb_view(s, in_len, out_len, cur.position)) {
            emitted.emplace_back(t, item->cursor);
            cur.advance();
        }
    }
    ASSERT_EQ(emitted.size(), 1u);
    EXPECT_EQ(emitted[0], (std::pair<TimeIndex, TimeIndex>{10, 6}));
    EXPECT_EQ(cur.position, 8);
    EXPECT_FALSE(ssb_view(s, in_len, out_len, cur.position).has_value());
    s.push(12, row(12));
    const auto next = ssb_view(s, in_len, out_len, cur.position);
    ASSERT_TRUE(next.has_value());
    EXPECT_EQ(next->y_full.col(0), (Vector(4) << 9, 10, 11, 12).finished());
}

TEST(SsbViewProperty, LabelsNeverPassNow) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const Index in_len = std::uniform_int_distribution<Index>(1, 8)(rng);
        const Index out_len = std::uniform_int_distribution<Index>(1, 8)(rng);
        const Index freq = std::uniform_int_distribution<Index>(1, out_len)(rng);
        StreamStore s(2, StreamStore::default_capacity(in_len, out_len));
        SsbCursor cur{in_len - 1, freq};
        for (TimeIndex t = 0; t < 200; ++t) {
            s.push(t, row(t));
            while (auto item = ssb_view(s, in_len, out_len, cur.position)) {
                ASSERT_LE(item->cursor + out_len, s.now());
                ASSERT_EQ(item->y_full(out_len - 1, 0), static_cast<double>(item->cursor + out_len));
                cur.advance();
            }
        }
        EXPECT_EQ(s.violations(), 0u);
    }
}
