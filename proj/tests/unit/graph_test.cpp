#include "actnow/errors.hpp"
#include "actnow/graph.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

namespace fs = std::filesystem;
using namespace actnow;

namespace {

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "actnow_graph_test";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

} // namespace

TEST(Graph, CsvShapePassthrough) {
    const fs::path p = scratch("small.csv");
    write_text(p, "1,2,3\n4,5,6\n7,8,9\n10,11,12\n");
    const Graph g = load_graph(p, std::nullopt, GraphFormat::csv);
    EXPECT_EQ(g.length(), 4);
    EXPECT_EQ(g.node_count(), 3);
    EXPECT_EQ(g.values(3, 2), 12.0);
    EXPECT_FALSE(g.adjacency.has_value());
}

TEST(Graph, RawHeaderGivesMilanoShape) {
    // Payload is a sparse run of zeros.
    const fs::path p = scratch("milano.f64");
    {
        std::ofstream out(p, std::ios::binary);
        const std::uint64_t rows = 1498, cols = 10000;
        out.write(reinterpret_cast<const char*>(&rows), 8);
        out.write(reinterpret_cast<const char*>(&cols), 8);
    }
    fs::resize_file(p, 16 + 1498ull * 10000ull * 8ull);
    const Graph g = load_graph(p, std::nullopt, GraphFormat::raw_f64);
    EXPECT_EQ(g.length(), 1498);
    EXPECT_EQ(g.node_count(), 10000);
    fs::remove(p);
}

TEST(Graph, CsvNanIsRejectedWithPosition) {
    const fs::path p = scratch("nan.csv");
    write_text(p, "1,2\n3,nan\n");
    try {
        load_graph(p, std::nullopt, GraphFormat::csv);
        FAIL() << "expected NonFiniteEntry";
    } catch (const NonFiniteEntry& e) {
        EXPECT_EQ(e.row(), 1);
        EXPECT_EQ(e.col(), 1);
    }
}

TEST(Graph, RawTruncatedFileIsRejected) {
    const fs::path p = scratch("short.f64");
    {
        std::ofstream out(p, std::ios::binary);
        const std::uint64_t rows = 2, cols = 2;
        out.write(reinterpret_cast<const char*>(&rows), 8);
        out.write(reinterpret_cast<const char*>(&cols), 8);
        const double v = 1.0;
        out.write(reinterpret_cast<const char*>(&v), 8);
    }
    EXPECT_THROW(read_raw_f64(p), ShapeMismatch);
}

TEST(Graph, AdjacencyMustBeSquareAndNonnegative) {
    Graph g;
    g.values = Matrix::Ones(5, 3);
    g.adjacency = Matrix::Ones(3, 2);
    EXPECT_THROW(g.validate(), ShapeMismatch);
    g.adjacency = Matrix::Ones(3, 3);
    (*g.adjacency)(0, 1) = -1.0;
    EXPECT_THROW(g.validate(), ConfigError);
}

TEST(Graph, RawRoundTripIsBitExact) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> d(0.0, 1e6);
    Matrix m(17, 5);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
    m(0, 0) = -0.0;
    m(1, 1) = 5e-324;
    const fs::path p = scratch("rt.f64");
    write_raw_f64(p, m);
    const Matrix back = read_raw_f64(p);
    ASSERT_EQ(back.rows(), m.rows());
    ASSERT_EQ(back.cols(), m.cols());
    EXPECT_EQ(std::memcmp(back.data(), m.data(), sizeof(double) * static_cast<std::size_t>(m.size())), 0);
}

TEST(Graph, CsvRoundTripIsExact) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1e3, 1e3);
    Matrix m(6, 4);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
    const fs::path p = scratch("rt.csv");
    write_csv_matrix(p, m);
    EXPECT_EQ(read_csv_matrix(p), m);
}

TEST(Split, MilanoLengthFloorsBoundaries) {
    const StreamSplit s = split_stream(1498, {10, 2, 3}, 36, 24);
    EXPECT_EQ(s.train, (TimeRange{0, 998}));
    EXPECT_EQ(s.val, (TimeRange{998, 1198}));
    EXPECT_EQ(s.test, (TimeRange{1198, 1498}));
    const oracle::Split o = oracle::split(1498, 10, 2, 3);
    EXPECT_EQ(s.train.end, o.train_end);
    EXPECT_EQ(s.val.end, o.val_end);
}

TEST(Split, ExactDivision) {
    // A 2-step val range only holds windows with L_in + L_out <= 2.
    EXPECT_THROW(split_stream(15, {10, 2, 3}, 2, 1), RangeTooShort);
    const StreamSplit s = split_stream(15, {10, 2, 3}, 1, 1);
    EXPECT_EQ(s.train, (TimeRange{0, 10}));
    EXPECT_EQ(s.val, (TimeRange{10, 12}));
    EXPECT_EQ(s.test, (TimeRange{12, 15}));
}

TEST(Split, ShortRangeIsRejected) {
    EXPECT_THROW(split_stream(10, {10, 2, 3}, 4, 4), RangeTooShort);
}

TEST(SplitProperty, RangesPartitionTheStream) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> ratio(1, 20);
    std::uniform_int_distribution<long> len(10, 100000);
    int checked = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const SplitRatios r{ratio(rng), ratio(rng), ratio(rng)};
        const long n = len(rng);
        StreamSplit s;
        try {
            s = split_stream(n, r, 1, 1);
        } catch (const RangeTooShort&) {
            continue;
        }
        ++checked;
        const oracle::Split o = oracle::split(n, r.train, r.val, r.test);
        ASSERT_EQ(s.train.begin, 0);
        ASSERT_EQ(s.train.end, o.train_end);
        ASSERT_EQ(s.val.begin, s.train.end);
        ASSERT_EQ(s.val.end, o.val_end);
        ASSERT_EQ(s.test.begin, s.val.end);
        ASSERT_EQ(s.test.end, n);
        ASSERT_GE(s.val.size(), 2);
    }
    EXPECT_GT(checked, 1000);
}
