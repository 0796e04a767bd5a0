#pragma once

#include "actnow/types.hpp"

#include <filesystem>
#include <optional>

namespace actnow {

/// A graph-structured stream: one column per node, one row per time step.
struct Graph {
    Matrix values;                  // [length x node_count]
    std::optional<Matrix> adjacency; // [node_count x node_count], nonnegative

    Index node_count() const { return values.cols(); }
    Index length() const { return values.rows(); }

    /// Throws NonFiniteEntry / ShapeMismatch / ConfigError when an invariant
    /// does not hold.
    void validate() const;
};

enum class GraphFormat { csv, raw_f64 };

/// Half-open time range [begin, end).
struct TimeRange {
    TimeIndex begin = 0;
    TimeIndex end = 0;

    TimeIndex size() const { return end - begin; }
    friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

struct SplitRatios {
    int train = 10;
    int val = 2;
    int test = 3;
};

struct StreamSplit {
    TimeRange train;
    TimeRange val;
    TimeRange test;
    SplitRatios ratios;
};

Graph load_graph(const std::filesystem::path& values_path,
                 const std::optional<std::filesystem::path>& adjacency_path,
                 GraphFormat format);

/// Reads a plain matrix (no finiteness check beyond the one the caller does).
Matrix read_csv_matrix(const std::filesystem::path& path);
Matrix read_raw_f64(const std::filesystem::path& path);

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);
/// 16-byte header (rows, cols as little-endian u64) followed by row-major
/// little-endian f64 values.
void write_raw_f64(const std::filesystem::path& path, const Matrix& m);

/// Floor-based boundaries; the test range absorbs the rounding remainder.
/// Every range must hold at least one (in_len + out_len) window.
StreamSplit split_stream(Index length, SplitRatios ratios, Index in_len, Index out_len);

} // namespace actnow
