#pragma once

#include "actnow/graph.hpp"
#include "actnow/types.hpp"

#include <optional>
#include <random>
#include <vector>

namespace actnow {

using Rng = std::mt19937_64;

/// What to do with the N_node mod N_part nodes left over by floor partitioning.
enum class PartitionTail {
    drop,   ///< ignore them (literal floor arithmetic)
    append, ///< add one final, shorter partition
};

struct RssConfig {
    Index partitions = 1; ///< N_part
    Index in_len = 36;    ///< L_in
    Index out_len = 24;   ///< L_out
    Index freq = 1;       ///< D_freq, stream update frequency in time steps
    PartitionTail tail = PartitionTail::drop;

    /// Throws ConfigError unless 1 <= partitions <= node_count and
    /// 1 <= freq <= out_len.
    void validate(Index node_count) const;

    /// N_sub = floor(node_count / partitions).
    Index subgraph_size(Index node_count) const;
    /// Number of test-mode partitions including an appended tail, if any.
    Index partition_count(Index node_count) const;
};

/// One RSS draw. Rows of x/y are time, columns follow node_indices.
struct SampleBatch {
    Matrix x;                     // [L_in x N_sub]
    Matrix y;                     // [L_out x N_sub]
    std::vector<Index> node_indices;
    std::optional<Matrix> edges;  // [N_sub x N_sub]
    TimeIndex t = 0;              // offset relative to the sampled range
};

/// Windows per pass over a range: range.size() - L_in - L_out.
TimeIndex window_count(const TimeRange& range, const RssConfig& cfg);

/// Training draw: N_sub node ids uniformly with replacement, t = iter mod T.
SampleBatch sample_train(const Graph& g, const TimeRange& range, const RssConfig& cfg, Rng& rng,
                         std::int64_t iter);

/// Test-mode partition for a global pass index: partition t_global / T,
/// offset t_global mod T. Partitions are contiguous node blocks.
SampleBatch sample_test(const Graph& g, const TimeRange& range, const RssConfig& cfg,
                        std::int64_t t_global);

/// Node ids [I*N_sub, (I+1)*N_sub) (shorter for an appended tail).
std::vector<Index> partition_nodes(Index node_count, const RssConfig& cfg, Index partition);

/// result(i, j) = e(idx[i], idx[j]).
Matrix edge_submatrix(const Matrix& e, const std::vector<Index>& idx);

/// Inputs for the importance-weighted neighbour aggregation used to check
/// that subgraph sampling is unbiased.
struct AggregationCheck {
    Matrix weight;      // W  [d_out x d_in]
    Matrix features;    // h  [d_in x n], column u is h_u
    Matrix adjacency;   // [n x n], N(v) = nonzero entries of row v
    Matrix norm;        // C  [n x n], C(v,u) > 0 on every edge
    Vector sample_prob; // P  [n], in (0, 1]

    void validate() const;
};

/// A(v) = sum_{u in N(v)} W h_u / C_vu
Vector aggregate_full(const AggregationCheck& chk, Index v);

/// A'(v) = sum over sampled neighbours of W h_u / (C_vu P(u)); each node is
/// kept independently with probability P(u).
Vector aggregate_sampled(const AggregationCheck& chk, Index v, Rng& rng);

} // namespace actnow
