#include "actnow/rss.hpp"

#include "actnow/errors.hpp"

#include <string>

namespace actnow {
namespace {

Matrix gather(const Matrix& values, TimeIndex row0, Index rows, const std::vector<Index>& cols) {
    Matrix out(rows, static_cast<Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.col(static_cast<Index>(j)) = values.col(cols[j]).segment(row0, rows);
    }
    return out;
}

SampleBatch slice(const Graph& g, const TimeRange& range, const RssConfig& cfg, TimeIndex t,
                  std::vector<Index> nodes) {
    SampleBatch b;
    b.t = t;
    b.x = gather(g.values, range.begin + t, cfg.in_len, nodes);
    b.y = gather(g.values, range.begin + t + cfg.in_len, cfg.out_len, nodes);
    if (g.adjacency) {
        b.edges = edge_submatrix(*g.adjacency, nodes);
    }
    b.node_indices = std::move(nodes);
    return b;
}

} // namespace

void RssConfig::validate(Index node_count) const {
    if (partitions < 1 || partitions > node_count) {
        throw ConfigError("partitions must be in [1, " + std::to_string(node_count) + "]");
    }
    if (in_len < 1 || out_len < 1) {
        throw ConfigError("window lengths must be positive");
    }
    if (freq < 1 || freq > out_len) {
        throw ConfigError("update frequency must be in [1, out_len]");
    }
}

Index RssConfig::subgraph_size(Index node_count) const { return node_count / partitions; }

Index RssConfig::partition_count(Index node_count) const {
    const bool has_tail = node_count % partitions != 0;
    return partitions + ((tail == PartitionTail::append && has_tail) ? 1 : 0);
}

TimeIndex window_count(const TimeRange& range, const RssConfig& cfg) {
    return range.size() - cfg.in_len - cfg.out_len;
}

SampleBatch sample_train(const Graph& g, const TimeRange& range, const RssConfig& cfg, Rng& rng,
                         std::int64_t iter) {
    cfg.validate(g.node_count());
    const TimeIndex windows = window_count(range, cfg);
    if (windows < 1) {
        throw RangeTooShort("training range admits no window");
    }
    if (range.begin < 0 || range.end > g.length()) {
        throw OutOfRange("range outside graph");
    }
    const Index n_sub = cfg.subgraph_size(g.node_count());
    std::uniform_int_distribution<Index> pick(0, g.node_count() - 1);
    std::vector<Index> nodes(static_cast<std::size_t>(n_sub));
    for (auto& n : nodes) {
        n = pick(rng);
    }
    return slice(g, range, cfg, iter % windows, std::move(nodes));
}

std::vector<Index> partition_nodes(Index node_count, const RssConfig& cfg, Index partition) {
    const Index n_sub = cfg.subgraph_size(node_count);
    if (partition < 0 || partition >= cfg.partition_count(node_count)) {
        throw OutOfRange("partition " + std::to_string(partition) + " out of range");
    }
    const Index begin = partition * n_sub;
    const Index end = std::min(begin + n_sub, node_count);
    std::vector<Index> nodes;
    nodes.reserve(static_cast<std::size_t>(end - begin));
    for (Index i = begin; i < end; ++i) {
        nodes.push_back(i);
    }
    return nodes;
}

SampleBatch sample_test(const Graph& g, const TimeRange& range, const RssConfig& cfg,
                        std::int64_t t_global) {
    cfg.validate(g.node_count());
    const TimeIndex windows = window_count(range, cfg);
    if (windows < 1) {
        throw RangeTooShort("test range admits no window");
    }
    const std::int64_t limit = windows * cfg.partition_count(g.node_count());
    if (t_global < 0 || t_global >= limit) {
        throw OutOfRange("t_global " + std::to_string(t_global) + " outside [0, " +
                         std::to_string(limit) + ")");
    }
    const Index partition = static_cast<Index>(t_global / windows);
    return slice(g, range, cfg, t_global % windows,
                 partition_nodes(g.node_count(), cfg, partition));
}

Matrix edge_submatrix(const Matrix& e, const std::vector<Index>& idx) {
    for (Index i : idx) {
        if (i < 0 || i >= e.rows() || i >= e.cols()) {
            throw OutOfRange("edge index " + std::to_string(i) + " out of bounds for " +
                             std::to_string(e.rows()) + "x" + std::to_string(e.cols()));
        }
    }
    const auto n = static_cast<Index>(idx.size());
    Matrix out(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            out(i, j) = e(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

void AggregationCheck::validate() const {
    const Index n = features.cols();
    if (weight.cols() != features.rows()) {
        throw ShapeMismatch("weight columns must match feature dimension");
    }
    if (adjacency.rows() != n || adjacency.cols() != n || norm.rows() != n || norm.cols() != n ||
        sample_prob.size() != n) {
        throw ShapeMismatch("adjacency, norm and sample_prob must cover every node");
    }
    for (Index u = 0; u < n; ++u) {
        if (!(sample_prob(u) > 0.0 && sample_prob(u) <= 1.0)) {
            throw ConfigError("sample probability must lie in (0, 1]");
        }
    }
    for (Index v = 0; v < n; ++v) {
        for (Index u = 0; u < n; ++u) {
            if (adjacency(v, u) != 0.0 && !(norm(v, u) > 0.0)) {
                throw ConfigError("normalization constant must be positive on every edge");
            }
        }
    }
}

Vector aggregate_full(const AggregationCheck& chk, Index v) {
    Vector acc = Vector::Zero(chk.features.rows());
    for (Index u = 0; u < chk.adjacency.cols(); ++u) {
        if (chk.adjacency(v, u) != 0.0) {
            acc += chk.features.col(u) / chk.norm(v, u);
        }
    }
    return chk.weight * acc;
}

Vector aggregate_sampled(const AggregationCheck& chk, Index v, Rng& rng) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    Vector acc = Vector::Zero(chk.features.rows());
    for (Index u = 0; u < chk.adjacency.cols(); ++u) {
        // Draw for every node so the random stream does not depend on v's degree.
        const bool kept = coin(rng) < chk.sample_prob(u);
        if (kept && chk.adjacency(v, u) != 0.0) {
            acc += chk.features.col(u) / (chk.norm(v, u) * chk.sample_prob(u));
        }
    }
    return chk.weight * acc;
}

} // namespace actnow
