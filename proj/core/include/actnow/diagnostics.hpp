#pragma once

#include "actnow/lade.hpp"
#include "actnow/rss.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace actnow {

/// Outcome of one self-check run by `actnow verify`.
struct CheckResult {
    std::string name;
    bool passed = false;
    double metric = 0.0; ///< worst observed error (meaning depends on the check)
    double threshold = 0.0;
    std::string detail;
};

/// Random graph with edge weights, sampling probabilities in [p_min, 1] and
/// random features/weights for the aggregation estimator.
AggregationCheck random_aggregation_check(Index nodes, double edge_prob, double p_min,
                                          std::uint64_t seed);

/// Mean of `samples` sampled aggregations against the full one, for every
/// non-isolated node. Metric: worst |mean - full| / (|full| + 1e-12).
CheckResult check_unbiased_sampling(std::uint64_t seed, Index nodes = 50,
                                    std::int64_t samples = 10000, double tolerance = 0.02);

/// Metric: worst relative reconstruction error over random windows.
CheckResult check_decompose_roundtrip(std::uint64_t seed, int windows = 1000,
                                      double tolerance = 1e-12);

/// Central differences (step 1e-5) against the analytic gradients on small
/// random models; also requires exact zeros on the statistical parameters
/// for a normalization-only backward pass.
CheckResult check_gradients(std::uint64_t seed, int models = 20, double tolerance = 1e-4);

/// Runs a small online protocol and requires a zero violation counter, then
/// re-runs it with a deliberate future read and requires it to be caught.
CheckResult check_leakage_audit(std::uint64_t seed);

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed);

} // namespace actnow
