#pragma once

#include "actnow/drift_stream.hpp"
#include "actnow/engine.hpp"
#include "actnow/report.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace actnow {

struct ExperimentConfig {
    DriftStreamConfig stream;
    EngineConfig engine;
    SplitRatios ratios;
};

/// The synthetic acceptance substrate: 20 nodes, 3000 steps, mixed drift
/// every 500 steps, noise 0.1, split 10:2:3, L_in 36, L_out 24.
ExperimentConfig standard_benchmark(std::uint64_t seed);

inline const std::vector<std::string>& ablation_arms() {
    static const std::vector<std::string> arms = {"frozen", "ssb", "ssb+fsb", "ssb+fsb+val"};
    return arms;
}

struct ArmResult {
    std::string arm;
    RunReport report;
    SummaryRow summary;
    LadeModel model;
    std::uint64_t leakage_violations = 0;
    std::int64_t ssb_items = 0;
    std::vector<std::string> events;
};

/// Streams the validation then the test split through one engine,
/// continuing from `pretrained`.
ArmResult run_protocol(const Graph& g, const StreamSplit& split, const EngineConfig& cfg,
                       const LadeModel& pretrained, const std::string& arm);

std::string describe(const EngineConfig& cfg);

/// Median of a non-empty sample.
double median(std::vector<double> v);

} // namespace actnow
