#pragma once

#include "actnow/graph.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace actnow {

enum class DriftKind { mean_shift, variance_shift, period_shift, mixed };

std::optional<DriftKind> parse_drift_kind(const std::string& s);
const char* to_string(DriftKind k);

struct DriftStreamConfig {
    Index n_nodes = 20;
    Index length = 3000;
    Index base_period = 24;
    DriftKind drift_kind = DriftKind::mixed;
    Index drift_interval = 500;
    double noise_std = 0.1;
    std::uint64_t seed = 0;
    double mean_shift = 1.0;      ///< level change between consecutive regimes
    double variance_factor = 2.0; ///< amplitude ratio between consecutive regimes
    Index neighbours = 4;         ///< k of the nearest-phase ring

    void validate() const;
};

/// Parameters shared by every node within one regime.
struct Regime {
    TimeIndex begin = 0;
    double level = 0.0;
    double scale = 1.0;
    double period = 24.0;
};

/// Regime schedule: a new regime starts at every multiple of drift_interval.
std::vector<Regime> drift_regimes(const DriftStreamConfig& cfg);

/// Sinusoids with node-specific phase, amplitude and offset under
/// piecewise-constant level/scale/period regimes, plus Gaussian noise.
/// Adjacency links each node to its k nearest neighbours in phase order
/// (a ring). Deterministic for a given seed.
Graph gen_drift_stream(const DriftStreamConfig& cfg);

} // namespace actnow
