#include "actnow/drift_stream.hpp"

#include "actnow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace actnow {

std::optional<DriftKind> parse_drift_kind(const std::string& s) {
    if (s == "mean_shift") return DriftKind::mean_shift;
    if (s == "variance_shift") return DriftKind::variance_shift;
    if (s == "period_shift") return DriftKind::period_shift;
    if (s == "mixed") return DriftKind::mixed;
    return std::nullopt;
}

const char* to_string(DriftKind k) {
    switch (k) {
    case DriftKind::mean_shift: return "mean_shift";
    case DriftKind::variance_shift: return "variance_shift";
    case DriftKind::period_shift: return "period_shift";
    case DriftKind::mixed: return "mixed";
    }
    return "?";
}

void DriftStreamConfig::validate() const {
    if (n_nodes < 1 || length < 1) throw ConfigError("drift stream needs nodes and length");
    if (base_period < 4) throw ConfigError("base_period must be >= 4");
    if (drift_interval < base_period) throw ConfigError("drift_interval must be >= base_period");
    if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
    if (!(variance_factor >= 1.0)) throw ConfigError("variance_factor must be >= 1");
    if (neighbours < 0) throw ConfigError("neighbours must be >= 0");
}

std::vector<Regime> drift_regimes(const DriftStreamConfig& cfg) {
    cfg.validate();
    // Separate stream from the node/noise draws so the schedule depends on
    // the seed only.
    std::seed_seq seq{cfg.seed, std::uint64_t{0xd1f7}};
    std::mt19937_64 rng(seq);
    std::bernoulli_distribution coin(0.5);
    const bool shift_level = cfg.drift_kind == DriftKind::mean_shift || cfg.drift_kind == DriftKind::mixed;
    const bool shift_scale =
        cfg.drift_kind == DriftKind::variance_shift || cfg.drift_kind == DriftKind::mixed;
    const bool shift_period =
        cfg.drift_kind == DriftKind::period_shift || cfg.drift_kind == DriftKind::mixed;
    constexpr double kPeriodFactors[] = {1.0, 0.5, 0.75, 1.5};

    std::vector<Regime> out;
    Regime r{0, 0.0, 1.0, static_cast<double>(cfg.base_period)};
    std::size_t period_slot = 0;
    for (TimeIndex begin = 0; begin < cfg.length; begin += cfg.drift_interval) {
        if (begin > 0) {
            if (shift_level) {
                r.level += coin(rng) ? cfg.mean_shift : -cfg.mean_shift;
            }
            if (shift_scale) {
                const bool up = coin(rng);
                double next = up ? r.scale * cfg.variance_factor : r.scale / cfg.variance_factor;
                if (next > 4.0 || next < 0.25) {
                    next = up ? r.scale / cfg.variance_factor : r.scale * cfg.variance_factor;
                }
                r.scale = next;
            }
            if (shift_period) {
                std::uniform_int_distribution<std::size_t> pick(1, std::size(kPeriodFactors) - 1);
                period_slot = (period_slot + pick(rng)) % std::size(kPeriodFactors);
                r.period = static_cast<double>(cfg.base_period) * kPeriodFactors[period_slot];
            }
        }
        r.begin = begin;
        out.push_back(r);
    }
    return out;
}

Graph gen_drift_stream(const DriftStreamConfig& cfg) {
    const std::vector<Regime> regimes = drift_regimes(cfg);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> amp_dist(0.5, 1.5);
    std::uniform_real_distribution<double> offset_dist(-0.5, 0.5);
    std::normal_distribution<double> noise(0.0, 1.0);

    const Index n = cfg.n_nodes;
    std::vector<double> phase(static_cast<std::size_t>(n));
    std::vector<double> amp(static_cast<std::size_t>(n));
    std::vector<double> offset(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        phase[static_cast<std::size_t>(i)] = phase_dist(rng);
        amp[static_cast<std::size_t>(i)] = amp_dist(rng);
        offset[static_cast<std::size_t>(i)] = offset_dist(rng);
    }

    Graph g;
    g.values.resize(cfg.length, n);
    for (TimeIndex t = 0; t < cfg.length; ++t) {
        const Regime& r = regimes[static_cast<std::size_t>(t / cfg.drift_interval)];
        const double omega = 2.0 * std::numbers::pi / r.period;
        for (Index i = 0; i < n; ++i) {
            const auto s = static_cast<std::size_t>(i);
            double v = offset[s] + r.level +
                       r.scale * amp[s] * std::sin(omega * static_cast<double>(t) + phase[s]);
            if (cfg.noise_std > 0.0) {
                v += cfg.noise_std * noise(rng);
            }
            g.values(t, i) = v;
        }
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&phase](Index a, Index b) {
        return phase[static_cast<std::size_t>(a)] < phase[static_cast<std::size_t>(b)];
    });
    Matrix adj = Matrix::Zero(n, n);
    const Index half = std::min(cfg.neighbours / 2, (n - 1) / 2);
    for (Index pos = 0; pos < n; ++pos) {
        for (Index d = 1; d <= half; ++d) {
            const Index a = order[static_cast<std::size_t>(pos)];
            const Index b = order[static_cast<std::size_t>((pos + d) % n)];
            adj(a, b) = 1.0;
            adj(b, a) = 1.0;
        }
    }
    g.adjacency = std::move(adj);
    return g;
}

} // namespace actnow
