#include "actnow/diagnostics.hpp"

#include "actnow/decompose.hpp"
#include "actnow/drift_stream.hpp"
#include "actnow/engine.hpp"
#include "actnow/errors.hpp"
#include "actnow/experiments.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace actnow {
namespace {

double rel_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

std::vector<bool> relu_pattern(const LadeTape& t) {
    std::vector<bool> out;
    for (const Mlp2Cache* c : {&t.mean_cache, &t.var_cache, &t.norm_cache, &t.comb_cache}) {
        for (Index i = 0; i < c->pre.size(); ++i) {
            out.push_back(c->pre.data()[i] > 0.0);
        }
    }
    return out;
}

} // namespace

AggregationCheck random_aggregation_check(Index nodes, double edge_prob, double p_min,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    const Index d_in = 4;
    const Index d_out = 3;
    AggregationCheck chk;
    chk.weight.resize(d_out, d_in);
    chk.features.resize(d_in, nodes);
    chk.adjacency = Matrix::Zero(nodes, nodes);
    chk.norm = Matrix::Ones(nodes, nodes);
    chk.sample_prob.resize(nodes);
    for (Index i = 0; i < chk.weight.size(); ++i) chk.weight.data()[i] = sym(rng);
    // Nonnegative features, as after a ReLU layer. Zero-mean features let
    // neighbour terms cancel so A(v) ~ 0 and the relative error is meaningless.
    for (Index i = 0; i < chk.features.size(); ++i) chk.features.data()[i] = u(rng);
    for (Index v = 0; v < nodes; ++v) {
        chk.sample_prob(v) = p_min + (1.0 - p_min) * u(rng);
        for (Index w = 0; w < nodes; ++w) {
            if (v != w && u(rng) < edge_prob) {
                chk.adjacency(v, w) = 1.0;
                chk.norm(v, w) = 0.5 + 2.0 * u(rng);
            }
        }
    }
    return chk;
}

CheckResult check_unbiased_sampling(std::uint64_t seed, Index nodes, std::int64_t samples,
                                    double tolerance) {
    const AggregationCheck chk = random_aggregation_check(nodes, 0.2, 0.2, seed);
    chk.validate();
    Rng rng(seed + 1);
    double worst = 0.0;
    Index worst_node = -1;
    for (Index v = 0; v < nodes; ++v) {
        if ((chk.adjacency.row(v).array() != 0.0).count() == 0) continue;
        const Vector full = aggregate_full(chk, v);
        Vector acc = Vector::Zero(full.size());
        for (std::int64_t k = 0; k < samples; ++k) {
            acc += aggregate_sampled(chk, v, rng);
        }
        acc /= static_cast<double>(samples);
        const double err = (acc - full).norm() / (full.norm() + 1e-12);
        if (err > worst) {
            worst = err;
            worst_node = v;
        }
    }
    std::ostringstream d;
    d << "worst node " << worst_node << " over " << samples << " draws";
    return {"unbiased_sampling", worst < tolerance, worst, tolerance, d.str()};
}

CheckResult check_decompose_roundtrip(std::uint64_t seed, int windows, double tolerance) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> len(1, 96);
    std::uniform_int_distribution<Index> cols(1, 8);
    std::uniform_real_distribution<double> val(-1e3, 1e3);
    double worst = 0.0;
    for (int w = 0; w < windows; ++w) {
        Matrix m(len(rng), cols(rng));
        for (Index i = 0; i < m.size(); ++i) m.data()[i] = val(rng);
        const Matrix back = recompose(decompose(m));
        worst = std::max(worst, (back - m).norm() / std::max(m.norm(), 1e-300));
    }
    Matrix constant = Matrix::Constant(12, 3, 42.5);
    const bool exact = recompose(decompose(constant)) == constant;
    std::ostringstream d;
    d << windows << " windows, constant series " << (exact ? "exact" : "NOT exact");
    return {"decompose_roundtrip", worst < tolerance && exact, worst, tolerance, d.str()};
}

CheckResult check_gradients(std::uint64_t seed, int models, double tolerance) {
    constexpr double h = 1e-5;
    double worst = 0.0;
    bool detached = true;
    std::int64_t checked = 0;
    std::int64_t skipped = 0;
    for (int k = 0; k < models; ++k) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(k));
        std::uniform_int_distribution<Index> width(4, 16);
        std::normal_distribution<double> nd(0.0, 1.0);
        LadeConfig cfg;
        cfg.in_len = 6;
        cfg.out_len = 4;
        cfg.hidden = width(rng);
        LadeModel model = LadeModel::init(cfg, seed * 1000 + static_cast<std::uint64_t>(k));
        Matrix x(cfg.in_len, 3), y(cfg.out_len, 3);
        for (Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng) + 0.5;
        for (Index i = 0; i < y.size(); ++i) y.data()[i] = nd(rng) + 0.5;
        const DecompParts target = decompose(y, cfg.eps);

        const LadeTape tape = lade_forward(model, x);
        const LadeGrads g = lade_backward(model, tape, &target, &y);
        const LadeGrads only_norm = lade_backward(model, tape, nullptr, &y);
        for (const Matrix* t : only_norm.stat()) {
            detached = detached && (t->array() == 0.0).all();
        }
        const auto base_pattern = relu_pattern(tape);

        auto stat_loss = [&](const LadeModel& m, std::vector<bool>* pat) {
            const LadeTape t = lade_forward(m, x);
            if (pat) *pat = relu_pattern(t);
            return loss_stat(t.mean_hat, t.var_hat, target);
        };
        auto norm_loss = [&](const LadeModel& m, std::vector<bool>* pat) {
            const LadeTape t = lade_forward(m, x);
            if (pat) *pat = relu_pattern(t);
            return loss_norm(t.y_hat, y);
        };

        auto params = model.named_params();
        const auto analytic_stat = g.stat();
        const auto analytic_norm = g.norm();
        for (std::size_t p = 0; p < params.size(); ++p) {
            const bool is_stat = p < analytic_stat.size();
            const Matrix& grad = is_stat ? *analytic_stat[p] : *analytic_norm[p - analytic_stat.size()];
            Matrix& param = *params[p].second;
            for (Index i = 0; i < param.size(); ++i) {
                const double saved = param.data()[i];
                std::vector<bool> pat_plus, pat_minus;
                param.data()[i] = saved + h;
                const double lp = is_stat ? stat_loss(model, &pat_plus) : norm_loss(model, &pat_plus);
                param.data()[i] = saved - h;
                const double lm = is_stat ? stat_loss(model, &pat_minus) : norm_loss(model, &pat_minus);
                param.data()[i] = saved;
                if (pat_plus != base_pattern || pat_minus != base_pattern) {
                    ++skipped; // perturbation crossed a ReLU kink
                    continue;
                }
                worst = std::max(worst, rel_error(grad.data()[i], (lp - lm) / (2.0 * h)));
                ++checked;
            }
        }
    }
    std::ostringstream d;
    d << checked << " coordinates checked, " << skipped << " skipped at ReLU kinks, detachment "
      << (detached ? "exact" : "LEAKS");
    return {"gradient_check", worst < tolerance && detached && checked > 0, worst, tolerance, d.str()};
}

CheckResult check_leakage_audit(std::uint64_t seed) {
    DriftStreamConfig sc;
    sc.n_nodes = 6;
    sc.length = 600;
    sc.base_period = 12;
    sc.drift_interval = 100;
    sc.seed = seed;
    const Graph g = gen_drift_stream(sc);

    EngineConfig cfg;
    cfg.rss = RssConfig{2, 12, 6, 2, PartitionTail::drop};
    cfg.lade.in_len = 12;
    cfg.lade.out_len = 6;
    cfg.lade.hidden = 8;
    cfg.epochs = 1;
    cfg.seed = seed;
    const StreamSplit split = split_stream(g.length(), {10, 2, 3}, 12, 6);
    const LadeModel pretrained = run_offline(g, split.train, cfg).model;

    const ArmResult clean = run_protocol(g, split, cfg, pretrained, "ssb+fsb+val");

    bool canary_caught = false;
    EngineConfig canary = cfg;
    canary.canary_future_read = true;
    try {
        (void)run_protocol(g, split, canary, pretrained, "canary");
    } catch (const LeakageAttempt&) {
        canary_caught = true;
    }
    std::ostringstream d;
    d << "violations=" << clean.leakage_violations << ", canary "
      << (canary_caught ? "caught" : "NOT caught");
    return {"leakage_audit", clean.leakage_violations == 0 && canary_caught,
            static_cast<double>(clean.leakage_violations), 0.0, d.str()};
}

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed) {
    return {check_unbiased_sampling(seed), check_decompose_roundtrip(seed), check_gradients(seed),
            check_leakage_audit(seed)};
}

} // namespace actnow
