#include "actnow/lade.hpp"

#include "actnow/errors.hpp"

#include <cmath>
#include <utility>

namespace actnow {
namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<const Matrix*> gather(std::initializer_list<const Mlp2*> nets) {
    std::vector<const Matrix*> out;
    for (const Mlp2* n : nets) {
        for (const Matrix* t : n->tensors()) {
            out.push_back(t);
        }
    }
    return out;
}

std::vector<Matrix*> gather_mut(std::initializer_list<Mlp2*> nets) {
    std::vector<Matrix*> out;
    for (Mlp2* n : nets) {
        for (Matrix* t : n->tensors()) {
            out.push_back(t);
        }
    }
    return out;
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw Divergence(std::string("non-finite ") + what);
    }
}

} // namespace

void LadeConfig::validate() const {
    if (in_len < 1 || out_len < 1 || hidden < 1) {
        throw ConfigError("lade: in_len, out_len and hidden must be positive");
    }
    if (!(eps > 0.0)) {
        throw ConfigError("lade: eps must be positive");
    }
    if (!(lr_stat > 0.0) || !(lr_norm > 0.0)) {
        throw ConfigError("lade: learning rates must be positive");
    }
}

LadeModel LadeModel::init(const LadeConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    LadeModel m(cfg);
    std::mt19937_64 rng(seed);
    m.mean_net = Mlp2::random(1, cfg.hidden, 1, rng);
    m.var_net = Mlp2::random(1, cfg.hidden, 1, rng);
    m.norm_net = Mlp2::random(cfg.in_len, cfg.hidden, cfg.out_len, rng);
    m.combiner = Mlp2::random(cfg.out_len, cfg.hidden, cfg.out_len, rng);
    m.opt_stat.lr = cfg.lr_stat;
    m.opt_norm.lr = cfg.lr_norm;
    m.opt_stat.reset_moments(std::as_const(m).stat_params());
    m.opt_norm.reset_moments(std::as_const(m).norm_params());
    return m;
}

bool LadeModel::same_architecture(const LadeModel& other) const {
    return mean_net.same_shape(other.mean_net) && var_net.same_shape(other.var_net) &&
           norm_net.same_shape(other.norm_net) && combiner.same_shape(other.combiner);
}

void LadeModel::adopt_params(const LadeModel& other) {
    if (!same_architecture(other)) {
        throw ShapeMismatch("adopt_params: architectures differ");
    }
    *this = other;
}

bool LadeModel::all_finite() const {
    return mean_net.all_finite() && var_net.all_finite() && norm_net.all_finite() &&
           combiner.all_finite();
}

std::vector<Matrix*> LadeModel::stat_params() { return gather_mut({&mean_net, &var_net}); }
std::vector<Matrix*> LadeModel::norm_params() { return gather_mut({&norm_net, &combiner}); }
std::vector<const Matrix*> LadeModel::stat_params() const { return gather({&mean_net, &var_net}); }
std::vector<const Matrix*> LadeModel::norm_params() const { return gather({&norm_net, &combiner}); }

std::vector<std::pair<std::string, const Matrix*>> LadeModel::named_params() const {
    std::vector<std::pair<std::string, const Matrix*>> out;
    const std::pair<const char*, const Mlp2*> nets[] = {
        {"mean", &mean_net}, {"var", &var_net}, {"norm", &norm_net}, {"combiner", &combiner}};
    for (const auto& [prefix, net] : nets) {
        auto ts = net->tensors();
        for (std::size_t i = 0; i < ts.size(); ++i) {
            out.emplace_back(std::string(prefix) + "." + Mlp2::tensor_names[i], ts[i]);
        }
    }
    return out;
}

std::vector<std::pair<std::string, Matrix*>> LadeModel::named_params() {
    std::vector<std::pair<std::string, Matrix*>> out;
    for (auto& [name, ptr] : std::as_const(*this).named_params()) {
        out.emplace_back(name, const_cast<Matrix*>(ptr));
    }
    return out;
}

LadeTape lade_forward(const LadeModel& model, const Matrix& x) {
    const LadeConfig& cfg = model.config();
    if (x.rows() != cfg.in_len) {
        throw ShapeMismatch("lade_forward: expected " + std::to_string(cfg.in_len) +
                            " input rows, got " + std::to_string(x.rows()));
    }
    require_finite(x, "input");

    LadeTape tape;
    tape.input_parts = decompose(x, cfg.eps);

    const Matrix mean_in = tape.input_parts.mean.transpose();
    const Matrix var_in = tape.input_parts.var.transpose();
    tape.mean_hat = mlp_forward(model.mean_net, mean_in, &tape.mean_cache).row(0).transpose();
    tape.var_logit = mlp_forward(model.var_net, var_in, &tape.var_cache);
    tape.var_hat = tape.var_logit.row(0).transpose().unaryExpr(&softplus);
    tape.norm_hat = mlp_forward(model.norm_net, tape.input_parts.norm, &tape.norm_cache);

    // Mean and variance enter the combiner path as constants.
    const Matrix scaled = tape.norm_hat.array().rowwise() * tape.var_hat.array().transpose();
    tape.y_hat = mlp_forward(model.combiner, scaled, &tape.comb_cache);
    tape.y_hat.rowwise() += tape.mean_hat.transpose();

    require_finite(tape.mean_hat, "mean prediction");
    require_finite(tape.var_hat, "variance prediction");
    require_finite(tape.y_hat, "forecast");
    return tape;
}

double loss_stat(const Vector& mean_hat, const Vector& var_hat, const DecompParts& target) {
    if (mean_hat.size() != target.mean.size() || var_hat.size() != target.var.size()) {
        throw ShapeMismatch("loss_stat: shape mismatch");
    }
    return (mean_hat - target.mean).squaredNorm() / static_cast<double>(mean_hat.size()) +
           (var_hat - target.var).squaredNorm() / static_cast<double>(var_hat.size());
}

double loss_norm(const Matrix& y_hat, const Matrix& target) {
    if (y_hat.rows() != target.rows() || y_hat.cols() != target.cols()) {
        throw ShapeMismatch("loss_norm: shape mismatch");
    }
    return (y_hat - target).squaredNorm() / static_cast<double>(y_hat.size());
}

LadeGrads LadeGrads::zeros_like(const LadeModel& m) {
    auto z = [](const Mlp2& n) { return Mlp2::zeros(n.in_dim(), n.hidden_dim(), n.out_dim()); };
    return {z(m.mean_net), z(m.var_net), z(m.norm_net), z(m.combiner)};
}

std::vector<const Matrix*> LadeGrads::stat() const { return gather({&mean_net, &var_net}); }
std::vector<const Matrix*> LadeGrads::norm() const { return gather({&norm_net, &combiner}); }

bool LadeGrads::all_finite() const {
    return mean_net.all_finite() && var_net.all_finite() && norm_net.all_finite() &&
           combiner.all_finite();
}

LadeGrads lade_backward(const LadeModel& model, const LadeTape& tape,
                        const DecompParts* stat_target, const Matrix* norm_target,
                        StepLosses* losses) {
    LadeGrads g = LadeGrads::zeros_like(model);
    StepLosses l;

    if (stat_target != nullptr) {
        l.stat = loss_stat(tape.mean_hat, tape.var_hat, *stat_target);
        const auto n = static_cast<double>(tape.mean_hat.size());
        const Matrix d_mean = (2.0 / n * (tape.mean_hat - stat_target->mean)).transpose();
        mlp_backward(model.mean_net, tape.mean_cache, d_mean, g.mean_net);

        Matrix d_logit = (2.0 / n * (tape.var_hat - stat_target->var)).transpose();
        for (Index j = 0; j < d_logit.cols(); ++j) {
            d_logit(0, j) *= sigmoid(tape.var_logit(0, j));
        }
        mlp_backward(model.var_net, tape.var_cache, d_logit, g.var_net);
    }

    if (norm_target != nullptr) {
        l.norm = loss_norm(tape.y_hat, *norm_target);
        const Matrix d_y = 2.0 / static_cast<double>(tape.y_hat.size()) *
                           (tape.y_hat - *norm_target);
        const Matrix d_scaled = mlp_backward(model.combiner, tape.comb_cache, d_y, g.combiner);
        const Matrix d_norm_hat =
            d_scaled.array().rowwise() * tape.var_hat.array().transpose();
        mlp_backward(model.norm_net, tape.norm_cache, d_norm_hat, g.norm_net);
    }

    if (losses != nullptr) {
        *losses = l;
    }
    return g;
}

StepLosses backward_and_step(LadeModel& model, const LadeTape& tape,
                             const DecompParts* stat_target, const Matrix* norm_target) {
    StepLosses losses;
    LadeGrads g = lade_backward(model, tape, stat_target, norm_target, &losses);
    if ((losses.stat && !std::isfinite(*losses.stat)) ||
        (losses.norm && !std::isfinite(*losses.norm))) {
        throw Divergence("non-finite loss");
    }
    if (!g.all_finite()) {
        throw Divergence("non-finite gradient");
    }
    if (stat_target != nullptr) {
        model.opt_stat.apply(model.stat_params(), g.stat());
    }
    if (norm_target != nullptr) {
        model.opt_norm.apply(model.norm_params(), g.norm());
    }
    return losses;
}

StepLosses train_on(LadeModel& model, const Matrix& x, const Matrix& y) {
    const LadeTape tape = lade_forward(model, x);
    const DecompParts target = decompose(y, model.config().eps);
    return backward_and_step(model, tape, &target, &y);
}

} // namespace actnow
