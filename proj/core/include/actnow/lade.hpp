#pragma once

#include "actnow/decompose.hpp"
#include "actnow/mlp.hpp"
#include "actnow/types.hpp"

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace actnow {

struct LadeConfig {
    Index in_len = 36;
    Index out_len = 24;
    Index hidden = 512;
    double eps = 1e-5;     ///< decomposition epsilon
    double lr_stat = 1e-4; ///< Adam step size for the statistical flow
    double lr_norm = 1e-4; ///< Adam step size for the normalization flow

    void validate() const;
};

/// Label-decomposition forecaster.
///
/// Statistical flow: per-series temporal mean and variance of the input are
/// mapped by scalar networks (shared across series) to the predicted mean and
/// (softplus) variance of the horizon. Normalization flow: the normalized
/// residual is mapped L_in -> L_out, scaled by the detached variance, passed
/// through the L_out -> L_out combiner and shifted by the detached mean.
///
/// The two flows own disjoint parameters and separate Adam states.
class LadeModel {
public:
    LadeModel() = default;

    static LadeModel init(const LadeConfig& cfg, std::uint64_t seed);

    const LadeConfig& config() const { return cfg_; }

    Mlp2 mean_net; // statistical flow
    Mlp2 var_net;  // statistical flow
    Mlp2 norm_net; // normalization flow
    Mlp2 combiner; // normalization flow
    AdamState opt_stat;
    AdamState opt_norm;

    /// Deep copy of parameters and optimizer state (a replica).
    LadeModel clone_params() const { return *this; }
    /// Replaces parameters and optimizer state with `other`'s. Throws
    /// ShapeMismatch when the architectures differ.
    void adopt_params(const LadeModel& other);

    bool same_architecture(const LadeModel& other) const;
    bool all_finite() const;

    std::vector<Matrix*> stat_params();
    std::vector<Matrix*> norm_params();
    std::vector<const Matrix*> stat_params() const;
    std::vector<const Matrix*> norm_params() const;

    /// Named view over all parameter tensors (checkpointing, diagnostics).
    std::vector<std::pair<std::string, const Matrix*>> named_params() const;
    std::vector<std::pair<std::string, Matrix*>> named_params();

private:
    explicit LadeModel(LadeConfig cfg) : cfg_(cfg) {}

    LadeConfig cfg_;
};

/// Intermediates of one forward pass, columns = series.
struct LadeTape {
    DecompParts input_parts;
    Mlp2Cache mean_cache;
    Mlp2Cache var_cache;
    Mlp2Cache norm_cache;
    Mlp2Cache comb_cache;
    Matrix var_logit; // [1 x N] pre-softplus

    Vector mean_hat;  // [N]
    Vector var_hat;   // [N], > 0
    Matrix norm_hat;  // [L_out x N]
    Matrix y_hat;     // [L_out x N]
};

/// Throws Divergence on a non-finite input or activation.
LadeTape lade_forward(const LadeModel& model, const Matrix& x);

/// MSE(mean_hat, M) + MSE(var_hat, V), targets from decompose(y).
double loss_stat(const Vector& mean_hat, const Vector& var_hat, const DecompParts& target);
/// MSE over every entry.
double loss_norm(const Matrix& y_hat, const Matrix& target);

struct LadeGrads {
    Mlp2 mean_net;
    Mlp2 var_net;
    Mlp2 norm_net;
    Mlp2 combiner;

    static LadeGrads zeros_like(const LadeModel& model);
    std::vector<const Matrix*> stat() const;
    std::vector<const Matrix*> norm() const;
    bool all_finite() const;
};

/// Loss values of one update; a flow without a target reports nullopt.
struct StepLosses {
    std::optional<double> stat;
    std::optional<double> norm;
};

/// Gradients of loss_stat (against stat_target) and loss_norm (against
/// norm_target). The mean and variance enter the normalization path detached,
/// so loss_norm contributes nothing to the statistical parameters and
/// loss_stat nothing to the normalization parameters.
LadeGrads lade_backward(const LadeModel& model, const LadeTape& tape,
                        const DecompParts* stat_target, const Matrix* norm_target,
                        StepLosses* losses = nullptr);

/// Backward pass plus one step of each optimizer whose loss is present.
/// Throws Divergence on a non-finite loss or gradient; parameters are left
/// untouched in that case.
StepLosses backward_and_step(LadeModel& model, const LadeTape& tape,
                             const DecompParts* stat_target, const Matrix* norm_target);

/// Forward, both losses against y, and a step.
StepLosses train_on(LadeModel& model, const Matrix& x, const Matrix& y);

/// Parameter checkpoint: "ACTNOWCK" magic, u32 version, u32 tensor count,
/// manifest of (u32 name length, name, u64 rows, u64 cols), u64 Adam step
/// counters and f64 hyper-parameters, then every tensor as row-major
/// little-endian f64 in manifest order.
void save_checkpoint(const LadeModel& model, const std::filesystem::path& path);
LadeModel load_checkpoint(const std::filesystem::path& path);

} // namespace actnow
