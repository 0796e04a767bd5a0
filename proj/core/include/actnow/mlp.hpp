#pragma once

#include "actnow/types.hpp"

#include <array>
#include <random>
#include <string>
#include <vector>

namespace actnow {

/// Two-layer perceptron with a ReLU hidden layer, applied column-wise:
/// out = w2 * relu(w1 * in + b1) + b2. Biases are single-column matrices
/// so every parameter is a Matrix.
struct Mlp2 {
    Matrix w1; // [hidden x in]
    Matrix b1; // [hidden x 1]
    Matrix w2; // [out x hidden]
    Matrix b2; // [out x 1]

    static Mlp2 zeros(Index in, Index hidden, Index out);
    /// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
    static Mlp2 random(Index in, Index hidden, Index out, std::mt19937_64& rng);

    Index in_dim() const { return w1.cols(); }
    Index hidden_dim() const { return w1.rows(); }
    Index out_dim() const { return w2.rows(); }

    std::array<Matrix*, 4> tensors() { return {&w1, &b1, &w2, &b2}; }
    std::array<const Matrix*, 4> tensors() const { return {&w1, &b1, &w2, &b2}; }
    static constexpr std::array<const char*, 4> tensor_names = {"w1", "b1", "w2", "b2"};

    bool same_shape(const Mlp2& other) const;
    bool all_finite() const;
};

struct Mlp2Cache {
    Matrix input;
    Matrix pre; // hidden pre-activation
    Matrix hidden;
};

/// Columns of `input` are independent samples. The cache is filled when
/// non-null.
Matrix mlp_forward(const Mlp2& net, const Matrix& input, Mlp2Cache* cache);

/// Accumulates parameter gradients into `grad` (same shape as `net`) and
/// returns the gradient with respect to the input.
Matrix mlp_backward(const Mlp2& net, const Mlp2Cache& cache, const Matrix& grad_out, Mlp2& grad);

/// Adam over a fixed list of tensors.
struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step = 0;
    std::vector<Matrix> m;
    std::vector<Matrix> v;

    void reset_moments(const std::vector<const Matrix*>& params);
    void apply(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads);
};

} // namespace actnow
