#include "actnow/mlp.hpp"

#include "actnow/errors.hpp"

#include <cmath>

namespace actnow {

Mlp2 Mlp2::zeros(Index in, Index hidden, Index out) {
    Mlp2 n;
    n.w1.setZero(hidden, in);
    n.b1.setZero(hidden, 1);
    n.w2.setZero(out, hidden);
    n.b2.setZero(out, 1);
    return n;
}

Mlp2 Mlp2::random(Index in, Index hidden, Index out, std::mt19937_64& rng) {
    Mlp2 n = zeros(in, hidden, out);
    auto fill = [&rng](Matrix& w) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
        std::uniform_real_distribution<double> u(-bound, bound);
        // Row-major fill order keeps the draw sequence independent of storage order.
        for (Index r = 0; r < w.rows(); ++r) {
            for (Index c = 0; c < w.cols(); ++c) {
                w(r, c) = u(rng);
            }
        }
    };
    fill(n.w1);
    fill(n.w2);
    return n;
}

bool Mlp2::same_shape(const Mlp2& other) const {
    auto a = tensors();
    auto b = other.tensors();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i]->rows() != b[i]->rows() || a[i]->cols() != b[i]->cols()) {
            return false;
        }
    }
    return true;
}

bool Mlp2::all_finite() const {
    for (const Matrix* t : tensors()) {
        if (!t->allFinite()) {
            return false;
        }
    }
    return true;
}

Matrix mlp_forward(const Mlp2& net, const Matrix& input, Mlp2Cache* cache) {
    if (input.rows() != net.in_dim()) {
        throw ShapeMismatch("mlp: input has " + std::to_string(input.rows()) + " rows, expected " +
                            std::to_string(net.in_dim()));
    }
    Matrix pre = net.w1 * input;
    pre.colwise() += net.b1.col(0);
    Matrix hidden = pre.cwiseMax(0.0);
    Matrix out = net.w2 * hidden;
    out.colwise() += net.b2.col(0);
    if (cache != nullptr) {
        cache->input = input;
        cache->pre = std::move(pre);
        cache->hidden = std::move(hidden);
    }
    return out;
}

Matrix mlp_backward(const Mlp2& net, const Mlp2Cache& cache, const Matrix& grad_out, Mlp2& grad) {
    grad.w2.noalias() += grad_out * cache.hidden.transpose();
    grad.b2 += grad_out.rowwise().sum();
    Matrix d_hidden = net.w2.transpose() * grad_out;
    d_hidden = (cache.pre.array() > 0.0).select(d_hidden, 0.0);
    grad.w1.noalias() += d_hidden * cache.input.transpose();
    grad.b1 += d_hidden.rowwise().sum();
    return net.w1.transpose() * d_hidden;
}

void AdamState::reset_moments(const std::vector<const Matrix*>& params) {
    step = 0;
    m.clear();
    v.clear();
    for (const Matrix* p : params) {
        m.push_back(Matrix::Zero(p->rows(), p->cols()));
        v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
}

void AdamState::apply(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads) {
    if (params.size() != grads.size() || params.size() != m.size()) {
        throw ShapeMismatch("adam: parameter/gradient/moment count mismatch");
    }
    ++step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * *grads[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i]->cwiseProduct(*grads[i]);
        params[i]->array() -=
            lr * (m[i].array() / c1) / ((v[i].array() / c2).sqrt() + eps);
    }
}

} // namespace actnow
