#pragma once

#include "actnow/types.hpp"

namespace actnow {

/// Mean-variance split of a window along time, per series.
struct DecompParts {
    Vector mean; // [N], temporal mean
    Vector var;  // [N], population variance of the centred window, >= 0
    Matrix norm; // [len x N], centred window divided by (var + eps)
    double eps = 1e-5;
};

/// norm = (w - mean) / (var + eps). The denominator form keeps
/// recompose(decompose(w)) == w for every finite window, constant series
/// included.
DecompParts decompose(const Matrix& window, double eps = 1e-5);

/// (var + eps) * norm + mean, broadcast over time.
Matrix recompose(const DecompParts& parts);

} // namespace actnow
