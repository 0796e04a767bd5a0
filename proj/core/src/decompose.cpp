#include "actnow/decompose.hpp"

#include "actnow/errors.hpp"

namespace actnow {

DecompParts decompose(const Matrix& window, double eps) {
    if (window.rows() < 1) {
        throw ShapeMismatch("decompose: empty window");
    }
    if (!(eps > 0.0)) {
        throw ConfigError("decompose: eps must be positive");
    }
    DecompParts p;
    p.eps = eps;
    p.mean = window.colwise().mean().transpose();
    Matrix centred = window.rowwise() - p.mean.transpose();
    p.var = centred.array().square().colwise().mean().transpose();
    p.norm = centred.array().rowwise() / (p.var.array() + eps).transpose();
    return p;
}

Matrix recompose(const DecompParts& parts) {
    Matrix out = parts.norm.array().rowwise() * (parts.var.array() + parts.eps).transpose();
    out.rowwise() += parts.mean.transpose();
    return out;
}

} // namespace actnow
