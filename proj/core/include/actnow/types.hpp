#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace actnow {

// Windows are stored time-major: rows are time steps, columns are series.
// Column-major storage then makes each series a contiguous temporal vector.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

using TimeIndex = std::int64_t;

} // namespace actnow
