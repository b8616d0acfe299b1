#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "hssor/types.hpp"

namespace hssor {

/// Action of a square linear operator: out = Op(in).
using ApplyFn = std::function<void(std::span<const double> in, std::span<double> out)>;

inline constexpr std::size_t kMaxDenseColumns = 5000;

/// Column j of the result is apply(e_j). Refuses n > kMaxDenseColumns.
Eigen::MatrixXd assemble_dense(const ApplyFn& apply, std::size_t n);

}  // namespace hssor
