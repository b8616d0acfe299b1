#include "hssor/dense.hpp"

#include <string>

namespace hssor {

Eigen::MatrixXd assemble_dense(const ApplyFn& apply, std::size_t n) {
    if (n > kMaxDenseColumns)
        throw DimensionError("assemble_dense: " + std::to_string(n) + " columns exceeds the limit of " +
                             std::to_string(kMaxDenseColumns));
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Vector e(n, 0.0);
    Vector col(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        apply(e, col);
        e[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    }
    return out;
}

}  // namespace hssor
