#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hssor/types.hpp"

namespace hssor {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse rows in canonical form: columns strictly increasing
/// within each row, no duplicates.
class CsrMatrix {
public:
    CsrMatrix() = default;

    /// Validates the arrays and sorts each row by column. Throws
    /// DimensionError on malformed offsets, out-of-range or duplicate columns.
    CsrMatrix(std::size_t nrows, std::size_t ncols, std::vector<std::size_t> row_offsets,
              std::vector<std::size_t> col_indices, Vector values);

    /// Duplicates are summed.
    static CsrMatrix from_triplets(std::size_t nrows, std::size_t ncols,
                                   std::vector<Triplet> triplets);
    static CsrMatrix identity(std::size_t n);

    std::size_t nrows() const noexcept { return nrows_; }
    std::size_t ncols() const noexcept { return ncols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const std::size_t> col_indices() const noexcept { return col_indices_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<const std::size_t> row_cols(std::size_t i) const noexcept {
        return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }
    std::span<const double> row_values(std::size_t i) const noexcept {
        return {values_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }

    /// Stored value at (i, j), or 0.
    double at(std::size_t i, std::size_t j) const;

    /// Diagonal entries (0 where not stored).
    Vector diagonal() const;

    CsrMatrix transpose() const;

private:
    std::size_t nrows_ = 0;
    std::size_t ncols_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<std::size_t> col_indices_;
    Vector values_;
};

/// y = A x, rows summed in column order.
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
Vector spmv(const CsrMatrix& a, std::span<const double> x);

enum class TriShape { lower, upper };
enum class TriDiag { unit, stored };

/// Solves with the lower or upper triangle of `a` (entries on the other side
/// are ignored). In unit mode the stored diagonal is ignored too.
Vector tri_solve(const CsrMatrix& a, std::span<const double> b, TriShape shape, TriDiag diag);

/// Sparse product C = A B.
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);

}  // namespace hssor
