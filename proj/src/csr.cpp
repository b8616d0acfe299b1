#include "hssor/csr.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace hssor {

CsrMatrix::CsrMatrix(std::size_t nrows, std::size_t ncols, std::vector<std::size_t> row_offsets,
                     std::vector<std::size_t> col_indices, Vector values)
    : nrows_(nrows),
      ncols_(ncols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    if (row_offsets_.size() != nrows_ + 1 || row_offsets_.front() != 0 ||
        row_offsets_.back() != values_.size() || col_indices_.size() != values_.size()) {
        throw DimensionError("CsrMatrix: inconsistent offset/index/value arrays");
    }
    std::vector<std::size_t> perm;
    Vector vals;
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < nrows_; ++i) {
        const auto lo = row_offsets_[i];
        const auto hi = row_offsets_[i + 1];
        if (hi < lo) throw DimensionError("CsrMatrix: row offsets decrease at row " + std::to_string(i));
        if (std::is_sorted(col_indices_.begin() + lo, col_indices_.begin() + hi)) {
            for (auto k = lo; k < hi; ++k) {
                if (col_indices_[k] >= ncols_) throw DimensionError("CsrMatrix: column out of range");
                if (k > lo && col_indices_[k] == col_indices_[k - 1])
                    throw DimensionError("CsrMatrix: duplicate entry in row " + std::to_string(i));
            }
            continue;
        }
        perm.resize(hi - lo);
        std::iota(perm.begin(), perm.end(), lo);
        std::sort(perm.begin(), perm.end(),
                  [&](std::size_t a, std::size_t b) { return col_indices_[a] < col_indices_[b]; });
        cols.clear();
        vals.clear();
        for (auto k : perm) {
            if (col_indices_[k] >= ncols_) throw DimensionError("CsrMatrix: column out of range");
            if (!cols.empty() && cols.back() == col_indices_[k])
                throw DimensionError("CsrMatrix: duplicate entry in row " + std::to_string(i));
            cols.push_back(col_indices_[k]);
            vals.push_back(values_[k]);
        }
        std::copy(cols.begin(), cols.end(), col_indices_.begin() + lo);
        std::copy(vals.begin(), vals.end(), values_.begin() + lo);
    }
}

CsrMatrix CsrMatrix::from_triplets(std::size_t nrows, std::size_t ncols, std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
        if (t.row >= nrows || t.col >= ncols) throw DimensionError("from_triplets: index out of range");
    }
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> offsets(nrows + 1, 0);
    std::vector<std::size_t> cols;
    Vector vals;
    cols.reserve(triplets.size());
    vals.reserve(triplets.size());
    std::size_t prev_row = nrows;
    for (const auto& t : triplets) {
        if (t.row == prev_row && cols.back() == t.col) {
            vals.back() += t.value;
            continue;
        }
        cols.push_back(t.col);
        vals.push_back(t.value);
        ++offsets[t.row + 1];
        prev_row = t.row;
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    return CsrMatrix(nrows, ncols, std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
    std::vector<std::size_t> offsets(n + 1);
    std::iota(offsets.begin(), offsets.end(), std::size_t{0});
    std::vector<std::size_t> cols(n);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    return CsrMatrix(n, n, std::move(offsets), std::move(cols), Vector(n, 1.0));
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    const auto cols = row_cols(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values_[row_offsets_[i] + static_cast<std::size_t>(it - cols.begin())];
}

Vector CsrMatrix::diagonal() const {
    Vector d(std::min(nrows_, ncols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
}

CsrMatrix CsrMatrix::transpose() const {
    std::vector<std::size_t> offsets(ncols_ + 1, 0);
    for (auto c : col_indices_) ++offsets[c + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::vector<std::size_t> next(offsets.begin(), offsets.end() - 1);
    std::vector<std::size_t> cols(nnz());
    Vector vals(nnz());
    // Rows visited in order, so the transposed rows come out sorted.
    for (std::size_t i = 0; i < nrows_; ++i) {
        for (auto k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            const auto dst = next[col_indices_[k]]++;
            cols[dst] = i;
            vals[dst] = values_[k];
        }
    }
    return CsrMatrix(ncols_, nrows_, std::move(offsets), std::move(cols), std::move(vals));
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    if (x.size() != a.ncols() || y.size() != a.nrows())
        throw DimensionError("spmv: dimension mismatch (" + std::to_string(a.nrows()) + "x" +
                             std::to_string(a.ncols()) + " applied to " + std::to_string(x.size()) + ")");
    const auto off = a.row_offsets();
    const auto col = a.col_indices();
    const auto val = a.values();
    for (std::size_t i = 0; i < a.nrows(); ++i) {
        double sum = 0.0;
        for (auto k = off[i]; k < off[i + 1]; ++k) sum += val[k] * x[col[k]];
        y[i] = sum;
    }
}

Vector spmv(const CsrMatrix& a, std::span<const double> x) {
    Vector y(a.nrows());
    spmv(a, x, y);
    return y;
}

Vector tri_solve(const CsrMatrix& a, std::span<const double> b, TriShape shape, TriDiag diag) {
    const auto n = a.nrows();
    if (a.ncols() != n || b.size() != n) throw DimensionError("tri_solve: dimension mismatch");
    Vector x(b.begin(), b.end());
    const auto off = a.row_offsets();
    const auto col = a.col_indices();
    const auto val = a.values();
    auto solve_row = [&](std::size_t i) {
        double sum = x[i];
        double d = 0.0;
        for (auto k = off[i]; k < off[i + 1]; ++k) {
            const auto j = col[k];
            if (j == i) {
                d = val[k];
            } else if ((shape == TriShape::lower) == (j < i)) {
                sum -= val[k] * x[j];
            }
        }
        if (diag == TriDiag::stored) {
            if (d == 0.0) throw SingularError("tri_solve: zero diagonal at row " + std::to_string(i));
            sum /= d;
        }
        x[i] = sum;
    };
    if (shape == TriShape::lower) {
        for (std::size_t i = 0; i < n; ++i) solve_row(i);
    } else {
        for (std::size_t i = n; i-- > 0;) solve_row(i);
    }
    return x;
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.ncols() != b.nrows()) throw DimensionError("multiply: inner dimensions differ");
    std::vector<std::size_t> offsets(a.nrows() + 1, 0);
    std::vector<std::size_t> cols;
    Vector vals;
    Vector acc(b.ncols(), 0.0);
    std::vector<std::size_t> marker(b.ncols(), a.nrows());
    std::vector<std::size_t> touched;
    for (std::size_t i = 0; i < a.nrows(); ++i) {
        touched.clear();
        const auto acols = a.row_cols(i);
        const auto avals = a.row_values(i);
        for (std::size_t p = 0; p < acols.size(); ++p) {
            const auto bcols = b.row_cols(acols[p]);
            const auto bvals = b.row_values(acols[p]);
            for (std::size_t q = 0; q < bcols.size(); ++q) {
                const auto j = bcols[q];
                if (marker[j] != i) {
                    marker[j] = i;
                    acc[j] = 0.0;
                    touched.push_back(j);
                }
                acc[j] += avals[p] * bvals[q];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (auto j : touched) {
            cols.push_back(j);
            vals.push_back(acc[j]);
        }
        offsets[i + 1] = cols.size();
    }
    return CsrMatrix(a.nrows(), b.ncols(), std::move(offsets), std::move(cols), std::move(vals));
}

}  // namespace hssor
