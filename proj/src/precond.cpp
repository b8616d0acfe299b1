#include "hssor/precond.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace hssor {

std::string to_string(PrecondKind kind) {
    switch (kind) {
        case PrecondKind::identity: return "none";
        case PrecondKind::ssor: return "ssor";
        case PrecondKind::bssor: return "bssor";
        case PrecondKind::ilu0: return "ilu0";
        case PrecondKind::hssor: return "hssor";
        case PrecondKind::twogrid: return "twogrid";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// SSOR

void ssor_apply(const CsrMatrix& a, std::span<const double> r, std::span<double> z) {
    const auto n = a.nrows();
    if (a.ncols() != n || r.size() != n || z.size() != n) throw DimensionError("ssor_apply: dimension mismatch");
    const auto off = a.row_offsets();
    const auto col = a.col_indices();
    const auto val = a.values();

    for (std::size_t i = 0; i < n; ++i) {
        double sum = r[i];
        double d = 0.0;
        for (auto k = off[i]; k < off[i + 1] && col[k] <= i; ++k) {
            if (col[k] == i) {
                d = val[k];
            } else {
                sum -= val[k] * z[col[k]];
            }
        }
        if (d == 0.0) throw SingularError("ssor_apply: zero diagonal at row " + std::to_string(i));
        z[i] = sum / d;
    }
    for (std::size_t i = n; i-- > 0;) {
        double sum = 0.0;
        double d = 0.0;
        for (auto k = off[i]; k < off[i + 1]; ++k) {
            if (col[k] == i) {
                d = val[k];
            } else if (col[k] > i) {
                sum += val[k] * z[col[k]];
            }
        }
        z[i] = z[i] - sum / d;
    }
}

Vector ssor_apply(const CsrMatrix& a, std::span<const double> r) {
    Vector z(a.nrows());
    ssor_apply(a, r, z);
    return z;
}

SsorPreconditioner::SsorPreconditioner(const CsrMatrix& a) : a_(&a) {
    const auto d = a.diagonal();
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] == 0.0) throw SingularError("ssor: zero diagonal at row " + std::to_string(i));
    }
}

// ---------------------------------------------------------------------------
// Hierarchical SSOR

namespace {

class HssorSweeper {
public:
    explicit HssorSweeper(const StencilMatrix& a) : a_(a), m_(a.band(Band::center)) {
        if (a.periodic()) throw Error("hssor: Dirichlet stencil required");
        for (std::size_t p = 0; p < m_.size(); ++p) {
            if (m_[p] == 0.0) throw SingularError("hssor: zero diagonal at row " + std::to_string(p));
        }
        const auto& d = a.dims();
        levels_[1] = {a.band(Band::xm), a.band(Band::xp), d.nx, 1};
        levels_[2] = {a.band(Band::ym), a.band(Band::yp), d.ny, d.nx};
        levels_[3] = {a.band(Band::zm), a.band(Band::zp), d.nz, d.nx * d.ny};
        top_ = d.nz > 1 ? 3 : d.ny > 1 ? 2 : 1;
        for (int l = 2; l <= top_; ++l) {
            scratch_[l][0].resize(levels_[l].block);
            scratch_[l][1].resize(levels_[l].block);
        }
    }

    void solve(std::span<const double> r, std::span<double> z) {
        check(r.size(), z.size());
        solve(top_, 0, r, z);
    }

    void multiply(std::span<const double> x, std::span<double> y) {
        check(x.size(), y.size());
        multiply(top_, 0, x, y);
    }

private:
    struct Level {
        std::span<const double> lower;
        std::span<const double> upper;
        std::size_t blocks = 1;  // extent along this level's axis
        std::size_t block = 1;   // size of one lower-level block
    };

    void check(std::size_t in, std::size_t out) const {
        if (in != a_.size() || out != a_.size()) throw DimensionError("hssor: dimension mismatch");
    }

    // (M + L1)(I + M^{-1} U1) on the line starting at p0.
    void solve_line(std::size_t p0, std::span<const double> r, std::span<double> z) const {
        const auto& lv = levels_[1];
        const auto n = lv.blocks;
        z[0] = r[0] / m_[p0];
        for (std::size_t i = 1; i < n; ++i) z[i] = (r[i] - lv.lower[p0 + i] * z[i - 1]) / m_[p0 + i];
        for (std::size_t i = n - 1; i-- > 0;) z[i] = z[i] - (lv.upper[p0 + i] * z[i + 1]) / m_[p0 + i];
    }

    void solve(int level, std::size_t p0, std::span<const double> r, std::span<double> z) {
        if (level == 1) {
            solve_line(p0, r, z);
            return;
        }
        const auto& lv = levels_[level];
        const auto bs = lv.block;
        auto& t = scratch_[level][0];
        auto& s = scratch_[level][1];
        // Forward: (Q + L) y = r with Q the lower level, y stored in z.
        for (std::size_t b = 0; b < lv.blocks; ++b) {
            const auto q0 = b * bs;
            if (b == 0) {
                std::copy_n(r.begin(), bs, t.begin());
            } else {
                for (std::size_t q = 0; q < bs; ++q) t[q] = r[q0 + q] - lv.lower[p0 + q0 + q] * z[q0 - bs + q];
            }
            solve(level - 1, p0 + q0, t, z.subspan(q0, bs));
        }
        // Backward: (I + Q^{-1} U) z = y.
        for (std::size_t b = lv.blocks - 1; b-- > 0;) {
            const auto q0 = b * bs;
            for (std::size_t q = 0; q < bs; ++q) t[q] = lv.upper[p0 + q0 + q] * z[q0 + bs + q];
            solve(level - 1, p0 + q0, t, s);
            for (std::size_t q = 0; q < bs; ++q) z[q0 + q] -= s[q];
        }
    }

    void multiply(int level, std::size_t p0, std::span<const double> x, std::span<double> y) {
        const auto& lv = levels_[level];
        const auto bs = lv.block;
        const auto n = lv.blocks * bs;
        // w = (I + Q^{-1} U) x
        Vector w(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
        Vector t(bs), s(bs);
        for (std::size_t b = 0; b + 1 < lv.blocks; ++b) {
            const auto q0 = b * bs;
            for (std::size_t q = 0; q < bs; ++q) t[q] = lv.upper[p0 + q0 + q] * x[q0 + bs + q];
            if (level == 1) {
                s[0] = t[0] / m_[p0 + q0];
            } else {
                solve(level - 1, p0 + q0, t, s);
            }
            for (std::size_t q = 0; q < bs; ++q) w[q0 + q] += s[q];
        }
        // y = (Q + L) w
        for (std::size_t b = 0; b < lv.blocks; ++b) {
            const auto q0 = b * bs;
            auto yb = y.subspan(q0, bs);
            if (level == 1) {
                yb[0] = m_[p0 + q0] * w[q0];
            } else {
                multiply(level - 1, p0 + q0, std::span<const double>(w).subspan(q0, bs), yb);
            }
            if (b > 0) {
                for (std::size_t q = 0; q < bs; ++q) yb[q] += lv.lower[p0 + q0 + q] * w[q0 - bs + q];
            }
        }
    }

    const StencilMatrix& a_;
    std::span<const double> m_;
    std::array<Level, 4> levels_{};
    std::array<std::array<Vector, 2>, 4> scratch_{};
    int top_ = 1;
};

}  // namespace

void hssor_apply(const StencilMatrix& a, std::span<const double> r, std::span<double> z) {
    HssorSweeper(a).solve(r, z);
}

Vector hssor_apply(const StencilMatrix& a, std::span<const double> r) {
    Vector z(a.size());
    hssor_apply(a, r, z);
    return z;
}

void hssor_multiply(const StencilMatrix& a, std::span<const double> x, std::span<double> y) {
    HssorSweeper(a).multiply(x, y);
}

Vector hssor_multiply(const StencilMatrix& a, std::span<const double> x) {
    Vector y(a.size());
    hssor_multiply(a, x, y);
    return y;
}

HssorPreconditioner::HssorPreconditioner(const StencilMatrix& a) : a_(&a) {
    HssorSweeper validate(a);
}

// ---------------------------------------------------------------------------
// ILU(0)

Ilu0Factors ilu0_setup(const CsrMatrix& a) {
    const auto n = a.nrows();
    if (a.ncols() != n) throw DimensionError("ilu0: square matrix required");
    const auto off = a.row_offsets();
    const auto col = a.col_indices();
    Vector lu(a.values().begin(), a.values().end());

    std::vector<std::size_t> diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto cols = a.row_cols(i);
        const auto it = std::lower_bound(cols.begin(), cols.end(), i);
        if (it == cols.end() || *it != i) throw BreakdownError(i);
        diag[i] = off[i] + static_cast<std::size_t>(it - cols.begin());
    }

    constexpr auto kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> pos(n, kNone);
    for (std::size_t i = 0; i < n; ++i) {
        double row_norm = 0.0;
        for (auto k = off[i]; k < off[i + 1]; ++k) {
            pos[col[k]] = k;
            row_norm = std::max(row_norm, std::abs(lu[k]));
        }
        for (auto k = off[i]; k < diag[i]; ++k) {
            const auto kk = col[k];
            lu[k] /= lu[diag[kk]];
            const double lik = lu[k];
            for (auto kj = diag[kk] + 1; kj < off[kk + 1]; ++kj) {
                const auto j = pos[col[kj]];
                if (j != kNone) lu[j] -= lik * lu[kj];
            }
        }
        if (!(std::abs(lu[diag[i]]) >= kIlu0PivotTolerance * row_norm)) throw BreakdownError(i);
        for (auto k = off[i]; k < off[i + 1]; ++k) pos[col[k]] = kNone;
    }

    std::vector<Triplet> lt, ut;
    lt.reserve(a.nnz());
    ut.reserve(a.nnz());
    for (std::size_t i = 0; i < n; ++i) {
        for (auto k = off[i]; k < off[i + 1]; ++k) {
            if (col[k] < i) {
                lt.push_back({i, col[k], lu[k]});
            } else {
                ut.push_back({i, col[k], lu[k]});
            }
        }
        lt.push_back({i, i, 1.0});
    }
    return Ilu0Factors{CsrMatrix::from_triplets(n, n, std::move(lt)), CsrMatrix::from_triplets(n, n, std::move(ut))};
}

void ilu0_apply(const Ilu0Factors& f, std::span<const double> r, std::span<double> z) {
    if (r.size() != f.l.nrows() || z.size() != f.l.nrows()) throw DimensionError("ilu0_apply: dimension mismatch");
    const auto y = tri_solve(f.l, r, TriShape::lower, TriDiag::unit);
    const auto x = tri_solve(f.u, y, TriShape::upper, TriDiag::stored);
    std::copy(x.begin(), x.end(), z.begin());
}

Vector ilu0_apply(const Ilu0Factors& f, std::span<const double> r) {
    Vector z(r.size());
    ilu0_apply(f, r, z);
    return z;
}

// ---------------------------------------------------------------------------
// Block SSOR

BandedLu::BandedLu(std::size_t n, std::size_t half_bandwidth, Vector band)
    : n_(n), w_(half_bandwidth), data_(std::move(band)) {
    if (data_.size() != n_ * (2 * w_ + 1)) throw DimensionError("BandedLu: band storage size mismatch");
    for (std::size_t k = 0; k < n_; ++k) {
        const double pivot = at(k, k);
        if (pivot == 0.0 || !std::isfinite(pivot))
            throw SingularError("bssor: singular diagonal block (pivot " + std::to_string(k) + ")");
        const auto last = std::min(n_ - 1, k + w_);
        for (auto i = k + 1; i <= last; ++i) {
            const double lik = at(i, k) / pivot;
            at(i, k) = lik;
            if (lik == 0.0) continue;
            for (auto j = k + 1; j <= last; ++j) at(i, j) -= lik * at(k, j);
        }
    }
}

void BandedLu::solve_in_place(std::span<double> x) const {
    for (std::size_t i = 0; i < n_; ++i) {
        const auto first = i > w_ ? i - w_ : 0;
        double sum = x[i];
        for (auto j = first; j < i; ++j) sum -= at(i, j) * x[j];
        x[i] = sum;
    }
    for (std::size_t i = n_; i-- > 0;) {
        const auto last = std::min(n_ - 1, i + w_);
        double sum = x[i];
        for (auto j = i + 1; j <= last; ++j) sum -= at(i, j) * x[j];
        x[i] = sum / at(i, i);
    }
}

double BandedLu::factor_entry(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) throw DimensionError("BandedLu: index out of range");
    if ((i > j ? i - j : j - i) > w_) return 0.0;
    return at(i, j);
}

BssorFactors bssor_setup(const CsrMatrix& a, std::size_t block_size) {
    const auto n = a.nrows();
    if (a.ncols() != n) throw DimensionError("bssor: square matrix required");
    if (block_size == 0 || n % block_size != 0)
        throw DimensionError("bssor: block size must divide the matrix size");
    BssorFactors f;
    f.a = &a;
    f.block_size = block_size;
    const auto nblocks = n / block_size;
    f.blocks.reserve(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
        const auto lo = b * block_size;
        const auto hi = lo + block_size;
        std::size_t w = 0;
        for (auto i = lo; i < hi; ++i) {
            for (auto j : a.row_cols(i)) {
                if (j >= lo && j < hi) w = std::max(w, i > j ? i - j : j - i);
            }
        }
        Vector band(block_size * (2 * w + 1), 0.0);
        for (auto i = lo; i < hi; ++i) {
            const auto cols = a.row_cols(i);
            const auto vals = a.row_values(i);
            for (std::size_t k = 0; k < cols.size(); ++k) {
                if (cols[k] >= lo && cols[k] < hi) band[(i - lo) * (2 * w + 1) + (cols[k] + w - i)] = vals[k];
            }
        }
        f.blocks.emplace_back(block_size, w, std::move(band));
    }
    return f;
}

BssorFactors bssor_setup(const CsrMatrix& a, const GridDims& dims, BlockShape shape) {
    if (a.nrows() != dims.size()) throw DimensionError("bssor: grid does not match the matrix");
    return bssor_setup(a, shape == BlockShape::line ? dims.nx : dims.nx * dims.ny);
}

void bssor_apply(const BssorFactors& f, std::span<const double> r, std::span<double> z) {
    const auto& a = *f.a;
    const auto n = a.nrows();
    if (r.size() != n || z.size() != n) throw DimensionError("bssor_apply: dimension mismatch");
    const auto bs = f.block_size;
    Vector t(bs);
    // Forward: (D_b + L_b) y = r.
    for (std::size_t b = 0; b < f.blocks.size(); ++b) {
        const auto lo = b * bs;
        for (std::size_t q = 0; q < bs; ++q) {
            const auto i = lo + q;
            const auto cols = a.row_cols(i);
            const auto vals = a.row_values(i);
            double sum = r[i];
            for (std::size_t k = 0; k < cols.size() && cols[k] < lo; ++k) sum -= vals[k] * z[cols[k]];
            t[q] = sum;
        }
        f.blocks[b].solve_in_place(t);
        std::copy(t.begin(), t.end(), z.begin() + static_cast<std::ptrdiff_t>(lo));
    }
    // Backward: (I + D_b^{-1} U_b) z = y.
    for (std::size_t b = f.blocks.size() - 1; b-- > 0;) {
        const auto lo = b * bs;
        const auto hi = lo + bs;
        for (std::size_t q = 0; q < bs; ++q) {
            const auto i = lo + q;
            const auto cols = a.row_cols(i);
            const auto vals = a.row_values(i);
            double sum = 0.0;
            for (std::size_t k = 0; k < cols.size(); ++k) {
                if (cols[k] >= hi) sum += vals[k] * z[cols[k]];
            }
            t[q] = sum;
        }
        f.blocks[b].solve_in_place(t);
        for (std::size_t q = 0; q < bs; ++q) z[lo + q] -= t[q];
    }
}

Vector bssor_apply(const BssorFactors& f, std::span<const double> r) {
    Vector z(r.size());
    bssor_apply(f, r, z);
    return z;
}

double bssor_storage_bytes(const GridDims& dims, BlockShape shape) {
    const double w = shape == BlockShape::line ? 1.0 : static_cast<double>(dims.nx);
    return static_cast<double>(dims.size()) * (2.0 * w + 1.0) * sizeof(double);
}

}  // namespace hssor
