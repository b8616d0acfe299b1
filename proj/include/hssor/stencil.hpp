#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>

#include "hssor/csr.hpp"
#include "hssor/types.hpp"

namespace hssor {

/// Grid extents. Points are ordered lexicographically, x fastest.
struct GridDims {
    std::size_t nx = 1;
    std::size_t ny = 1;
    std::size_t nz = 1;

    std::size_t size() const noexcept { return nx * ny * nz; }
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return i + nx * (j + ny * k);
    }
    /// Number of axes with more than one point.
    int dimension() const noexcept { return (nx > 1) + (ny > 1) + (nz > 1); }
    friend bool operator==(const GridDims&, const GridDims&) = default;
};

enum class Band : int { center = 0, xm, xp, ym, yp, zm, zp };
inline constexpr std::size_t kBandCount = 7;

/// Seven-band structured operator. Band `xm` at point p holds the coefficient
/// of u[p - 1], `xp` that of u[p + 1], and likewise for y (stride nx) and z
/// (stride nx*ny). Dirichlet matrices store exact zeros where a neighbor falls
/// outside the grid; periodic matrices wrap around instead.
class StencilMatrix {
public:
    StencilMatrix() = default;
    StencilMatrix(GridDims dims, bool periodic);

    const GridDims& dims() const noexcept { return dims_; }
    bool periodic() const noexcept { return periodic_; }
    std::size_t size() const noexcept { return dims_.size(); }

    std::span<double> band(Band b) noexcept { return bands_[static_cast<int>(b)]; }
    std::span<const double> band(Band b) const noexcept { return bands_[static_cast<int>(b)]; }

    /// Index of the neighbor reached through band `b`, if it exists.
    std::optional<std::size_t> neighbor(std::size_t p, Band b) const noexcept;

    /// Zeroes out-of-grid band entries (no-op for periodic matrices).
    void apply_boundary_masks();

    CsrMatrix to_csr() const;

private:
    GridDims dims_{};
    bool periodic_ = false;
    std::array<Vector, kBandCount> bands_{};
};

/// y = A x. Dirichlet rows are summed in ascending column order, which is
/// the order the CSR form uses.
void spmv(const StencilMatrix& a, std::span<const double> x, std::span<double> y);
Vector spmv(const StencilMatrix& a, std::span<const double> x);

/// A = M + L1 + L1^T + L2 + L2^T + L3 + L3^T, with L1, L2, L3 the -x, -y, -z
/// bands.
struct OffsetSplit {
    GridDims dims;
    bool periodic = false;
    Vector m;
    Vector l1;
    Vector l2;
    Vector l3;
};

OffsetSplit split_offsets(const StencilMatrix& a);

/// Rebuilds the symmetric matrix from its split; upper bands are the mirrored
/// lower bands.
StencilMatrix reassemble(const OffsetSplit& split);

}  // namespace hssor
