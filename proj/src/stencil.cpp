#include "hssor/stencil.hpp"

#include <string>

namespace hssor {

namespace {

struct Offset {
    int axis;  // 0 = x, 1 = y, 2 = z
    int dir;   // -1 or +1
};

constexpr std::array<Offset, kBandCount> kOffsets{{
    {-1, 0}, {0, -1}, {0, +1}, {1, -1}, {1, +1}, {2, -1}, {2, +1},
}};

// Dirichlet rows are summed in ascending column order: -z, -y, -x, c, +x, +y, +z.
constexpr std::array<Band, kBandCount> kColumnOrder{
    Band::zm, Band::ym, Band::xm, Band::center, Band::xp, Band::yp, Band::zp};

}  // namespace

StencilMatrix::StencilMatrix(GridDims dims, bool periodic) : dims_(dims), periodic_(periodic) {
    if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0) throw DimensionError("StencilMatrix: empty grid");
    for (auto& b : bands_) b.assign(dims.size(), 0.0);
}

std::optional<std::size_t> StencilMatrix::neighbor(std::size_t p, Band b) const noexcept {
    const auto off = kOffsets[static_cast<int>(b)];
    if (off.axis < 0) return p;
    const std::size_t extent = off.axis == 0 ? dims_.nx : off.axis == 1 ? dims_.ny : dims_.nz;
    const std::size_t stride = off.axis == 0 ? 1 : off.axis == 1 ? dims_.nx : dims_.nx * dims_.ny;
    if (extent == 1) return std::nullopt;
    const std::size_t coord = (p / stride) % extent;
    if (off.dir < 0) {
        if (coord > 0) return p - stride;
        if (periodic_) return p + (extent - 1) * stride;
        return std::nullopt;
    }
    if (coord + 1 < extent) return p + stride;
    if (periodic_) return p - (extent - 1) * stride;
    return std::nullopt;
}

void StencilMatrix::apply_boundary_masks() {
    if (periodic_) return;
    for (std::size_t bi = 1; bi < kBandCount; ++bi) {
        const auto b = static_cast<Band>(bi);
        auto vals = band(b);
        for (std::size_t p = 0; p < size(); ++p) {
            if (!neighbor(p, b)) vals[p] = 0.0;
        }
    }
}

CsrMatrix StencilMatrix::to_csr() const {
    std::vector<Triplet> triplets;
    triplets.reserve(size() * kBandCount);
    for (std::size_t p = 0; p < size(); ++p) {
        for (auto b : kColumnOrder) {
            if (auto q = neighbor(p, b)) triplets.push_back({p, *q, band(b)[p]});
        }
    }
    return CsrMatrix::from_triplets(size(), size(), std::move(triplets));
}

void spmv(const StencilMatrix& a, std::span<const double> x, std::span<double> y) {
    const auto n = a.size();
    if (x.size() != n || y.size() != n)
        throw DimensionError("spmv: stencil of size " + std::to_string(n) + " applied to " +
                             std::to_string(x.size()));
    const auto& d = a.dims();
    const std::size_t sy = d.nx;
    const std::size_t sz = d.nx * d.ny;
    const auto c = a.band(Band::center);
    const auto xm = a.band(Band::xm);
    const auto xp = a.band(Band::xp);
    const auto ym = a.band(Band::ym);
    const auto yp = a.band(Band::yp);
    const auto zm = a.band(Band::zm);
    const auto zp = a.band(Band::zp);

    if (a.periodic()) {
        for (std::size_t p = 0; p < n; ++p) {
            double sum = 0.0;
            for (auto b : kColumnOrder) {
                if (auto q = a.neighbor(p, b)) sum += a.band(b)[p] * x[*q];
            }
            y[p] = sum;
        }
        return;
    }

    for (std::size_t k = 0; k < d.nz; ++k) {
        for (std::size_t j = 0; j < d.ny; ++j) {
            for (std::size_t i = 0; i < d.nx; ++i) {
                const auto p = d.index(i, j, k);
                double sum = 0.0;
                if (k > 0) sum += zm[p] * x[p - sz];
                if (j > 0) sum += ym[p] * x[p - sy];
                if (i > 0) sum += xm[p] * x[p - 1];
                sum += c[p] * x[p];
                if (i + 1 < d.nx) sum += xp[p] * x[p + 1];
                if (j + 1 < d.ny) sum += yp[p] * x[p + sy];
                if (k + 1 < d.nz) sum += zp[p] * x[p + sz];
                y[p] = sum;
            }
        }
    }
}

Vector spmv(const StencilMatrix& a, std::span<const double> x) {
    Vector y(a.size());
    spmv(a, x, y);
    return y;
}

OffsetSplit split_offsets(const StencilMatrix& a) {
    OffsetSplit s;
    s.dims = a.dims();
    s.periodic = a.periodic();
    const auto copy = [](std::span<const double> v) { return Vector(v.begin(), v.end()); };
    s.m = copy(a.band(Band::center));
    s.l1 = copy(a.band(Band::xm));
    s.l2 = copy(a.band(Band::ym));
    s.l3 = copy(a.band(Band::zm));
    return s;
}

StencilMatrix reassemble(const OffsetSplit& split) {
    StencilMatrix a(split.dims, split.periodic);
    const auto n = a.size();
    std::copy(split.m.begin(), split.m.end(), a.band(Band::center).begin());
    std::copy(split.l1.begin(), split.l1.end(), a.band(Band::xm).begin());
    std::copy(split.l2.begin(), split.l2.end(), a.band(Band::ym).begin());
    std::copy(split.l3.begin(), split.l3.end(), a.band(Band::zm).begin());
    const std::array<std::pair<Band, Band>, 3> mirrors{
        {{Band::xp, Band::xm}, {Band::yp, Band::ym}, {Band::zp, Band::zm}}};
    for (const auto& [upper, lower] : mirrors) {
        auto up = a.band(upper);
        const auto lo = a.band(lower);
        for (std::size_t p = 0; p < n; ++p) {
            auto q = a.neighbor(p, upper);
            up[p] = q ? lo[*q] : 0.0;
        }
    }
    return a;
}

}  // namespace hssor
