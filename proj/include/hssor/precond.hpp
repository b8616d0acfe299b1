#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>

#include "hssor/csr.hpp"
#include "hssor/stencil.hpp"
#include "hssor/types.hpp"

namespace hssor {

/// z = B^{-1} r for some approximation B of A.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    virtual std::size_t size() const = 0;
    virtual void apply(std::span<const double> r, std::span<double> z) const = 0;
    virtual std::string name() const = 0;

    Vector apply(std::span<const double> r) const {
        Vector z(r.size());
        apply(r, z);
        return z;
    }
};

enum class PrecondKind { identity, ssor, bssor, ilu0, hssor, twogrid };
enum class BlockShape { line, plane };
enum class SmootherKind { hssor, ssor };

struct PrecondSpec {
    PrecondKind kind = PrecondKind::identity;
    BlockShape block = BlockShape::plane;
    SmootherKind smoother = SmootherKind::hssor;
};

std::string to_string(PrecondKind kind);

// ---------------------------------------------------------------------------
// Point SSOR (omega = 1)

/// z = B^{-1} r with B = (D + L) D^{-1} (D + U). Runs a forward sweep with
/// (D + L) and a backward sweep with (I + D^{-1} U), which is the same as
/// scaling by D and solving with (D + U). Throws SingularError on a zero
/// diagonal.
void ssor_apply(const CsrMatrix& a, std::span<const double> r, std::span<double> z);
Vector ssor_apply(const CsrMatrix& a, std::span<const double> r);

class SsorPreconditioner final : public Preconditioner {
public:
    /// `a` must outlive the preconditioner.
    explicit SsorPreconditioner(const CsrMatrix& a);
    std::size_t size() const override { return a_->nrows(); }
    void apply(std::span<const double> r, std::span<double> z) const override { ssor_apply(*a_, r, z); }
    std::string name() const override { return "ssor"; }
    using Preconditioner::apply;

private:
    const CsrMatrix* a_;
};

// ---------------------------------------------------------------------------
// Hierarchical SSOR
//
//   B = (P + L3)(I + P^{-1} U3)
//   P = (T + L2)(I + T^{-1} U2)
//   T = (M + L1)(I + M^{-1} U1),   M = diag(A)
//
// L_k / U_k are the -/+ bands along axis k (for symmetric A, U_k = L_k^T).
// The top level is T for 1D grids, P for 2D and B for 3D. Nothing is
// factored: every inverse is a pair of nested sweeps over planes, lines and
// points, so the only storage beyond A is per-level scratch.

/// z = B^{-1} r. Requires a Dirichlet stencil with nonzero diagonal.
void hssor_apply(const StencilMatrix& a, std::span<const double> r, std::span<double> z);
Vector hssor_apply(const StencilMatrix& a, std::span<const double> r);

/// y = B x through the factored form (test oracle for B itself).
void hssor_multiply(const StencilMatrix& a, std::span<const double> x, std::span<double> y);
Vector hssor_multiply(const StencilMatrix& a, std::span<const double> x);

class HssorPreconditioner final : public Preconditioner {
public:
    /// `a` must outlive the preconditioner.
    explicit HssorPreconditioner(const StencilMatrix& a);
    std::size_t size() const override { return a_->size(); }
    void apply(std::span<const double> r, std::span<double> z) const override { hssor_apply(*a_, r, z); }
    std::string name() const override { return "hssor"; }
    using Preconditioner::apply;

private:
    const StencilMatrix* a_;
};

// ---------------------------------------------------------------------------
// ILU(0)

/// L is unit lower (diagonal stored), U upper; both on the pattern of A.
struct Ilu0Factors {
    CsrMatrix l;
    CsrMatrix u;
};

inline constexpr double kIlu0PivotTolerance = 1e-14;

/// IKJ incomplete LU restricted to pattern(A). Throws BreakdownError when a
/// pivot falls below kIlu0PivotTolerance times the row's max-norm.
Ilu0Factors ilu0_setup(const CsrMatrix& a);
void ilu0_apply(const Ilu0Factors& f, std::span<const double> r, std::span<double> z);
Vector ilu0_apply(const Ilu0Factors& f, std::span<const double> r);

class Ilu0Preconditioner final : public Preconditioner {
public:
    explicit Ilu0Preconditioner(const CsrMatrix& a) : f_(ilu0_setup(a)) {}
    std::size_t size() const override { return f_.l.nrows(); }
    void apply(std::span<const double> r, std::span<double> z) const override { ilu0_apply(f_, r, z); }
    std::string name() const override { return "ilu0"; }
    const Ilu0Factors& factors() const noexcept { return f_; }
    using Preconditioner::apply;

private:
    Ilu0Factors f_;
};

// ---------------------------------------------------------------------------
// Block SSOR (omega = 1)

/// Unpivoted LU of a banded matrix with half-bandwidth w, stored row-wise as
/// 2w+1 diagonals.
class BandedLu {
public:
    BandedLu() = default;
    /// `band` holds n rows of 2w+1 entries; entry (i, j) lives at
    /// i (2w+1) + (j - i + w). Throws SingularError on a zero pivot.
    BandedLu(std::size_t n, std::size_t half_bandwidth, Vector band);

    std::size_t size() const noexcept { return n_; }
    std::size_t half_bandwidth() const noexcept { return w_; }
    /// Overwrites x with LU^{-1} x.
    void solve_in_place(std::span<double> x) const;
    /// Entry (i, j) of L (unit lower, i > j) or U (i <= j).
    double factor_entry(std::size_t i, std::size_t j) const;

private:
    double& at(std::size_t i, std::size_t j) { return data_[i * (2 * w_ + 1) + (j + w_ - i)]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * (2 * w_ + 1) + (j + w_ - i)]; }

    std::size_t n_ = 0;
    std::size_t w_ = 0;
    Vector data_;
};

struct BssorFactors {
    const CsrMatrix* a = nullptr;
    std::size_t block_size = 1;
    std::vector<BandedLu> blocks;
};

/// Contiguous diagonal blocks of `block_size` rows, each factored as a band
/// matrix. `a` must outlive the factors.
BssorFactors bssor_setup(const CsrMatrix& a, std::size_t block_size);
/// Line blocks (nx) or plane blocks (nx * ny) of a structured grid.
BssorFactors bssor_setup(const CsrMatrix& a, const GridDims& dims, BlockShape shape);
void bssor_apply(const BssorFactors& f, std::span<const double> r, std::span<double> z);
Vector bssor_apply(const BssorFactors& f, std::span<const double> r);

/// Bytes held by the block factors: N (2w + 1) doubles.
double bssor_storage_bytes(const GridDims& dims, BlockShape shape);

class BssorPreconditioner final : public Preconditioner {
public:
    BssorPreconditioner(const CsrMatrix& a, const GridDims& dims, BlockShape shape)
        : f_(bssor_setup(a, dims, shape)) {}
    std::size_t size() const override { return f_.a->nrows(); }
    void apply(std::span<const double> r, std::span<double> z) const override { bssor_apply(f_, r, z); }
    std::string name() const override { return "bssor"; }
    using Preconditioner::apply;

private:
    BssorFactors f_;
};

class IdentityPreconditioner final : public Preconditioner {
public:
    explicit IdentityPreconditioner(std::size_t n) : n_(n) {}
    std::size_t size() const override { return n_; }
    void apply(std::span<const double> r, std::span<double> z) const override {
        std::copy(r.begin(), r.end(), z.begin());
    }
    std::string name() const override { return "none"; }
    using Preconditioner::apply;

private:
    std::size_t n_;
};

}  // namespace hssor
