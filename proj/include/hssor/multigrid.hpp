#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "hssor/csr.hpp"
#include "hssor/precond.hpp"
#include "hssor/stencil.hpp"

namespace hssor {

/// part[i] is the aggregate of fine node i; aggregates are 0..n_coarse-1,
/// disjoint, nonempty and cover every fine node.
struct AggregateMap {
    std::vector<std::size_t> part;
    std::size_t n_coarse = 0;

    std::size_t n_fine() const noexcept { return part.size(); }
    std::vector<std::size_t> sizes() const;
    /// Throws Error if an id is out of range or an aggregate is empty.
    void validate() const;
};

/// round(n / cf^dim).
std::size_t target_coarse_size(std::size_t n, double cf, int dim);

/// Deterministic multi-round heavy-edge matching on the graph of A (weights
/// |a_ij|). Each round pairs every unmatched aggregate with its most strongly
/// coupled unmatched neighbor (ties to the smallest index) and contracts the
/// pairs; the last round keeps only as many pairs, spread evenly through the
/// round, as are needed to land exactly on target_coarse_size. Throws when
/// cf <= 1 or cf^dim >= N.
AggregateMap aggregate_matching(const CsrMatrix& a, double cf, int dim);

/// Text format: line i holds the 0-based aggregate id of node i.
AggregateMap read_partition(std::istream& in);
AggregateMap read_partition(const std::string& path);
void write_partition(std::ostream& out, const AggregateMap& agg);

/// N x N_c piecewise-constant interpolation: P(i, part[i]) = 1.
CsrMatrix build_interpolation(const AggregateMap& agg);

/// A_c(I, J) = sum over k in G_I, l in G_J of a_kl, i.e. P^T A P without
/// forming the product.
CsrMatrix galerkin_coarse(const CsrMatrix& a, const AggregateMap& agg);

inline constexpr std::size_t kMaxCoarseSize = 100000;

/// Two-grid preconditioner with pre-smoothing only:
///   B^{-1} = S^{-1} + M^{-1} - M^{-1} A S^{-1},  M^{-1} = P A_c^{-1} P^T.
/// A_c is factored once (sparse Cholesky) at construction.
class TwoGridPreconditioner final : public Preconditioner {
public:
    /// `a` must outlive the preconditioner.
    TwoGridPreconditioner(const CsrMatrix& a, std::unique_ptr<Preconditioner> smoother, AggregateMap agg);

    std::size_t size() const override { return a_->nrows(); }
    void apply(std::span<const double> r, std::span<double> z) const override;
    std::string name() const override;
    using Preconditioner::apply;

    const AggregateMap& aggregates() const noexcept { return agg_; }
    const CsrMatrix& coarse_matrix() const noexcept { return coarse_; }
    const Preconditioner& smoother() const noexcept { return *smoother_; }

private:
    const CsrMatrix* a_;
    std::unique_ptr<Preconditioner> smoother_;
    AggregateMap agg_;
    CsrMatrix coarse_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> coarse_factor_;
};

/// Builds the aggregation (or takes `agg` when given), the Galerkin operator
/// and the smoother. The HSSOR smoother runs on `stencil`; `csr` must be its
/// CSR form. Both must outlive the result.
std::unique_ptr<TwoGridPreconditioner> twogrid_setup(const StencilMatrix& stencil, const CsrMatrix& csr,
                                                     SmootherKind smoother, double cf,
                                                     const AggregateMap* agg = nullptr);

}  // namespace hssor
