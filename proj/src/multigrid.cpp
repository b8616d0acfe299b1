#include "hssor/multigrid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hssor {

namespace {

constexpr auto kNone = static_cast<std::size_t>(-1);

// Weighted undirected graph without self loops, CSR layout.
struct Graph {
    std::vector<std::size_t> offsets{0};
    std::vector<std::size_t> adj;
    std::vector<double> weight;

    std::size_t size() const noexcept { return offsets.size() - 1; }
};

Graph graph_of(const CsrMatrix& a) {
    Graph g;
    g.offsets.assign(a.nrows() + 1, 0);
    for (std::size_t i = 0; i < a.nrows(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] == i) continue;
            g.adj.push_back(cols[k]);
            g.weight.push_back(std::abs(vals[k]));
        }
        g.offsets[i + 1] = g.adj.size();
    }
    return g;
}

// Contracts g under `id` (old node -> new node), summing parallel edges.
Graph contract(const Graph& g, const std::vector<std::size_t>& id, std::size_t n_new) {
    std::vector<std::size_t> first(n_new, kNone), second(n_new, kNone);
    for (std::size_t i = 0; i < g.size(); ++i) {
        (first[id[i]] == kNone ? first[id[i]] : second[id[i]]) = i;
    }
    Graph c;
    c.offsets.assign(n_new + 1, 0);
    std::vector<double> acc(n_new, 0.0);
    std::vector<std::size_t> marker(n_new, kNone);
    std::vector<std::size_t> touched;
    for (std::size_t I = 0; I < n_new; ++I) {
        touched.clear();
        for (auto member : {first[I], second[I]}) {
            if (member == kNone) continue;
            for (auto k = g.offsets[member]; k < g.offsets[member + 1]; ++k) {
                const auto J = id[g.adj[k]];
                if (J == I) continue;
                if (marker[J] != I) {
                    marker[J] = I;
                    acc[J] = 0.0;
                    touched.push_back(J);
                }
                acc[J] += g.weight[k];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (auto J : touched) {
            c.adj.push_back(J);
            c.weight.push_back(acc[J]);
        }
        c.offsets[I + 1] = c.adj.size();
    }
    return c;
}

}  // namespace

std::vector<std::size_t> AggregateMap::sizes() const {
    std::vector<std::size_t> s(n_coarse, 0);
    for (auto p : part) {
        if (p >= n_coarse) throw Error("AggregateMap: aggregate id out of range");
        ++s[p];
    }
    return s;
}

void AggregateMap::validate() const {
    const auto s = sizes();
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j] == 0) throw Error("AggregateMap: aggregate " + std::to_string(j) + " is empty");
    }
}

std::size_t target_coarse_size(std::size_t n, double cf, int dim) {
    if (!(cf > 1.0)) throw Error("coarsening factor must exceed 1");
    const double ratio = std::pow(cf, dim);
    if (ratio >= static_cast<double>(n))
        throw Error("coarsening factor too large: cf^dim = " + std::to_string(ratio) +
                    " leaves an empty coarse grid for N = " + std::to_string(n));
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) / ratio)));
}

AggregateMap aggregate_matching(const CsrMatrix& a, double cf, int dim) {
    if (a.nrows() != a.ncols()) throw DimensionError("aggregate_matching: square matrix required");
    const auto n = a.nrows();
    const auto target = target_coarse_size(n, cf, dim);

    AggregateMap agg;
    agg.part.resize(n);
    for (std::size_t i = 0; i < n; ++i) agg.part[i] = i;
    Graph g = graph_of(a);
    std::size_t current = n;

    std::vector<std::size_t> mate;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::size_t> id;
    while (current > target) {
        mate.assign(current, kNone);
        pairs.clear();
        for (std::size_t i = 0; i < current; ++i) {
            if (mate[i] != kNone) continue;
            std::size_t best = kNone;
            double best_w = -1.0;
            for (auto k = g.offsets[i]; k < g.offsets[i + 1]; ++k) {
                const auto j = g.adj[k];
                if (mate[j] != kNone) continue;
                if (g.weight[k] > best_w || (g.weight[k] == best_w && j < best)) {
                    best = j;
                    best_w = g.weight[k];
                }
            }
            if (best == kNone) continue;
            mate[i] = best;
            mate[best] = i;
            pairs.emplace_back(i, best);
        }
        const auto need = current - target;
        if (pairs.size() > need) {
            // Keep `need` pairs spread evenly over the round.
            const auto total = pairs.size();
            std::vector<std::pair<std::size_t, std::size_t>> kept;
            kept.reserve(need);
            for (std::size_t p = 0; p < total; ++p) {
                if ((p + 1) * need / total > p * need / total) {
                    kept.push_back(pairs[p]);
                } else {
                    mate[pairs[p].first] = kNone;
                    mate[pairs[p].second] = kNone;
                }
            }
            pairs.swap(kept);
        }
        if (pairs.empty()) break;  // no edges left to contract

        id.assign(current, kNone);
        std::size_t next = 0;
        for (std::size_t i = 0; i < current; ++i) {
            if (id[i] != kNone) continue;
            id[i] = next;
            if (mate[i] != kNone) id[mate[i]] = next;
            ++next;
        }
        for (auto& p : agg.part) p = id[p];
        g = contract(g, id, next);
        current = next;
    }
    agg.n_coarse = current;
    return agg;
}

AggregateMap read_partition(std::istream& in) {
    AggregateMap agg;
    std::string line;
    std::size_t max_id = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%' || line[0] == '#') continue;
        std::istringstream ls(line);
        long long v = -1;
        if (!(ls >> v) || v < 0) throw Error("partition file: bad aggregate id '" + line + "'");
        agg.part.push_back(static_cast<std::size_t>(v));
        max_id = std::max(max_id, static_cast<std::size_t>(v));
    }
    if (agg.part.empty()) throw Error("partition file: no entries");
    agg.n_coarse = max_id + 1;
    agg.validate();
    return agg;
}

AggregateMap read_partition(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return read_partition(in);
}

void write_partition(std::ostream& out, const AggregateMap& agg) {
    for (auto p : agg.part) out << p << '\n';
}

CsrMatrix build_interpolation(const AggregateMap& agg) {
    agg.validate();
    const auto n = agg.n_fine();
    std::vector<std::size_t> offsets(n + 1);
    for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
    return CsrMatrix(n, agg.n_coarse, std::move(offsets), agg.part, Vector(n, 1.0));
}

CsrMatrix galerkin_coarse(const CsrMatrix& a, const AggregateMap& agg) {
    if (a.nrows() != agg.n_fine() || a.ncols() != agg.n_fine())
        throw DimensionError("galerkin_coarse: aggregate map does not match the matrix");
    agg.validate();
    const auto nc = agg.n_coarse;
    // Fine rows grouped by aggregate, in ascending order.
    std::vector<std::size_t> offsets(nc + 1, 0);
    for (auto p : agg.part) ++offsets[p + 1];
    for (std::size_t j = 0; j < nc; ++j) offsets[j + 1] += offsets[j];
    std::vector<std::size_t> members(agg.n_fine());
    {
        auto next = offsets;
        for (std::size_t i = 0; i < agg.n_fine(); ++i) members[next[agg.part[i]]++] = i;
    }

    std::vector<std::size_t> row_offsets(nc + 1, 0);
    std::vector<std::size_t> cols;
    Vector vals;
    Vector acc(nc, 0.0);
    std::vector<std::size_t> marker(nc, kNone);
    std::vector<std::size_t> touched;
    for (std::size_t I = 0; I < nc; ++I) {
        touched.clear();
        for (auto m = offsets[I]; m < offsets[I + 1]; ++m) {
            const auto k = members[m];
            const auto kc = a.row_cols(k);
            const auto kv = a.row_values(k);
            for (std::size_t e = 0; e < kc.size(); ++e) {
                const auto J = agg.part[kc[e]];
                if (marker[J] != I) {
                    marker[J] = I;
                    acc[J] = 0.0;
                    touched.push_back(J);
                }
                acc[J] += kv[e];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (auto J : touched) {
            cols.push_back(J);
            vals.push_back(acc[J]);
        }
        row_offsets[I + 1] = cols.size();
    }
    return CsrMatrix(nc, nc, std::move(row_offsets), std::move(cols), std::move(vals));
}

TwoGridPreconditioner::TwoGridPreconditioner(const CsrMatrix& a, std::unique_ptr<Preconditioner> smoother,
                                             AggregateMap agg)
    : a_(&a), smoother_(std::move(smoother)), agg_(std::move(agg)) {
    if (!smoother_ || smoother_->size() != a.nrows()) throw DimensionError("two-grid: smoother size mismatch");
    if (agg_.n_coarse > kMaxCoarseSize)
        throw Error("two-grid: coarse size " + std::to_string(agg_.n_coarse) + " exceeds the direct-solve limit");
    coarse_ = galerkin_coarse(a, agg_);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(coarse_.nnz());
    for (std::size_t i = 0; i < coarse_.nrows(); ++i) {
        const auto cols = coarse_.row_cols(i);
        const auto vals = coarse_.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            trips.emplace_back(static_cast<int>(i), static_cast<int>(cols[k]), vals[k]);
        }
    }
    const auto nc = static_cast<Eigen::Index>(agg_.n_coarse);
    Eigen::SparseMatrix<double> ac(nc, nc);
    ac.setFromTriplets(trips.begin(), trips.end());
    coarse_factor_.compute(ac);
    if (coarse_factor_.info() != Eigen::Success) throw SingularError("two-grid: coarse matrix factorization failed");
    const auto d = coarse_factor_.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d[i] == 0.0) throw SingularError("two-grid: coarse matrix is singular");
    }
}

void TwoGridPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
    const auto n = a_->nrows();
    if (r.size() != n || z.size() != n) throw DimensionError("two-grid apply: dimension mismatch");
    smoother_->apply(r, z);
    Vector t(n);
    spmv(*a_, z, t);
    Eigen::VectorXd rc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(agg_.n_coarse));
    for (std::size_t i = 0; i < n; ++i) rc[static_cast<Eigen::Index>(agg_.part[i])] += r[i] - t[i];
    const Eigen::VectorXd xc = coarse_factor_.solve(rc);
    for (std::size_t i = 0; i < n; ++i) z[i] += xc[static_cast<Eigen::Index>(agg_.part[i])];
}

std::string TwoGridPreconditioner::name() const {
    return smoother_->name() == "hssor" ? "gmg-hs" : smoother_->name() == "ssor" ? "gmg-ss" : "gmg-" + smoother_->name();
}

std::unique_ptr<TwoGridPreconditioner> twogrid_setup(const StencilMatrix& stencil, const CsrMatrix& csr,
                                                     SmootherKind smoother, double cf, const AggregateMap* agg) {
    if (csr.nrows() != stencil.size()) throw DimensionError("two-grid: stencil and CSR forms differ in size");
    std::unique_ptr<Preconditioner> s;
    if (smoother == SmootherKind::hssor) {
        s = std::make_unique<HssorPreconditioner>(stencil);
    } else {
        s = std::make_unique<SsorPreconditioner>(csr);
    }
    AggregateMap map;
    if (agg) {
        if (agg->n_fine() != csr.nrows()) throw DimensionError("two-grid: partition length does not match the matrix");
        map = *agg;
    } else {
        map = aggregate_matching(csr, cf, stencil.dims().dimension());
    }
    return std::make_unique<TwoGridPreconditioner>(csr, std::move(s), std::move(map));
}

}  // namespace hssor
