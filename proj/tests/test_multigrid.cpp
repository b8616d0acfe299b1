#include <doctest.h>

#include <queue>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "hssor/dense.hpp"
#include "hssor/krylov.hpp"
#include "hssor/multigrid.hpp"
#include "hssor/problems.hpp"
#include "test_support.hpp"

using namespace hssor;
using Eigen::MatrixXd;

namespace {

// Every aggregate induces a connected subgraph of A (BFS restricted to the
// aggregate).
bool aggregates_connected(const CsrMatrix& a, const AggregateMap& agg) {
    std::vector<std::vector<std::size_t>> members(agg.n_coarse);
    for (std::size_t i = 0; i < agg.part.size(); ++i) members[agg.part[i]].push_back(i);
    std::vector<char> seen(a.nrows(), 0);
    for (const auto& g : members) {
        if (g.empty()) return false;
        std::queue<std::size_t> q;
        q.push(g[0]);
        seen[g[0]] = 1;
        std::size_t reached = 0;
        while (!q.empty()) {
            const auto u = q.front();
            q.pop();
            ++reached;
            const auto cols = a.row_cols(u);
            const auto vals = a.row_values(u);
            for (std::size_t k = 0; k < cols.size(); ++k) {
                const auto v = cols[k];
                if (vals[k] != 0.0 && !seen[v] && agg.part[v] == agg.part[u]) {
                    seen[v] = 1;
                    q.push(v);
                }
            }
        }
        if (reached != g.size()) return false;
    }
    return true;
}

void check_partition(const AggregateMap& agg, std::size_t n) {
    REQUIRE(agg.part.size() == n);
    std::vector<std::size_t> count(agg.n_coarse, 0);
    for (auto p : agg.part) {
        REQUIRE(p < agg.n_coarse);
        ++count[p];
    }
    for (auto c : count) CHECK(c > 0);
    CHECK(agg.sizes() == count);
}

MatrixXd dense_apply(const Preconditioner& p) {
    return assemble_dense([&](std::span<const double> x, std::span<double> y) { p.apply(x, y); }, p.size());
}

AggregateMap random_aggregates(std::mt19937& rng, std::size_t n, std::size_t nc) {
    AggregateMap agg;
    agg.n_coarse = nc;
    agg.part.resize(n);
    for (std::size_t i = 0; i < n; ++i) agg.part[i] = i < nc ? i : std::uniform_int_distribution<std::size_t>(0, nc - 1)(rng);
    std::shuffle(agg.part.begin(), agg.part.end(), rng);
    return agg;
}

}  // namespace

TEST_CASE("target coarse size") {
    CHECK(target_coarse_size(64000, 4.5, 3) == 702);
    CHECK(target_coarse_size(144, 3.0, 2) == 16);
    CHECK(target_coarse_size(512, 2.0, 3) == 64);
    CHECK_THROWS_AS(target_coarse_size(100, 1.0, 2), Error);
    CHECK_THROWS_AS(target_coarse_size(16, 4.0, 2), Error);
}

TEST_CASE("matching examples") {
    SUBCASE("1D path of four nodes pairs neighbors") {
        const auto agg = aggregate_matching(testing::trid(4), 2.0, 1);
        CHECK(agg.n_coarse == 2);
        CHECK(agg.part == std::vector<std::size_t>{0, 0, 1, 1});
    }
    SUBCASE("2D n=12 cf=3") {
        const auto a = build_laplacian(GridSpec::isotropic(2, 12)).to_csr();
        const auto agg = aggregate_matching(a, 3.0, 2);
        CHECK(agg.n_coarse == 16);
        check_partition(agg, a.nrows());
        CHECK(aggregates_connected(a, agg));
    }
    SUBCASE("3D n=40 cf=4.5") {
        const auto a = build_laplacian(GridSpec::isotropic(3, 40)).to_csr();
        const auto agg = aggregate_matching(a, 4.5, 3);
        CHECK(agg.n_coarse == 702);
        check_partition(agg, a.nrows());
        CHECK(aggregates_connected(a, agg));
    }
    SUBCASE("coarse grid would be empty") {
        CHECK_THROWS_AS(aggregate_matching(build_laplacian(GridSpec::isotropic(2, 4)).to_csr(), 4.0, 2), Error);
    }
}

TEST_CASE("property: matching yields valid, connected, deterministic aggregates of the target size") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> cfd(1.3, 3.5);
    for (int t = 0; t < 12; ++t) {
        const int dim = 2 + t % 2;
        const std::size_t n = dim == 2 ? 6 + static_cast<std::size_t>(t) * 2 : 5 + static_cast<std::size_t>(t);
        const auto g = t % 3 == 0 ? GridSpec::dc1(dim, n) : GridSpec::isotropic(dim, n);
        const auto a = build_matrix(g).to_csr();
        const double cf = cfd(rng);
        if (std::pow(cf, dim) * 2 >= static_cast<double>(a.nrows())) continue;
        const auto agg = aggregate_matching(a, cf, dim);
        check_partition(agg, a.nrows());
        CHECK(agg.n_coarse == target_coarse_size(a.nrows(), cf, dim));
        CHECK(aggregates_connected(a, agg));
        const auto again = aggregate_matching(a, cf, dim);
        CHECK(again.part == agg.part);
    }
}

TEST_CASE("interpolation") {
    AggregateMap agg{{0, 0, 1, 1}, 2};
    const auto p = build_interpolation(agg);
    MatrixXd expect(4, 2);
    expect << 1, 0, 1, 0, 0, 1, 0, 1;
    CHECK(testing::to_dense(p) == expect);

    std::mt19937 rng(1);
    const auto r = random_aggregates(rng, 50, 9);
    const MatrixXd pd = testing::to_dense(build_interpolation(r));
    const Eigen::VectorXd colsum = pd.transpose() * Eigen::VectorXd::Ones(50);
    const auto sizes = r.sizes();
    for (std::size_t j = 0; j < 9; ++j) CHECK(colsum[static_cast<Eigen::Index>(j)] == static_cast<double>(sizes[j]));
    CHECK(pd * Eigen::VectorXd::Ones(9) == Eigen::VectorXd::Ones(50));
}

TEST_CASE("aggregate map validation") {
    CHECK_THROWS_AS((AggregateMap{{0, 2}, 2}).validate(), Error);
    CHECK_THROWS_AS((AggregateMap{{0, 0}, 2}).validate(), Error);
    CHECK_NOTHROW((AggregateMap{{1, 0}, 2}).validate());
}

TEST_CASE("galerkin coarse operator") {
    SUBCASE("1D n=4 pairs") {
        const auto c = galerkin_coarse(testing::trid(4), AggregateMap{{0, 0, 1, 1}, 2});
        MatrixXd expect(2, 2);
        expect << 2, -1, -1, 2;
        CHECK(testing::to_dense(c) == expect);
    }
    SUBCASE("singletons give A back") {
        const auto a = build_dc1(GridSpec::dc1(2, 7)).to_csr();
        AggregateMap id;
        id.n_coarse = a.nrows();
        for (std::size_t i = 0; i < a.nrows(); ++i) id.part.push_back(i);
        CHECK(testing::to_dense(galerkin_coarse(a, id)) == testing::to_dense(a));
    }
    SUBCASE("property: double sum equals the explicit triple product and stays SPD") {
        std::mt19937 rng(9);
        for (int t = 0; t < 10; ++t) {
            const auto g = t % 2 ? GridSpec::dc1(2, 10 + static_cast<std::size_t>(t)) : GridSpec::isotropic(3, 5 + static_cast<std::size_t>(t % 3));
            const auto a = build_matrix(g).to_csr();
            if (a.nrows() > 400) continue;
            const auto agg = random_aggregates(rng, a.nrows(), 8 + static_cast<std::size_t>(t) * 5);
            const auto p = build_interpolation(agg);
            const auto ac = galerkin_coarse(a, agg);
            const auto explicit_ac = multiply(p.transpose(), multiply(a, p));
            const MatrixXd d = testing::to_dense(ac);
            const MatrixXd e = testing::to_dense(explicit_ac);
            CHECK((d - e).cwiseAbs().maxCoeff() <= 1e-13 * std::max(1.0, e.cwiseAbs().maxCoeff()));
            CHECK((d - d.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * d.cwiseAbs().maxCoeff());
            if (agg.n_coarse <= 64) {
                Eigen::SelfAdjointEigenSolver<MatrixXd> es(d);
                CHECK(es.eigenvalues().minCoeff() > 0.0);
            }
        }
    }
}

TEST_CASE("two-grid setup") {
    SUBCASE("2D n=12 cf=3 ssor smoother") {
        const auto st = build_laplacian(GridSpec::isotropic(2, 12));
        const auto csr = st.to_csr();
        const auto tg = twogrid_setup(st, csr, SmootherKind::ssor, 3.0);
        CHECK(tg->aggregates().n_coarse == 16);
        CHECK(tg->coarse_matrix().nrows() == 16);
        CHECK(tg->name() == "gmg-ss");
    }
    SUBCASE("3D n=8 cf=2 hssor smoother") {
        const auto st = build_laplacian(GridSpec::isotropic(3, 8));
        const auto csr = st.to_csr();
        const auto tg = twogrid_setup(st, csr, SmootherKind::hssor, 2.0);
        CHECK(tg->aggregates().n_coarse == 64);
        CHECK(tg->name() == "gmg-hs");
    }
    SUBCASE("cf too large") {
        const auto st = build_laplacian(GridSpec::isotropic(2, 4));
        const auto csr = st.to_csr();
        CHECK_THROWS_AS(twogrid_setup(st, csr, SmootherKind::hssor, 5.0), Error);
    }
    SUBCASE("partition of the wrong length") {
        const auto st = build_laplacian(GridSpec::isotropic(2, 4));
        const auto csr = st.to_csr();
        const AggregateMap agg{{0, 1}, 2};
        CHECK_THROWS_AS(twogrid_setup(st, csr, SmootherKind::hssor, 2.0, &agg), DimensionError);
    }
}

TEST_CASE("two-grid apply") {
    const auto st = build_dc1(GridSpec::dc1(2, 10));
    const auto csr = st.to_csr();
    const auto tg = twogrid_setup(st, csr, SmootherKind::hssor, 2.0);

    SUBCASE("zero residual") {
        const auto z = tg->apply(Vector(csr.nrows(), 0.0));
        for (double v : z) CHECK(v == 0.0);
    }
    SUBCASE("A = I with identity smoother returns r") {
        const auto eye = CsrMatrix::identity(9);
        const TwoGridPreconditioner p(eye, std::make_unique<IdentityPreconditioner>(9),
                                      AggregateMap{{0, 0, 0, 1, 1, 1, 2, 2, 2}, 3});
        const Vector r{1, -2, 3, 0.5, 4, -1, 2, 2, 7};
        CHECK(p.apply(r) == r);
    }
    SUBCASE("linear") {
        std::mt19937 rng(5);
        for (int k = 0; k < 5; ++k) {
            const auto r1 = testing::random_vector(rng, csr.nrows());
            const auto r2 = testing::random_vector(rng, csr.nrows());
            const double al = 1.7, be = -0.3;
            Vector mix(r1.size());
            for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = al * r1[i] + be * r2[i];
            const auto z1 = tg->apply(r1), z2 = tg->apply(r2), zm = tg->apply(mix);
            double scale = 0.0, diff = 0.0;
            for (std::size_t i = 0; i < zm.size(); ++i) {
                const double c = al * z1[i] + be * z2[i];
                scale = std::max(scale, std::abs(c));
                diff = std::max(diff, std::abs(zm[i] - c));
            }
            CHECK(diff <= 1e-13 * scale * 10);
        }
    }
    SUBCASE("matches S^-1 + M^-1 - M^-1 A S^-1 assembled densely") {
        const MatrixXd a = testing::to_dense(csr);
        const MatrixXd sinv = dense_apply(tg->smoother());
        const MatrixXd p = testing::to_dense(build_interpolation(tg->aggregates()));
        const MatrixXd minv = p * (p.transpose() * a * p).inverse() * p.transpose();
        const MatrixXd oracle = sinv + minv - minv * a * sinv;
        const MatrixXd got = dense_apply(*tg);
        CHECK((got - oracle).cwiseAbs().maxCoeff() <= 1e-10 * oracle.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("two-grid error propagator contracts (2D n=16, cf=2)") {
    const auto st = build_laplacian(GridSpec::isotropic(2, 16));
    const auto csr = st.to_csr();
    const MatrixXd a = testing::to_dense(csr);
    for (auto sm : {SmootherKind::hssor, SmootherKind::ssor}) {
        const auto tg = twogrid_setup(st, csr, sm, 2.0);
        const MatrixXd e = MatrixXd::Identity(a.rows(), a.cols()) - dense_apply(*tg) * a;
        Eigen::EigenSolver<MatrixXd> es(e, false);
        CHECK(es.eigenvalues().cwiseAbs().maxCoeff() < 1.0);
    }
}

TEST_CASE("partition files") {
    const AggregateMap agg{{2, 0, 1, 1, 0}, 3};
    std::stringstream ss;
    write_partition(ss, agg);
    const auto back = read_partition(ss);
    CHECK(back.part == agg.part);
    CHECK(back.n_coarse == 3);

    std::istringstream bad("0\n1\nx\n");
    CHECK_THROWS_AS(read_partition(bad), Error);
    std::istringstream gap("0\n2\n");
    CHECK_THROWS_AS(read_partition(gap), Error);
    CHECK_THROWS_AS(read_partition(std::string("/nonexistent/partition.txt")), Error);
}

TEST_CASE("imported partition drives the two-grid operator") {
    const auto st = build_laplacian(GridSpec::isotropic(2, 8));
    const auto csr = st.to_csr();
    // Column strips of width two.
    AggregateMap agg;
    agg.n_coarse = 4;
    for (std::size_t j = 0; j < 8; ++j)
        for (std::size_t i = 0; i < 8; ++i) agg.part.push_back(i / 2);
    const auto tg = twogrid_setup(st, csr, SmootherKind::ssor, 4.5, &agg);
    CHECK(tg->aggregates().part == agg.part);
    CHECK(tg->coarse_matrix().nrows() == 4);
}

TEST_CASE("two-grid iterations are mesh independent in 2D") {
    std::vector<std::size_t> its;
    for (std::size_t n : {99, 199}) {
        const auto p = make_problem(GridSpec::isotropic(2, n));
        const auto csr = p.a.to_csr();
        const auto tg = twogrid_setup(p.a, csr, SmootherKind::hssor, 4.5);
        Vector x(p.b.size(), 0.0);
        const auto rep = gmres([&](std::span<const double> v, std::span<double> y) { spmv(csr, v, y); }, p.b, x, *tg);
        REQUIRE(rep.converged);
        its.push_back(rep.iterations);
    }
    const double lo = static_cast<double>(std::min(its[0], its[1]));
    const double hi = static_cast<double>(std::max(its[0], its[1]));
    CHECK((hi - lo) / lo <= 0.15);
}
