#include <doctest.h>

#include <sstream>

#include "hssor/csr.hpp"
#include "hssor/dense.hpp"
#include "hssor/matrix_market.hpp"
#include "hssor/precond.hpp"
#include "hssor/problems.hpp"
#include "hssor/stencil.hpp"
#include "test_support.hpp"

using namespace hssor;
using testing::to_dense;

TEST_CASE("csr constructor normalizes rows and validates") {
    // Row 0 given out of order.
    CsrMatrix a(2, 3, {0, 2, 3}, {2, 0, 1}, {5.0, 1.0, 7.0});
    CHECK(a.row_cols(0)[0] == 0);
    CHECK(a.row_cols(0)[1] == 2);
    CHECK(a.at(0, 2) == 5.0);
    CHECK(a.at(0, 0) == 1.0);
    CHECK(a.at(1, 1) == 7.0);
    CHECK(a.at(1, 0) == 0.0);

    CHECK_THROWS_AS(CsrMatrix(2, 2, {0, 2, 2}, {1, 1}, {1.0, 2.0}), DimensionError);
    CHECK_THROWS_AS(CsrMatrix(2, 2, {0, 1, 2}, {0, 5}, {1.0, 2.0}), DimensionError);
    CHECK_THROWS_AS(CsrMatrix(2, 2, {1, 1, 2}, {0, 1}, {1.0, 2.0}), DimensionError);
    CHECK_THROWS_AS(CsrMatrix(2, 2, {0, 2, 1}, {0, 1}, {1.0, 2.0}), DimensionError);
}

TEST_CASE("from_triplets sums duplicates into canonical form") {
    auto a = CsrMatrix::from_triplets(2, 2, {{1, 1, 1.0}, {0, 1, 2.0}, {1, 1, 3.0}, {0, 0, 4.0}});
    CHECK(a.nnz() == 3);
    CHECK(a.at(1, 1) == 4.0);
    const auto off = a.row_offsets();
    CHECK(off[0] == 0);
    CHECK(off[2] == a.nnz());
    for (std::size_t i = 0; i < a.nrows(); ++i) {
        const auto c = a.row_cols(i);
        for (std::size_t k = 1; k < c.size(); ++k) CHECK(c[k - 1] < c[k]);
    }
}

TEST_CASE("spmv examples") {
    const auto eye = CsrMatrix::identity(3);
    const Vector x{1, 2, 3};
    CHECK(spmv(eye, x) == x);

    const auto t = testing::trid(3);
    CHECK(spmv(t, Vector{1, 1, 1}) == Vector{1, 0, 1});

    Vector y(2);
    CHECK_THROWS_AS(spmv(t, Vector{1, 1}, y), DimensionError);
}

TEST_CASE("stencil spmv on a unit vector gives the dense column") {
    // n = 2 is below the generator's minimum, so the stencil is filled here.
    StencilMatrix a({2, 2, 2}, false);
    for (std::size_t b = 1; b < kBandCount; ++b)
        for (auto& v : a.band(static_cast<Band>(b))) v = -1.0;
    for (auto& v : a.band(Band::center)) v = 6.0;
    a.apply_boundary_masks();
    const auto dense = testing::stencil_dense(a);
    for (std::size_t j = 0; j < a.size(); ++j) {
        Vector e(a.size(), 0.0);
        e[j] = 1.0;
        const auto col = spmv(a, e);
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(col[i] == dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
}

TEST_CASE("property: stencil and csr spmv agree bit for bit") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        std::uniform_int_distribution<std::size_t> ext(1, 6);
        GridDims d{ext(rng) + 1, ext(rng), ext(rng)};
        if (trial % 3 == 0) d.nz = 1;
        const auto a = testing::random_stencil(rng, d, trial % 2 == 0);
        const auto csr = a.to_csr();
        CHECK(testing::to_dense(csr) == testing::stencil_dense(a));
        const auto x = testing::random_vector(rng, a.size());
        const auto y1 = spmv(a, x);
        const auto y2 = spmv(csr, x);
        CHECK(y1 == y2);
    }
}

TEST_CASE("periodic stencil csr matches the geometric dense form") {
    for (std::size_t n : {3, 4, 5}) {
        GridSpec g = GridSpec::isotropic(2, n, Boundary::periodic);
        const auto a = build_laplacian(g);
        CHECK(to_dense(a.to_csr()) == testing::stencil_dense(a));
        std::mt19937 rng(static_cast<unsigned>(n));
        const auto x = testing::random_vector(rng, a.size());
        const auto y1 = spmv(a, x);
        const Eigen::VectorXd y2 = testing::stencil_dense(a) * testing::to_eigen(x);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(y1[i] == doctest::Approx(y2[static_cast<Eigen::Index>(i)]).epsilon(1e-15));
    }
}

TEST_CASE("tri_solve examples") {
    const auto l = CsrMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {1, 0, -1.0}, {1, 1, 3.0}});
    const auto x = tri_solve(l, Vector{2, 2}, TriShape::lower, TriDiag::stored);
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(1.0));

    const auto eye = CsrMatrix::identity(4);
    const Vector b{3, -1, 4, 1.5};
    CHECK(tri_solve(eye, b, TriShape::lower, TriDiag::unit) == b);

    const auto singular = CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 0, 1.0}});
    CHECK_THROWS_AS(tri_solve(singular, Vector{1, 1}, TriShape::lower, TriDiag::stored), SingularError);
}

TEST_CASE("property: random triangular solves have small residual") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 50;
        std::vector<Triplet> lo, up;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = 1.0 + std::abs(u(rng)) * 3.0;
            lo.push_back({i, i, d});
            up.push_back({i, i, d});
            for (std::size_t j = 0; j < i; ++j) {
                if (u(rng) > 0.6) lo.push_back({i, j, u(rng) / 4.0});
            }
            for (std::size_t j = i + 1; j < n; ++j) {
                if (u(rng) > 0.6) up.push_back({i, j, u(rng) / 4.0});
            }
        }
        const auto L = CsrMatrix::from_triplets(n, n, lo);
        const auto U = CsrMatrix::from_triplets(n, n, up);
        const auto b = testing::random_vector(rng, n);
        for (const auto& [m, shape] : {std::pair{&L, TriShape::lower}, std::pair{&U, TriShape::upper}}) {
            const auto x = tri_solve(*m, b, shape, TriDiag::stored);
            const Eigen::VectorXd r = to_dense(*m) * testing::to_eigen(x) - testing::to_eigen(b);
            CHECK(r.norm() / testing::to_eigen(b).norm() <= 1e-13);
        }
        // Unit mode ignores the stored diagonal.
        const auto xu = tri_solve(L, b, TriShape::lower, TriDiag::unit);
        Eigen::MatrixXd dl = to_dense(L).triangularView<Eigen::StrictlyLower>();
        dl.diagonal().setOnes();
        CHECK((dl * testing::to_eigen(xu) - testing::to_eigen(b)).norm() <= 1e-12);
    }
}

TEST_CASE("transpose and multiply match dense products") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Triplet> ta, tb;
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            if (u(rng) > 0.3) ta.push_back({i, j, u(rng)});
            if (u(rng) > 0.3) tb.push_back({j, i, u(rng)});
        }
    const auto a = CsrMatrix::from_triplets(7, 5, ta);
    const auto b = CsrMatrix::from_triplets(5, 7, tb);
    CHECK(to_dense(a.transpose()) == to_dense(a).transpose());
    CHECK((to_dense(multiply(a, b)) - to_dense(a) * to_dense(b)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("split_offsets") {
    SUBCASE("isotropic 3D diagonal is 6") {
        const auto s = split_offsets(build_laplacian(GridSpec::isotropic(3, 4)));
        for (double m : s.m) CHECK(m == 6.0);
    }
    SUBCASE("1D problem has empty y and z bands") {
        const auto s = split_offsets(build_laplacian(GridSpec::isotropic(1, 5)));
        for (double v : s.l2) CHECK(v == 0.0);
        for (double v : s.l3) CHECK(v == 0.0);
        CHECK(s.l1[0] == 0.0);
        CHECK(s.l1[1] == -1.0);
    }
    SUBCASE("dc1 2D reassembles bit-exactly") {
        const auto a = build_dc1(GridSpec::dc1(2, 10));
        const auto back = reassemble(split_offsets(a));
        for (std::size_t b = 0; b < kBandCount; ++b) {
            const auto x = a.band(static_cast<Band>(b));
            const auto y = back.band(static_cast<Band>(b));
            CHECK(std::equal(x.begin(), x.end(), y.begin(), y.end()));
        }
    }
    SUBCASE("property: random symmetric stencils reassemble exactly") {
        std::mt19937 rng(17);
        for (int t = 0; t < 10; ++t) {
            const auto a = testing::random_stencil(rng, {4, 3, 2 + static_cast<std::size_t>(t % 3)}, true);
            const auto back = reassemble(split_offsets(a));
            CHECK(to_dense(back.to_csr()) == to_dense(a.to_csr()));
        }
    }
}

TEST_CASE("assemble_dense") {
    const ApplyFn id = [](std::span<const double> x, std::span<double> y) { std::copy(x.begin(), x.end(), y.begin()); };
    CHECK(assemble_dense(id, 4) == Eigen::MatrixXd::Identity(4, 4));
    CHECK_THROWS_AS(assemble_dense(id, kMaxDenseColumns + 1), DimensionError);

    const auto a = build_laplacian(GridSpec::isotropic(1, 8));
    const auto b = assemble_dense([&](std::span<const double> x, std::span<double> y) { hssor_multiply(a, x, y); }, 8);
    CHECK((b - b.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("matrix market round trip is exact") {
    std::mt19937 rng(23);
    const auto a = testing::random_stencil(rng, {3, 4, 2}, false).to_csr();
    std::stringstream ss;
    write_matrix_market(ss, a);
    const auto b = read_matrix_market(ss);
    CHECK(b.nrows() == a.nrows());
    CHECK(to_dense(a) == to_dense(b));

    std::istringstream sym(
        "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 4\n1 1 2\n2 1 -1\n2 2 2\n3 3 5\n");
    const auto s = read_matrix_market(sym);
    CHECK(s.at(0, 1) == -1.0);
    CHECK(s.at(1, 0) == -1.0);
    CHECK(s.nnz() == 5);

    std::istringstream bad("not a header\n");
    CHECK_THROWS_AS(read_matrix_market(bad), Error);
}
