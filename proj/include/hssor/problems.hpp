#pragma once

#include <array>
#include <span>
#include <string>
#include <variant>

#include "hssor/stencil.hpp"
#include "hssor/types.hpp"

namespace hssor {

enum class Boundary { dirichlet, periodic };

/// Constant anisotropic coefficients. The diagonal is 2(l1 + l2 + l3) over the
/// active axes.
struct ConstantCoeff {
    double l1 = 1.0;
    double l2 = 1.0;
    double l3 = 1.0;
};

/// Discontinuous diffusion with high-permeability inclusions.
struct Dc1Coeff {};

using CoeffModel = std::variant<ConstantCoeff, Dc1Coeff>;

/// n points per axis; mesh width h = 1/(n+1) for both boundary types.
struct GridSpec {
    int dim = 3;
    std::size_t n = 0;
    Boundary boundary = Boundary::dirichlet;
    CoeffModel coeff = ConstantCoeff{};

    double h() const noexcept { return 1.0 / static_cast<double>(n + 1); }
    std::size_t size() const noexcept;
    GridDims dims() const noexcept;
    /// Throws DimensionError unless dim is 1..3 and n >= 3.
    void validate() const;

    static GridSpec isotropic(int dim, std::size_t n, Boundary b = Boundary::dirichlet);
    static GridSpec dc1(int dim, std::size_t n);
};

struct Problem {
    StencilMatrix a;
    Vector b;
    GridSpec spec;
};

/// 5/7-point (h^2-scaled) constant coefficient Laplacian. Dirichlet grids
/// mask the boundary bands; periodic grids wrap.
StencilMatrix build_laplacian(const GridSpec& spec);

/// 10^3 (floor(10 x_2) + 1) where floor(10 x_i) is even for every component,
/// 1 elsewhere. Components must lie in [0, 1).
double kappa_dc1(std::span<const double> x);

/// Finite-volume discretization of -div(kappa grad u) with homogeneous
/// Dirichlet boundaries; face transmissibility is the harmonic mean of kappa
/// at the two nodes.
StencilMatrix build_dc1(const GridSpec& spec);

/// Node values of the DC1 coefficient, node (i, j, k) at ((i+1) h, (j+1) h,
/// (k+1) h).
Vector dc1_kappa_field(const GridSpec& spec);

/// The same discretization for an arbitrary positive nodal field.
StencilMatrix build_diffusion(const GridSpec& spec, std::span<const double> kappa);

StencilMatrix build_matrix(const GridSpec& spec);

/// b = A * ones, so the exact solution is the all-ones vector (x0 = 0).
Vector build_rhs(const StencilMatrix& a);

Problem make_problem(const GridSpec& spec);

/// JSON sidecar describing the grid, enough to regenerate the matrix.
std::string grid_spec_to_json(const GridSpec& spec);
GridSpec grid_spec_from_json(const std::string& text);

}  // namespace hssor
