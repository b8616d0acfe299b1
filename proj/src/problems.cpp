#include "hssor/problems.hpp"

#include <cmath>
#include <functional>

#include <json.hpp>

namespace hssor {

namespace {

// Shared by build_laplacian and build_dc1: stencil with a per-face
// coefficient function. face(p, q) is the (positive) coupling between
// neighbors p and q; boundary(p, axis) the coupling to a Dirichlet node.
StencilMatrix assemble_faces(const GridSpec& spec,
                             const std::function<double(std::size_t, std::size_t, int)>& face,
                             const std::function<double(std::size_t, int)>& boundary) {
    const auto dims = spec.dims();
    const bool periodic = spec.boundary == Boundary::periodic;
    StencilMatrix a(dims, periodic);
    const std::array<std::pair<Band, int>, 6> offs{{{Band::xm, 0},
                                                    {Band::xp, 0},
                                                    {Band::ym, 1},
                                                    {Band::yp, 1},
                                                    {Band::zm, 2},
                                                    {Band::zp, 2}}};
    auto diag = a.band(Band::center);
    for (std::size_t p = 0; p < a.size(); ++p) {
        double d = 0.0;
        for (const auto& [band, axis] : offs) {
            if (axis >= spec.dim) continue;
            if (auto q = a.neighbor(p, band)) {
                const double t = face(p, *q, axis);
                a.band(band)[p] = -t;
                d += t;
            } else {
                d += boundary(p, axis);
            }
        }
        diag[p] = d;
    }
    a.apply_boundary_masks();
    return a;
}

}  // namespace

std::size_t GridSpec::size() const noexcept {
    std::size_t s = 1;
    for (int d = 0; d < dim; ++d) s *= n;
    return s;
}

GridDims GridSpec::dims() const noexcept {
    return GridDims{n, dim >= 2 ? n : 1, dim >= 3 ? n : 1};
}

void GridSpec::validate() const {
    if (dim < 1 || dim > 3) throw DimensionError("GridSpec: dim must be 1, 2 or 3");
    if (n < 3) throw DimensionError("GridSpec: n must be at least 3");
    if (const auto* c = std::get_if<ConstantCoeff>(&coeff)) {
        if (c->l1 < 0 || c->l2 < 0 || c->l3 < 0) throw DimensionError("GridSpec: negative coefficient");
    }
}

GridSpec GridSpec::isotropic(int dim, std::size_t n, Boundary b) {
    return GridSpec{dim, n, b, ConstantCoeff{}};
}

GridSpec GridSpec::dc1(int dim, std::size_t n) {
    return GridSpec{dim, n, Boundary::dirichlet, Dc1Coeff{}};
}

StencilMatrix build_laplacian(const GridSpec& spec) {
    spec.validate();
    const auto* c = std::get_if<ConstantCoeff>(&spec.coeff);
    if (!c) throw Error("build_laplacian: constant coefficients required");
    const std::array<double, 3> l{c->l1, c->l2, c->l3};
    return assemble_faces(
        spec, [&](std::size_t, std::size_t, int axis) { return l[axis]; },
        [&](std::size_t, int axis) { return l[axis]; });
}

double kappa_dc1(std::span<const double> x) {
    if (x.size() < 2 || x.size() > 3) throw DimensionError("kappa_dc1: point must have 2 or 3 components");
    bool all_even = true;
    for (double xi : x) {
        if (!(xi >= 0.0 && xi < 1.0)) throw DimensionError("kappa_dc1: point outside the unit domain");
        all_even = all_even && static_cast<long>(std::floor(10.0 * xi)) % 2 == 0;
    }
    return all_even ? 1e3 * (std::floor(10.0 * x[1]) + 1.0) : 1.0;
}

Vector dc1_kappa_field(const GridSpec& spec) {
    spec.validate();
    const auto dims = spec.dims();
    const auto n1 = spec.n + 1;
    // Node (i, j, k) sits at ((i+1) h, (j+1) h, (k+1) h); floor(10 x) is taken
    // in integer arithmetic so cell boundaries are exact.
    Vector kappa(dims.size());
    for (std::size_t k = 0; k < dims.nz; ++k) {
        for (std::size_t j = 0; j < dims.ny; ++j) {
            for (std::size_t i = 0; i < dims.nx; ++i) {
                const std::array<std::size_t, 3> idx{i, j, k};
                bool all_even = true;
                for (int d = 0; d < spec.dim; ++d) all_even = all_even && (10 * (idx[d] + 1) / n1) % 2 == 0;
                const auto fy = 10 * (j + 1) / n1;
                kappa[dims.index(i, j, k)] = all_even ? 1e3 * static_cast<double>(fy + 1) : 1.0;
            }
        }
    }
    return kappa;
}

StencilMatrix build_diffusion(const GridSpec& spec, std::span<const double> kappa) {
    spec.validate();
    if (spec.boundary != Boundary::dirichlet) throw Error("build_diffusion: Dirichlet boundary required");
    if (kappa.size() != spec.size()) throw DimensionError("build_diffusion: kappa field has the wrong length");
    for (double v : kappa) {
        if (!(v > 0.0)) throw Error("build_diffusion: kappa must be positive");
    }
    return assemble_faces(
        spec,
        [&](std::size_t p, std::size_t q, int) {
            const double kp = kappa[p];
            const double kq = kappa[q];
            return 2.0 * kp * kq / (kp + kq);
        },
        [&](std::size_t p, int) { return kappa[p]; });
}

StencilMatrix build_dc1(const GridSpec& spec) {
    spec.validate();
    if (spec.dim < 2) throw DimensionError("build_dc1: 2D or 3D only");
    if (spec.boundary != Boundary::dirichlet) throw Error("build_dc1: Dirichlet boundary required");
    return build_diffusion(spec, dc1_kappa_field(spec));
}

StencilMatrix build_matrix(const GridSpec& spec) {
    return std::holds_alternative<Dc1Coeff>(spec.coeff) ? build_dc1(spec) : build_laplacian(spec);
}

Vector build_rhs(const StencilMatrix& a) {
    const Vector ones(a.size(), 1.0);
    return spmv(a, ones);
}

Problem make_problem(const GridSpec& spec) {
    auto a = build_matrix(spec);
    auto b = build_rhs(a);
    return Problem{std::move(a), std::move(b), spec};
}

std::string grid_spec_to_json(const GridSpec& spec) {
    nlohmann::json j;
    j["dim"] = spec.dim;
    j["n"] = spec.n;
    j["h"] = spec.h();
    j["boundary"] = spec.boundary == Boundary::dirichlet ? "dirichlet" : "periodic";
    if (const auto* c = std::get_if<ConstantCoeff>(&spec.coeff)) {
        j["coeff"] = {{"model", "constant"}, {"l1", c->l1}, {"l2", c->l2}, {"l3", c->l3}};
    } else {
        j["coeff"] = {{"model", "dc1"}};
    }
    return j.dump(2);
}

GridSpec grid_spec_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    GridSpec spec;
    spec.dim = j.at("dim").get<int>();
    spec.n = j.at("n").get<std::size_t>();
    const auto boundary = j.at("boundary").get<std::string>();
    if (boundary == "dirichlet") {
        spec.boundary = Boundary::dirichlet;
    } else if (boundary == "periodic") {
        spec.boundary = Boundary::periodic;
    } else {
        throw Error("grid spec: unknown boundary '" + boundary + "'");
    }
    const auto& c = j.at("coeff");
    const auto model = c.at("model").get<std::string>();
    if (model == "constant") {
        spec.coeff = ConstantCoeff{c.at("l1").get<double>(), c.at("l2").get<double>(), c.at("l3").get<double>()};
    } else if (model == "dc1") {
        spec.coeff = Dc1Coeff{};
    } else {
        throw Error("grid spec: unknown coefficient model '" + model + "'");
    }
    spec.validate();
    return spec;
}

}  // namespace hssor
