#include "hssor/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hssor::fourier {

namespace {

constexpr double kPi = std::numbers::pi;

double axis_angle(std::size_t s, std::size_t n, ModeConvention c) {
    const double denom = c == ModeConvention::paper ? static_cast<double>(n + 1) : static_cast<double>(n);
    return 2.0 * kPi * static_cast<double>(s) / denom;
}

void check_index(std::size_t s, std::size_t n, ModeConvention c, const char* axis) {
    const bool ok = c == ModeConvention::paper ? (s >= 1 && s <= n) : s < n;
    if (!ok) throw DimensionError(std::string("make_mode: index ") + axis + " out of range");
}

void check_dim(int dim) {
    if (dim < 1 || dim > 3) throw DimensionError("fourier: dim must be 1, 2 or 3");
}

double positive(double v, const char* what) {
    if (!(v > 0.0)) throw Error(std::string("fourier: nonpositive symbol ") + what);
    return v;
}

// Relative tie tolerance for extreme scans. Modes symmetric about pi differ
// only by rounding in cos.
bool less_by_margin(double a, double b) {
    return a < b - 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
}

void update(Extreme& e, double v, const FourierMode& m, bool first) {
    if (first) {
        e.min_value = e.max_value = v;
        e.min_mode = e.max_mode = m;
        return;
    }
    if (less_by_margin(v, e.min_value)) {
        e.min_value = v;
        e.min_mode = m;
    }
    if (less_by_margin(e.max_value, v)) {
        e.max_value = v;
        e.max_mode = m;
    }
}

}  // namespace

std::string to_string(AnalysisMode m) { return m == AnalysisMode::paper ? "paper" : "exact"; }
std::string to_string(ModeConvention c) { return c == ModeConvention::paper ? "paper" : "circulant"; }

double Coefficients::diagonal() const noexcept {
    double m = 2.0 * l1;
    if (dim >= 2) m += 2.0 * l2;
    if (dim >= 3) m += 2.0 * l3;
    return m;
}

FourierMode make_mode(std::size_t s, std::size_t t, std::size_t r, std::size_t n, int dim, ModeConvention c) {
    check_dim(dim);
    if (n < 1) throw DimensionError("make_mode: n must be positive");
    FourierMode m;
    m.convention = c;
    check_index(s, n, c, "s");
    m.s = s;
    m.theta = axis_angle(s, n, c);
    if (dim >= 2) {
        check_index(t, n, c, "t");
        m.t = t;
        m.phi = axis_angle(t, n, c);
    } else if (t != 0) {
        throw DimensionError("make_mode: t must be 0 for dim 1");
    }
    if (dim >= 3) {
        check_index(r, n, c, "r");
        m.r = r;
        m.xi = axis_angle(r, n, c);
    } else if (r != 0) {
        throw DimensionError("make_mode: r must be 0 below dim 3");
    }
    m.null_mode = c == ModeConvention::circulant && m.s == 0 && m.t == 0 && m.r == 0;
    return m;
}

std::vector<FourierMode> mode_grid(std::size_t n, int dim, ModeConvention c) {
    check_dim(dim);
    const std::size_t lo = c == ModeConvention::paper ? 1 : 0;
    const std::size_t hi = c == ModeConvention::paper ? n + 1 : n;
    auto range = [&](int axis) { return axis < dim ? std::pair{lo, hi} : std::pair<std::size_t, std::size_t>{0, 1}; };
    const auto [s0, s1] = range(0);
    const auto [t0, t1] = range(1);
    const auto [r0, r1] = range(2);
    std::vector<FourierMode> out;
    out.reserve((s1 - s0) * (t1 - t0) * (r1 - r0));
    for (auto s = s0; s < s1; ++s)
        for (auto t = t0; t < t1; ++t)
            for (auto r = r0; r < r1; ++r) out.push_back(make_mode(s, t, r, n, dim, c));
    return out;
}

double lambda_a(const FourierMode& m, const Coefficients& c) {
    auto sq = [](double angle) {
        const double v = std::sin(angle / 2.0);
        return v * v;
    };
    double v = c.l1 * sq(m.theta);
    if (c.dim >= 2) v += c.l2 * sq(m.phi);
    if (c.dim >= 3) v += c.l3 * sq(m.xi);
    return 4.0 * v;
}

double lambda_t(const FourierMode& m, const Coefficients& c, AnalysisMode am) {
    const double d = c.diagonal();
    double v = d - 2.0 * c.l1 * std::cos(m.theta);
    if (am == AnalysisMode::exact) v += c.l1 * c.l1 / d;
    return v;
}

double lambda_p(const FourierMode& m, const Coefficients& c, AnalysisMode am) {
    const double t = positive(lambda_t(m, c, am), "lambda(T)");
    return t - 2.0 * c.l2 * std::cos(m.phi) + c.l2 * c.l2 / t;
}

double lambda_b(const FourierMode& m, const Coefficients& c, AnalysisMode am) {
    if (c.dim == 1) return lambda_t(m, c, am);
    if (c.dim == 2) return lambda_p(m, c, am);
    const double p = positive(lambda_p(m, c, am), "lambda(P)");
    return p - 2.0 * c.l3 * std::cos(m.xi) + c.l3 * c.l3 / p;
}

double lambda_b_minus_a(const FourierMode& m, const Coefficients& c, AnalysisMode am) {
    double v = am == AnalysisMode::exact ? c.l1 * c.l1 / c.diagonal() : 0.0;
    if (c.dim >= 2) v += c.l2 * c.l2 / positive(lambda_t(m, c, am), "lambda(T)");
    if (c.dim >= 3) v += c.l3 * c.l3 / positive(lambda_p(m, c, am), "lambda(P)");
    return v;
}

double lambda_binv_a(const FourierMode& m, const Coefficients& c, AnalysisMode am) {
    if (m.null_mode) return 0.0;
    return lambda_a(m, c) / positive(lambda_b(m, c, am), "lambda(B)");
}

SymbolChain evaluate(const FourierMode& m, const Coefficients& c, AnalysisMode am) {
    SymbolChain out;
    out.mode = am;
    out.lam_a = lambda_a(m, c);
    out.lam_t = lambda_t(m, c, am);
    out.lam_p = c.dim >= 2 ? lambda_p(m, c, am) : out.lam_t;
    out.lam_b = lambda_b(m, c, am);
    out.lam_b_minus_a = lambda_b_minus_a(m, c, am);
    out.lam_binv_a = m.null_mode ? 0.0 : out.lam_a / positive(out.lam_b, "lambda(B)");
    return out;
}

SpectrumExtremes spectrum_extremes(std::size_t n, const Coefficients& c, AnalysisMode am, ModeConvention conv) {
    if (n < 2) throw DimensionError("spectrum_extremes: n too small");
    SpectrumExtremes e;
    bool first = true;
    for (const auto& m : mode_grid(n, c.dim, conv)) {
        if (m.null_mode) continue;
        const auto ch = evaluate(m, c, am);
        update(e.a, ch.lam_a, m, first);
        update(e.t, ch.lam_t, m, first);
        update(e.p, ch.lam_p, m, first);
        update(e.b, ch.lam_b, m, first);
        update(e.b_minus_a, ch.lam_b_minus_a, m, first);
        update(e.binv_a, ch.lam_binv_a, m, first);
        first = false;
    }
    if (first) throw DimensionError("spectrum_extremes: no non-null modes");
    return e;
}

double cond_discrete(std::size_t n, const Coefficients& c, AnalysisMode am, ModeConvention conv) {
    const auto e = spectrum_extremes(n, c, am, conv);
    return e.binv_a.max_value / e.binv_a.min_value;
}

double cond_asymptotic_constant() {
    const double pi2 = kPi * kPi;
    const double sigma = 5.0 + 5.0 * pi2 + pi2 * pi2;
    return 25.0 * sigma / (144.0 * (3.0 * pi2 * sigma + 4.0 + pi2));
}

double cond_asymptotic(double h) {
    if (!(h > 0.0 && h <= 0.1)) throw DimensionError("cond_asymptotic: h must lie in (0, 0.1]");
    return cond_asymptotic_constant() / (h * h);
}

ComplexVector fourier_vector(const FourierMode& m, std::size_t n, int dim) {
    check_dim(dim);
    if (m.convention != ModeConvention::circulant)
        throw Error("fourier_vector: only circulant-convention modes are exact eigenvectors");
    const std::size_t nx = n;
    const std::size_t ny = dim >= 2 ? n : 1;
    const std::size_t nz = dim >= 3 ? n : 1;
    const double scale = 1.0 / std::sqrt(static_cast<double>(nx * ny * nz));
    ComplexVector v(nx * ny * nz);
    for (std::size_t k = 0; k < nz; ++k)
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i) {
                const double angle = static_cast<double>(i) * m.theta + static_cast<double>(j) * m.phi +
                                     static_cast<double>(k) * m.xi;
                v[i + nx * (j + ny * k)] = std::polar(scale, angle);
            }
    return v;
}

double verify_eigenpair(const ApplyFn& op, const ComplexVector& v, double expected) {
    const auto n = v.size();
    Vector re(n), im(n), ore(n), oim(n);
    for (std::size_t i = 0; i < n; ++i) {
        re[i] = v[i].real();
        im[i] = v[i].imag();
    }
    op(re, ore);
    op(im, oim);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::complex<double> d(ore[i] - expected * re[i], oim[i] - expected * im[i]);
        sum += std::norm(d);
    }
    return std::sqrt(sum);
}

PeriodicHssor::PeriodicHssor(const StencilMatrix& a) : a_(&a), m_(a.band(Band::center)) {
    if (!a.periodic()) throw Error("PeriodicHssor: matrix must be periodic");
    for (std::size_t b = 0; b < kBandCount; ++b) {
        const auto band = a.band(static_cast<Band>(b));
        if (band.empty()) continue;
        for (double v : band) {
            if (v != band[0]) throw Error("PeriodicHssor: bands must be constant");
        }
    }
    if (m_.empty() || m_[0] == 0.0) throw SingularError("PeriodicHssor: zero diagonal");

    const auto& d = a.dims();
    const std::array<std::size_t, 3> ext{d.nx, d.ny, d.nz};
    const std::array<Band, 3> lo{Band::xm, Band::ym, Band::zm};
    const std::array<Band, 3> up{Band::xp, Band::yp, Band::zp};
    std::size_t block = 1;
    top_ = 1;
    for (int axis = 0; axis < 3; ++axis) {
        if (axis > 0 && ext[static_cast<std::size_t>(axis)] == 1) break;
        auto& lv = levels_[static_cast<std::size_t>(axis + 1)];
        lv.lower = a.band(lo[static_cast<std::size_t>(axis)]);
        lv.upper = a.band(up[static_cast<std::size_t>(axis)]);
        lv.blocks = ext[static_cast<std::size_t>(axis)];
        lv.block = block;
        block *= lv.blocks;
        top_ = axis + 1;
    }
    if (block != a.size()) throw DimensionError("PeriodicHssor: grid axes must be filled x first");

    for (int l = 1; l < top_; ++l) {
        const auto nloc = levels_[static_cast<std::size_t>(l)].blocks * levels_[static_cast<std::size_t>(l)].block;
        const auto dense = assemble_dense(
            [this, l](std::span<const double> x, std::span<double> y) { multiply_level(l, 0, x, y); }, nloc);
        lu_[static_cast<std::size_t>(l)].compute(dense);
    }
}

void PeriodicHssor::solve_level(int level, std::size_t p0, std::span<const double> r, std::span<double> z) const {
    if (level == 0) {
        z[0] = r[0] / m_[p0];
        return;
    }
    const Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
    Eigen::Map<Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
    zv = lu_[static_cast<std::size_t>(level)].solve(rv);
}

void PeriodicHssor::multiply_level(int level, std::size_t p0, std::span<const double> x, std::span<double> y) const {
    if (level == 0) {
        y[0] = m_[p0] * x[0];
        return;
    }
    const auto& lv = levels_[static_cast<std::size_t>(level)];
    const auto nb = lv.blocks;
    const auto bs = lv.block;
    Vector w(nb * bs), t(bs), s(bs);
    // w_b = x_b + Q^{-1} U x_{b+1}
    for (std::size_t b = 0; b < nb; ++b) {
        const auto next = (b + 1) % nb;
        for (std::size_t q = 0; q < bs; ++q) t[q] = lv.upper[p0 + b * bs + q] * x[next * bs + q];
        solve_level(level - 1, p0 + b * bs, t, s);
        for (std::size_t q = 0; q < bs; ++q) w[b * bs + q] = x[b * bs + q] + s[q];
    }
    // y_b = Q w_b + L w_{b-1}
    for (std::size_t b = 0; b < nb; ++b) {
        const auto prev = (b + nb - 1) % nb;
        auto yb = y.subspan(b * bs, bs);
        multiply_level(level - 1, p0 + b * bs, std::span<const double>(w).subspan(b * bs, bs), yb);
        for (std::size_t q = 0; q < bs; ++q) yb[q] += lv.lower[p0 + b * bs + q] * w[prev * bs + q];
    }
}

void PeriodicHssor::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != size() || y.size() != size()) throw DimensionError("PeriodicHssor::multiply: size mismatch");
    multiply_level(top_, 0, x, y);
}

void PeriodicHssor::solve(std::span<const double> r, std::span<double> z) const {
    if (r.size() != size() || z.size() != size()) throw DimensionError("PeriodicHssor::solve: size mismatch");
    if (!top_lu_) {
        const auto dense = assemble_dense([this](std::span<const double> x, std::span<double> y) { multiply(x, y); },
                                          size());
        top_lu_.emplace(dense);
    }
    const Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
    Eigen::Map<Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
    zv = top_lu_->solve(rv);
}

std::vector<BoundCheck> check_extreme_bounds(std::size_t n) {
    const Coefficients c{};
    const auto e = spectrum_extremes(n, c, AnalysisMode::paper, ModeConvention::paper);
    std::vector<BoundCheck> out;
    auto lower = [&](std::string claim, const Extreme& x, double bound) {
        out.push_back({std::move(claim), x.min_value, bound, x.min_value > bound, x.min_mode});
    };
    auto upper = [&](std::string claim, const Extreme& x, double bound) {
        out.push_back({std::move(claim), x.max_value, bound, x.max_value < bound, x.max_mode});
    };
    lower("lambda_min(A) > 0", e.a, 0.0);
    lower("lambda_min(T) > 4", e.t, 4.0);
    lower("lambda_min(P) > 9/4", e.p, 9.0 / 4.0);
    lower("lambda_min(B) > 95/36", e.b, 95.0 / 36.0);
    lower("lambda_min(B) > 25/36", e.b, 25.0 / 36.0);
    upper("lambda_max(T) < 8", e.t, 8.0);
    upper("lambda_max(P) < 81/8", e.p, 81.0 / 8.0);
    upper("lambda_max(B) < 7921/648", e.b, 7921.0 / 648.0);
    upper("lambda_max(A) < 12", e.a, 12.0);
    return out;
}

}  // namespace hssor::fourier
