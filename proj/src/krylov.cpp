#include "hssor/krylov.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace hssor {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

// r = b - A x, returns ||r||.
double residual(const ApplyFn& a, std::span<const double> b, std::span<const double> x, Vector& r) {
    r.resize(b.size());
    a(x, r);
    for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - r[i];
    return norm2(r);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

void SolverConfig::validate() const {
    if (restart < 1) throw Error("SolverConfig: restart must be >= 1");
    if (!(tol > 0.0)) throw Error("SolverConfig: tol must be positive");
}

double relres(const ApplyFn& a, std::span<const double> x, std::span<const double> b) {
    const double bnorm = norm2(b);
    if (bnorm == 0.0) throw DimensionError("relres: right-hand side is zero");
    Vector r;
    return residual(a, b, x, r) / bnorm;
}

ApplyFn as_apply(const Preconditioner& p) {
    return [&p](std::span<const double> r, std::span<double> z) { p.apply(r, z); };
}

Arnoldi::Arnoldi(std::size_t n, std::size_t max_steps)
    : n_(n), basis_(max_steps + 1, Vector(n, 0.0)), column_(max_steps + 1), z_(n), w_(n) {}

double Arnoldi::start(std::span<const double> r) {
    const double beta = norm2(r);
    steps_ = 0;
    breakdown_ = false;
    auto& v0 = basis_[0];
    for (std::size_t i = 0; i < n_; ++i) v0[i] = r[i] / beta;
    return beta;
}

std::span<const double> Arnoldi::step(const ApplyFn& a, const ApplyFn& precond) {
    if (steps_ + 1 >= basis_.size()) throw Error("Arnoldi: cycle length exceeded");
    const auto j = steps_;
    precond(basis_[j], z_);
    a(z_, w_);
    if (!all_finite(w_)) throw DivergenceError("non-finite value in Krylov vector", j + 1);
    for (std::size_t i = 0; i <= j; ++i) {
        const double h = dot(w_, basis_[i]);
        column_[i] = h;
        const auto& v = basis_[i];
        for (std::size_t k = 0; k < n_; ++k) w_[k] -= h * v[k];
    }
    const double hnext = norm2(w_);
    column_[j + 1] = hnext;
    ++steps_;
    if (hnext == 0.0) {
        breakdown_ = true;
    } else {
        auto& v = basis_[j + 1];
        for (std::size_t k = 0; k < n_; ++k) v[k] = w_[k] / hnext;
    }
    return {column_.data(), j + 2};
}

SolveReport gmres(const ApplyFn& a, std::span<const double> b, std::span<double> x, const ApplyFn& precond,
                  const SolverConfig& cfg) {
    cfg.validate();
    const auto t0 = Clock::now();
    const auto n = b.size();
    if (x.size() != n) throw DimensionError("gmres: x and b differ in length");
    const double bnorm = norm2(b);
    if (bnorm == 0.0) throw DimensionError("gmres: right-hand side is zero");

    SolveReport rep;
    rep.solver = "gmres(" + std::to_string(cfg.restart) + ")";
    rep.notes = "right preconditioning";

    Vector r;
    double rel = residual(a, b, x, r) / bnorm;
    if (cfg.record_history) rep.history.push_back(rel);
    if (rel < cfg.tol) {
        rep.converged = true;
        rep.final_relres = rel;
        rep.wall_seconds = seconds_since(t0);
        return rep;
    }

    const auto m = cfg.restart;
    Arnoldi arnoldi(n, m);
    // Hessenberg columns after rotation: upper triangle R (column-major).
    std::vector<Vector> rcols(m);
    Vector cs(m), sn(m), g(m + 1);
    Vector u(n), z(n);

    while (rep.iterations < cfg.max_iters) {
        const double beta = arnoldi.start(r);
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;
        std::size_t k = 0;
        while (k < m && rep.iterations < cfg.max_iters) {
            const auto h = arnoldi.step(a, precond);
            ++rep.iterations;
            auto& col = rcols[k];
            col.assign(h.begin(), h.end());
            for (std::size_t i = 0; i < k; ++i) {
                const double t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            const double denom = std::hypot(col[k], col[k + 1]);
            cs[k] = col[k] / denom;
            sn[k] = col[k + 1] / denom;
            col[k] = denom;
            col[k + 1] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            ++k;
            const double est = std::abs(g[k]) / bnorm;
            if (!std::isfinite(est)) throw DivergenceError("non-finite residual estimate", rep.iterations);
            if (cfg.record_history) rep.history.push_back(est);
            if (arnoldi.breakdown() || est < cfg.tol) break;
        }

        // y = R^{-1} g, x += M^{-1} V y
        Vector y(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(k));
        for (std::size_t i = k; i-- > 0;) {
            for (std::size_t j = i + 1; j < k; ++j) y[i] -= rcols[j][i] * y[j];
            y[i] /= rcols[i][i];
        }
        std::fill(u.begin(), u.end(), 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            const auto v = arnoldi.basis(j);
            for (std::size_t i = 0; i < n; ++i) u[i] += y[j] * v[i];
        }
        precond(u, z);
        for (std::size_t i = 0; i < n; ++i) x[i] += z[i];
        if (!all_finite(x)) throw DivergenceError("non-finite iterate", rep.iterations);

        rel = residual(a, b, x, r) / bnorm;
        if (rel < cfg.tol) {
            rep.converged = true;
            break;
        }
    }
    rep.final_relres = rel;
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

SolveReport gmres(const ApplyFn& a, std::span<const double> b, std::span<double> x, const Preconditioner& precond,
                  const SolverConfig& cfg) {
    auto rep = gmres(a, b, x, as_apply(precond), cfg);
    rep.preconditioner = precond.name();
    return rep;
}

SolveReport cg(const ApplyFn& a, std::span<const double> b, std::span<double> x, const ApplyFn& precond,
               const SolverConfig& cfg) {
    cfg.validate();
    const auto t0 = Clock::now();
    const auto n = b.size();
    if (x.size() != n) throw DimensionError("cg: x and b differ in length");
    const double bnorm = norm2(b);
    if (bnorm == 0.0) throw DimensionError("cg: right-hand side is zero");

    SolveReport rep;
    rep.solver = "cg";
    Vector r;
    double rel = residual(a, b, x, r) / bnorm;
    if (cfg.record_history) rep.history.push_back(rel);

    Vector z(n), p(n), q(n);
    precond(r, z);
    double rz = dot(r, z);
    p = z;
    while (rel >= cfg.tol && rep.iterations < cfg.max_iters) {
        if (!(rz > 0.0)) throw NotSpdError("cg: preconditioner is not positive definite");
        a(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) throw NotSpdError("cg: operator is not positive definite (p^T A p <= 0)");
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        ++rep.iterations;
        rel = norm2(r) / bnorm;
        if (!std::isfinite(rel)) throw DivergenceError("non-finite residual", rep.iterations);
        if (cfg.record_history) rep.history.push_back(rel);
        if (rel < cfg.tol) {
            // Confirm on the true residual; keep iterating from it otherwise.
            rel = residual(a, b, x, r) / bnorm;
            if (rel < cfg.tol) break;
        }
        precond(r, z);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    rel = residual(a, b, x, r) / bnorm;
    rep.converged = rel < cfg.tol;
    rep.final_relres = rel;
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

}  // namespace hssor
