#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hssor/dense.hpp"
#include "hssor/precond.hpp"
#include "hssor/types.hpp"

namespace hssor {

struct SolverConfig {
    std::size_t restart = 30;
    std::size_t max_iters = 500;
    double tol = 1e-10;
    bool record_history = true;

    void validate() const;
};

struct SolveReport {
    /// Preconditioned operator applications (one per Arnoldi / CG step).
    std::size_t iterations = 0;
    bool converged = false;
    /// True residual ||b - A x|| / ||b|| at exit.
    double final_relres = 1.0;
    /// Relative residual after each iteration (entry 0 is the initial one).
    std::vector<double> history;
    double wall_seconds = 0.0;
    std::string solver;
    std::string preconditioner;
    std::string problem;
    std::string notes;
};

/// ||b - A x||_2 / ||b||_2. Throws DimensionError when b = 0.
double relres(const ApplyFn& a, std::span<const double> x, std::span<const double> b);

/// Modified Gram-Schmidt Arnoldi on the right-preconditioned operator A M^{-1}.
class Arnoldi {
public:
    Arnoldi(std::size_t n, std::size_t max_steps);

    /// Starts a cycle from r; returns ||r||.
    double start(std::span<const double> r);
    /// Appends v_{j+1}; returns column j of the Hessenberg matrix (length
    /// j + 2). On breakdown (h_{j+1,j} = 0) no vector is appended.
    std::span<const double> step(const ApplyFn& a, const ApplyFn& precond);

    std::size_t steps() const noexcept { return steps_; }
    std::span<const double> basis(std::size_t i) const { return basis_[i]; }
    bool breakdown() const noexcept { return breakdown_; }

private:
    std::size_t n_;
    std::vector<Vector> basis_;
    Vector column_;
    Vector z_;
    Vector w_;
    std::size_t steps_ = 0;
    bool breakdown_ = false;
};

/// Restarted GMRES(restart) with right preconditioning. `x` holds x0 on entry
/// and the iterate on exit. Convergence is declared on the true residual,
/// which is recomputed at every restart and whenever the Givens estimate
/// drops below tol. Throws DivergenceError on NaN/Inf.
SolveReport gmres(const ApplyFn& a, std::span<const double> b, std::span<double> x, const ApplyFn& precond,
                  const SolverConfig& cfg = {});
SolveReport gmres(const ApplyFn& a, std::span<const double> b, std::span<double> x, const Preconditioner& precond,
                  const SolverConfig& cfg = {});

/// Preconditioned conjugate gradients; same stopping rule as gmres. Throws
/// NotSpdError when p^T A p <= 0 or r^T M^{-1} r <= 0.
SolveReport cg(const ApplyFn& a, std::span<const double> b, std::span<double> x, const ApplyFn& precond,
               const SolverConfig& cfg = {});

ApplyFn as_apply(const Preconditioner& p);

}  // namespace hssor
