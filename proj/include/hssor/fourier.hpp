#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hssor/dense.hpp"
#include "hssor/stencil.hpp"

namespace hssor::fourier {

/// `paper`: lambda(T) = m - 2 l1 cos(theta), the additive symbol.
/// `exact`: lambda(T) = m - 2 l1 cos(theta) + l1^2 / m, the symbol of the
/// periodic product (M + L1)(I + M^{-1} L1^T); only this one matches the
/// actual periodic operators.
enum class AnalysisMode { paper, exact };

/// `paper`: theta_s = 2 pi s / (n + 1), s = 1..n.
/// `circulant`: theta_s = 2 pi s / n, s = 0..n-1 (true eigenvectors of
/// size-n circulants; s = t = r = 0 is the null mode).
enum class ModeConvention { paper, circulant };

std::string to_string(AnalysisMode m);
std::string to_string(ModeConvention c);

/// Constant coefficients of the model operator on a `dim`-dimensional grid.
struct Coefficients {
    int dim = 3;
    double l1 = 1.0;
    double l2 = 1.0;
    double l3 = 1.0;

    /// m = 2 (l1 + l2 + l3) over the active axes.
    double diagonal() const noexcept;
    double l(int axis) const noexcept { return axis == 0 ? l1 : axis == 1 ? l2 : l3; }
};

struct FourierMode {
    std::size_t s = 0;
    std::size_t t = 0;
    std::size_t r = 0;
    double theta = 0.0;
    double phi = 0.0;
    double xi = 0.0;
    ModeConvention convention = ModeConvention::paper;
    bool null_mode = false;
};

/// Angles for indices (s, t, r) on an n-point axis. Unused axes (beyond
/// `dim`) get index 0 and angle 0. Throws DimensionError if an index is
/// outside the convention's range.
FourierMode make_mode(std::size_t s, std::size_t t, std::size_t r, std::size_t n, int dim, ModeConvention c);

/// Every mode of the grid, lexicographic in (s, t, r).
std::vector<FourierMode> mode_grid(std::size_t n, int dim, ModeConvention c);

struct SymbolChain {
    double lam_a = 0.0;
    double lam_t = 0.0;
    double lam_p = 0.0;
    double lam_b = 0.0;
    double lam_b_minus_a = 0.0;
    double lam_binv_a = 0.0;
    AnalysisMode mode = AnalysisMode::paper;
};

double lambda_a(const FourierMode& m, const Coefficients& c);
double lambda_t(const FourierMode& m, const Coefficients& c, AnalysisMode am);
/// Throws Error if lambda(T) <= 0.
double lambda_p(const FourierMode& m, const Coefficients& c, AnalysisMode am);
/// Top-level symbol: T in 1D, P in 2D, B in 3D. Throws Error if an inner
/// symbol is nonpositive.
double lambda_b(const FourierMode& m, const Coefficients& c, AnalysisMode am);
/// l2^2 / lambda(T) + l3^2 / lambda(P), plus l1^2 / m in exact mode.
double lambda_b_minus_a(const FourierMode& m, const Coefficients& c, AnalysisMode am);
/// lambda(A) / lambda(B); 0 at the null mode.
double lambda_binv_a(const FourierMode& m, const Coefficients& c, AnalysisMode am);

SymbolChain evaluate(const FourierMode& m, const Coefficients& c, AnalysisMode am);

/// x + 1/x.
inline double plus_reciprocal(double x) { return x + 1.0 / x; }

struct Extreme {
    double min_value = 0.0;
    double max_value = 0.0;
    FourierMode min_mode;
    FourierMode max_mode;
};

struct SpectrumExtremes {
    Extreme a, t, p, b, b_minus_a, binv_a;
};

/// Exhaustive scan over the mode grid (null mode excluded). Ties go to the
/// lexicographically smallest (s, t, r).
SpectrumExtremes spectrum_extremes(std::size_t n, const Coefficients& c, AnalysisMode am, ModeConvention conv);

/// max / min of lambda(B^{-1} A) over the non-null modes.
double cond_discrete(std::size_t n, const Coefficients& c, AnalysisMode am,
                     ModeConvention conv = ModeConvention::paper);

/// sigma = 5 + 5 pi^2 + pi^4; 25 sigma / (144 (3 pi^2 sigma + 4 + pi^2)).
double cond_asymptotic_constant();
/// cond_asymptotic_constant() / h^2, for h in (0, 0.1].
double cond_asymptotic(double h);

using ComplexVector = std::vector<std::complex<double>>;

/// Unit-normalized e^{i(i theta + j phi + k xi)} on an n^dim grid (x
/// fastest). Only circulant-convention modes are exact eigenvectors; paper
/// convention requests throw.
ComplexVector fourier_vector(const FourierMode& m, std::size_t n, int dim);

/// ||Op v - expected v||_2 for a real operator applied to a complex vector.
double verify_eigenpair(const ApplyFn& op, const ComplexVector& v, double expected);

/// Periodic HSSOR on a constant-coefficient periodic stencil:
///   B = (P + L3)(I + P^{-1} L3^T), P = I (x) P0, P0 = (T + L2)(I + T^{-1} L2^T),
///   T = I (x) T0, T0 = (M + L1)(I + M^{-1} L1^T),
/// with all L's block circulant. The lower-level factors are not triangular
/// here (wraparound), so their inverses come from dense LU of one block.
class PeriodicHssor {
public:
    /// `a` must be periodic with constant bands and outlive this object.
    explicit PeriodicHssor(const StencilMatrix& a);

    std::size_t size() const noexcept { return a_->size(); }
    int levels() const noexcept { return top_; }
    void multiply(std::span<const double> x, std::span<double> y) const;
    /// B^{-1} via dense LU of the assembled B (guarded by kMaxDenseColumns).
    void solve(std::span<const double> r, std::span<double> z) const;

private:
    struct Level {
        std::span<const double> lower;
        std::span<const double> upper;
        std::size_t blocks = 1;
        std::size_t block = 1;
    };

    void multiply_level(int level, std::size_t p0, std::span<const double> x, std::span<double> y) const;
    void solve_level(int level, std::size_t p0, std::span<const double> r, std::span<double> z) const;

    const StencilMatrix* a_;
    std::span<const double> m_;
    std::array<Level, 4> levels_{};
    std::array<Eigen::PartialPivLU<Eigen::MatrixXd>, 4> lu_{};
    mutable std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> top_lu_;
    int top_ = 1;
};

/// One lower/upper bound claim about the paper-mode 3D isotropic symbols.
struct BoundCheck {
    std::string claim;
    double observed = 0.0;
    double bound = 0.0;
    bool holds = false;
    FourierMode where;
};

/// Strict bounds on the extreme symbols over the paper-convention grid of
/// size n (3D isotropic, paper mode). The frequently quoted lower bound 95/36
/// on lambda_min(B) is checked next to 25/36, the infimum the recursion
/// actually produces; only the latter holds.
std::vector<BoundCheck> check_extreme_bounds(std::size_t n);

}  // namespace hssor::fourier
