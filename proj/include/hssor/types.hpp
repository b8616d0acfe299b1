#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hssor {

using Vector = std::vector<double>;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Zero diagonal in a triangular factor or a singular block.
class SingularError : public Error {
public:
    using Error::Error;
};

/// ILU(0) pivot below tolerance.
class BreakdownError : public Error {
public:
    explicit BreakdownError(std::size_t row)
        : Error("ILU(0) breakdown: near-zero pivot at row " + std::to_string(row)),
          row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class NotSpdError : public Error {
public:
    using Error::Error;
};

/// NaN or Inf appeared in a Krylov iterate.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t iteration)
        : Error(what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

/// Estimated storage exceeds the configured guard (reported as ME).
class MemoryLimitError : public Error {
public:
    MemoryLimitError(double estimated_bytes, double limit_bytes)
        : Error("memory estimate " + std::to_string(estimated_bytes / 1e9) + " GB exceeds limit " +
                std::to_string(limit_bytes / 1e9) + " GB"),
          estimated_(estimated_bytes) {}
    double estimated_bytes() const noexcept { return estimated_; }

private:
    double estimated_;
};

}  // namespace hssor
