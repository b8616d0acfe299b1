#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hssor/csr.hpp"
#include "hssor/krylov.hpp"
#include "hssor/multigrid.hpp"
#include "hssor/precond.hpp"
#include "hssor/problems.hpp"

namespace hssor {

enum class ProblemKind { iso2d, iso3d, dc1_2d, dc1_3d };

/// "iso2d", "iso3d", "dc1-2d", "dc1-3d".
ProblemKind parse_problem(std::string_view name);
std::string to_string(ProblemKind kind);
GridSpec make_grid(ProblemKind kind, std::size_t n);
ProblemKind problem_kind(const GridSpec& spec);

/// "none", "ssor", "bssor", "ilu0", "hssor", "gmg-hs", "gmg-ss".
PrecondSpec parse_precond(std::string_view name);
std::string precond_label(const PrecondSpec& spec);

/// Plane blocks in 3D, line blocks in 2D.
BlockShape default_block_shape(int dim);

inline constexpr double kDefaultMemoryLimitBytes = 4.0 * 1024.0 * 1024.0 * 1024.0;

/// Rough peak bytes for one solve: matrix, Krylov basis and preconditioner
/// storage (banded block factors for BSSOR, a fill model for the sparse
/// coarse Cholesky).
double estimate_memory_bytes(const GridSpec& grid, const PrecondSpec& precond, double cf, std::size_t restart);

/// Builds the preconditioner for a problem. `stencil` and `csr` must outlive
/// the result.
std::unique_ptr<Preconditioner> make_preconditioner(const PrecondSpec& spec, const StencilMatrix& stencil,
                                                    const CsrMatrix& csr, double cf,
                                                    const AggregateMap* partition = nullptr);

/// its: converged; NC: not converged within the iteration cap; ME: memory
/// guard tripped before any allocation; NA: the method could not be set up
/// (e.g. ILU(0) breakdown).
enum class CellStatus { converged, nc, me, na };
std::string to_string(CellStatus status);

struct SolveRequest {
    GridSpec grid;
    PrecondSpec precond;
    double cf = 4.5;
    SolverConfig solver;
    double memory_limit_bytes = kDefaultMemoryLimitBytes;
    std::optional<std::string> partition_file;
};

struct CellResult {
    CellStatus status = CellStatus::na;
    SolveReport report;
    /// Setup plus solve wall time.
    double seconds = 0.0;
    double memory_estimate_bytes = 0.0;
    std::string message;
};

/// Runs one solve (GMRES with right preconditioning, x0 = 0, b = A 1).
/// Errors become cell statuses; nothing is thrown for solver failures.
CellResult run_cell(const SolveRequest& req);

enum class BenchTable { isotropic, dc1 };
BenchTable parse_table(std::string_view name);
std::string to_string(BenchTable table);

struct GridSize {
    int dim = 3;
    std::size_t n = 0;
};

struct BenchPlan {
    BenchTable table = BenchTable::isotropic;
    std::vector<GridSize> sizes;
    std::vector<PrecondSpec> methods;
    double cf = 4.5;
    SolverConfig solver;
    double memory_limit_bytes = kDefaultMemoryLimitBytes;

    /// Throws Error on an empty method list or an invalid grid.
    void validate() const;
};

struct BenchRow {
    GridSize size;
    std::vector<CellResult> cells;
};

struct BenchReport {
    BenchTable table = BenchTable::isotropic;
    std::vector<PrecondSpec> methods;
    std::vector<BenchRow> rows;
};

/// Runs every (size, method) cell in order; a failing cell never aborts the
/// campaign.
BenchReport run_bench(const BenchPlan& plan, std::ostream* progress = nullptr);

struct OutputOptions {
    /// Comment line with the generation time at the top of CSV output.
    bool timestamp = true;
    /// Wall times in cells; off makes the output reproducible byte for byte.
    bool timing = true;
};

/// Quotes a CSV field when needed.
std::string csv_field(std::string_view s);
std::string timestamp_comment();

/// One line per cell: dim,inv_h,n,method,status,iterations,seconds,relres.
void write_bench_csv(std::ostream& out, const BenchReport& report, const OutputOptions& opt = {});
/// Rows (dim, 1/h) by method columns; each cell "its (time s)" or a status.
void write_bench_markdown(std::ostream& out, const BenchReport& report, const OutputOptions& opt = {});

void write_cell_csv(std::ostream& out, const SolveRequest& req, const CellResult& cell, const OutputOptions& opt = {});
void write_cell_markdown(std::ostream& out, const SolveRequest& req, const CellResult& cell,
                         const OutputOptions& opt = {});
std::string cell_to_json(const SolveRequest& req, const CellResult& cell, const OutputOptions& opt = {});

}  // namespace hssor
