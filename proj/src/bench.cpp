#include "hssor/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace hssor {

namespace {

using Clock = std::chrono::steady_clock;

std::string format_double(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string inv_h(const GridSize& s) { return std::to_string(s.n + 1); }

std::string method_header(const PrecondSpec& p) {
    switch (p.kind) {
        case PrecondKind::identity: return "None";
        case PrecondKind::ssor: return "SSOR";
        case PrecondKind::bssor: return "BSSOR";
        case PrecondKind::ilu0: return "ILU(0)";
        case PrecondKind::hssor: return "HSSOR";
        case PrecondKind::twogrid: return p.smoother == SmootherKind::hssor ? "GMG-HS" : "GMG-SS";
    }
    return "?";
}

std::string cell_text(const CellResult& c, bool timing) {
    if (c.status != CellStatus::converged) return to_string(c.status);
    std::string s = std::to_string(c.report.iterations);
    if (timing) s += " (" + format_double(c.seconds, "%.2f") + " s)";
    return s;
}

}  // namespace

ProblemKind parse_problem(std::string_view name) {
    if (name == "iso2d") return ProblemKind::iso2d;
    if (name == "iso3d") return ProblemKind::iso3d;
    if (name == "dc1-2d") return ProblemKind::dc1_2d;
    if (name == "dc1-3d") return ProblemKind::dc1_3d;
    throw Error("unknown problem '" + std::string(name) + "'");
}

std::string to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::iso2d: return "iso2d";
        case ProblemKind::iso3d: return "iso3d";
        case ProblemKind::dc1_2d: return "dc1-2d";
        case ProblemKind::dc1_3d: return "dc1-3d";
    }
    return "?";
}

GridSpec make_grid(ProblemKind kind, std::size_t n) {
    switch (kind) {
        case ProblemKind::iso2d: return GridSpec::isotropic(2, n);
        case ProblemKind::iso3d: return GridSpec::isotropic(3, n);
        case ProblemKind::dc1_2d: return GridSpec::dc1(2, n);
        case ProblemKind::dc1_3d: return GridSpec::dc1(3, n);
    }
    throw Error("make_grid: bad problem kind");
}

ProblemKind problem_kind(const GridSpec& spec) {
    const bool dc1 = std::holds_alternative<Dc1Coeff>(spec.coeff);
    if (spec.dim == 2) return dc1 ? ProblemKind::dc1_2d : ProblemKind::iso2d;
    if (spec.dim == 3) return dc1 ? ProblemKind::dc1_3d : ProblemKind::iso3d;
    throw Error("problem_kind: only 2D and 3D problems have names");
}

PrecondSpec parse_precond(std::string_view name) {
    PrecondSpec p;
    if (name == "none") {
        p.kind = PrecondKind::identity;
    } else if (name == "ssor") {
        p.kind = PrecondKind::ssor;
    } else if (name == "bssor") {
        p.kind = PrecondKind::bssor;
    } else if (name == "ilu0") {
        p.kind = PrecondKind::ilu0;
    } else if (name == "hssor") {
        p.kind = PrecondKind::hssor;
    } else if (name == "gmg-hs") {
        p.kind = PrecondKind::twogrid;
        p.smoother = SmootherKind::hssor;
    } else if (name == "gmg-ss") {
        p.kind = PrecondKind::twogrid;
        p.smoother = SmootherKind::ssor;
    } else {
        throw Error("unknown preconditioner '" + std::string(name) + "'");
    }
    return p;
}

std::string precond_label(const PrecondSpec& spec) {
    if (spec.kind == PrecondKind::twogrid) return spec.smoother == SmootherKind::hssor ? "gmg-hs" : "gmg-ss";
    return to_string(spec.kind);
}

BlockShape default_block_shape(int dim) { return dim >= 3 ? BlockShape::plane : BlockShape::line; }

double estimate_memory_bytes(const GridSpec& grid, const PrecondSpec& precond, double cf, std::size_t restart) {
    const double n = static_cast<double>(grid.size());
    const double d = sizeof(double);
    const double stencil_nnz = 2.0 * grid.dim + 1.0;
    // CSR (values + indices) plus the seven-band form.
    double bytes = n * stencil_nnz * 2.0 * d + n * 7.0 * d;
    // Krylov basis, iterate, right-hand side and work vectors.
    bytes += (static_cast<double>(restart) + 6.0) * n * d;
    switch (precond.kind) {
        case PrecondKind::identity:
        case PrecondKind::ssor:
        case PrecondKind::hssor:
            break;
        case PrecondKind::ilu0:
            bytes += 2.0 * n * stencil_nnz * 2.0 * d;
            break;
        case PrecondKind::bssor:
            bytes += bssor_storage_bytes(grid.dims(), default_block_shape(grid.dim));
            break;
        case PrecondKind::twogrid: {
            const double nc = std::max(1.0, std::round(n / std::pow(cf, grid.dim)));
            // Nested-dissection fill: O(Nc log Nc) in 2D, O(Nc^{4/3}) in 3D.
            const double fill = grid.dim == 2 ? nc * std::max(1.0, std::log2(nc)) * 4.0 : std::pow(nc, 4.0 / 3.0);
            bytes += 2.0 * n * d + fill * 2.0 * d + nc * stencil_nnz * 4.0 * d;
            break;
        }
    }
    return bytes;
}

std::unique_ptr<Preconditioner> make_preconditioner(const PrecondSpec& spec, const StencilMatrix& stencil,
                                                    const CsrMatrix& csr, double cf, const AggregateMap* partition) {
    switch (spec.kind) {
        case PrecondKind::identity: return std::make_unique<IdentityPreconditioner>(csr.nrows());
        case PrecondKind::ssor: return std::make_unique<SsorPreconditioner>(csr);
        case PrecondKind::ilu0: return std::make_unique<Ilu0Preconditioner>(csr);
        case PrecondKind::hssor: return std::make_unique<HssorPreconditioner>(stencil);
        case PrecondKind::bssor:
            return std::make_unique<BssorPreconditioner>(csr, stencil.dims(),
                                                         default_block_shape(stencil.dims().dimension()));
        case PrecondKind::twogrid: return twogrid_setup(stencil, csr, spec.smoother, cf, partition);
    }
    throw Error("make_preconditioner: bad kind");
}

std::string to_string(CellStatus status) {
    switch (status) {
        case CellStatus::converged: return "its";
        case CellStatus::nc: return "NC";
        case CellStatus::me: return "ME";
        case CellStatus::na: return "NA";
    }
    return "?";
}

CellResult run_cell(const SolveRequest& req) {
    CellResult cell;
    req.grid.validate();
    req.solver.validate();
    cell.report.problem = to_string(problem_kind(req.grid));
    cell.report.preconditioner = precond_label(req.precond);
    cell.report.solver = "gmres(" + std::to_string(req.solver.restart) + ")";
    cell.memory_estimate_bytes = estimate_memory_bytes(req.grid, req.precond, req.cf, req.solver.restart);
    if (cell.memory_estimate_bytes > req.memory_limit_bytes) {
        cell.status = CellStatus::me;
        cell.message = MemoryLimitError(cell.memory_estimate_bytes, req.memory_limit_bytes).what();
        return cell;
    }

    const auto t0 = Clock::now();
    try {
        const auto problem = make_problem(req.grid);
        const auto csr = problem.a.to_csr();
        std::optional<AggregateMap> partition;
        if (req.partition_file) partition = read_partition(*req.partition_file);
        const auto precond =
            make_preconditioner(req.precond, problem.a, csr, req.cf, partition ? &*partition : nullptr);
        const ApplyFn a = [&csr](std::span<const double> x, std::span<double> y) { spmv(csr, x, y); };
        Vector x(problem.b.size(), 0.0);
        auto rep = gmres(a, problem.b, x, *precond, req.solver);
        rep.problem = cell.report.problem;
        rep.preconditioner = precond_label(req.precond);
        cell.report = std::move(rep);
        cell.status = cell.report.converged ? CellStatus::converged : CellStatus::nc;
    } catch (const DivergenceError& e) {
        cell.status = CellStatus::nc;
        cell.message = e.what();
    } catch (const std::bad_alloc&) {
        cell.status = CellStatus::me;
        cell.message = "allocation failed";
    } catch (const Error& e) {
        cell.status = CellStatus::na;
        cell.message = e.what();
    }
    cell.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return cell;
}

BenchTable parse_table(std::string_view name) {
    if (name == "isotropic" || name == "iso") return BenchTable::isotropic;
    if (name == "dc1") return BenchTable::dc1;
    throw Error("unknown table '" + std::string(name) + "'");
}

std::string to_string(BenchTable table) { return table == BenchTable::isotropic ? "isotropic" : "dc1"; }

void BenchPlan::validate() const {
    if (methods.empty()) throw Error("bench plan: no methods");
    if (sizes.empty()) throw Error("bench plan: no grid sizes");
    for (const auto& s : sizes) {
        if (s.dim != 2 && s.dim != 3) throw Error("bench plan: dim must be 2 or 3");
        const auto grid = table == BenchTable::isotropic ? GridSpec::isotropic(s.dim, s.n) : GridSpec::dc1(s.dim, s.n);
        grid.validate();
    }
    solver.validate();
}

BenchReport run_bench(const BenchPlan& plan, std::ostream* progress) {
    plan.validate();
    BenchReport report;
    report.table = plan.table;
    report.methods = plan.methods;
    for (const auto& size : plan.sizes) {
        BenchRow row;
        row.size = size;
        for (const auto& method : plan.methods) {
            SolveRequest req;
            req.grid = plan.table == BenchTable::isotropic ? GridSpec::isotropic(size.dim, size.n)
                                                           : GridSpec::dc1(size.dim, size.n);
            req.precond = method;
            req.cf = plan.cf;
            req.solver = plan.solver;
            req.memory_limit_bytes = plan.memory_limit_bytes;
            auto cell = run_cell(req);
            if (progress) {
                *progress << size.dim << "D 1/h=" << size.n + 1 << " " << precond_label(method) << ": "
                          << cell_text(cell, true);
                if (!cell.message.empty()) *progress << " [" << cell.message << "]";
                *progress << '\n';
            }
            row.cells.push_back(std::move(cell));
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string timestamp_comment() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << "# generated " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

namespace {

void write_cell_fields(std::ostream& out, const CellResult& c, bool timing) {
    const bool ok = c.status == CellStatus::converged;
    out << to_string(c.status) << ',';
    out << (ok ? std::to_string(c.report.iterations) : "") << ',';
    out << (ok && timing ? format_double(c.seconds, "%.4f") : "") << ',';
    out << (ok ? format_double(c.report.final_relres, "%.6e") : "");
}

}  // namespace

void write_bench_csv(std::ostream& out, const BenchReport& report, const OutputOptions& opt) {
    if (opt.timestamp) out << timestamp_comment() << '\n';
    out << "table,dim,inv_h,n,method,status,iterations,seconds,relres\n";
    for (const auto& row : report.rows) {
        for (std::size_t m = 0; m < report.methods.size(); ++m) {
            out << to_string(report.table) << ',' << row.size.dim << ',' << inv_h(row.size) << ',' << row.size.n
                << ',' << csv_field(precond_label(report.methods[m])) << ',';
            write_cell_fields(out, row.cells[m], opt.timing);
            out << '\n';
        }
    }
}

void write_bench_markdown(std::ostream& out, const BenchReport& report, const OutputOptions& opt) {
    out << "| Dim | 1/h |";
    for (const auto& m : report.methods) out << ' ' << method_header(m) << " |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < report.methods.size(); ++i) out << "---|";
    out << '\n';
    for (const auto& row : report.rows) {
        out << "| " << row.size.dim << "D | " << inv_h(row.size) << " |";
        for (const auto& c : row.cells) out << ' ' << cell_text(c, opt.timing) << " |";
        out << '\n';
    }
}

void write_cell_csv(std::ostream& out, const SolveRequest& req, const CellResult& cell, const OutputOptions& opt) {
    if (opt.timestamp) out << timestamp_comment() << '\n';
    out << "problem,dim,inv_h,n,method,status,iterations,seconds,relres\n";
    out << to_string(problem_kind(req.grid)) << ',' << req.grid.dim << ',' << req.grid.n + 1 << ',' << req.grid.n
        << ',' << csv_field(precond_label(req.precond)) << ',';
    write_cell_fields(out, cell, opt.timing);
    out << '\n';
}

void write_cell_markdown(std::ostream& out, const SolveRequest& req, const CellResult& cell,
                         const OutputOptions& opt) {
    out << "| Problem | 1/h | Method | Result |\n|---|---|---|---|\n";
    out << "| " << to_string(problem_kind(req.grid)) << " | " << req.grid.n + 1 << " | "
        << method_header(req.precond) << " | " << cell_text(cell, opt.timing) << " |\n";
    if (!cell.message.empty()) out << '\n' << cell.message << '\n';
}

std::string cell_to_json(const SolveRequest& req, const CellResult& cell, const OutputOptions& opt) {
    nlohmann::ordered_json j;
    j["problem"] = to_string(problem_kind(req.grid));
    j["dim"] = req.grid.dim;
    j["n"] = req.grid.n;
    j["inv_h"] = req.grid.n + 1;
    j["preconditioner"] = precond_label(req.precond);
    j["solver"] = cell.report.solver;
    j["cf"] = req.cf;
    j["tol"] = req.solver.tol;
    j["status"] = to_string(cell.status);
    j["converged"] = cell.report.converged;
    if (cell.status == CellStatus::converged || cell.status == CellStatus::nc) {
        j["iterations"] = cell.report.iterations;
        j["final_relres"] = cell.report.final_relres;
        j["history"] = cell.report.history;
    }
    if (opt.timing) j["wall_seconds"] = cell.seconds;
    j["memory_estimate_bytes"] = cell.memory_estimate_bytes;
    if (!cell.report.notes.empty()) j["notes"] = cell.report.notes;
    if (!cell.message.empty()) j["message"] = cell.message;
    return j.dump(2);
}

}  // namespace hssor
