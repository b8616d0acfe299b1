#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hssor/bench.hpp"
#include "hssor/fourier.hpp"
#include "hssor/matrix_market.hpp"
#include "hssor/problems.hpp"

namespace {

using namespace hssor;
namespace fo = hssor::fourier;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitMemory = 3;
constexpr int kExitNotApplicable = 4;

std::string fmt(double v, const char* f = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string mode_label(const fo::FourierMode& m, int dim) {
    std::string s = "(" + std::to_string(m.s);
    if (dim >= 2) s += "," + std::to_string(m.t);
    if (dim >= 3) s += "," + std::to_string(m.r);
    return s + ")";
}

// ---------------------------------------------------------------------------

struct SolveArgs {
    std::string problem = "iso3d";
    std::size_t n = 39;
    std::string precond = "hssor";
    double cf = 0.0;
    double tol = 1e-10;
    std::size_t restart = 30;
    std::size_t maxit = 500;
    std::string out = "md";
    std::string partition;
    double mem_limit_gb = kDefaultMemoryLimitBytes / 1e9;
    bool no_timestamp = false;
    bool no_timing = false;
};

int run_solve(const SolveArgs& args) {
    SolveRequest req;
    req.grid = make_grid(parse_problem(args.problem), args.n);
    req.precond = parse_precond(args.precond);
    const bool dc1 = std::holds_alternative<Dc1Coeff>(req.grid.coeff);
    req.cf = args.cf > 0.0 ? args.cf : (dc1 ? 3.0 : 4.5);
    req.solver.tol = args.tol;
    req.solver.restart = args.restart;
    req.solver.max_iters = args.maxit;
    req.memory_limit_bytes = args.mem_limit_gb * 1e9;
    if (!args.partition.empty()) req.partition_file = args.partition;
    const OutputOptions opt{!args.no_timestamp, !args.no_timing};

    const auto cell = run_cell(req);
    if (args.out == "csv") {
        write_cell_csv(std::cout, req, cell, opt);
    } else if (args.out == "json") {
        std::cout << cell_to_json(req, cell, opt) << '\n';
    } else {
        write_cell_markdown(std::cout, req, cell, opt);
    }
    switch (cell.status) {
        case CellStatus::converged: return kExitOk;
        case CellStatus::nc: return kExitNotConverged;
        case CellStatus::me: return kExitMemory;
        case CellStatus::na: return kExitNotApplicable;
    }
    return kExitUsage;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string table = "isotropic";
    std::vector<std::string> grids;
    std::vector<std::string> methods;
    double cf = 0.0;
    double tol = 1e-10;
    std::size_t restart = 30;
    std::size_t maxit = 500;
    double mem_limit_gb = kDefaultMemoryLimitBytes / 1e9;
    std::string csv;
    std::string md;
    bool no_timestamp = false;
    bool no_timing = false;
    bool quiet = false;
};

GridSize parse_grid(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw Error("grid '" + text + "' must look like DIM:N");
    GridSize g;
    try {
        g.dim = std::stoi(text.substr(0, colon));
        g.n = std::stoul(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw Error("grid '" + text + "' must look like DIM:N");
    }
    return g;
}

int run_bench_cmd(const BenchArgs& args) {
    BenchPlan plan;
    plan.table = parse_table(args.table);
    const bool iso = plan.table == BenchTable::isotropic;
    std::vector<std::string> grids = args.grids;
    if (grids.empty()) grids = iso ? std::vector<std::string>{"3:20", "3:39"} : std::vector<std::string>{"2:99", "2:199"};
    for (const auto& g : grids) plan.sizes.push_back(parse_grid(g));
    std::vector<std::string> methods = args.methods;
    if (methods.empty()) {
        methods = iso ? std::vector<std::string>{"ssor", "bssor", "ilu0", "hssor", "gmg-hs", "gmg-ss"}
                      : std::vector<std::string>{"gmg-hs", "gmg-ss"};
    }
    for (const auto& m : methods) plan.methods.push_back(parse_precond(m));
    plan.cf = args.cf > 0.0 ? args.cf : (iso ? 4.5 : 3.0);
    plan.solver.tol = args.tol;
    plan.solver.restart = args.restart;
    plan.solver.max_iters = args.maxit;
    plan.solver.record_history = false;
    plan.memory_limit_bytes = args.mem_limit_gb * 1e9;

    const auto report = run_bench(plan, args.quiet ? nullptr : &std::cerr);
    const OutputOptions opt{!args.no_timestamp, !args.no_timing};
    if (!args.csv.empty()) {
        std::ofstream f(args.csv);
        if (!f) throw Error("cannot write " + args.csv);
        write_bench_csv(f, report, opt);
    }
    if (!args.md.empty()) {
        std::ofstream f(args.md);
        if (!f) throw Error("cannot write " + args.md);
        write_bench_markdown(f, report, opt);
    }
    if (args.csv.empty() && args.md.empty()) {
        write_bench_markdown(std::cout, report, opt);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    std::size_t n = 16;
    int dim = 3;
    std::string mode = "paper";
    std::string convention = "paper";
    double l1 = 1.0;
    double l2 = 1.0;
    double l3 = 1.0;
    std::string csv;
    bool no_csv = false;
    bool no_timestamp = false;
};

void write_mode_csv(std::ostream& out, const AnalyzeArgs& args, const fo::Coefficients& c, fo::AnalysisMode am,
                    fo::ModeConvention conv) {
    if (!args.no_timestamp) out << timestamp_comment() << '\n';
    out << "s,t,r,theta,phi,xi,lamA,lamT,lamP,lamB,lamBmA,lamBinvA\n";
    for (const auto& m : fo::mode_grid(args.n, c.dim, conv)) {
        const auto ch = fo::evaluate(m, c, am);
        out << m.s << ',' << m.t << ',' << m.r << ',' << fmt(m.theta, "%.17g") << ',' << fmt(m.phi, "%.17g") << ','
            << fmt(m.xi, "%.17g") << ',' << fmt(ch.lam_a, "%.17g") << ',' << fmt(ch.lam_t, "%.17g") << ','
            << fmt(ch.lam_p, "%.17g") << ',' << fmt(ch.lam_b, "%.17g") << ',' << fmt(ch.lam_b_minus_a, "%.17g")
            << ',' << fmt(ch.lam_binv_a, "%.17g") << '\n';
    }
}

// Max residual of the symbol/operator pairing over every mode on the
// periodic grid.
struct VerifyResult {
    double a = 0.0;
    double b = 0.0;
    double binv_a = -1.0;
};

VerifyResult verify_suite(std::size_t n, const fo::Coefficients& c) {
    GridSpec spec;
    spec.dim = c.dim;
    spec.n = n;
    spec.boundary = Boundary::periodic;
    spec.coeff = ConstantCoeff{c.l1, c.l2, c.l3};
    const auto a = build_laplacian(spec);
    const fo::PeriodicHssor b(a);
    const ApplyFn op_a = [&a](std::span<const double> x, std::span<double> y) { spmv(a, x, y); };
    const ApplyFn op_b = [&b](std::span<const double> x, std::span<double> y) { b.multiply(x, y); };
    const bool small = a.size() <= kMaxDenseColumns;
    Vector tmp(a.size());
    const ApplyFn op_binv_a = [&](std::span<const double> x, std::span<double> y) {
        spmv(a, x, tmp);
        b.solve(tmp, y);
    };
    VerifyResult out;
    if (small) out.binv_a = 0.0;
    for (const auto& m : fo::mode_grid(n, c.dim, fo::ModeConvention::circulant)) {
        const auto v = fo::fourier_vector(m, n, c.dim);
        const auto ch = fo::evaluate(m, c, fo::AnalysisMode::exact);
        out.a = std::max(out.a, fo::verify_eigenpair(op_a, v, ch.lam_a));
        out.b = std::max(out.b, fo::verify_eigenpair(op_b, v, ch.lam_b));
        if (small) out.binv_a = std::max(out.binv_a, fo::verify_eigenpair(op_binv_a, v, ch.lam_binv_a));
    }
    return out;
}

void print_extreme(std::ostream& out, const char* name, const fo::Extreme& e, int dim) {
    out << "  " << name << ": min " << fmt(e.min_value) << " at " << mode_label(e.min_mode, dim) << ", max "
        << fmt(e.max_value) << " at " << mode_label(e.max_mode, dim) << '\n';
}

int run_analyze(const AnalyzeArgs& args) {
    if (args.n < 4) throw CLI::ValidationError("--n", "must be at least 4");
    if (args.dim < 1 || args.dim > 3) throw CLI::ValidationError("--dim", "must be 1, 2 or 3");
    const auto am = args.mode == "exact" ? fo::AnalysisMode::exact : fo::AnalysisMode::paper;
    const auto conv = args.convention == "circulant" ? fo::ModeConvention::circulant : fo::ModeConvention::paper;
    const fo::Coefficients c{args.dim, args.l1, args.l2, args.l3};

    if (!args.no_csv) {
        if (args.csv.empty()) {
            write_mode_csv(std::cout, args, c, am, conv);
            std::cout << '\n';
        } else {
            std::ofstream f(args.csv);
            if (!f) throw Error("cannot write " + args.csv);
            write_mode_csv(f, args, c, am, conv);
        }
    }

    auto& out = std::cout;
    const auto e = fo::spectrum_extremes(args.n, c, am, conv);
    const double h = 1.0 / static_cast<double>(args.n + 1);
    out << "summary: n=" << args.n << " 1/h=" << args.n + 1 << " dim=" << args.dim
        << " mode=" << fo::to_string(am) << " convention=" << fo::to_string(conv) << " l=(" << fmt(c.l1) << ','
        << fmt(c.l2) << ',' << fmt(c.l3) << ")\n";
    out << "extremes (null mode excluded):\n";
    print_extreme(out, "lambda(A)", e.a, args.dim);
    print_extreme(out, "lambda(T)", e.t, args.dim);
    print_extreme(out, "lambda(P)", e.p, args.dim);
    print_extreme(out, "lambda(B)", e.b, args.dim);
    print_extreme(out, "lambda(B-A)", e.b_minus_a, args.dim);
    print_extreme(out, "lambda(B^-1 A)", e.binv_a, args.dim);
    const double cond = e.binv_a.max_value / e.binv_a.min_value;
    out << "cond_discrete: " << fmt(cond) << " (cond * h^2 = " << fmt(cond * h * h) << ")\n";
    out << "cond_asymptotic constant: " << fmt(fo::cond_asymptotic_constant()) << " (about 0.006)\n";
    if (h <= 0.1) out << "cond_asymptotic(h): " << fmt(fo::cond_asymptotic(h)) << '\n';

    const bool isotropic = c.l1 == 1.0 && c.l2 == 1.0 && c.l3 == 1.0;
    if (args.dim == 3 && isotropic) {
        out << "bound checks (3D isotropic, paper mode, paper convention):\n";
        for (const auto& b : fo::check_extreme_bounds(args.n)) {
            out << "  " << (b.holds ? "HOLDS " : "FAILS ") << b.claim << ": observed " << fmt(b.observed)
                << " at " << mode_label(b.where, 3) << ", bound " << fmt(b.bound) << '\n';
        }
        out << "  note: the recursion's infimum of lambda(B) is 9/4 + 4/9 - 2 = 25/36, so a 95/36 lower bound "
               "cannot hold\n";
    }
    if (conv == fo::ModeConvention::circulant && am == fo::AnalysisMode::exact) {
        const auto v = verify_suite(args.n, c);
        out << "operator verification (periodic grid, all modes):\n";
        out << "  max ||A v - lambda(A) v|| = " << fmt(v.a, "%.3e") << '\n';
        out << "  max ||B v - lambda(B) v|| = " << fmt(v.b, "%.3e") << '\n';
        if (v.binv_a >= 0.0) out << "  max ||B^-1 A v - lambda(B^-1 A) v|| = " << fmt(v.binv_a, "%.3e") << '\n';
        const double worst = std::max({v.a, v.b, v.binv_a});
        out << "  verdict: " << (worst <= 1e-10 ? "PASS" : "FAIL") << " (tolerance 1e-10)\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string problem = "iso2d";
    std::size_t n = 15;
    std::string boundary = "dirichlet";
    std::string out;
    bool rhs = false;
};

int run_generate(const GenerateArgs& args) {
    auto grid = make_grid(parse_problem(args.problem), args.n);
    if (args.boundary == "periodic") {
        if (std::holds_alternative<Dc1Coeff>(grid.coeff)) throw Error("dc1 problems are Dirichlet only");
        grid.boundary = Boundary::periodic;
    }
    const auto problem = make_problem(grid);
    const auto csr = problem.a.to_csr();
    const std::string base = args.out;
    write_matrix_market(base, csr);
    {
        std::ofstream f(base + ".json");
        if (!f) throw Error("cannot write " + base + ".json");
        f << grid_spec_to_json(grid) << '\n';
    }
    if (args.rhs) {
        std::ofstream f(base + ".rhs");
        if (!f) throw Error("cannot write " + base + ".rhs");
        for (double v : problem.b) f << fmt(v, "%.17g") << '\n';
    }
    std::cout << "wrote " << base << " (" << csr.nrows() << " rows, " << csr.nnz() << " nonzeros, 1/h = "
              << args.n + 1 << ")\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical SSOR preconditioning toolkit"};
    app.require_subcommand(1);

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "Run one GMRES solve");
    s->add_option("--problem", solve.problem, "iso2d | iso3d | dc1-2d | dc1-3d")
        ->check(CLI::IsMember({"iso2d", "iso3d", "dc1-2d", "dc1-3d"}));
    s->add_option("--n", solve.n, "interior points per axis (1/h = n + 1)")->check(CLI::Range(3, 100000));
    s->add_option("--precond", solve.precond, "none | ssor | bssor | ilu0 | hssor | gmg-hs | gmg-ss")
        ->check(CLI::IsMember({"none", "ssor", "bssor", "ilu0", "hssor", "gmg-hs", "gmg-ss"}));
    s->add_option("--cf", solve.cf, "coarsening factor (default 4.5 isotropic, 3 dc1)");
    s->add_option("--tol", solve.tol, "relative residual tolerance")->check(CLI::PositiveNumber);
    s->add_option("--restart", solve.restart, "GMRES restart length")->check(CLI::Range(1, 100000));
    s->add_option("--maxit", solve.maxit, "iteration cap");
    s->add_option("--out", solve.out, "csv | md | json")->check(CLI::IsMember({"csv", "md", "json"}));
    s->add_option("--partition", solve.partition, "aggregate file for the two-grid methods")
        ->check(CLI::ExistingFile);
    s->add_option("--mem-limit", solve.mem_limit_gb, "memory guard in GB")->check(CLI::PositiveNumber);
    s->add_flag("--no-timestamp", solve.no_timestamp, "omit the timestamp comment line");
    s->add_flag("--no-timing", solve.no_timing, "omit wall times");

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "Run a table of solves");
    b->add_option("--table", bench.table, "isotropic | dc1")->check(CLI::IsMember({"isotropic", "iso", "dc1"}));
    b->add_option("--grid", bench.grids, "DIM:N, repeatable");
    b->add_option("--methods", bench.methods, "preconditioners")->delimiter(',');
    b->add_option("--cf", bench.cf, "coarsening factor");
    b->add_option("--tol", bench.tol, "relative residual tolerance")->check(CLI::PositiveNumber);
    b->add_option("--restart", bench.restart, "GMRES restart length")->check(CLI::Range(1, 100000));
    b->add_option("--maxit", bench.maxit, "iteration cap");
    b->add_option("--mem-limit", bench.mem_limit_gb, "memory guard in GB")->check(CLI::PositiveNumber);
    b->add_option("--csv", bench.csv, "CSV output path");
    b->add_option("--md", bench.md, "markdown output path");
    b->add_flag("--no-timestamp", bench.no_timestamp, "omit the timestamp comment line");
    b->add_flag("--no-timing", bench.no_timing, "omit wall times");
    b->add_flag("--quiet", bench.quiet, "no progress on stderr");

    AnalyzeArgs analyze;
    auto* a = app.add_subcommand("analyze", "Fourier analysis of the periodic model operator");
    a->add_option("--n", analyze.n, "modes per axis");
    a->add_option("--dim", analyze.dim, "1, 2 or 3");
    a->add_option("--mode", analyze.mode, "paper | exact")->check(CLI::IsMember({"paper", "exact"}));
    a->add_option("--convention", analyze.convention, "paper | circulant")
        ->check(CLI::IsMember({"paper", "circulant"}));
    a->add_option("--l1", analyze.l1, "x coefficient")->check(CLI::PositiveNumber);
    a->add_option("--l2", analyze.l2, "y coefficient")->check(CLI::PositiveNumber);
    a->add_option("--l3", analyze.l3, "z coefficient")->check(CLI::PositiveNumber);
    a->add_option("--csv", analyze.csv, "write the mode CSV here instead of stdout");
    a->add_flag("--no-csv", analyze.no_csv, "summary only");
    a->add_flag("--no-timestamp", analyze.no_timestamp, "omit the timestamp comment line");

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write a problem matrix in Matrix Market format");
    g->add_option("--problem", gen.problem, "iso2d | iso3d | dc1-2d | dc1-3d")
        ->check(CLI::IsMember({"iso2d", "iso3d", "dc1-2d", "dc1-3d"}));
    g->add_option("--n", gen.n, "interior points per axis")->check(CLI::Range(3, 100000));
    g->add_option("--boundary", gen.boundary, "dirichlet | periodic")
        ->check(CLI::IsMember({"dirichlet", "periodic"}));
    g->add_option("--out", gen.out, "output .mtx path (a .json sidecar is written next to it)")->required();
    g->add_flag("--rhs", gen.rhs, "also write b = A * ones");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*s) return run_solve(solve);
        if (*b) return run_bench_cmd(bench);
        if (*a) return run_analyze(analyze);
        if (*g) return run_generate(gen);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
