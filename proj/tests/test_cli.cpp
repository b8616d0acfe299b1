#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hssor/bench.hpp"
#include "hssor/matrix_market.hpp"

using namespace hssor;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

fs::path scratch_dir() {
    const auto dir = fs::temp_directory_path() / "hssor_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args) {
    const auto out = scratch_dir() / "stdout.txt";
    const std::string cmd = std::string("\"") + HSSOR_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2>/dev/null";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    return r;
}

}  // namespace

TEST_CASE("csv field quoting") {
    CHECK(csv_field("hssor") == "hssor");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
    CHECK(csv_field("") == "");
}

TEST_CASE("name parsing") {
    CHECK(parse_problem("dc1-3d") == ProblemKind::dc1_3d);
    CHECK(to_string(parse_problem("iso2d")) == "iso2d");
    CHECK_THROWS_AS(parse_problem("iso4d"), Error);
    CHECK(precond_label(parse_precond("gmg-hs")) == "gmg-hs");
    CHECK_THROWS_AS(parse_precond("amg"), Error);
    CHECK(parse_table("dc1") == BenchTable::dc1);
    CHECK(default_block_shape(3) == BlockShape::plane);
    CHECK(default_block_shape(2) == BlockShape::line);
    CHECK(problem_kind(make_grid(ProblemKind::dc1_2d, 9)) == ProblemKind::dc1_2d);
}

TEST_CASE("memory guard") {
    SolveRequest req;
    req.grid = make_grid(ProblemKind::iso3d, 20);
    req.precond = parse_precond("bssor");
    const double est = estimate_memory_bytes(req.grid, req.precond, 4.5, 30);
    // Plane blocks in 3D: half bandwidth n, so N (2n + 1) doubles of factors,
    // on top of the matrix and a 31-vector Krylov basis.
    const double n3 = 20.0 * 20 * 20;
    CHECK(est >= n3 * 41 * 8 + n3 * 31 * 8);
    req.memory_limit_bytes = est / 2;
    const auto cell = run_cell(req);
    CHECK(cell.status == CellStatus::me);
    CHECK(to_string(cell.status) == "ME");
    CHECK(cell.report.iterations == 0);

    const double big = estimate_memory_bytes(make_grid(ProblemKind::iso3d, 80), req.precond, 4.5, 30);
    const double small = estimate_memory_bytes(make_grid(ProblemKind::iso3d, 40), req.precond, 4.5, 30);
    CHECK(big > 8 * small);
}

TEST_CASE("cell statuses") {
    SolveRequest req;
    req.grid = make_grid(ProblemKind::iso2d, 20);
    req.precond = parse_precond("ssor");
    SUBCASE("converged cell matches a direct solve") {
        const auto cell = run_cell(req);
        REQUIRE(cell.status == CellStatus::converged);
        const auto p = make_problem(req.grid);
        const auto csr = p.a.to_csr();
        const SsorPreconditioner m(csr);
        Vector x(p.b.size(), 0.0);
        const auto direct = gmres([&](std::span<const double> v, std::span<double> y) { spmv(csr, v, y); }, p.b, x, m);
        CHECK(cell.report.iterations == direct.iterations);
        CHECK(to_string(cell.status) == "its");
    }
    SUBCASE("iteration cap gives NC") {
        req.solver.max_iters = 3;
        const auto cell = run_cell(req);
        CHECK(cell.status == CellStatus::nc);
        CHECK(to_string(cell.status) == "NC");
    }
    SUBCASE("unreadable partition gives NA") {
        req.precond = parse_precond("gmg-hs");
        req.partition_file = "/nonexistent/agg.txt";
        const auto cell = run_cell(req);
        CHECK(cell.status == CellStatus::na);
        CHECK_FALSE(cell.message.empty());
    }
}

TEST_CASE("bench writers") {
    BenchReport rep;
    rep.table = BenchTable::isotropic;
    rep.methods = {parse_precond("hssor"), parse_precond("bssor")};
    BenchRow row;
    row.size = {3, 39};
    CellResult ok;
    ok.status = CellStatus::converged;
    ok.report.iterations = 42;
    ok.report.final_relres = 5e-11;
    ok.seconds = 1.25;
    CellResult me;
    me.status = CellStatus::me;
    row.cells = {ok, me};
    rep.rows.push_back(row);

    std::ostringstream csv;
    write_bench_csv(csv, rep, {false, false});
    CHECK(csv.str() ==
          "table,dim,inv_h,n,method,status,iterations,seconds,relres\n"
          "isotropic,3,40,39,hssor,its,42,,5.000000e-11\n"
          "isotropic,3,40,39,bssor,ME,,,\n");

    std::ostringstream md;
    write_bench_markdown(md, rep, {false, true});
    const auto text = md.str();
    CHECK(text.find("| Dim | 1/h | HSSOR | BSSOR |") != std::string::npos);
    CHECK(text.find("| 3D | 40 | 42 (1.25 s) | ME |") != std::string::npos);

    std::ostringstream stamped;
    write_bench_csv(stamped, rep, {true, false});
    CHECK(stamped.str().rfind("# ", 0) == 0);
}

TEST_CASE("small bench campaign is reproducible and consistent") {
    BenchPlan plan;
    plan.sizes = {{2, 15}, {3, 7}};
    plan.methods = {parse_precond("none"), parse_precond("hssor"), parse_precond("gmg-ss")};
    plan.cf = 2.0;
    const auto a = run_bench(plan);
    const auto b = run_bench(plan);
    std::ostringstream ca, cb;
    write_bench_csv(ca, a, {false, false});
    write_bench_csv(cb, b, {false, false});
    CHECK(ca.str() == cb.str());
    REQUIRE(a.rows.size() == 2);
    for (const auto& r : a.rows) {
        REQUIRE(r.cells.size() == 3);
        for (const auto& c : r.cells) CHECK(c.status == CellStatus::converged);
        CHECK(r.cells[1].report.iterations < r.cells[0].report.iterations);
    }
    BenchPlan empty = plan;
    empty.methods.clear();
    CHECK_THROWS_AS(empty.validate(), Error);
}

TEST_CASE("cli exit codes") {
    CHECK(run("solve --problem iso2d --n 12 --precond hssor --no-timestamp --no-timing").code == 0);
    CHECK(run("solve --problem iso2d --n 30 --precond none --maxit 5 --no-timestamp").code == 2);
    CHECK(run("solve --problem iso3d --n 40 --precond bssor --mem-limit 0.001 --no-timestamp").code == 3);
    CHECK(run("solve --problem iso2d --n 12 --precond gmg-hs --partition /nonexistent/p.txt").code == 1);
    const auto short_part = scratch_dir() / "short.txt";
    std::ofstream(short_part) << "0\n1\n";
    CHECK(run("solve --problem iso2d --n 12 --precond gmg-hs --partition " + short_part.string()).code == 4);
    CHECK(run("solve --problem iso5d --n 12").code == 1);
    CHECK(run("frobnicate").code != 0);
    CHECK(run("generate --problem iso2d --n 5").code != 0);
}

TEST_CASE("cli solve output formats") {
    const auto md = run("solve --problem iso2d --n 10 --precond hssor --out md --no-timestamp --no-timing");
    CHECK(md.out.find("| iso2d | 11 | HSSOR | 15 |") != std::string::npos);

    const auto js = run("solve --problem dc1-2d --n 12 --precond gmg-hs --out json --no-timestamp --no-timing");
    REQUIRE(js.code == 0);
    const auto j = nlohmann::json::parse(js.out);
    CHECK(j.at("problem") == "dc1-2d");
    CHECK(j.at("inv_h") == 13);
    CHECK(j.at("status") == "its");
    CHECK(j.at("converged") == true);
    CHECK(j.at("cf") == 3.0);

    const auto a = run("solve --problem iso3d --n 8 --precond ilu0 --out csv --no-timestamp --no-timing");
    const auto b = run("solve --problem iso3d --n 8 --precond ilu0 --out csv --no-timestamp --no-timing");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("cli analyze") {
    const auto r = run("analyze --n 16 --no-csv --no-timestamp");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("HOLDS lambda_max(B) < 7921/648") != std::string::npos);
    CHECK(r.out.find("bound 12.22376543") != std::string::npos);
    CHECK(r.out.find("FAILS lambda_min(B) > 95/36") != std::string::npos);
    CHECK(r.out.find("HOLDS lambda_min(B) > 25/36") != std::string::npos);
    CHECK(r.out.find("cond_asymptotic constant: 0.00584545") != std::string::npos);

    const auto v = run("analyze --n 8 --convention circulant --mode exact --no-csv --no-timestamp");
    CHECK(v.code == 0);
    CHECK(v.out.find("verdict: PASS") != std::string::npos);

    const auto csv = run("analyze --n 4 --dim 2 --no-timestamp");
    std::istringstream lines(csv.out);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "s,t,r,theta,phi,xi,lamA,lamT,lamP,lamB,lamBmA,lamBinvA");
    int rows = 0;
    for (std::string l; std::getline(lines, l) && !l.empty() && l.find(':') == std::string::npos;) ++rows;
    CHECK(rows == 16);

    CHECK(run("analyze --n 3").code == 1);
}

TEST_CASE("cli bench is byte reproducible without timings") {
    const auto dir = scratch_dir();
    const auto c1 = dir / "b1.csv", c2 = dir / "b2.csv", m1 = dir / "b1.md";
    const std::string args = " --table iso --grid 2:15 --grid 3:6 --methods none,ssor,hssor,gmg-hs --cf 2 --no-timestamp --no-timing --quiet";
    REQUIRE(run("bench" + args + " --csv " + c1.string() + " --md " + m1.string()).code == 0);
    REQUIRE(run("bench" + args + " --csv " + c2.string()).code == 0);
    CHECK(slurp(c1) == slurp(c2));
    CHECK(slurp(m1).find("| 2D | 16 |") != std::string::npos);
}

TEST_CASE("cli generate") {
    const auto dir = scratch_dir();
    const auto mtx = dir / "dc1.mtx";
    REQUIRE(run("generate --problem dc1-2d --n 6 --out " + mtx.string() + " --rhs").code == 0);
    CHECK(fs::exists(mtx));
    const fs::path sidecar = mtx.string() + ".json";
    REQUIRE(fs::exists(sidecar));
    const auto a = read_matrix_market(mtx.string());
    const auto expect = build_dc1(GridSpec::dc1(2, 6)).to_csr();
    CHECK(a.nrows() == 36);
    for (std::size_t i = 0; i < 36; ++i)
        for (std::size_t j = 0; j < 36; ++j) CHECK(a.at(i, j) == expect.at(i, j));
    const auto spec = grid_spec_from_json(slurp(sidecar));
    CHECK(spec.n == 6);
    CHECK(std::holds_alternative<Dc1Coeff>(spec.coeff));
    CHECK(fs::exists(mtx.string() + ".rhs"));
}
