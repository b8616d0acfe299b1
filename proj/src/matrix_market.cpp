#include "hssor/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hssor {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

void write_matrix_market(std::ostream& out, const CsrMatrix& a) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.nrows() << ' ' << a.ncols() << ' ' << a.nnz() << '\n';
    char buf[64];
    for (std::size_t i = 0; i < a.nrows(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", vals[k]);
            out << i + 1 << ' ' << cols[k] + 1 << ' ' << buf << '\n';
        }
    }
}

void write_matrix_market(const std::string& path, const CsrMatrix& a) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    write_matrix_market(out, a);
}

CsrMatrix read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("matrix market: empty input");
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate")
        throw Error("matrix market: unsupported header '" + line + "'");
    field = lower(field);
    symmetry = lower(symmetry);
    if (field != "real" && field != "integer" && field != "double")
        throw Error("matrix market: unsupported field '" + field + "'");
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general")
        throw Error("matrix market: unsupported symmetry '" + symmetry + "'");

    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream size_line(line);
    std::size_t nrows = 0, ncols = 0, entries = 0;
    if (!(size_line >> nrows >> ncols >> entries)) throw Error("matrix market: bad size line");

    std::vector<Triplet> triplets;
    triplets.reserve(symmetric ? 2 * entries : entries);
    for (std::size_t e = 0; e < entries; ++e) {
        std::size_t i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v)) throw Error("matrix market: truncated entry list");
        if (i == 0 || j == 0 || i > nrows || j > ncols) throw Error("matrix market: index out of range");
        triplets.push_back({i - 1, j - 1, v});
        if (symmetric && i != j) triplets.push_back({j - 1, i - 1, v});
    }
    return CsrMatrix::from_triplets(nrows, ncols, std::move(triplets));
}

CsrMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return read_matrix_market(in);
}

}  // namespace hssor
