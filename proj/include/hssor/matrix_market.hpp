#pragma once

#include <iosfwd>
#include <string>

#include "hssor/csr.hpp"

namespace hssor {

/// Coordinate real general format, values at 17 significant digits so the
/// round trip is exact.
void write_matrix_market(std::ostream& out, const CsrMatrix& a);
void write_matrix_market(const std::string& path, const CsrMatrix& a);

/// Accepts `general` and `symmetric` coordinate real/integer files.
CsrMatrix read_matrix_market(std::istream& in);
CsrMatrix read_matrix_market(const std::string& path);

}  // namespace hssor
