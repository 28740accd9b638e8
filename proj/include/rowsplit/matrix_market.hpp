#pragma once

#include <filesystem>
#include <iosfwd>

#include "rowsplit/sparse.hpp"

namespace rowsplit {

struct LoadedMatrix {
  CscMatrix matrix;
  /// The file held a wide matrix (nrows < ncols) and it was transposed to give
  /// an overdetermined system.
  bool transposed = false;
};

/// Reads a Matrix Market `coordinate` file with `real` or `integer` field and
/// `general` or `symmetric` symmetry. Symmetric storage is expanded,
/// duplicates are summed, explicit zeros dropped, and wide matrices transposed.
/// Throws FormatError on malformed or unsupported input.
LoadedMatrix read_matrix_market(const std::filesystem::path& path);
LoadedMatrix parse_matrix_market(std::istream& in);

/// Writes `coordinate real general` with 17 significant digits.
void write_matrix_market(std::ostream& out, const CscMatrix& A);

}  // namespace rowsplit
