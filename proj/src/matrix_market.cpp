#include "rowsplit/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "rowsplit/errors.hpp"

namespace rowsplit {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool blank_or_comment(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '%';
}

}  // namespace

LoadedMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty Matrix Market input");

  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket") throw FormatError("missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") throw FormatError("unsupported object '" + object + "'");
  if (format != "coordinate") throw FormatError("unsupported format '" + format + "'");
  if (field == "pattern") throw FormatError("pattern-only matrices are not supported");
  if (field != "real" && field != "integer") throw FormatError("unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric") {
    throw FormatError("unsupported symmetry '" + symmetry + "'");
  }
  const bool symmetric = symmetry == "symmetric";

  do {
    if (!std::getline(in, line)) throw FormatError("missing size line");
  } while (blank_or_comment(line));

  long long m = 0, n = 0, nnz = 0;
  {
    std::istringstream size_line(line);
    if (!(size_line >> m >> n >> nnz) || m < 0 || n < 0 || nnz < 0) {
      throw FormatError("malformed size line: '" + line + "'");
    }
  }
  if (symmetric && m != n) throw FormatError("symmetric matrix must be square");

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
  long long read = 0;
  while (read < nnz && std::getline(in, line)) {
    if (blank_or_comment(line)) continue;
    const char* s = line.c_str();
    char* end = nullptr;
    const long long i = std::strtoll(s, &end, 10);
    if (end == s) throw FormatError("malformed entry: '" + line + "'");
    s = end;
    const long long j = std::strtoll(s, &end, 10);
    if (end == s) throw FormatError("malformed entry: '" + line + "'");
    s = end;
    const double v = std::strtod(s, &end);
    if (end == s) throw FormatError("malformed entry: '" + line + "'");
    if (i < 1 || i > m || j < 1 || j > n) {
      throw FormatError("entry (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
    }
    entries.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), v});
    if (symmetric && i != j) entries.push_back({static_cast<Index>(j - 1), static_cast<Index>(i - 1), v});
    ++read;
  }
  if (read < nnz) {
    throw FormatError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(read));
  }

  CscMatrix A = CscMatrix::from_triplets(static_cast<Index>(m), static_cast<Index>(n), entries);
  if (m < n) return {A.transpose(), true};
  return {std::move(A), false};
}

LoadedMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const CscMatrix& A) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.nrows() << ' ' << A.ncols() << ' ' << A.nnz() << '\n';
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  for (Index j = 0; j < A.ncols(); ++j) {
    const auto rows = A.column_rows(j);
    const auto vals = A.column_values(j);
    for (std::size_t p = 0; p < rows.size(); ++p) out << rows[p] + 1 << ' ' << j + 1 << ' ' << vals[p] << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

}  // namespace rowsplit
