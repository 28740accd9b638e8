#include <gtest/gtest.h>

#include <sstream>

#include "random_problems.hpp"
#include "rowsplit/errors.hpp"
#include "rowsplit/matrix_market.hpp"

using namespace rowsplit;

namespace {

LoadedMatrix parse(const std::string& text) {
  std::istringstream in(text);
  return parse_matrix_market(in);
}

}  // namespace

TEST(MatrixMarket, GeneralReal) {
  const auto lm = parse(
      "%%MatrixMarket matrix coordinate real general\n"
      "% comment\n"
      "\n"
      "3 2 3\n"
      "1 1 1.5\n"
      "3 2 -2e-1\n"
      "2 1 4\n");
  EXPECT_FALSE(lm.transposed);
  EXPECT_EQ(lm.matrix.nrows(), 3);
  EXPECT_EQ(lm.matrix.ncols(), 2);
  EXPECT_EQ(lm.matrix.nnz(), 3);
  const DenseMatrix D = lm.matrix.to_dense();
  EXPECT_DOUBLE_EQ(D(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(D(1, 0), 4.0);
  EXPECT_DOUBLE_EQ(D(2, 1), -0.2);
}

TEST(MatrixMarket, SymmetricIsExpanded) {
  const auto lm = parse(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "3 3 3\n"
      "1 1 2\n"
      "3 1 5\n"
      "2 2 1\n");
  EXPECT_EQ(lm.matrix.nnz(), 4);
  const DenseMatrix D = lm.matrix.to_dense();
  EXPECT_DOUBLE_EQ(D(0, 2), 5.0);
  EXPECT_DOUBLE_EQ(D(2, 0), 5.0);
}

TEST(MatrixMarket, IntegerFieldAndCaseInsensitiveBanner) {
  const auto lm = parse("%%MatrixMarket MATRIX Coordinate INTEGER General\n2 2 2\n1 1 3\n2 2 -4\n");
  EXPECT_DOUBLE_EQ(lm.matrix.to_dense()(1, 1), -4.0);
}

TEST(MatrixMarket, WideMatrixIsTransposed) {
  const auto lm = parse("%%MatrixMarket matrix coordinate real general\n2 3 3\n1 1 1\n1 3 2\n2 2 3\n");
  EXPECT_TRUE(lm.transposed);
  EXPECT_EQ(lm.matrix.nrows(), 3);
  EXPECT_EQ(lm.matrix.ncols(), 2);
  EXPECT_DOUBLE_EQ(lm.matrix.to_dense()(2, 0), 2.0);
}

TEST(MatrixMarket, DuplicatesSummedAndZerosDropped) {
  const auto lm = parse("%%MatrixMarket matrix coordinate real general\n2 2 4\n1 1 1\n1 1 2\n2 2 0\n2 1 1\n");
  EXPECT_EQ(lm.matrix.nnz(), 2);
  EXPECT_DOUBLE_EQ(lm.matrix.to_dense()(0, 0), 3.0);
}

TEST(MatrixMarket, RejectsUnsupportedOrMalformed) {
  EXPECT_THROW(parse(""), FormatError);
  EXPECT_THROW(parse("%%NotMatrixMarket matrix coordinate real general\n1 1 0\n"), FormatError);
  EXPECT_THROW(parse("%%MatrixMarket matrix array real general\n1 1\n1\n"), FormatError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n"), FormatError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n"), FormatError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 1\n"), FormatError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real general\n"), FormatError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real general\nx y z\n"), FormatError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n"), FormatError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"), FormatError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 a 1\n"), FormatError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real symmetric\n2 3 1\n1 1 1\n"), FormatError);
}

TEST(MatrixMarket, MissingFileIsIoError) {
  EXPECT_THROW(read_matrix_market("/nonexistent/file.mtx"), IoError);
}

TEST(MatrixMarket, WriteReadRoundTripIsExact) {
  fixtures::Rng rng(13);
  const CscMatrix A = fixtures::random_sparse_full_rank(rng, 12, 7, 0.3);
  std::ostringstream out;
  write_matrix_market(out, A);
  std::istringstream in(out.str());
  const auto lm = parse_matrix_market(in);
  EXPECT_EQ(lm.matrix.nnz(), A.nnz());
  const auto a = A.values();
  const auto b = lm.matrix.values();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k], b[k]);
}
