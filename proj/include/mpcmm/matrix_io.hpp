#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>

#include "mpcmm/matrix.hpp"

namespace mpcmm {

class MatrixFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text formats:
//   DENSE rows cols            followed by rows*cols values, row-major
//   SPARSE rows cols nnz       followed by nnz "row col value" lines, 1-indexed
// Values are unsigned decimal words; "inf" reads as the all-ones word
// (the tropical zero) and is written back the same way.

void write_dense(std::ostream& os, const DenseMatrix& m);
void write_sparse(std::ostream& os, const SparseMatrix& m);

DenseMatrix read_dense(std::istream& is);
SparseMatrix read_sparse(std::istream& is);

using AnyMatrix = std::variant<DenseMatrix, SparseMatrix>;
AnyMatrix read_matrix(std::istream& is);
AnyMatrix read_matrix_file(const std::string& path);

}  // namespace mpcmm
