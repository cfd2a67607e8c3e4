#include "mpcmm/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace mpcmm {

namespace {

constexpr Element kInf = std::numeric_limits<Element>::max();

void write_value(std::ostream& os, Element v) {
  if (v == kInf) {
    os << "inf";
  } else {
    os << v;
  }
}

std::string next_token(std::istream& is, const char* what) {
  std::string tok;
  if (!(is >> tok)) throw MatrixFormatError(std::string("unexpected end of input reading ") + what);
  return tok;
}

std::uint64_t parse_u64(const std::string& tok, const char* what) {
  if (tok == "inf") return kInf;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw MatrixFormatError(std::string("bad ") + what + ": '" + tok + "'");
  }
  return v;
}

std::size_t parse_count(std::istream& is, const char* what) {
  const auto tok = next_token(is, what);
  if (tok == "inf") throw MatrixFormatError(std::string("bad ") + what + ": 'inf'");
  return static_cast<std::size_t>(parse_u64(tok, what));
}

DenseMatrix read_dense_body(std::istream& is) {
  const auto rows = parse_count(is, "row count");
  const auto cols = parse_count(is, "column count");
  std::vector<Element> data(rows * cols);
  for (auto& v : data) v = parse_u64(next_token(is, "value"), "value");
  return DenseMatrix(rows, cols, std::move(data));
}

SparseMatrix read_sparse_body(std::istream& is) {
  const auto rows = parse_count(is, "row count");
  const auto cols = parse_count(is, "column count");
  const auto nnz = parse_count(is, "entry count");
  std::vector<Triplet> entries;
  entries.reserve(nnz);
  for (std::size_t e = 0; e < nnz; ++e) {
    const auto r = parse_count(is, "row index");
    const auto c = parse_count(is, "column index");
    const auto v = parse_u64(next_token(is, "value"), "value");
    if (r == 0 || c == 0 || r > rows || c > cols) {
      throw MatrixFormatError("sparse index (" + std::to_string(r) + ", " + std::to_string(c) +
                              ") out of range (indices are 1-based)");
    }
    entries.push_back({r - 1, c - 1, v});
  }
  return SparseMatrix(rows, cols, std::move(entries));
}

}  // namespace

void write_dense(std::ostream& os, const DenseMatrix& m) {
  os << "DENSE " << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c > 0) os << ' ';
      write_value(os, m(r, c));
    }
    os << '\n';
  }
}

void write_sparse(std::ostream& os, const SparseMatrix& m) {
  os << "SPARSE " << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  for (const auto& t : m.entries()) {
    os << t.row + 1 << ' ' << t.col + 1 << ' ';
    write_value(os, t.value);
    os << '\n';
  }
}

DenseMatrix read_dense(std::istream& is) {
  const auto kind = next_token(is, "header");
  if (kind != "DENSE") throw MatrixFormatError("expected DENSE header, got '" + kind + "'");
  return read_dense_body(is);
}

SparseMatrix read_sparse(std::istream& is) {
  const auto kind = next_token(is, "header");
  if (kind != "SPARSE") throw MatrixFormatError("expected SPARSE header, got '" + kind + "'");
  return read_sparse_body(is);
}

AnyMatrix read_matrix(std::istream& is) {
  const auto kind = next_token(is, "header");
  if (kind == "DENSE") return read_dense_body(is);
  if (kind == "SPARSE") return read_sparse_body(is);
  throw MatrixFormatError("unknown matrix header '" + kind + "'");
}

AnyMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MatrixFormatError("cannot open " + path);
  return read_matrix(in);
}

}  // namespace mpcmm
