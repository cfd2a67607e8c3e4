#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "mpcmm/semiring.hpp"

namespace mpcmm {

/// Row-major dense storage. Always holds exactly rows * cols words.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, Element fill);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<Element> data);

  static DenseMatrix zeros(std::size_t rows, std::size_t cols, const SemiringSpec& s) {
    return DenseMatrix(rows, cols, s.zero);
  }
  static DenseMatrix identity(std::size_t n, const SemiringSpec& s);
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<Element>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Element& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Element operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Element> data() { return data_; }
  std::span<const Element> data() const { return data_; }
  std::span<const Element> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Element> data_;
};

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  Element value = 0;
  bool operator==(const Triplet&) const = default;
};

/// Coordinate-list sparse matrix. Entries are kept sorted by (row, col).
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries = {});

  /// Drops entries equal to s.zero.
  static SparseMatrix from_dense(const DenseMatrix& m, const SemiringSpec& s);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const Triplet> entries() const { return entries_; }

  /// Throws std::invalid_argument on out-of-range indices, duplicate
  /// coordinates or explicit zeros.
  void validate(const SemiringSpec& s) const;

  DenseMatrix to_dense(const SemiringSpec& s) const;

  /// Per-row and per-column (index, value) lists, ordered by index.
  std::vector<std::vector<Triplet>> row_lists() const;
  std::vector<std::vector<Triplet>> col_lists() const;

  bool operator==(const SparseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Triplet> entries_;
};

/// Block (i, j) of a matrix cut into tile_rows x tile_cols pieces. Zero-based.
struct TileIndex {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t tile_rows = 1;
  std::size_t tile_cols = 1;
};

/// Throws std::out_of_range if the block does not lie inside the matrix.
DenseMatrix tile(const DenseMatrix& m, const TileIndex& t);
void place_tile(DenseMatrix& dst, const TileIndex& t, const DenseMatrix& block);

/// Reassembles a grid of equally sized tiles given in row-major block order.
DenseMatrix untile(std::span<const DenseMatrix> tiles, std::size_t grid_rows, std::size_t grid_cols);

/// Rounds each dimension up to a multiple of its block, filling with s.zero.
DenseMatrix pad_to_multiple(const DenseMatrix& m, std::size_t block, const SemiringSpec& s);
DenseMatrix pad_to_multiple(const DenseMatrix& m, std::size_t row_block, std::size_t col_block,
                            const SemiringSpec& s);
SparseMatrix pad_to_multiple(const SparseMatrix& m, std::size_t block);

/// Grows a matrix to the given shape, filling with s.zero.
DenseMatrix pad_to(const DenseMatrix& m, std::size_t rows, std::size_t cols, const SemiringSpec& s);
DenseMatrix crop(const DenseMatrix& m, std::size_t rows, std::size_t cols);

/// True iff every row and every column holds at most d entries.
bool check_d_sparse(const SparseMatrix& m, std::size_t d);

/// C[i][j] = sum_k A[i][k] * B[k][j]. OpenMP-parallel over output rows.
/// Throws std::invalid_argument when A.cols != B.rows.
DenseMatrix naive_multiply(const DenseMatrix& a, const DenseMatrix& b, const SemiringSpec& s);
DenseMatrix naive_multiply(const SparseMatrix& a, const SparseMatrix& b, const SemiringSpec& s);

/// Serial i-j-k reference for naive_multiply, kept for testing and benchmarks.
DenseMatrix naive_multiply_reference(const DenseMatrix& a, const DenseMatrix& b,
                                     const SemiringSpec& s);

/// c (rows x cols) += a (rows x inner) * b (inner x cols), all row-major.
void multiply_accumulate(std::span<Element> c, std::span<const Element> a,
                         std::span<const Element> b, std::size_t rows, std::size_t inner,
                         std::size_t cols, const SemiringSpec& s);

/// dst[i] = dst[i] + src[i] elementwise.
void add_into(std::span<Element> dst, std::span<const Element> src, const SemiringSpec& s);

}  // namespace mpcmm
