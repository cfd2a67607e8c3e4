#include "mpcmm/matrix.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mpcmm {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, Element fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<Element> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("dense matrix data length does not match its shape");
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n, const SemiringSpec& s) {
  DenseMatrix m(n, n, s.zero);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = s.one;
  return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<Element>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<Element> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("ragged row in from_rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(data));
}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& m, const SemiringSpec& s) {
  std::vector<Triplet> entries;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m(r, c) != s.zero) entries.push_back({r, c, m(r, c)});
    }
  }
  return SparseMatrix(m.rows(), m.cols(), std::move(entries));
}

void SparseMatrix::validate(const SemiringSpec& s) const {
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const auto& t = entries_[e];
    if (t.row >= rows_ || t.col >= cols_) {
      throw std::invalid_argument("sparse entry (" + std::to_string(t.row) + ", " +
                                  std::to_string(t.col) + ") out of range");
    }
    if (t.value == s.zero) {
      throw std::invalid_argument("sparse entry (" + std::to_string(t.row) + ", " +
                                  std::to_string(t.col) + ") stores the semiring zero");
    }
    if (e > 0 && entries_[e - 1].row == t.row && entries_[e - 1].col == t.col) {
      throw std::invalid_argument("duplicate sparse entry (" + std::to_string(t.row) + ", " +
                                  std::to_string(t.col) + ")");
    }
  }
}

DenseMatrix SparseMatrix::to_dense(const SemiringSpec& s) const {
  DenseMatrix m(rows_, cols_, s.zero);
  for (const auto& t : entries_) m(t.row, t.col) = t.value;
  return m;
}

std::vector<std::vector<Triplet>> SparseMatrix::row_lists() const {
  std::vector<std::vector<Triplet>> out(rows_);
  for (const auto& t : entries_) out[t.row].push_back(t);
  return out;
}

std::vector<std::vector<Triplet>> SparseMatrix::col_lists() const {
  std::vector<std::vector<Triplet>> out(cols_);
  for (const auto& t : entries_) out[t.col].push_back(t);  // already row-ordered
  return out;
}

DenseMatrix tile(const DenseMatrix& m, const TileIndex& t) {
  const std::size_t r0 = t.i * t.tile_rows;
  const std::size_t c0 = t.j * t.tile_cols;
  if (t.tile_rows == 0 || t.tile_cols == 0 || r0 + t.tile_rows > m.rows() ||
      c0 + t.tile_cols > m.cols()) {
    throw std::out_of_range("tile (" + std::to_string(t.i) + ", " + std::to_string(t.j) +
                            ") lies outside a " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + " matrix");
  }
  DenseMatrix out(t.tile_rows, t.tile_cols, Element{0});
  for (std::size_t r = 0; r < t.tile_rows; ++r) {
    auto src = m.row(r0 + r).subspan(c0, t.tile_cols);
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(r * t.tile_cols));
  }
  return out;
}

void place_tile(DenseMatrix& dst, const TileIndex& t, const DenseMatrix& block) {
  const std::size_t r0 = t.i * t.tile_rows;
  const std::size_t c0 = t.j * t.tile_cols;
  if (block.rows() != t.tile_rows || block.cols() != t.tile_cols ||
      r0 + t.tile_rows > dst.rows() || c0 + t.tile_cols > dst.cols()) {
    throw std::out_of_range("place_tile: block does not fit");
  }
  for (std::size_t r = 0; r < t.tile_rows; ++r) {
    for (std::size_t c = 0; c < t.tile_cols; ++c) dst(r0 + r, c0 + c) = block(r, c);
  }
}

DenseMatrix untile(std::span<const DenseMatrix> tiles, std::size_t grid_rows, std::size_t grid_cols) {
  if (tiles.size() != grid_rows * grid_cols || tiles.empty()) {
    throw std::invalid_argument("untile: tile count does not match grid");
  }
  const std::size_t tr = tiles[0].rows();
  const std::size_t tc = tiles[0].cols();
  DenseMatrix out(grid_rows * tr, grid_cols * tc, Element{0});
  for (std::size_t i = 0; i < grid_rows; ++i) {
    for (std::size_t j = 0; j < grid_cols; ++j) {
      place_tile(out, TileIndex{i, j, tr, tc}, tiles[i * grid_cols + j]);
    }
  }
  return out;
}

namespace {
std::size_t round_up(std::size_t x, std::size_t block) {
  return (x + block - 1) / block * block;
}
}  // namespace

DenseMatrix pad_to(const DenseMatrix& m, std::size_t rows, std::size_t cols, const SemiringSpec& s) {
  if (rows < m.rows() || cols < m.cols()) throw std::invalid_argument("pad_to cannot shrink");
  if (rows == m.rows() && cols == m.cols()) return m;
  DenseMatrix out(rows, cols, s.zero);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  }
  return out;
}

DenseMatrix pad_to_multiple(const DenseMatrix& m, std::size_t row_block, std::size_t col_block,
                            const SemiringSpec& s) {
  if (row_block == 0 || col_block == 0) throw std::invalid_argument("block must be >= 1");
  return pad_to(m, round_up(m.rows(), row_block), round_up(m.cols(), col_block), s);
}

DenseMatrix pad_to_multiple(const DenseMatrix& m, std::size_t block, const SemiringSpec& s) {
  return pad_to_multiple(m, block, block, s);
}

SparseMatrix pad_to_multiple(const SparseMatrix& m, std::size_t block) {
  if (block == 0) throw std::invalid_argument("block must be >= 1");
  std::vector<Triplet> e(m.entries().begin(), m.entries().end());
  return SparseMatrix(round_up(m.rows(), block), round_up(m.cols(), block), std::move(e));
}

DenseMatrix crop(const DenseMatrix& m, std::size_t rows, std::size_t cols) {
  if (rows > m.rows() || cols > m.cols()) throw std::invalid_argument("crop cannot grow");
  DenseMatrix out(rows, cols, Element{0});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = m(r, c);
  }
  return out;
}

bool check_d_sparse(const SparseMatrix& m, std::size_t d) {
  std::vector<std::size_t> row_count(m.rows(), 0);
  std::vector<std::size_t> col_count(m.cols(), 0);
  for (const auto& t : m.entries()) {
    if (++row_count[t.row] > d) return false;
    if (++col_count[t.col] > d) return false;
  }
  return true;
}

void multiply_accumulate(std::span<Element> c, std::span<const Element> a,
                         std::span<const Element> b, std::size_t rows, std::size_t inner,
                         std::size_t cols, const SemiringSpec& s) {
  with_ops(s, [&](auto o) {
    for (std::size_t i = 0; i < rows; ++i) {
      Element* crow = c.data() + i * cols;
      for (std::size_t k = 0; k < inner; ++k) {
        const Element aik = a[i * inner + k];
        if (aik == s.zero) continue;  // zero annihilates and is the additive identity
        const Element* brow = b.data() + k * cols;
        for (std::size_t j = 0; j < cols; ++j) crow[j] = o.add(crow[j], o.mul(aik, brow[j]));
      }
    }
  });
}

void add_into(std::span<Element> dst, std::span<const Element> src, const SemiringSpec& s) {
  with_ops(s, [&](auto o) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = o.add(dst[i], src[i]);
  });
}

DenseMatrix naive_multiply(const DenseMatrix& a, const DenseMatrix& b, const SemiringSpec& s) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " times " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()));
  }
  DenseMatrix c(a.rows(), b.cols(), s.zero);
  const std::size_t rows = a.rows();
  const std::size_t inner = a.cols();
  const std::size_t cols = b.cols();
  auto cd = c.data();
  auto ad = a.data();
  auto bd = b.data();
#pragma omp parallel for schedule(static) if (rows * inner * cols > (1u << 16))
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(rows); ++i) {
    const auto r = static_cast<std::size_t>(i);
    multiply_accumulate(cd.subspan(r * cols, cols), ad.subspan(r * inner, inner), bd, 1, inner,
                        cols, s);
  }
  return c;
}

DenseMatrix naive_multiply(const SparseMatrix& a, const SparseMatrix& b, const SemiringSpec& s) {
  if (a.cols() != b.rows()) throw std::invalid_argument("dimension mismatch in sparse multiply");
  DenseMatrix c(a.rows(), b.cols(), s.zero);
  const auto brows = b.row_lists();
  for (const auto& ta : a.entries()) {
    for (const auto& tb : brows[ta.col]) {
      c(ta.row, tb.col) = s.add(c(ta.row, tb.col), s.mul(ta.value, tb.value));
    }
  }
  return c;
}

DenseMatrix naive_multiply_reference(const DenseMatrix& a, const DenseMatrix& b,
                                     const SemiringSpec& s) {
  if (a.cols() != b.rows()) throw std::invalid_argument("dimension mismatch");
  DenseMatrix c(a.rows(), b.cols(), s.zero);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      Element acc = s.zero;
      for (std::size_t k = 0; k < a.cols(); ++k) acc = s.add(acc, s.mul(a(i, k), b(k, j)));
      c(i, j) = acc;
    }
  }
  return c;
}

}  // namespace mpcmm
