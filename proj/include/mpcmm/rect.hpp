#pragma once

#include <cstddef>

#include "mpcmm/schedule.hpp"
#include "mpcmm/tree_sum.hpp"

namespace mpcmm {

/// (n, d, n): A is n x d, B is d x n, C is n x n, on n processors.
struct NdnLayout {
  std::size_t grid = 1;       // ceil(sqrt(n)); p_ij owns the grid x grid block C^{ij}
  std::size_t padded_n = 1;   // grid^2
  std::size_t padded_d = 1;   // multiple of grid
  std::size_t slices = 1;     // padded_d / grid, one barrier each
  std::size_t processors = 1;
  std::size_t memory = 1;     // padded_n + 2 * padded_d
};

/// Throws std::invalid_argument unless 1 <= d <= n.
NdnLayout ndn_layout(std::size_t n, std::size_t d);

/// Each processor starts with one row of A and one column of B. In round q
/// the row and column holders fan slice q out to the processors of their
/// block row / column, which accumulate A^{iq} B^{qj} into C^{ij}.
Schedule schedule_ndn(std::size_t n, std::size_t d, const DenseMatrix& a, const DenseMatrix& b,
                      const SemiringSpec& s, const ScheduleOptions& options = {});

/// (d, n, d): A is d x n, B is n x d, C is d x d. C is cut into blocks of
/// side `block`; each block is computed by a group of `members` processors
/// that each accumulate `iterations` inner block products and then tree-sum
/// their partials with fan-in block^2.
struct DndLayout {
  std::size_t block = 1;
  std::size_t padded_n = 1;
  std::size_t padded_d = 1;
  std::size_t out_grid = 1;    // padded_d / block
  std::size_t inner = 1;       // padded_n / block
  std::size_t members = 1;     // processors per output block
  std::size_t iterations = 1;  // inner / members
  std::size_t tree_rounds = 0;
  std::size_t processors = 1;
  std::size_t memory = 1;
  std::size_t rounds() const { return iterations + tree_rounds; }
};

/// n processors: block = ceil(sqrt(d)), padded_d = block^2, padded_n the
/// least multiple of padded_d that is >= n. Throws unless 1 <= d <= n.
DndLayout dnd_nproc_layout(std::size_t n, std::size_t d);

/// d processors: block = ceil(sqrt(n)), padded_n = block^2, padded_d =
/// D * block with D the least divisor of block that is >= ceil(d / block).
/// Throws unless 1 <= d <= n.
DndLayout dnd_dproc_layout(std::size_t n, std::size_t d);

Schedule schedule_dnd_nproc(std::size_t n, std::size_t d, const DenseMatrix& a, const DenseMatrix& b,
                            const SemiringSpec& s, const ScheduleOptions& options = {});
Schedule schedule_dnd_dproc(std::size_t n, std::size_t d, const DenseMatrix& a, const DenseMatrix& b,
                            const SemiringSpec& s, const ScheduleOptions& options = {});

}  // namespace mpcmm
