#pragma once

#include <cstddef>

#include "mpcmm/schedule.hpp"

namespace mpcmm {

/// Problem parameters. d is only used by the rectangular and sparse cases.
struct ProblemShape {
  std::size_t n = 0;
  std::size_t d = 0;
  double alpha = 1.0;
};

/// How n x n square multiplication is laid out on n^alpha processors.
struct SquareLayout {
  std::size_t grid = 1;      // processors per grid side, ceil(n^(alpha/2))
  std::size_t tile = 1;      // tile side, ceil(n / grid)
  std::size_t padded_n = 0;  // grid * tile
  std::size_t processors = 1;
  std::size_t memory = 1;    // tile^2
};

/// Throws std::invalid_argument for n == 0 or alpha outside [0, 2].
SquareLayout square_layout(const ProblemShape& shape);

enum class InitialLayout {
  /// A^{ij}, B^{ij} start on p_ij.
  tile_aligned,
  /// A and B start as contiguous row-major chunks of tile^2 words per
  /// processor; the first barrier routes them straight to their tiles.
  row_major,
};

struct SquareOptions : ScheduleOptions {
  InitialLayout layout = InitialLayout::tile_aligned;
};

/// Grid multiplication with one barrier per inner block index: in round x,
/// p_ij holds one pair A^{ik}, B^{kj} (k = (i + j + x) mod grid), adds their
/// product into C^{ij}, and passes A left and B up. Each processor sends and
/// receives two tiles per round and holds at most three.
Schedule schedule_square(const ProblemShape& shape, const DenseMatrix& a, const DenseMatrix& b,
                         const SemiringSpec& s, const SquareOptions& options = {});

/// Barrier count of schedule_square: the grid side.
std::size_t square_rounds_upper(const ProblemShape& shape);

}  // namespace mpcmm
