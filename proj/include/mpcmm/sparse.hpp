#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mpcmm/schedule.hpp"

namespace mpcmm {

/// The <= d output positions per row and column of C that must be produced.
struct OutputMask {
  std::size_t n = 0;
  std::size_t d = 0;
  /// rows[p] lists the masked columns of row p in ascending order.
  std::vector<std::vector<std::size_t>> rows;

  /// Throws std::invalid_argument on out-of-range, unsorted or duplicate
  /// columns, or more than d positions in a row or column.
  void validate() const;
  std::optional<std::size_t> index_of(std::size_t p, std::size_t j) const;
  std::size_t size() const;
};

/// Greedy default: positions ordered by their number of contributing terms
/// (descending, then row, then column) are kept while their row and column
/// both have fewer than d positions. Positions without terms are skipped.
OutputMask default_mask(const SparseMatrix& a, const SparseMatrix& b, std::size_t d);

/// Zeroes every entry of c outside the mask.
DenseMatrix apply_mask(const DenseMatrix& c, const OutputMask& mask, const SemiringSpec& s);

/// A term A[p][k] * B[k][j] that contributes to a masked output position.
struct Term {
  std::size_t p = 0;
  std::size_t j = 0;
  std::size_t k = 0;
  bool operator==(const Term&) const = default;
};

/// Pending terms per masked output position.
class TermLedger {
 public:
  TermLedger(const SparseMatrix& a, const SparseMatrix& b, const OutputMask& mask);

  std::size_t total_terms() const { return total_; }
  std::size_t remaining_terms() const { return remaining_; }
  /// Pending inner indices of mask position (p, idx), ascending.
  const std::vector<std::size_t>& pending(std::size_t p, std::size_t idx) const { return pending_[p][idx]; }
  std::size_t required(std::size_t p, std::size_t idx) const { return required_[p][idx]; }
  bool untouched(std::size_t p, std::size_t idx) const { return pending_[p][idx].size() == required_[p][idx]; }
  /// Marks every pending term of (p, idx) as covered.
  void cover_all(std::size_t p, std::size_t idx);
  std::vector<Term> remaining(const OutputMask& mask) const;
  /// remaining_terms() equals the sum of pending list lengths.
  bool consistent() const;

 private:
  std::vector<std::vector<std::vector<std::size_t>>> pending_;
  std::vector<std::vector<std::size_t>> required_;
  std::size_t total_ = 0;
  std::size_t remaining_ = 0;
};

struct EpsilonSchedule {
  double eps1 = 0.0;
  double eps2 = 0.1;
  double layer_constant = 8.0;     // C in the layer budget C * d^(4 eps2)
  double residual_constant = 8.0;  // C' in the residual budget C' * n * d^(2 - eps2)
};

struct IterationBudget {
  std::size_t improved = 1;  // ceil(C * d^(4 eps2))
  std::size_t old = 1;       // ceil(C * d^(5 eps2 - eps1))
  double improved_real = 1.0;
  double old_real = 1.0;
};

/// Throws std::invalid_argument unless 0 <= eps1 < eps2 (eps1 = eps2 = 0 is
/// accepted and yields 1) and d >= 1.
IterationBudget iteration_budget(double eps1, double eps2, std::size_t d, double c = 8.0);

/// Rows `rows` (all with A-support `inner`) times columns `cols`.
struct Triple {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> inner;
  std::vector<std::size_t> cols;
  std::size_t terms = 0;
};

struct Decomposition {
  /// Triples within a layer use disjoint rows and disjoint columns.
  std::vector<std::vector<Triple>> layers;
  std::vector<Term> residual;
  std::size_t total_terms = 0;
  std::size_t layer_terms = 0;
  double layer_budget = 0;
  double residual_budget = 0;
  bool layer_budget_met = true;
  bool residual_budget_met = true;
};

/// Greedy clustered-phase decomposition. Rows sharing an A-support are cut
/// into groups of at most d; a group of at least ceil(d/2) rows is paired
/// with the <= d columns carrying most of its pending terms and kept if the
/// box holds at least ceil(d^3/8) terms. A layer packs disjoint boxes and is
/// accepted while it covers at least n d^(2 - eps2) / budget new terms.
/// Budget misses are reported in the result, never thrown.
Decomposition decompose(const SparseMatrix& a, const SparseMatrix& b, const OutputMask& mask, std::size_t d,
                        const EpsilonSchedule& eps = {});

/// Exhaustive count of how the decomposition covers the required terms.
struct TermCensus {
  std::size_t required = 0;
  std::size_t layer_terms = 0;
  std::size_t residual_terms = 0;
  std::size_t duplicates = 0;
  std::size_t missing = 0;
  bool exact() const { return duplicates == 0 && missing == 0 && layer_terms + residual_terms == required; }
};
TermCensus census(const Decomposition& dec, const SparseMatrix& a, const SparseMatrix& b, const OutputMask& mask);

/// Cannon grid used for each layer triple: floor(sqrt(d)) a side.
std::size_t sparse_block_grid(std::size_t d);

/// Processor p owns row p of A, column p of B and row p of C restricted to
/// the mask. Every term travels as one word from the owner of B's column to
/// the owner of C's row; the transfers are edge-coloured so that nobody sends
/// or receives more than d words per round, giving ceil(max degree / d)
/// rounds. Throws std::invalid_argument if A or B is not d-sparse or the mask
/// is invalid.
Schedule schedule_sparse_trivial(std::size_t n, std::size_t d, const SparseMatrix& a, const SparseMatrix& b,
                                 const OutputMask& mask, const SemiringSpec& s, const ScheduleOptions& options = {});

struct TwoPhaseSchedule {
  Schedule schedule;
  Decomposition decomposition;
  std::size_t trivial_rounds = 0;
  /// True when the layered plan would not beat the trivial one and the
  /// trivial schedule was used instead.
  bool fell_back = false;
};

/// Layers run one after another, each triple as a Cannon multiplication on
/// its own floor(sqrt(d))^2 processors; the residual terms then run as in the
/// trivial schedule, overlapped with the return of the last layer's results.
TwoPhaseSchedule schedule_sparse_twophase(std::size_t n, std::size_t d, const SparseMatrix& a,
                                          const SparseMatrix& b, const OutputMask& mask, const SemiringSpec& s,
                                          const EpsilonSchedule& eps = {}, const ScheduleOptions& options = {});

}  // namespace mpcmm
