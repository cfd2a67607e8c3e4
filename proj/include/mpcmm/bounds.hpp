#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <json.hpp>

namespace mpcmm {

/// Most terms a processor with r words can evaluate in one round: floor(r^1.5).
std::uint64_t term_capacity(std::uint64_t r);

/// ceil(n^3 / (P * term_capacity(r))) with P = n^alpha processors of
/// r = n^(2 - alpha) words. Throws std::invalid_argument unless
/// n >= 1 and 0 <= alpha <= 2.
std::size_t lower_bound_square(std::size_t n, double alpha);

/// ceil(n^2 d / (n * term_capacity(n))). Throws unless 1 <= d <= n.
std::size_t lower_bound_ndn(std::size_t n, std::size_t d);

/// ceil(terms / (processors * term_capacity(memory))): rounds any machine of
/// that size needs to evaluate `terms` products, whatever its shape.
std::size_t lower_bound_machine(std::uint64_t terms, std::size_t processors, std::size_t memory);

enum class DndProcs { n, d };

/// procs = n: ceil(sqrt(d)) + ceil(log_d n), which requires d >= 2.
/// procs = d: ceil(d n / term_capacity(n)).
/// Throws unless 1 <= d <= n.
std::size_t lower_bound_dnd(std::size_t n, std::size_t d, DndProcs procs);

/// The part of the (d, n, d) bound with n processors that holds for every
/// run, not only up to constants: max(ceil(sqrt(d)), ceil(log_d(n/d))).
std::size_t strict_lower_bound_dnd_nproc(std::size_t n, std::size_t d);

struct BoundReport {
  std::string case_name;
  std::size_t n = 0;
  std::size_t d = 0;
  double alpha = 0;
  std::size_t processors = 0;
  std::size_t memory = 0;
  std::size_t lower_rounds = 0;
  /// Floor that every measured run must reach: lower_rounds, capped by the
  /// term-counting bound of the padded machine, and for dnd-n only the
  /// non-asymptotic part of the bound.
  std::size_t strict_lower_rounds = 0;
  std::size_t measured_rounds = 0;

  double ratio() const;
  bool sandwiched() const { return measured_rounds >= strict_lower_rounds; }
};

/// Bound for case "square", "ndn", "dnd-n" or "dnd-d" with the scheduler's
/// machine size filled in. measured_rounds is left at 0.
BoundReport bound_report(const std::string& case_name, std::size_t n, std::size_t d, double alpha);

nlohmann::json to_json(const BoundReport& r);

}  // namespace mpcmm
