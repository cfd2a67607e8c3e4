#include "mpcmm/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "mpcmm/intmath.hpp"
#include "mpcmm/rect.hpp"
#include "mpcmm/square.hpp"
#include "mpcmm/tree_sum.hpp"

namespace mpcmm {

std::uint64_t term_capacity(std::uint64_t r) {
  if (r < (1ull << 21)) return isqrt(r * r * r);
  // r * floor(sqrt(r)) <= result < r * (floor(sqrt(r)) + 1); settle the rest in 128 bits.
  const unsigned __int128 cube = static_cast<unsigned __int128>(r) * r * r;
  std::uint64_t lo = r * isqrt(r);
  std::uint64_t hi = lo + r;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo + 1) / 2;
    if (static_cast<unsigned __int128>(mid) * mid <= cube) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

namespace {

void check_nd(const char* who, std::size_t n, std::size_t d) {
  if (n == 0 || d == 0) throw std::invalid_argument(std::string(who) + ": n and d must be >= 1");
  if (d > n) throw std::invalid_argument(std::string(who) + ": d must not exceed n");
}

std::size_t ceil_ratio(double num, double den) {
  return static_cast<std::size_t>(std::max(0.0, std::ceil(num / den - 1e-9)));
}

std::uint64_t cube(std::size_t a, std::size_t b, std::size_t c) {
  return static_cast<std::uint64_t>(a) * b * c;
}

}  // namespace

std::size_t lower_bound_square(std::size_t n, double alpha) {
  if (n == 0) throw std::invalid_argument("lower_bound_square: n must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 2.0)) throw std::invalid_argument("lower_bound_square: alpha must lie in [0, 2]");
  const double nn = static_cast<double>(n);
  const double procs = std::pow(nn, alpha);
  const auto r = static_cast<std::uint64_t>(std::ceil(std::pow(nn, 2.0 - alpha) - 1e-9));
  return std::max<std::size_t>(1, ceil_ratio(nn * nn * nn, procs * static_cast<double>(term_capacity(r))));
}

std::size_t lower_bound_machine(std::uint64_t terms, std::size_t processors, std::size_t memory) {
  if (processors == 0 || memory == 0) throw std::invalid_argument("lower_bound_machine: empty machine");
  return std::max<std::size_t>(
      1, ceil_ratio(static_cast<double>(terms),
                    static_cast<double>(processors) * static_cast<double>(term_capacity(memory))));
}

std::size_t lower_bound_ndn(std::size_t n, std::size_t d) {
  check_nd("lower_bound_ndn", n, d);
  const double nn = static_cast<double>(n);
  return ceil_ratio(nn * nn * static_cast<double>(d), nn * static_cast<double>(term_capacity(n)));
}

std::size_t lower_bound_dnd(std::size_t n, std::size_t d, DndProcs procs) {
  check_nd("lower_bound_dnd", n, d);
  if (procs == DndProcs::n) {
    if (d < 2) throw std::invalid_argument("lower_bound_dnd: d must be >= 2 with n processors");
    return ceil_sqrt(d) + ceil_log(d, n);
  }
  return ceil_ratio(static_cast<double>(d) * static_cast<double>(n), static_cast<double>(term_capacity(n)));
}

std::size_t strict_lower_bound_dnd_nproc(std::size_t n, std::size_t d) {
  check_nd("strict_lower_bound_dnd_nproc", n, d);
  if (d < 2) return 1;
  return std::max<std::size_t>(ceil_sqrt(d), ceil_log(d, ceil_div(n, d)));
}

double BoundReport::ratio() const {
  return lower_rounds == 0 ? 0.0 : static_cast<double>(measured_rounds) / static_cast<double>(lower_rounds);
}

BoundReport bound_report(const std::string& case_name, std::size_t n, std::size_t d, double alpha) {
  BoundReport r;
  r.case_name = case_name;
  r.n = n;
  r.d = d;
  r.alpha = alpha;
  if (case_name == "square") {
    const auto l = square_layout(ProblemShape{n, d, alpha});
    r.processors = l.processors;
    r.memory = l.memory;
    r.lower_rounds = lower_bound_square(n, alpha);
    r.strict_lower_rounds = std::min(r.lower_rounds, lower_bound_machine(cube(n, n, n), r.processors, r.memory));
  } else if (case_name == "ndn") {
    const auto l = ndn_layout(n, d);
    r.processors = l.processors;
    r.memory = l.memory;
    r.lower_rounds = lower_bound_ndn(n, d);
    r.strict_lower_rounds = std::min(r.lower_rounds, lower_bound_machine(cube(n, d, n), r.processors, r.memory));
  } else if (case_name == "dnd-n") {
    const auto l = dnd_nproc_layout(n, d);
    r.processors = l.processors;
    r.memory = l.memory;
    r.lower_rounds = d >= 2 ? lower_bound_dnd(n, d, DndProcs::n) : 1;
    r.strict_lower_rounds = strict_lower_bound_dnd_nproc(n, d);
  } else if (case_name == "dnd-d") {
    const auto l = dnd_dproc_layout(n, d);
    r.processors = l.processors;
    r.memory = l.memory;
    r.lower_rounds = lower_bound_dnd(n, d, DndProcs::d);
    r.strict_lower_rounds = std::min(r.lower_rounds, lower_bound_machine(cube(d, n, d), r.processors, r.memory));
  } else {
    throw std::invalid_argument("bound_report: unknown case '" + case_name + "'");
  }
  return r;
}

nlohmann::json to_json(const BoundReport& r) {
  return nlohmann::json{{"case", r.case_name},
                        {"n", r.n},
                        {"d", r.d},
                        {"alpha", r.alpha},
                        {"processors", r.processors},
                        {"memory", r.memory},
                        {"lower_rounds", r.lower_rounds},
                        {"strict_lower_rounds", r.strict_lower_rounds},
                        {"measured_rounds", r.measured_rounds},
                        {"ratio", r.ratio()}};
}

}  // namespace mpcmm
