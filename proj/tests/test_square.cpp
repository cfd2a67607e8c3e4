#include <doctest.h>

#include "mpcmm/bounds.hpp"
#include "mpcmm/experiment.hpp"
#include "mpcmm/square.hpp"

using namespace mpcmm;

namespace {

ScheduleRun run_square(std::size_t n, double alpha, const SemiringSpec& s, std::uint64_t seed,
                       InitialLayout layout = InitialLayout::tile_aligned) {
  SquareOptions opt;
  opt.layout = layout;
  const auto a = random_dense(n, n, s, seed);
  const auto b = random_dense(n, n, s, seed + 1);
  auto res = execute(schedule_square({n, 0, alpha}, a, b, s, opt));
  CHECK(res.product == naive_multiply(a, b, s));
  return res;
}

}  // namespace

TEST_CASE("layout and predicted rounds") {
  CHECK(square_rounds_upper({16, 0, 1.0}) == 4);
  CHECK(square_rounds_upper({16, 0, 2.0}) == 16);
  CHECK(square_rounds_upper({16, 0, 0.0}) == 1);
  CHECK(square_rounds_upper({4, 0, 0.0}) == 1);
  const auto l = square_layout({10, 0, 1.0});
  CHECK(l.grid == 4);
  CHECK(l.tile == 3);
  CHECK(l.padded_n == 12);
  CHECK(l.memory == 9);
  CHECK_THROWS_AS(square_layout({16, 0, 2.5}), std::invalid_argument);
  CHECK_THROWS_AS(square_layout({0, 0, 1.0}), std::invalid_argument);
}

TEST_CASE("n=16 alpha=1 takes 4 rounds within budget") {
  const auto res = run_square(16, 1.0, integer_semiring(), 1);
  const auto& t = res.run.transcript;
  CHECK(t.round_count() == 4);
  CHECK(t.max_words_received() <= 4 * 16);
  CHECK(t.max_words_sent() <= 4 * 16);
  CHECK(t.max_peak_memory() <= 4 * 16);
}

TEST_CASE("edge exponents") {
  CHECK(run_square(4, 0.0, integer_semiring(), 2).run.transcript.round_count() == 1);
  CHECK(run_square(16, 2.0, integer_semiring(), 3).run.transcript.round_count() == 16);
}

TEST_CASE("correct over every semiring and predicted rounds are exact") {
  CHECK(run_square(36, 1.0, integer_semiring(), 1).run.transcript.round_count() >= lower_bound_square(36, 1.0));
  CHECK(run_square(16, 1.5, integer_semiring(), 1).run.transcript.round_count() == lower_bound_square(16, 1.5));
  for (const auto& s : builtin_semirings()) {
    for (std::size_t n : {16, 36, 10}) {
      for (double alpha : {0.5, 1.0, 1.5}) {
        CAPTURE(s.name);
        CAPTURE(n);
        CAPTURE(alpha);
        const ProblemShape shape{n, 0, alpha};
        const auto res = run_square(n, alpha, s, n);
        CHECK(res.run.transcript.round_count() == square_rounds_upper(shape));
        const auto layout = square_layout(shape);
        CHECK(res.run.transcript.round_count() >= lower_bound_machine(n * n * n, layout.processors, layout.memory));
        CHECK(res.run.transcript.round_count() >= bound_report("square", n, 0, alpha).strict_lower_rounds);
      }
    }
  }
}

TEST_CASE("row-major start reaches the same product in the same rounds") {
  for (const auto& s : builtin_semirings()) {
    const auto tiled = run_square(16, 1.0, s, 5);
    const auto rows = run_square(16, 1.0, s, 5, InitialLayout::row_major);
    CHECK(rows.product == tiled.product);
    CHECK(rows.run.transcript.round_count() == tiled.run.transcript.round_count());
    CHECK(rows.run.transcript.max_words_received() <= 4 * 16);
  }
}

TEST_CASE("memory override") {
  const auto& s = integer_semiring();
  const auto a = random_dense(16, 16, s, 1);
  SquareOptions opt;
  opt.memory = 15;
  CHECK_THROWS_AS(schedule_square({16, 0, 1.0}, a, a, s, opt), std::invalid_argument);
  opt.memory = 64;
  CHECK(execute(schedule_square({16, 0, 1.0}, a, a, s, opt)).product == naive_multiply(a, a, s));
  CHECK_THROWS_AS(schedule_square({16, 0, 1.0}, random_dense(15, 16, s, 1), a, s), std::invalid_argument);
}

TEST_CASE("cap factor one is rejected by the bandwidth check") {
  const auto& s = integer_semiring();
  const auto a = random_dense(16, 16, s, 1);
  SquareOptions opt;
  opt.cap_factor = 1;
  CHECK_THROWS_AS(execute(schedule_square({16, 0, 1.0}, a, a, s, opt)), BandwidthExceeded);
}
