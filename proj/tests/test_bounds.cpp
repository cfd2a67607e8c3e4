#include <doctest.h>

#include <cmath>

#include "mpcmm/bounds.hpp"

using namespace mpcmm;

TEST_CASE("term capacity") {
  CHECK(term_capacity(16) == 64);
  CHECK(term_capacity(1) == 1);
  CHECK(term_capacity(100) == 1000);
  CHECK(term_capacity(2) == 2);
  CHECK(term_capacity(1ull << 22) == (1ull << 33));
  CHECK(term_capacity(3000000) == 5196152422ull);
  for (std::uint64_t r = 1; r < 5000; r += 7) {
    const auto c = term_capacity(r);
    CHECK(c * c <= r * r * r);
    CHECK((c + 1) * (c + 1) > r * r * r);
  }
}

TEST_CASE("square bound equals ceil(n^(alpha/2))") {
  CHECK(lower_bound_square(16, 1.0) == 4);
  CHECK(lower_bound_square(16, 0.0) == 1);
  CHECK(lower_bound_square(16, 2.0) == 16);
  CHECK(lower_bound_square(64, 1.0) == 8);
  CHECK(lower_bound_square(256, 1.0) == 16);
  CHECK(lower_bound_square(16, 0.5) == 2);
  CHECK_THROWS_AS(lower_bound_square(16, 2.1), std::invalid_argument);
}

TEST_CASE("rectangular bounds") {
  CHECK(lower_bound_ndn(16, 8) == 2);
  CHECK(lower_bound_ndn(16, 4) == 1);
  CHECK(lower_bound_ndn(64, 64) == 8);
  CHECK_THROWS_AS(lower_bound_ndn(4, 8), std::invalid_argument);

  CHECK(lower_bound_dnd(64, 4, DndProcs::n) == 5);
  CHECK(lower_bound_dnd(16, 16, DndProcs::n) == 5);
  CHECK(lower_bound_dnd(16, 4, DndProcs::d) == 1);
  CHECK(lower_bound_dnd(64, 32, DndProcs::d) == 4);
  CHECK_THROWS_AS(lower_bound_dnd(4, 8, DndProcs::d), std::invalid_argument);

  CHECK(strict_lower_bound_dnd_nproc(64, 4) == 2);
  CHECK(strict_lower_bound_dnd_nproc(256, 16) == 4);
  CHECK(strict_lower_bound_dnd_nproc(4096, 4) == 5);
}

TEST_CASE("bound report") {
  auto r = bound_report("square", 16, 0, 1.0);
  CHECK(r.processors == 16);
  CHECK(r.memory == 16);
  CHECK(r.lower_rounds == 4);
  r.measured_rounds = 4;
  CHECK(r.sandwiched());
  CHECK(r.ratio() == doctest::Approx(1.0));
  const auto j = to_json(r);
  CHECK(j.at("case") == "square");
  CHECK(j.at("lower_rounds") == 4);

  const auto dn = bound_report("dnd-n", 64, 4, 0);
  CHECK(dn.lower_rounds == 5);
  CHECK(dn.strict_lower_rounds == 2);
  CHECK_THROWS_AS(bound_report("cube", 4, 4, 0), std::invalid_argument);
}

TEST_CASE("machine-size bound covers padded shapes") {
  CHECK(lower_bound_machine(4096, 16, 16) == 4);
  CHECK(lower_bound_machine(0, 4, 4) == 1);
  CHECK_THROWS_AS(lower_bound_machine(10, 0, 4), std::invalid_argument);
  // 64^0.75 is not an integer: the schedule runs a 23 x 23 grid of 9-word
  // tiles, a larger machine than the nominal 512 processors of 8 words.
  const auto r = bound_report("square", 64, 0, 1.5);
  CHECK(r.lower_rounds == 24);
  CHECK(r.processors == 529);
  CHECK(r.strict_lower_rounds <= 23);
  CHECK(bound_report("square", 16, 0, 1.0).strict_lower_rounds == 4);
  CHECK(bound_report("ndn", 10, 7, 0).strict_lower_rounds <= 2);
}
