#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "mpcmm/experiment.hpp"
#include "mpcmm/tree_sum.hpp"

using namespace mpcmm;

namespace {

std::vector<std::vector<Element>> addends(std::size_t t, std::size_t w, const SemiringSpec& s, std::uint64_t seed) {
  const auto m = random_dense(t, w, s, seed);
  std::vector<std::vector<Element>> out;
  for (std::size_t l = 0; l < t; ++l) out.emplace_back(m.row(l).begin(), m.row(l).end());
  return out;
}

DenseMatrix direct_sum(const std::vector<std::vector<Element>>& xs, const SemiringSpec& s) {
  DenseMatrix sum(1, xs.at(0).size(), s.zero);
  for (const auto& x : xs) {
    for (std::size_t e = 0; e < x.size(); ++e) sum(0, e) = s.add(sum(0, e), x[e]);
  }
  return sum;
}

}  // namespace

TEST_CASE("ceil_log") {
  CHECK(ceil_log(4, 16) == 2);
  CHECK(ceil_log(4, 17) == 3);
  CHECK(ceil_log(16, 256) == 2);
  CHECK(ceil_log(8, 3) == 1);
  CHECK(ceil_log(2, 1) == 0);
  CHECK(ceil_log(3, 1ull << 62) == 40);
  CHECK_THROWS_AS(ceil_log(1, 5), std::invalid_argument);
}

TEST_CASE("16 scalars with k=4 take 2 rounds") {
  const auto& s = integer_semiring();
  const auto xs = addends(16, 1, s, 1);
  const auto res = execute(schedule_tree_sum({16, 4, 1}, xs, s));
  CHECK(res.run.transcript.round_count() == 2);
  CHECK(res.product == direct_sum(xs, s));
}

TEST_CASE("t <= k takes one round, t = 1 needs no reduction") {
  const auto& s = integer_semiring();
  const auto xs = addends(3, 8, s, 2);
  const auto res = execute(schedule_tree_sum({3, 8, 8}, xs, s));
  CHECK(res.run.transcript.round_count() == 1);
  CHECK(res.product == direct_sum(xs, s));

  const TreeSumPlan single({0}, 4, 4);
  CHECK(single.rounds() == 0);
  const auto one = addends(1, 4, s, 3);
  const auto r1 = execute(schedule_tree_sum({1, 4, 4}, one, s));
  CHECK(r1.product == direct_sum(one, s));
  CHECK(r1.run.transcript.total_words_sent() == 0);
}

TEST_CASE("rounds match ceil(log_k t) across shapes and stay in budget") {
  for (const auto& s : builtin_semirings()) {
    for (auto [t, k] : std::vector<std::pair<std::size_t, std::size_t>>{
             {16, 4}, {64, 4}, {256, 16}, {3, 8}, {5, 2}, {17, 4}, {100, 9}, {7, 3}}) {
      CAPTURE(t);
      CAPTURE(k);
      const auto xs = addends(t, k, s, t * 31 + k);
      const auto sched = schedule_tree_sum({t, k, k}, xs, s);
      const auto res = execute(sched);
      CHECK(res.product == direct_sum(xs, s));
      CHECK(res.run.transcript.round_count() == std::max<std::size_t>(1, ceil_log(k, t)));
      CHECK(assert_transcript(res.run.transcript, sched.config));
    }
  }
}

TEST_CASE("result is independent of the processor labelling") {
  const auto& s = integer_semiring();
  std::mt19937_64 rng(4);
  for (int it = 0; it < 10; ++it) {
    const std::size_t t = 2 + rng() % 60;
    const std::size_t k = 2 + rng() % 6;
    const auto xs = addends(t, k, s, it);
    std::vector<ProcessorId> perm(t);
    std::iota(perm.begin(), perm.end(), ProcessorId{0});
    for (std::size_t i = t; i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
    const auto plain = execute(schedule_tree_sum({t, k, k}, xs, s));
    const auto shuffled = execute(schedule_tree_sum({t, k, k}, xs, s, {}, perm));
    CHECK(plain.product == shuffled.product);
    CHECK(plain.run.transcript.round_count() == shuffled.run.transcript.round_count());
  }
}

TEST_CASE("invalid tasks") {
  const auto& s = integer_semiring();
  CHECK_THROWS_AS(schedule_tree_sum({0, 4, 4}, {}, s), std::invalid_argument);
  const auto xs = addends(4, 1, s, 1);
  CHECK_THROWS_AS(schedule_tree_sum({4, 0, 1}, xs, s), std::invalid_argument);
  CHECK_THROWS_AS(schedule_tree_sum({4, 1, 1}, xs, s), std::invalid_argument);
  CHECK_THROWS_AS(TreeSumPlan({0, 0}, 1, 2), std::invalid_argument);
}
