#include <doctest.h>

#include <sstream>

#include "mpcmm/experiment.hpp"
#include "mpcmm/mpc.hpp"
#include "mpcmm/square.hpp"
#include "mpcmm/transcript.hpp"

using namespace mpcmm;

namespace {

MpcConfig config(std::size_t P, std::size_t M, Execution e = Execution::serial) {
  MpcConfig c;
  c.processors = P;
  c.memory = M;
  c.execution = e;
  return c;
}

// Every processor sends `words` words to (p + 1) mod P in round `when`.
Program ring(std::size_t words, std::size_t when, std::size_t stop) {
  Program prog;
  prog.init = [](ProcessorId) { return LocalStore{}; };
  prog.step = [=](Context& ctx) {
    if (ctx.round() == when) {
      ctx.send((ctx.self() + 1) % ctx.processors(), make_tag(1), std::vector<Element>(words, ctx.self()));
    }
    if (ctx.round() >= stop) ctx.halt();
  };
  return prog;
}

}  // namespace

TEST_CASE("single processor multiplies locally in one round") {
  const auto& s = integer_semiring();
  const auto a = random_dense(4, 4, s, 1);
  const auto b = random_dense(4, 4, s, 2);
  Program prog;
  prog.init = [&](ProcessorId) {
    LocalStore st;
    st.put(make_tag(1), {a.data().begin(), a.data().end()});
    st.put(make_tag(2), {b.data().begin(), b.data().end()});
    return st;
  };
  prog.step = [&](Context& ctx) {
    if (ctx.round() == 0) {
      std::vector<Element> c(16, s.zero);
      multiply_accumulate(c, ctx.state().at(make_tag(1)), ctx.state().at(make_tag(2)), 4, 4, 4, s);
      ctx.state().put(make_tag(3), std::move(c), true);
    }
    ctx.halt();
  };
  const auto res = run(prog, config(1, 48));
  CHECK(res.transcript.round_count() == 1);
  CHECK(res.transcript.total_words_sent() == 0);
  CHECK(DenseMatrix(4, 4, res.final_state[0].at(make_tag(3))) == naive_multiply(a, b, s));
  CHECK(res.transcript.output_words[0] == 16);
}

TEST_CASE("oversized send raises BandwidthExceeded at the offending round") {
  const std::size_t M = 5;
  for (auto mode : {Execution::serial, Execution::parallel}) {
    auto cfg = config(3, M, mode);
    try {
      run(ring(2 * cfg.budget(), 2, 5), cfg);
      FAIL("expected a violation");
    } catch (const BandwidthExceeded& e) {
      CHECK(e.violation().round == 3);
      CHECK(e.violation().processor == 0);
      CHECK(e.on_send());
      CHECK(e.violation().words == 2 * cfg.budget());
      CHECK(e.transcript().round_count() == 3);
    }
  }
}

TEST_CASE("receive budget is enforced separately") {
  Program prog;
  prog.init = [](ProcessorId) { return LocalStore{}; };
  prog.step = [](Context& ctx) {
    if (ctx.round() == 0) ctx.send(0, make_tag(1), std::vector<Element>(3, 1));
    ctx.halt();
  };
  auto cfg = config(4, 2);  // budget 8; processor 0 receives 12
  try {
    run(prog, cfg);
    FAIL("expected a violation");
  } catch (const BandwidthExceeded& e) {
    CHECK_FALSE(e.on_send());
    CHECK(e.violation().kind == ViolationKind::bandwidth_received);
    CHECK(e.violation().words == 12);
  }
}

TEST_CASE("memory and termination are enforced") {
  Program big;
  big.init = [](ProcessorId p) {
    LocalStore st;
    st.put(make_tag(1), std::vector<Element>(p == 1 ? 30 : 1, 0));
    return st;
  };
  big.step = [](Context& ctx) { ctx.halt(); };
  CHECK_THROWS_AS(run(big, config(2, 5)), MemoryExceeded);

  Program forever;
  forever.init = [](ProcessorId) { return LocalStore{}; };
  forever.step = [](Context&) {};
  auto cfg = config(2, 1);
  cfg.max_rounds = 10;
  CHECK_THROWS_AS(run(forever, cfg), NonTermination);

  Program stray;
  stray.init = [](ProcessorId) { return LocalStore{}; };
  stray.step = [](Context& ctx) { ctx.send(9, make_tag(1), {1}); };
  CHECK_THROWS_AS(run(stray, config(2, 4)), std::out_of_range);
}

TEST_CASE("delivery order is by source, then emission") {
  Program prog;
  prog.init = [](ProcessorId) { return LocalStore{}; };
  std::vector<std::vector<std::size_t>> seen(1);
  prog.step = [&](Context& ctx) {
    if (ctx.round() == 0) {
      ctx.send(0, make_tag(1, 0), {ctx.self()});
      ctx.send(0, make_tag(1, 1), {ctx.self()});
    } else {
      if (ctx.self() == 0) {
        for (const auto& m : ctx.inbox()) seen[0].push_back(m.src * 10 + tag_a(m.tag));
      }
      ctx.halt();
    }
  };
  for (auto mode : {Execution::serial, Execution::parallel}) {
    seen[0].clear();
    run(prog, config(3, 8, mode));
    CHECK(seen[0] == std::vector<std::size_t>{0, 1, 10, 11, 20, 21});
  }
}

TEST_CASE("transcripts are deterministic and conserve words") {
  const auto& s = integer_semiring();
  const auto a = random_dense(16, 16, s, 1);
  const auto b = random_dense(16, 16, s, 2);
  SquareOptions serial;
  serial.execution = Execution::serial;
  SquareOptions parallel;
  const auto r1 = execute(schedule_square({16, 0, 1.0}, a, b, s, serial));
  const auto r2 = execute(schedule_square({16, 0, 1.0}, a, b, s, parallel));
  const auto r3 = execute(schedule_square({16, 0, 1.0}, a, b, s, parallel));
  CHECK(r1.run.transcript == r2.run.transcript);
  CHECK(r2.run.transcript == r3.run.transcript);
  CHECK(r1.run.final_state == r2.run.final_state);
  for (const auto& log : r1.run.transcript.rounds) {
    std::size_t sent = 0, recv = 0;
    for (auto w : log.words_sent) sent += w;
    for (auto w : log.words_received) recv += w;
    CHECK(sent == recv);
    for (auto w : log.words_received) CHECK(w <= 4 * 16);
  }
}

TEST_CASE("assert_transcript and the CSV round trip") {
  const auto& s = integer_semiring();
  const auto sched = schedule_square({16, 0, 1.0}, random_dense(16, 16, s, 3), random_dense(16, 16, s, 4), s);
  const auto t = execute(sched).run.transcript;
  CHECK(assert_transcript(t, sched.config));

  std::stringstream csv;
  write_transcript_csv(csv, t);
  const auto back = read_transcript_csv(csv);
  CHECK(back.rounds == t.rounds);
  CHECK(assert_transcript(back, sched.config) == assert_transcript(t, sched.config));

  auto bad = t;
  bad.rounds[1].words_received[5] = 4 * 16 + 1;
  CHECK_FALSE(assert_transcript(bad, sched.config));
  const auto v = find_violation(bad, sched.config);
  REQUIRE(v);
  CHECK(v->kind == ViolationKind::bandwidth_received);
  CHECK(v->round == 2);
  CHECK(v->processor == 5);

  std::stringstream csv2;
  write_transcript_csv(csv2, bad);
  CHECK_FALSE(assert_transcript(read_transcript_csv(csv2), sched.config));
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(run(ring(1, 0, 1), config(0, 1)), std::invalid_argument);
  CHECK_THROWS_AS(run(ring(1, 0, 1), config(1, 0)), std::invalid_argument);
  auto c = config(1, 1);
  c.cap_factor = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
