// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "mpcmm/bounds.hpp"
#include "mpcmm/experiment.hpp"
#include "mpcmm/intmath.hpp"
#include "mpcmm/rect.hpp"
#include "mpcmm/sparse.hpp"
#include "mpcmm/square.hpp"
#include "mpcmm/tree_sum.hpp"

using namespace mpcmm;

namespace {

// Pinned tolerances.
constexpr double kSquareTimeLimitSeconds = 10.0;
constexpr std::size_t kOracleSeeds = 5;
constexpr std::size_t kSparseTrivialFactor = 4;   // rounds <= 4d
constexpr std::size_t kTwoPhaseRandomSlack = 2;   // rounds <= trivial + 2
constexpr std::size_t kDominanceSamples = 100;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (!pass) detail << "; ";
      else detail.str("");
      pass = false;
      detail << what;
    }
  }
};

std::size_t rounds_of(const ScheduleRun& r) { return r.run.transcript.round_count(); }

std::size_t ceil_d_over_sqrt_n(std::size_t n, std::size_t d) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(d) / std::sqrt(static_cast<double>(n)) - 1e-12));
}

void criterion_1(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& s = integer_semiring();
  for (auto [n, alpha] : std::vector<std::pair<std::size_t, double>>{{16, 1}, {64, 1}, {256, 1}, {16, 2}, {16, 0.5}}) {
    const auto want = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), alpha / 2) - 1e-9));
    const auto a = random_dense(n, n, s, 1);
    const auto b = random_dense(n, n, s, 2);
    const auto r = execute(schedule_square({n, 0, alpha}, a, b, s));
    const auto got = rounds_of(r);
    const auto lb = lower_bound_square(n, alpha);
    std::ostringstream tag;
    tag << "(n=" << n << ",alpha=" << alpha << ") rounds=" << got << " want=" << want << " lb=" << lb;
    o.require(got == want && got >= lb && r.product == naive_multiply(a, b, s), tag.str());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs < kSquareTimeLimitSeconds, "runtime " + std::to_string(secs) + "s");
  if (o.pass) o.detail << "5 shapes exact, " << secs << "s";
}

void criterion_2(Outcome& o) {
  std::size_t checked = 0;
  for (const auto& s : builtin_semirings()) {
    for (std::uint64_t seed = 1; seed <= kOracleSeeds; ++seed) {
      auto check = [&](const char* name, const Schedule& sched, const DenseMatrix& want) {
        const auto r = execute(sched);
        ++checked;
        o.require(r.product == want, std::string(name) + " " + std::string(s.name) + " seed " + std::to_string(seed));
      };
      {
        const std::size_t n = 36;
        const auto a = random_dense(n, n, s, seed * 10);
        const auto b = random_dense(n, n, s, seed * 10 + 1);
        check("square", schedule_square({n, 0, 1.0}, a, b, s), naive_multiply(a, b, s));
      }
      {
        const std::size_t n = 20, d = 7;
        const auto a = random_dense(n, d, s, seed * 10 + 2);
        const auto b = random_dense(d, n, s, seed * 10 + 3);
        check("ndn", schedule_ndn(n, d, a, b, s), naive_multiply(a, b, s));
      }
      {
        const std::size_t n = 40, d = 6;
        const auto a = random_dense(d, n, s, seed * 10 + 4);
        const auto b = random_dense(n, d, s, seed * 10 + 5);
        check("dnd-n", schedule_dnd_nproc(n, d, a, b, s), naive_multiply(a, b, s));
        check("dnd-d", schedule_dnd_dproc(n, d, a, b, s), naive_multiply(a, b, s));
      }
      {
        const std::size_t n = 64, d = 4;
        const auto a = random_d_sparse(n, d, s, seed * 10 + 6);
        const auto b = random_d_sparse(n, d, s, seed * 10 + 7);
        const auto mask = default_mask(a, b, d);
        const auto want = apply_mask(naive_multiply(a, b, s), mask, s);
        check("sparse-trivial", schedule_sparse_trivial(n, d, a, b, mask, s), want);
        check("sparse-twophase", schedule_sparse_twophase(n, d, a, b, mask, s).schedule, want);
        const auto ba = blockdiag(n, d, s, seed * 10 + 8);
        const auto bb = blockdiag(n, d, s, seed * 10 + 9);
        const auto bmask = default_mask(ba, bb, d);
        check("sparse-twophase-blockdiag", schedule_sparse_twophase(n, d, ba, bb, bmask, s).schedule,
              apply_mask(naive_multiply(ba, bb, s), bmask, s));
      }
    }
  }
  if (o.pass) o.detail << checked << " runs over 3 semirings, exact";
}

void criterion_3(Outcome& o) {
  const auto& s = integer_semiring();
  for (auto [n, d] : std::vector<std::pair<std::size_t, std::size_t>>{{16, 4}, {16, 8}, {64, 16}, {64, 64}}) {
    const auto a = random_dense(n, d, s, 1);
    const auto b = random_dense(d, n, s, 2);
    const auto r = execute(schedule_ndn(n, d, a, b, s));
    const auto lo = ceil_d_over_sqrt_n(n, d);
    const auto got = rounds_of(r);
    std::ostringstream tag;
    tag << "(n=" << n << ",d=" << d << ") rounds=" << got << " in [" << lo << "," << 2 * lo << "]";
    o.require(got >= lo && got <= 2 * lo && r.product == naive_multiply(a, b, s), tag.str());
    if (o.pass) o.detail << (o.detail.tellp() > 0 ? "; " : "") << tag.str();
  }
}

void criterion_4(Outcome& o) {
  const auto& s = integer_semiring();
  for (auto [n, d] : std::vector<std::pair<std::size_t, std::size_t>>{{64, 4}, {256, 16}, {64, 16}}) {
    const auto a = random_dense(d, n, s, 3);
    const auto b = random_dense(n, d, s, 4);
    const auto r = execute(schedule_dnd_nproc(n, d, a, b, s));
    const auto got = rounds_of(r);
    const auto hi = ceil_sqrt(d) + ceil_log(d, n) + 2;
    const auto lo = strict_lower_bound_dnd_nproc(n, d);
    std::ostringstream tag;
    tag << "(n=" << n << ",d=" << d << ") rounds=" << got << " in [" << lo << "," << hi << "]";
    o.require(got >= lo && got <= hi && r.product == naive_multiply(a, b, s), tag.str());
    if (o.pass) o.detail << (o.detail.tellp() > 0 ? "; " : "") << tag.str();
  }
}

void criterion_5(Outcome& o) {
  const auto& s = integer_semiring();
  for (auto [n, d] : std::vector<std::pair<std::size_t, std::size_t>>{{16, 8}, {64, 32}}) {
    const auto a = random_dense(d, n, s, 5);
    const auto b = random_dense(n, d, s, 6);
    const auto r = execute(schedule_dnd_dproc(n, d, a, b, s));
    const auto got = rounds_of(r);
    const auto lo = ceil_d_over_sqrt_n(n, d);
    std::ostringstream tag;
    tag << "(n=" << n << ",d=" << d << ") rounds=" << got << " in [" << lo << "," << lo + 2 << "]";
    o.require(got >= lo && got <= lo + 2 && r.product == naive_multiply(a, b, s), tag.str());
    if (o.pass) o.detail << (o.detail.tellp() > 0 ? "; " : "") << tag.str();
  }
}

void criterion_6(Outcome& o) {
  const auto& s = integer_semiring();
  for (auto [t, k] : std::vector<std::pair<std::size_t, std::size_t>>{{16, 4}, {64, 4}, {256, 16}, {3, 8}}) {
    const auto m = random_dense(t, k, s, t + k);
    std::vector<std::vector<Element>> xs;
    DenseMatrix want(1, k, s.zero);
    for (std::size_t l = 0; l < t; ++l) {
      xs.emplace_back(m.row(l).begin(), m.row(l).end());
      for (std::size_t e = 0; e < k; ++e) want(0, e) = s.add(want(0, e), m(l, e));
    }
    const auto r = execute(schedule_tree_sum({t, k, k}, xs, s));
    const auto got = rounds_of(r);
    const auto lo = ceil_log(k, t);
    std::ostringstream tag;
    tag << "(t=" << t << ",k=" << k << ") rounds=" << got << " in [" << lo << "," << lo + 1 << "]";
    bool ok = got >= lo && got <= lo + 1 && r.product == want;
    if (t == 3) ok = ok && got == 1;
    o.require(ok, tag.str());
    if (o.pass) o.detail << (o.detail.tellp() > 0 ? "; " : "") << tag.str();
  }
}

void criterion_7(Outcome& o) {
  const auto& s = integer_semiring();
  std::size_t accepted = 0;
  auto accept = [&](const Schedule& sched, const std::string& name) {
    const auto r = execute(sched);
    ++accepted;
    o.require(assert_transcript(r.run.transcript, sched.config) && sched.config.cap_factor == 4, name);
  };
  accept(schedule_square({64, 0, 1.0}, random_dense(64, 64, s, 1), random_dense(64, 64, s, 2), s), "square");
  accept(schedule_ndn(64, 16, random_dense(64, 16, s, 1), random_dense(16, 64, s, 2), s), "ndn");
  accept(schedule_dnd_nproc(256, 16, random_dense(16, 256, s, 1), random_dense(256, 16, s, 2), s), "dnd-n");
  accept(schedule_dnd_dproc(64, 32, random_dense(32, 64, s, 1), random_dense(64, 32, s, 2), s), "dnd-d");
  {
    const auto a = blockdiag(256, 16, s, 1);
    const auto b = blockdiag(256, 16, s, 2);
    const auto mask = default_mask(a, b, 16);
    accept(schedule_sparse_trivial(256, 16, a, b, mask, s), "sparse-trivial");
    accept(schedule_sparse_twophase(256, 16, a, b, mask, s).schedule, "sparse-twophase");
  }

  // Injected oversized broadcast: processor 2 sends M words to everyone in round 3.
  const std::size_t P = 8, M = 4;
  Program prog;
  prog.init = [](ProcessorId) { return LocalStore{}; };
  prog.step = [&](Context& ctx) {
    if (ctx.round() == 2 && ctx.self() == 2) {
      for (ProcessorId q = 0; q < P; ++q) ctx.send(q, make_tag(1), std::vector<Element>(M, 1));
    }
    if (ctx.round() >= 4) ctx.halt();
  };
  MpcConfig cfg;
  cfg.processors = P;
  cfg.memory = M;
  std::size_t raised = 0;
  for (auto mode : {Execution::serial, Execution::parallel}) {
    cfg.execution = mode;
    try {
      run(prog, cfg);
      o.require(false, "oversized broadcast was not rejected");
    } catch (const BandwidthExceeded& e) {
      o.require(e.on_send() && e.violation().round == 3 && e.violation().processor == 2,
                "violation at round " + std::to_string(e.violation().round));
      ++raised;
    }
  }
  if (o.pass) o.detail << accepted << " transcripts within 4M; broadcast rejected at round 3 in " << raised << " modes";
}

void criterion_8(Outcome& o) {
  const std::size_t n = 64;
  for (const auto& s : builtin_semirings()) {
    for (std::size_t d : {2, 4, 8}) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto a = random_d_sparse(n, d, s, seed);
        const auto b = random_d_sparse(n, d, s, seed + 100);
        const auto mask = default_mask(a, b, d);
        const auto r = execute(schedule_sparse_trivial(n, d, a, b, mask, s));
        std::ostringstream tag;
        tag << s.name << " d=" << d << " seed=" << seed << " rounds=" << rounds_of(r);
        o.require(rounds_of(r) <= kSparseTrivialFactor * d && r.product == apply_mask(naive_multiply(a, b, s), mask, s),
                  tag.str());
      }
    }
  }
  if (o.pass) o.detail << "27 instances within 4d rounds, masked oracle exact";
}

void criterion_9(Outcome& o) {
  const auto& s = integer_semiring();
  const std::size_t n = 256, d = 16;
  const auto a = blockdiag(n, d, s, 1);
  const auto b = blockdiag(n, d, s, 2);
  const auto mask = default_mask(a, b, d);
  const auto two = schedule_sparse_twophase(n, d, a, b, mask, s);
  const auto r2 = execute(two.schedule);
  const auto r1 = execute(schedule_sparse_trivial(n, d, a, b, mask, s));
  std::ostringstream tag;
  tag << "blockdiag two-phase=" << rounds_of(r2) << " trivial=" << rounds_of(r1);
  o.require(2 * rounds_of(r2) <= rounds_of(r1), tag.str());

  std::size_t worst_gap = 0;
  for (auto [rn, rd] : std::vector<std::pair<std::size_t, std::size_t>>{{64, 4}, {128, 8}, {256, 16}}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto ra = random_d_sparse(rn, rd, s, seed);
      const auto rb = random_d_sparse(rn, rd, s, seed + 50);
      const auto rmask = default_mask(ra, rb, rd);
      const auto t2 = schedule_sparse_twophase(rn, rd, ra, rb, rmask, s);
      const auto got = rounds_of(execute(t2.schedule));
      const auto triv = rounds_of(execute(schedule_sparse_trivial(rn, rd, ra, rb, rmask, s)));
      if (got > triv) worst_gap = std::max(worst_gap, got - triv);
      o.require(got <= triv + kTwoPhaseRandomSlack,
                "random n=" + std::to_string(rn) + " two-phase " + std::to_string(got) + " > trivial+2");
      const auto& dec = t2.decomposition;
      o.require(static_cast<double>(dec.layers.size()) <= dec.layer_budget &&
                    static_cast<double>(dec.residual.size()) <= dec.residual_budget &&
                    census(dec, ra, rb, rmask).exact(),
                "decomposition budget or census, random n=" + std::to_string(rn));
    }
  }
  const auto& dec = two.decomposition;
  o.require(dec.layer_budget_met && dec.residual_budget_met && census(dec, a, b, mask).exact(),
            "blockdiag decomposition budget or census");
  if (o.pass) o.detail << tag.str() << "; random worst excess " << worst_gap << "; budgets and census hold";
}

void criterion_10(Outcome& o) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t strict = 0;
  for (std::size_t i = 0; i < kDominanceSamples; ++i) {
    const double e2 = 0.02 + 0.48 * u(rng);
    const double e1 = i % 10 == 0 ? 0.0 : e2 * (0.05 + 0.9 * u(rng));
    const std::size_t d = 2 + rng() % 100000;
    const auto b = iteration_budget(e1, e2, d);
    o.require(b.improved <= b.old, "improved > old at d=" + std::to_string(d));
    if (e1 > 0) {
      o.require(b.improved_real < b.old_real, "not strict at d=" + std::to_string(d));
      ++strict;
    }
  }
  if (o.pass) o.detail << kDominanceSamples << " samples, " << strict << " strict";
}

void criterion_11(Outcome& o) {
  std::size_t configs = 0;
  auto same = [&](ExperimentConfig cfg) {
    const auto x = run_experiment(cfg);
    const auto y = run_experiment(cfg);
    std::ostringstream cx, cy;
    write_transcript_csv(cx, x.transcript);
    write_transcript_csv(cy, y.transcript);
    ++configs;
    o.require(summary_text(x.summary) == summary_text(y.summary) && cx.str() == cy.str(),
              "artifacts differ for " + cfg.case_name);
  };
  for (const char* kase : {"square", "ndn", "dnd", "tree-sum"}) {
    ExperimentConfig cfg;
    cfg.case_name = kase;
    cfg.n = 64;
    cfg.d = 16;
    cfg.seed = 11;
    same(cfg);
  }
  for (const char* mode : {"trivial", "twophase"}) {
    ExperimentConfig cfg;
    cfg.case_name = "sparse";
    cfg.mode = mode;
    cfg.n = 128;
    cfg.d = 8;
    cfg.seed = 11;
    same(cfg);
  }
  if (o.pass) o.detail << configs << " configs byte-identical";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"square rounds", criterion_1},     {"oracle equivalence", criterion_2}, {"ndn rounds", criterion_3},
      {"dnd n-proc rounds", criterion_4}, {"dnd d-proc rounds", criterion_5},  {"tree-sum rounds", criterion_6},
      {"budget enforcement", criterion_7}, {"sparse trivial", criterion_8},   {"sparse two-phase", criterion_9},
      {"iteration dominance", criterion_10}, {"determinism", criterion_11},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail.str()
              << "\n";
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
