#include "mpcmm/rect.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>

#include "mpcmm/intmath.hpp"

namespace mpcmm {

namespace {

std::vector<Element> words_of(const DenseMatrix& m) { return {m.data().begin(), m.data().end()}; }

void check_shape(const char* who, const DenseMatrix& m, std::size_t rows, std::size_t cols) {
  if (m.rows() != rows || m.cols() != cols) {
    throw std::invalid_argument(std::string(who) + ": expected a " + std::to_string(rows) + "x" +
                                std::to_string(cols) + " matrix, got " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
  }
}

void check_dims(const char* who, std::size_t n, std::size_t d) {
  if (d == 0) throw std::invalid_argument(std::string(who) + ": d must be >= 1");
  if (d > n) throw std::invalid_argument(std::string(who) + ": d must not exceed n");
}

}  // namespace

// ---------------------------------------------------------------- (n, d, n)

NdnLayout ndn_layout(std::size_t n, std::size_t d) {
  check_dims("ndn", n, d);
  NdnLayout l;
  l.grid = ceil_sqrt(n);
  l.padded_n = l.grid * l.grid;
  l.slices = ceil_div(d, l.grid);
  l.padded_d = l.slices * l.grid;
  l.processors = l.padded_n;
  l.memory = l.padded_n + 2 * l.padded_d;
  return l;
}

namespace {
enum : std::uint8_t { kARow = 1, kBCol, kAIn, kBIn, kCBlock };
}

Schedule schedule_ndn(std::size_t n, std::size_t d, const DenseMatrix& a, const DenseMatrix& b,
                      const SemiringSpec& s, const ScheduleOptions& options) {
  const NdnLayout l = ndn_layout(n, d);
  check_shape("schedule_ndn A", a, n, d);
  check_shape("schedule_ndn B", b, d, n);
  const std::size_t g = l.grid;
  const std::size_t Q = l.slices;
  auto pa = std::make_shared<const DenseMatrix>(pad_to(a, l.padded_n, l.padded_d, s));
  auto pb = std::make_shared<const DenseMatrix>(pad_to(b, l.padded_d, l.padded_n, s));

  Schedule sched;
  sched.name = "ndn";
  sched.config = detail::make_config(l.processors, l.memory, options, "schedule_ndn");
  sched.predicted_rounds = Q;

  sched.program.init = [=](ProcessorId p) {
    LocalStore st;
    for (std::size_t q = 0; q < Q; ++q) {
      std::vector<Element> row(g), col(g);
      for (std::size_t x = 0; x < g; ++x) {
        row[x] = (*pa)(p, q * g + x);
        col[x] = (*pb)(q * g + x, p);
      }
      st.put(make_tag(kARow, q), std::move(row));
      st.put(make_tag(kBCol, q), std::move(col));
    }
    return st;
  };

  sched.program.step = [=](Context& ctx) {
    const std::size_t p = ctx.self();
    const std::size_t r = ctx.round();
    auto& st = ctx.state();
    if (r == 0) st.put(make_tag(kCBlock), std::vector<Element>(g * g, s.zero), true);

    if (r >= 1) {
      std::vector<Element> ablk(g * g, s.zero), bblk(g * g, s.zero);
      std::size_t got = 0;
      for (const auto& m : ctx.inbox()) {
        const std::size_t local = tag_a(m.tag);
        if (tag_kind(m.tag) == kAIn) {
          std::copy(m.payload.begin(), m.payload.end(), ablk.begin() + static_cast<std::ptrdiff_t>(local * g));
        } else if (tag_kind(m.tag) == kBIn) {
          for (std::size_t k = 0; k < g; ++k) bblk[k * g + local] = m.payload[k];
        } else {
          continue;
        }
        ++got;
      }
      if (got != 2 * g) throw std::logic_error("schedule_ndn: incomplete slice at processor " + std::to_string(p));
      multiply_accumulate(st.at(make_tag(kCBlock)), ablk, bblk, g, g, g, s);
    }

    if (r < Q) {
      // Row p of A feeds block row p / g; column p of B feeds block column p / g.
      auto row = st.take(make_tag(kARow, r));
      auto col = st.take(make_tag(kBCol, r));
      for (std::size_t x = 0; x < g; ++x) {
        ctx.send((p / g) * g + x, make_tag(kAIn, p % g), row);
        ctx.send(x * g + p / g, make_tag(kBIn, p % g), col);
      }
    } else {
      ctx.halt();
    }
  };

  sched.assemble = [=](std::span<const LocalStore> states) {
    DenseMatrix c(l.padded_n, l.padded_n, Element{0});
    for (std::size_t p = 0; p < states.size(); ++p) {
      place_tile(c, TileIndex{p / g, p % g, g, g}, DenseMatrix(g, g, states[p].at(make_tag(kCBlock))));
    }
    return crop(c, n, n);
  };
  return sched;
}

// ---------------------------------------------------------------- (d, n, d)

namespace {

void finish_dnd_layout(DndLayout& l) {
  l.out_grid = l.padded_d / l.block;
  l.inner = l.padded_n / l.block;
  l.members = l.processors / (l.out_grid * l.out_grid);
  l.iterations = l.inner / l.members;
  if (l.members * l.out_grid * l.out_grid != l.processors || l.iterations * l.members != l.inner ||
      l.out_grid * l.inner > l.processors) {
    throw std::logic_error("dnd: inconsistent layout");
  }
  l.tree_rounds = ceil_log(std::max<std::size_t>(2, l.block * l.block), l.members);
}

}  // namespace

DndLayout dnd_nproc_layout(std::size_t n, std::size_t d) {
  check_dims("dnd_nproc", n, d);
  DndLayout l;
  l.block = ceil_sqrt(d);
  l.padded_d = l.block * l.block;
  l.padded_n = ceil_div(n, l.padded_d) * l.padded_d;
  l.processors = l.padded_n;
  l.memory = 2 * l.padded_d + ceil_div(l.padded_d * l.padded_d, l.padded_n);
  finish_dnd_layout(l);
  return l;
}

DndLayout dnd_dproc_layout(std::size_t n, std::size_t d) {
  check_dims("dnd_dproc", n, d);
  DndLayout l;
  l.block = ceil_sqrt(n);
  l.padded_n = l.block * l.block;
  std::size_t D = ceil_div(d, l.block);
  while (l.block % D != 0) ++D;
  l.padded_d = D * l.block;
  l.processors = l.padded_d;
  l.memory = 2 * l.padded_n + l.padded_d;
  finish_dnd_layout(l);
  return l;
}

namespace {

enum : std::uint8_t { kAHome = 1, kBHome, kAGet, kBGet, kPart, kSum, kOut };

// Processor (i, j, member) = (i * I + j) * m + member. A^{iq} lives on i * Q + q,
// B^{qj} on q * I + j. In iteration x the member uses
// q = member * L + (x + i + j) mod L, so every holder sends one copy per round.
Schedule schedule_dnd(const char* name, const DndLayout& l, std::size_t d, const DenseMatrix& a,
                      const DenseMatrix& b, const SemiringSpec& s, const ScheduleOptions& options) {
  const std::size_t bs = l.block;
  const std::size_t I = l.out_grid;
  const std::size_t Q = l.inner;
  const std::size_t m = l.members;
  const std::size_t L = l.iterations;
  const std::size_t R = l.tree_rounds;
  const std::size_t total = std::max<std::size_t>(L + R, 1);

  auto pa = std::make_shared<const DenseMatrix>(pad_to(a, l.padded_d, l.padded_n, s));
  auto pb = std::make_shared<const DenseMatrix>(pad_to(b, l.padded_n, l.padded_d, s));

  auto plans = std::make_shared<std::vector<TreeSumPlan>>();
  plans->reserve(I * I);
  for (std::size_t grp = 0; grp < I * I; ++grp) {
    std::vector<ProcessorId> members(m);
    for (std::size_t u = 0; u < m; ++u) members[u] = grp * m + u;
    plans->emplace_back(std::move(members), bs * bs, std::max<std::size_t>(2, bs * bs));
  }

  Schedule sched;
  sched.name = name;
  sched.config = detail::make_config(l.processors, l.memory, options, name);
  sched.predicted_rounds = total;

  sched.program.init = [=](ProcessorId p) {
    LocalStore st;
    if (p < I * Q) st.put(make_tag(kAHome), words_of(tile(*pa, TileIndex{p / Q, p % Q, bs, bs})));
    if (p < Q * I) st.put(make_tag(kBHome), words_of(tile(*pb, TileIndex{p / I, p % I, bs, bs})));
    return st;
  };

  sched.program.step = [=](Context& ctx) {
    const std::size_t p = ctx.self();
    const std::size_t r = ctx.round();
    const std::size_t grp = p / m;
    auto& st = ctx.state();

    if (r == 0) st.put(make_tag(kPart), std::vector<Element>(bs * bs, s.zero));

    if (r >= 1 && r <= L) {
      const Message* am = nullptr;
      const Message* bm = nullptr;
      for (const auto& msg : ctx.inbox()) {
        if (tag_kind(msg.tag) == kAGet) am = &msg;
        if (tag_kind(msg.tag) == kBGet) bm = &msg;
      }
      if (am == nullptr || bm == nullptr) {
        throw std::logic_error(std::string(name) + ": missing blocks at processor " + std::to_string(p));
      }
      multiply_accumulate(st.at(make_tag(kPart)), am->payload, bm->payload, bs, bs, bs, s);
    }

    if (r < L) {
      if (st.contains(make_tag(kAHome))) {
        const std::size_t i = p / Q;
        const std::size_t q = p % Q;
        for (std::size_t j = 0; j < I; ++j) {
          if ((r + i + j) % L == q % L) ctx.send((i * I + j) * m + q / L, make_tag(kAGet), st.at(make_tag(kAHome)));
        }
      }
      if (st.contains(make_tag(kBHome))) {
        const std::size_t q = p / I;
        const std::size_t j = p % I;
        for (std::size_t i = 0; i < I; ++i) {
          if ((r + i + j) % L == q % L) ctx.send((i * I + j) * m + q / L, make_tag(kBGet), st.at(make_tag(kBHome)));
        }
      }
      if (r + 1 == L) {
        st.erase(make_tag(kAHome));
        st.erase(make_tag(kBHome));
      }
    }

    if (r >= L) (*plans)[grp].step(ctx, r - L, make_tag(kPart), kSum, kOut, s);
    if (r >= total) ctx.halt();
  };

  sched.assemble = [=](std::span<const LocalStore> states) {
    DenseMatrix c(l.padded_d, l.padded_d, Element{0});
    for (std::size_t grp = 0; grp < I * I; ++grp) {
      const auto& plan = (*plans)[grp];
      const std::size_t i = grp / I;
      const std::size_t j = grp % I;
      for (std::size_t e = 0; e < bs * bs; ++e) {
        c(i * bs + e / bs, j * bs + e % bs) = states[plan.final_holder(e)].at(make_tag(kOut, e)).at(0);
      }
    }
    return crop(c, d, d);
  };
  return sched;
}

}  // namespace

Schedule schedule_dnd_nproc(std::size_t n, std::size_t d, const DenseMatrix& a, const DenseMatrix& b,
                            const SemiringSpec& s, const ScheduleOptions& options) {
  const DndLayout l = dnd_nproc_layout(n, d);
  check_shape("schedule_dnd_nproc A", a, d, n);
  check_shape("schedule_dnd_nproc B", b, n, d);
  return schedule_dnd("dnd-nproc", l, d, a, b, s, options);
}

Schedule schedule_dnd_dproc(std::size_t n, std::size_t d, const DenseMatrix& a, const DenseMatrix& b,
                            const SemiringSpec& s, const ScheduleOptions& options) {
  const DndLayout l = dnd_dproc_layout(n, d);
  check_shape("schedule_dnd_dproc A", a, d, n);
  check_shape("schedule_dnd_dproc B", b, n, d);
  return schedule_dnd("dnd-dproc", l, d, a, b, s, options);
}

}  // namespace mpcmm
