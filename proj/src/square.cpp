#include "mpcmm/square.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace mpcmm {

ScheduleRun execute(const Schedule& schedule) {
  auto result = run(schedule.program, schedule.config);
  auto product = schedule.assemble(result.final_state);
  return ScheduleRun{std::move(result), std::move(product)};
}

namespace detail {
MpcConfig make_config(std::size_t processors, std::size_t min_memory, const ScheduleOptions& opt,
                      const char* who) {
  MpcConfig c;
  c.processors = processors;
  c.memory = opt.memory.value_or(min_memory);
  if (c.memory < min_memory) {
    throw std::invalid_argument(std::string(who) + ": memory " + std::to_string(c.memory) +
                                " below the required " + std::to_string(min_memory) + " words");
  }
  c.cap_factor = opt.cap_factor;
  c.execution = opt.execution;
  c.validate();
  return c;
}
}  // namespace detail

SquareLayout square_layout(const ProblemShape& shape) {
  if (shape.n == 0) throw std::invalid_argument("square: n must be >= 1");
  if (!(shape.alpha >= 0.0 && shape.alpha <= 2.0)) {
    throw std::invalid_argument("square: alpha must lie in [0, 2]");
  }
  SquareLayout l;
  const double side = std::pow(static_cast<double>(shape.n), shape.alpha / 2.0);
  l.grid = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(side - 1e-9)));
  l.tile = (shape.n + l.grid - 1) / l.grid;
  l.padded_n = l.grid * l.tile;
  l.processors = l.grid * l.grid;
  l.memory = l.tile * l.tile;
  return l;
}

std::size_t square_rounds_upper(const ProblemShape& shape) { return square_layout(shape).grid; }

namespace {

enum : std::uint8_t { kAHome = 1, kBHome, kAIn, kBIn, kC };

std::vector<Element> concat_payloads(std::span<const Message> inbox, std::uint8_t kind) {
  std::vector<Element> out;
  for (const auto& m : inbox) {
    if (tag_kind(m.tag) == kind) out.insert(out.end(), m.payload.begin(), m.payload.end());
  }
  return out;
}

}  // namespace

Schedule schedule_square(const ProblemShape& shape, const DenseMatrix& a, const DenseMatrix& b,
                         const SemiringSpec& s, const SquareOptions& options) {
  if (a.rows() != shape.n || a.cols() != shape.n || b.rows() != shape.n || b.cols() != shape.n) {
    throw std::invalid_argument("schedule_square: inputs must be " + std::to_string(shape.n) + "x" +
                                std::to_string(shape.n));
  }
  const SquareLayout l = square_layout(shape);
  const std::size_t g = l.grid;
  const std::size_t t = l.tile;
  const std::size_t T = t * t;
  const std::size_t N = l.padded_n;
  const std::size_t n = shape.n;

  auto pa = std::make_shared<const DenseMatrix>(pad_to(a, N, N, s));
  auto pb = std::make_shared<const DenseMatrix>(pad_to(b, N, N, s));
  const InitialLayout layout = options.layout;

  Schedule sched;
  sched.name = "square";
  sched.config = detail::make_config(l.processors, l.memory, options, "schedule_square");
  sched.predicted_rounds = g;

  sched.program.init = [=](ProcessorId p) {
    LocalStore st;
    if (layout == InitialLayout::tile_aligned) {
      const TileIndex ti{p / g, p % g, t, t};
      auto words = [](const DenseMatrix& m) { return std::vector<Element>(m.data().begin(), m.data().end()); };
      st.put(make_tag(kAHome), words(tile(*pa, ti)));
      st.put(make_tag(kBHome), words(tile(*pb, ti)));
    } else {
      auto chunk = [&](const DenseMatrix& m) {
        auto d = m.data().subspan(p * T, T);
        return std::vector<Element>(d.begin(), d.end());
      };
      st.put(make_tag(kAHome), chunk(*pa));
      st.put(make_tag(kBHome), chunk(*pb));
    }
    return st;
  };

  // Who uses A^{ik} / B^{kj} in the first iteration.
  auto first_a_owner = [g](std::size_t i, std::size_t k) { return i * g + (k + g - i % g) % g; };
  auto first_b_owner = [g](std::size_t k, std::size_t j) { return ((k + g - j % g) % g) * g + j; };

  sched.program.step = [=](Context& ctx) {
    const std::size_t p = ctx.self();
    const std::size_t i = p / g;
    const std::size_t j = p % g;
    auto& st = ctx.state();

    if (ctx.round() == 0) {
      auto home_a = st.take(make_tag(kAHome));
      auto home_b = st.take(make_tag(kBHome));
      if (layout == InitialLayout::tile_aligned) {
        ctx.send(first_a_owner(i, j), make_tag(kAIn), std::move(home_a));
        ctx.send(first_b_owner(i, j), make_tag(kBIn), std::move(home_b));
      } else {
        // Split the chunk into runs that share a destination tile.
        auto route = [&](const std::vector<Element>& chunk, std::uint8_t kind, bool is_a) {
          std::vector<Element> run;
          std::size_t dst = 0;
          for (std::size_t e = 0; e < chunk.size(); ++e) {
            const std::size_t flat = p * T + e;
            const std::size_t r = flat / N;
            const std::size_t c = flat % N;
            const std::size_t to = is_a ? first_a_owner(r / t, c / t) : first_b_owner(r / t, c / t);
            if (!run.empty() && to != dst) {
              ctx.send(dst, make_tag(kind), std::move(run));
              run.clear();
            }
            dst = to;
            run.push_back(chunk[e]);
          }
          if (!run.empty()) ctx.send(dst, make_tag(kind), std::move(run));
        };
        route(home_a, kAIn, true);
        route(home_b, kBIn, false);
      }
      st.put(make_tag(kC), std::vector<Element>(T, s.zero), /*output=*/true);
      return;
    }

    // Payloads arrive in (src, emission) order, which is the tile's row-major order.
    auto a_tile = concat_payloads(ctx.inbox(), kAIn);
    auto b_tile = concat_payloads(ctx.inbox(), kBIn);
    if (a_tile.size() != T || b_tile.size() != T) {
      throw std::logic_error("schedule_square: processor " + std::to_string(p) + " missing tiles in round " +
                             std::to_string(ctx.round()));
    }
    multiply_accumulate(st.at(make_tag(kC)), a_tile, b_tile, t, t, t, s);
    if (ctx.round() < g) {
      ctx.send(i * g + (j + g - 1) % g, make_tag(kAIn), std::move(a_tile));
      ctx.send(((i + g - 1) % g) * g + j, make_tag(kBIn), std::move(b_tile));
    } else {
      ctx.halt();
    }
  };

  sched.assemble = [=](std::span<const LocalStore> states) {
    DenseMatrix c(N, N, Element{0});
    for (std::size_t p = 0; p < states.size(); ++p) {
      DenseMatrix block(t, t, states[p].at(make_tag(kC)));
      place_tile(c, TileIndex{p / g, p % g, t, t}, block);
    }
    return crop(c, n, n);
  };
  return sched;
}

}  // namespace mpcmm
