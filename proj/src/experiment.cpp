#include "mpcmm/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "mpcmm/bounds.hpp"
#include "mpcmm/rect.hpp"
#include "mpcmm/square.hpp"
#include "mpcmm/tree_sum.hpp"

namespace mpcmm {

namespace {

constexpr Element kValueRange = Element{1} << 20;

// Draws below bound from the raw generator so the stream is identical on
// every standard library.
std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) { return rng() % bound; }

Element random_value(std::mt19937_64& rng, const SemiringSpec& s) {
  switch (s.kind) {
    case SemiringKind::boolean:
      return draw(rng, 2);
    case SemiringKind::tropical:
      return draw(rng, 8) == 0 ? ops::Tropical::infinity : draw(rng, kValueRange);
    default:
      return draw(rng, kValueRange);
  }
}

// A value that is never the semiring's zero.
Element random_nonzero(std::mt19937_64& rng, const SemiringSpec& s) {
  switch (s.kind) {
    case SemiringKind::boolean:
      return 1;
    case SemiringKind::tropical:
      return draw(rng, kValueRange);
    default:
      return 1 + draw(rng, kValueRange - 1);
  }
}

std::vector<std::size_t> permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[draw(rng, i)]);
  return p;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) { return seed * 0x9E3779B97F4A7C15ull + salt; }

const DenseMatrix& dense(const AnyMatrix& m) {
  if (const auto* p = std::get_if<DenseMatrix>(&m)) return *p;
  throw std::invalid_argument("experiment: expected a dense matrix");
}

SparseMatrix as_sparse(const AnyMatrix& m, const SemiringSpec& s) {
  if (const auto* p = std::get_if<SparseMatrix>(&m)) return *p;
  return SparseMatrix::from_dense(std::get<DenseMatrix>(m), s);
}

}  // namespace

void ExperimentConfig::validate() const {
  const bool known_case = case_name == "square" || case_name == "ndn" || case_name == "dnd" ||
                          case_name == "sparse" || case_name == "tree-sum";
  if (!known_case) throw std::invalid_argument("unknown case '" + case_name + "'");
  semiring_by_name(semiring);
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  if (cap_factor == 0) throw std::invalid_argument("cap factor must be >= 1");
  if (instance != "random" && instance != "blockdiag" && instance != "file") {
    throw std::invalid_argument("unknown instance kind '" + instance + "'");
  }
  if (instance == "file" && (a_file.empty() || b_file.empty())) {
    throw std::invalid_argument("instance 'file' needs both matrix files");
  }
  if (instance == "blockdiag" && case_name != "sparse") {
    throw std::invalid_argument("instance 'blockdiag' is only defined for the sparse case");
  }
  if ((case_name == "ndn" || case_name == "dnd" || case_name == "sparse") && (d == 0 || d > n)) {
    throw std::invalid_argument("need 1 <= d <= n");
  }
  if (case_name == "dnd" && procs != "n" && procs != "d") throw std::invalid_argument("procs must be 'n' or 'd'");
  if (case_name == "sparse" && mode != "trivial" && mode != "twophase") {
    throw std::invalid_argument("mode must be 'trivial' or 'twophase'");
  }
  if (case_name == "tree-sum" && fan_in == 0) throw std::invalid_argument("fan-in must be >= 1");
}

DenseMatrix random_dense(std::size_t rows, std::size_t cols, const SemiringSpec& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DenseMatrix m(rows, cols, s.zero);
  for (auto& x : m.data()) x = random_value(rng, s);
  return m;
}

SparseMatrix random_d_sparse(std::size_t n, std::size_t d, const SemiringSpec& s, std::uint64_t seed) {
  if (d > n) throw std::invalid_argument("random_d_sparse: d must not exceed n");
  std::mt19937_64 rng(seed);
  const auto pi = permutation(n, rng);
  const auto rho = permutation(n, rng);
  const auto shifts = permutation(n, rng);
  std::vector<Triplet> entries;
  entries.reserve(n * d);
  for (std::size_t x = 0; x < d; ++x) {
    for (std::size_t i = 0; i < n; ++i) entries.push_back({pi[i], rho[(i + shifts[x]) % n], random_nonzero(rng, s)});
  }
  return SparseMatrix(n, n, std::move(entries));
}

SparseMatrix blockdiag(std::size_t n, std::size_t d, const SemiringSpec& s, std::uint64_t seed) {
  if (d == 0 || n % d != 0) throw std::invalid_argument("blockdiag: d must divide n");
  std::mt19937_64 rng(seed);
  std::vector<Triplet> entries;
  entries.reserve(n * d);
  for (std::size_t blk = 0; blk < n / d; ++blk) {
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) entries.push_back({blk * d + r, blk * d + c, random_nonzero(rng, s)});
    }
  }
  return SparseMatrix(n, n, std::move(entries));
}

Instance generate_instance(const ExperimentConfig& cfg) {
  cfg.validate();
  const SemiringSpec& s = semiring_by_name(cfg.semiring);
  Instance inst;
  const std::uint64_t sa = mix(cfg.seed, 1);
  const std::uint64_t sb = mix(cfg.seed, 2);
  if (cfg.instance == "file") {
    inst.a = read_matrix_file(cfg.a_file);
    inst.b = read_matrix_file(cfg.b_file);
  } else if (cfg.case_name == "square") {
    inst.a = random_dense(cfg.n, cfg.n, s, sa);
    inst.b = random_dense(cfg.n, cfg.n, s, sb);
  } else if (cfg.case_name == "ndn") {
    inst.a = random_dense(cfg.n, cfg.d, s, sa);
    inst.b = random_dense(cfg.d, cfg.n, s, sb);
  } else if (cfg.case_name == "dnd") {
    inst.a = random_dense(cfg.d, cfg.n, s, sa);
    inst.b = random_dense(cfg.n, cfg.d, s, sb);
  } else if (cfg.case_name == "tree-sum") {
    inst.a = random_dense(cfg.n, cfg.fan_in, s, sa);
    inst.b = DenseMatrix(0, 0, s.zero);
  } else if (cfg.instance == "blockdiag") {
    inst.a = blockdiag(cfg.n, cfg.d, s, sa);
    inst.b = blockdiag(cfg.n, cfg.d, s, sb);
  } else {
    inst.a = random_d_sparse(cfg.n, cfg.d, s, sa);
    inst.b = random_d_sparse(cfg.n, cfg.d, s, sb);
  }
  if (cfg.case_name == "sparse") {
    auto a = as_sparse(inst.a, s);
    auto b = as_sparse(inst.b, s);
    a.validate(s);
    b.validate(s);
    inst.mask = default_mask(a, b, cfg.d);
    inst.a = std::move(a);
    inst.b = std::move(b);
  }
  return inst;
}

namespace {

struct Prepared {
  Schedule schedule;
  DenseMatrix expected;
  nlohmann::json extra = nlohmann::json::object();
  std::optional<BoundReport> bound;
  std::size_t tree_floor = 0;
};

Prepared prepare(const ExperimentConfig& cfg, const Instance& inst, const SemiringSpec& s) {
  ScheduleOptions opt;
  opt.cap_factor = cfg.cap_factor;
  opt.execution = cfg.execution;
  Prepared out;
  if (cfg.case_name == "square") {
    const auto& a = dense(inst.a);
    const auto& b = dense(inst.b);
    SquareOptions so;
    static_cast<ScheduleOptions&>(so) = opt;
    out.schedule = schedule_square(ProblemShape{cfg.n, 0, cfg.alpha}, a, b, s, so);
    out.expected = naive_multiply(a, b, s);
    out.bound = bound_report("square", cfg.n, 0, cfg.alpha);
  } else if (cfg.case_name == "ndn") {
    const auto& a = dense(inst.a);
    const auto& b = dense(inst.b);
    out.schedule = schedule_ndn(cfg.n, cfg.d, a, b, s, opt);
    out.expected = naive_multiply(a, b, s);
    out.bound = bound_report("ndn", cfg.n, cfg.d, 0);
  } else if (cfg.case_name == "dnd") {
    const auto& a = dense(inst.a);
    const auto& b = dense(inst.b);
    out.schedule = cfg.procs == "n" ? schedule_dnd_nproc(cfg.n, cfg.d, a, b, s, opt)
                                    : schedule_dnd_dproc(cfg.n, cfg.d, a, b, s, opt);
    out.expected = naive_multiply(a, b, s);
    out.bound = bound_report(cfg.procs == "n" ? "dnd-n" : "dnd-d", cfg.n, cfg.d, 0);
    out.extra["procs"] = cfg.procs;
  } else if (cfg.case_name == "tree-sum") {
    const auto& a = dense(inst.a);
    std::vector<std::vector<Element>> addends;
    DenseMatrix sum(1, cfg.fan_in, s.zero);
    for (std::size_t l = 0; l < cfg.n; ++l) {
      auto row = a.row(l);
      addends.emplace_back(row.begin(), row.end());
      add_into(sum.data(), row, s);
    }
    out.schedule = schedule_tree_sum(SumTask{cfg.n, cfg.fan_in, cfg.fan_in}, addends, s, opt);
    out.expected = std::move(sum);
    out.tree_floor = ceil_log(std::max<std::size_t>(2, cfg.fan_in), cfg.n);
    out.extra["t"] = cfg.n;
    out.extra["k"] = cfg.fan_in;
    out.extra["log_k_t"] = out.tree_floor;
  } else {
    const auto& a = std::get<SparseMatrix>(inst.a);
    const auto& b = std::get<SparseMatrix>(inst.b);
    const auto& mask = *inst.mask;
    out.expected = apply_mask(naive_multiply(a, b, s), mask, s);
    out.extra["mode"] = cfg.mode;
    out.extra["instance"] = cfg.instance;
    out.extra["mask_positions"] = mask.size();
    if (cfg.mode == "trivial") {
      out.schedule = schedule_sparse_trivial(cfg.n, cfg.d, a, b, mask, s, opt);
    } else {
      EpsilonSchedule eps;
      eps.eps2 = cfg.eps;
      auto two = schedule_sparse_twophase(cfg.n, cfg.d, a, b, mask, s, eps, opt);
      const auto& dec = two.decomposition;
      out.schedule = std::move(two.schedule);
      out.extra["eps"] = cfg.eps;
      out.extra["fell_back"] = two.fell_back;
      out.extra["layers"] = dec.layers.size();
      out.extra["total_terms"] = dec.total_terms;
      out.extra["layer_terms"] = dec.layer_terms;
      out.extra["residual_terms"] = dec.residual.size();
      out.extra["layer_budget"] = dec.layer_budget;
      out.extra["residual_budget"] = dec.residual_budget;
      out.extra["layer_budget_met"] = dec.layer_budget_met;
      out.extra["residual_budget_met"] = dec.residual_budget_met;
      // Paired trivial run for comparison.
      auto trivial = schedule_sparse_trivial(cfg.n, cfg.d, a, b, mask, s, opt);
      try {
        out.extra["trivial_rounds"] = execute(trivial).run.transcript.round_count();
      } catch (const ModelViolation& e) {
        out.extra["trivial_rounds"] = nullptr;
        out.extra["trivial_violation"] = to_json(e.violation());
      }
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const SemiringSpec& s = semiring_by_name(cfg.semiring);
  ExperimentResult res;
  res.instance = generate_instance(cfg);
  Prepared prep = prepare(cfg, *res.instance, s);

  nlohmann::json& j = res.summary;
  j = nlohmann::json::object();
  j["case"] = cfg.case_name;
  j["schedule"] = prep.schedule.name;
  j["n"] = cfg.n;
  j["d"] = cfg.case_name == "square" || cfg.case_name == "tree-sum" ? 0 : cfg.d;
  j["alpha"] = cfg.case_name == "square" ? cfg.alpha : 0.0;
  j["semiring"] = std::string(s.name);
  j["seed"] = cfg.seed;
  j["cap_factor"] = cfg.cap_factor;
  j["processors"] = prep.schedule.config.processors;
  j["memory"] = prep.schedule.config.memory;
  j["predicted_rounds"] = prep.schedule.predicted_rounds;
  for (const auto& [key, value] : prep.extra.items()) j[key] = value;

  std::optional<Violation> violation;
  bool correct = false;
  try {
    auto run = execute(prep.schedule);
    res.transcript = std::move(run.run.transcript);
    correct = run.product == prep.expected;
    res.product = std::move(run.product);
  } catch (const ModelViolation& e) {
    violation = e.violation();
    res.transcript = e.transcript();
  }
  if (!violation) violation = find_violation(res.transcript, prep.schedule.config);

  const std::size_t rounds = res.transcript.round_count();
  j["rounds"] = rounds;
  j["correct"] = correct;
  j["transcript"] = transcript_summary(res.transcript, prep.schedule.config, violation);
  j["violation"] = violation ? to_json(*violation) : nlohmann::json(nullptr);

  bool bound_ok = true;
  if (prep.bound) {
    prep.bound->measured_rounds = rounds;
    bound_ok = violation.has_value() || prep.bound->sandwiched();
    j["bound"] = to_json(*prep.bound);
  } else if (cfg.case_name == "tree-sum") {
    bound_ok = violation.has_value() || rounds >= prep.tree_floor;
    j["bound"] = nullptr;
  } else {
    j["bound"] = nullptr;
  }
  j["bound_ok"] = bound_ok;
  res.ok = correct && !violation && bound_ok;
  j["ok"] = res.ok;
  return res;
}

std::string summary_text(const nlohmann::json& summary) { return summary.dump(2) + "\n"; }

void write_outputs(const std::string& dir, const ExperimentResult& result, bool with_matrices) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream os(fs::path(dir) / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    return os;
  };
  {
    auto os = open("summary.json");
    os << summary_text(result.summary);
  }
  {
    auto os = open("transcript.csv");
    write_transcript_csv(os, result.transcript);
  }
  if (with_matrices && result.instance) {
    auto put = [&](const char* name, const AnyMatrix& m) {
      auto os = open(name);
      std::visit(
          [&](const auto& x) {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, DenseMatrix>) {
              write_dense(os, x);
            } else {
              write_sparse(os, x);
            }
          },
          m);
    };
    put("a.txt", result.instance->a);
    put("b.txt", result.instance->b);
    if (result.product) {
      auto os = open("c.txt");
      write_dense(os, *result.product);
    }
  }
}

}  // namespace mpcmm
