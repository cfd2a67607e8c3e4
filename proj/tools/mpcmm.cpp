// mpcmm: run, bound, verify and time MPC matrix-multiplication schedules.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mpcmm/bounds.hpp"
#include "mpcmm/experiment.hpp"

using namespace mpcmm;

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("MPCMM_OUT_DIR");
  return env != nullptr && *env != '\0' ? env : "mpcmm-out";
}

void add_experiment_flags(CLI::App* app, ExperimentConfig& cfg, std::string& mode_flag) {
  app->add_option("--n", cfg.n, "Matrix side (t for tree-sum)")->capture_default_str();
  app->add_option("--d", cfg.d, "Short side or sparsity")->capture_default_str();
  app->add_option("--alpha", cfg.alpha, "Square case: n^alpha processors")->capture_default_str();
  app->add_option("--semiring", cfg.semiring, "int | bool | tropical")->capture_default_str();
  app->add_option("--seed", cfg.seed, "Instance seed")->capture_default_str();
  app->add_option("--cap-factor", cfg.cap_factor, "Per-round budget multiple of M")->capture_default_str();
  app->add_option("--procs", cfg.procs, "dnd: n | d")->capture_default_str();
  app->add_option("--eps", cfg.eps, "sparse twophase: eps")->capture_default_str();
  app->add_option("--mode", mode_flag, "sparse: trivial | twophase")->capture_default_str();
  app->add_option("--instance", cfg.instance, "random | blockdiag | file")->capture_default_str();
  app->add_option("--a-file", cfg.a_file, "Matrix A for --instance file");
  app->add_option("--b-file", cfg.b_file, "Matrix B for --instance file");
  app->add_option("--k", cfg.fan_in, "tree-sum: memory and addend width")->capture_default_str();
}

int cmd_run(ExperimentConfig cfg, const std::string& out_dir, bool matrices, bool quiet) {
  auto res = run_experiment(cfg);
  write_outputs(out_dir, res, matrices);
  if (!quiet) std::cout << summary_text(res.summary);
  return res.ok ? 0 : 1;
}

int cmd_bounds(const std::string& kase, std::size_t n, std::size_t d, double alpha) {
  std::cout << to_json(bound_report(kase, n, d, alpha)).dump(2) << "\n";
  return 0;
}

int cmd_verify(const std::string& path, std::size_t memory, std::size_t cap_factor) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  const Transcript t = read_transcript_csv(is);
  MpcConfig config;
  config.processors = std::max<std::size_t>(1, t.processors);
  config.memory = memory;
  config.cap_factor = cap_factor;
  const auto v = find_violation(t, config);
  std::cout << transcript_summary(t, config, v).dump(2) << "\n";
  return v ? 1 : 0;
}

int cmd_bench(ExperimentConfig cfg, int repeats) {
  using clock = std::chrono::steady_clock;
  nlohmann::json out = nlohmann::json::object();
  Transcript reference;
  bool same = true;
  bool ok = true;
  for (auto mode : {Execution::serial, Execution::parallel}) {
    cfg.execution = mode;
    double best = 0;
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = clock::now();
      auto res = run_experiment(cfg);
      const double secs = std::chrono::duration<double>(clock::now() - t0).count();
      best = r == 0 ? secs : std::min(best, secs);
      ok = ok && res.ok;
      if (mode == Execution::serial && r == 0) {
        reference = res.transcript;
      } else {
        same = same && res.transcript == reference;
      }
    }
    out[mode == Execution::serial ? "serial_seconds" : "parallel_seconds"] = best;
  }
  out["identical_transcripts"] = same;
  out["ok"] = ok;
  out["case"] = cfg.case_name;
  out["n"] = cfg.n;
  out["d"] = cfg.d;
  std::cout << out.dump(2) << "\n";
  return same && ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MPC model simulator for semiring matrix multiplication"};
  app.require_subcommand(1);

  ExperimentConfig run_cfg;
  std::string run_case = "square";
  std::string run_mode = "trivial";
  std::string out_dir = default_out_dir();
  bool matrices = false;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run one schedule, verify it and write summary.json and transcript.csv");
  run->add_option("case", run_case, "square | ndn | dnd | sparse | tree-sum")->required();
  add_experiment_flags(run, run_cfg, run_mode);
  run->add_option("--out-dir", out_dir, "Output directory (default: $MPCMM_OUT_DIR or mpcmm-out)");
  run->add_flag("--matrices", matrices, "Also write a.txt, b.txt and c.txt");
  run->add_flag("--quiet", quiet, "Do not print the summary");

  std::string bound_case = "square";
  std::size_t bn = 16;
  std::size_t bd = 4;
  double balpha = 1.0;
  auto* bounds = app.add_subcommand("bounds", "Print the lower bound for a case as JSON");
  bounds->add_option("--case", bound_case, "square | ndn | dnd-n | dnd-d")->required();
  bounds->add_option("--n", bn)->capture_default_str();
  bounds->add_option("--d", bd)->capture_default_str();
  bounds->add_option("--alpha", balpha)->capture_default_str();

  std::string transcript_path;
  std::size_t vmemory = 0;
  std::size_t vcap = 4;
  auto* verify = app.add_subcommand("verify", "Check a transcript CSV against the per-round budgets");
  verify->add_option("--transcript", transcript_path, "transcript.csv")->required();
  verify->add_option("--memory", vmemory, "M in words")->required();
  verify->add_option("--cap-factor", vcap)->capture_default_str();

  ExperimentConfig bench_cfg;
  std::string bench_case = "square";
  std::string bench_mode = "trivial";
  int repeats = 3;
  auto* bench = app.add_subcommand("bench", "Time serial against parallel execution of one schedule");
  bench->add_option("case", bench_case, "square | ndn | dnd | sparse | tree-sum")->required();
  add_experiment_flags(bench, bench_cfg, bench_mode);
  bench->add_option("--repeats", repeats)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      run_cfg.case_name = run_case;
      run_cfg.mode = run_mode;
      return cmd_run(run_cfg, out_dir, matrices, quiet);
    }
    if (*bounds) return cmd_bounds(bound_case, bn, bd, balpha);
    if (*verify) return cmd_verify(transcript_path, vmemory, vcap);
    if (*bench) {
      bench_cfg.case_name = bench_case;
      bench_cfg.mode = bench_mode;
      return cmd_bench(bench_cfg, std::max(1, repeats));
    }
  } catch (const std::exception& e) {
    std::cerr << "mpcmm: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
