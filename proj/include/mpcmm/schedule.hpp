#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "mpcmm/matrix.hpp"
#include "mpcmm/mpc.hpp"

namespace mpcmm {

/// Knobs shared by every scheduler.
struct ScheduleOptions {
  std::size_t cap_factor = 4;
  /// Overrides the scheduler's M. Values below its minimum are rejected.
  std::optional<std::size_t> memory;
  Execution execution = Execution::parallel;
};

/// A ready-to-run MPC program together with the machine it was built for and
/// the rule that reads the product back out of the final processor states.
struct Schedule {
  std::string name;
  Program program;
  MpcConfig config;
  /// Exact barrier count the program will execute.
  std::size_t predicted_rounds = 0;
  std::function<DenseMatrix(std::span<const LocalStore>)> assemble;
};

struct ScheduleRun {
  RunResult run;
  DenseMatrix product;
};

/// Runs the program on its config and assembles the output.
ScheduleRun execute(const Schedule& schedule);

namespace detail {
/// Applies cap_factor, execution mode and an optional memory override.
MpcConfig make_config(std::size_t processors, std::size_t min_memory, const ScheduleOptions& opt,
                      const char* who);
}  // namespace detail

}  // namespace mpcmm
