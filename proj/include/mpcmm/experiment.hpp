#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "mpcmm/matrix_io.hpp"
#include "mpcmm/mpc.hpp"
#include "mpcmm/sparse.hpp"
#include "mpcmm/transcript.hpp"

namespace mpcmm {

struct ExperimentConfig {
  std::string case_name = "square";  // square | ndn | dnd | sparse | tree-sum
  std::size_t n = 16;
  std::size_t d = 4;
  double alpha = 1.0;
  std::string semiring = "int";
  std::uint64_t seed = 1;
  double eps = 0.1;
  std::size_t cap_factor = 4;
  std::string procs = "n";         // dnd: n | d
  std::string mode = "trivial";    // sparse: trivial | twophase
  std::string instance = "random"; // random | blockdiag | file
  std::string a_file;
  std::string b_file;
  std::size_t fan_in = 4;          // tree-sum: k; t = n
  Execution execution = Execution::parallel;

  /// Throws std::invalid_argument on unknown names or inconsistent sizes.
  void validate() const;
};

struct Instance {
  AnyMatrix a;
  AnyMatrix b;
  std::optional<OutputMask> mask;
};

/// Seeded instance for the configured case. Dense for square/ndn/dnd and
/// tree-sum (whose A holds the n addends as rows), d-sparse for sparse.
Instance generate_instance(const ExperimentConfig& config);

/// Uniform seeded generators; the same seed gives the same matrix everywhere.
DenseMatrix random_dense(std::size_t rows, std::size_t cols, const SemiringSpec& s, std::uint64_t seed);
/// Union of d shifted permutation matrices: exactly d entries per row and column.
SparseMatrix random_d_sparse(std::size_t n, std::size_t d, const SemiringSpec& s, std::uint64_t seed);
/// n/d dense d x d blocks on the diagonal. Throws unless d divides n.
SparseMatrix blockdiag(std::size_t n, std::size_t d, const SemiringSpec& s, std::uint64_t seed);

struct ExperimentResult {
  nlohmann::json summary;
  Transcript transcript;
  std::optional<Instance> instance;
  std::optional<DenseMatrix> product;
  bool ok = false;
};

/// Builds, runs and verifies one schedule. Model violations are reported in
/// the summary (ok = false) rather than thrown.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes summary.json and transcript.csv, plus a.txt, b.txt and c.txt when
/// with_matrices is set, creating the directory if needed.
void write_outputs(const std::string& dir, const ExperimentResult& result, bool with_matrices = false);

/// Canonical text of a summary: sorted keys, two-space indent, trailing newline.
std::string summary_text(const nlohmann::json& summary);

}  // namespace mpcmm
