#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mpcmm {

struct MpcConfig;

enum class ViolationKind { memory, bandwidth_sent, bandwidth_received, non_termination };

std::string to_string(ViolationKind k);

struct Violation {
  ViolationKind kind = ViolationKind::memory;
  std::size_t processor = 0;
  std::size_t round = 0;
  std::size_t words = 0;
  std::size_t limit = 0;
  bool operator==(const Violation&) const = default;
};

/// Communication and memory observed at one barrier.
/// Round r covers the barrier that delivers the messages emitted by compute
/// phase r-1 and the memory held on either side of it.
struct RoundLog {
  std::vector<std::size_t> words_sent;
  std::vector<std::size_t> words_received;
  std::vector<std::size_t> peak_memory;
  bool operator==(const RoundLog&) const = default;
};

struct Transcript {
  std::size_t processors = 0;
  std::vector<RoundLog> rounds;
  /// Words in slots marked as output when the run halted (empty if unknown).
  std::vector<std::size_t> output_words;

  std::size_t round_count() const { return rounds.size(); }
  std::size_t max_words_sent() const;
  std::size_t max_words_received() const;
  std::size_t max_peak_memory() const;
  std::size_t total_words_sent() const;

  bool operator==(const Transcript&) const = default;
};

/// First (round, processor) where a budget inequality fails, if any.
std::optional<Violation> find_violation(const Transcript& t, const MpcConfig& config);

/// True iff every sent, received and peak-memory figure is within cap_factor * M.
bool assert_transcript(const Transcript& t, const MpcConfig& config);

/// CSV: round,processor,words_sent,words_received,peak_memory (rounds are 1-based).
void write_transcript_csv(std::ostream& os, const Transcript& t);
Transcript read_transcript_csv(std::istream& is);

/// Summary record: rounds, maxima, budget limits and the violation if any.
nlohmann::json transcript_summary(const Transcript& t, const MpcConfig& config,
                                  const std::optional<Violation>& violation);
nlohmann::json to_json(const Violation& v);

}  // namespace mpcmm
