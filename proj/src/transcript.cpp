#include "mpcmm/transcript.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mpcmm/mpc.hpp"

namespace mpcmm {

std::string to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::memory:
      return "MemoryExceeded";
    case ViolationKind::bandwidth_sent:
      return "BandwidthExceeded(sent)";
    case ViolationKind::bandwidth_received:
      return "BandwidthExceeded(received)";
    case ViolationKind::non_termination:
      return "NonTermination";
  }
  return "unknown";
}

namespace {
template <class Get>
std::size_t max_over(const Transcript& t, Get get) {
  std::size_t m = 0;
  for (const auto& r : t.rounds) {
    const auto& v = get(r);
    if (!v.empty()) m = std::max(m, *std::max_element(v.begin(), v.end()));
  }
  return m;
}
}  // namespace

std::size_t Transcript::max_words_sent() const {
  return max_over(*this, [](const RoundLog& r) -> const auto& { return r.words_sent; });
}
std::size_t Transcript::max_words_received() const {
  return max_over(*this, [](const RoundLog& r) -> const auto& { return r.words_received; });
}
std::size_t Transcript::max_peak_memory() const {
  return max_over(*this, [](const RoundLog& r) -> const auto& { return r.peak_memory; });
}
std::size_t Transcript::total_words_sent() const {
  std::size_t s = 0;
  for (const auto& r : rounds) {
    for (auto w : r.words_sent) s += w;
  }
  return s;
}

std::optional<Violation> find_violation(const Transcript& t, const MpcConfig& config) {
  const std::size_t limit = config.budget();
  for (std::size_t r = 0; r < t.rounds.size(); ++r) {
    const auto& log = t.rounds[r];
    const std::size_t round = r + 1;
    for (std::size_t p = 0; p < log.words_sent.size(); ++p) {
      if (log.words_sent[p] > limit) {
        return Violation{ViolationKind::bandwidth_sent, p, round, log.words_sent[p], limit};
      }
    }
    for (std::size_t p = 0; p < log.words_received.size(); ++p) {
      if (log.words_received[p] > limit) {
        return Violation{ViolationKind::bandwidth_received, p, round, log.words_received[p], limit};
      }
    }
    for (std::size_t p = 0; p < log.peak_memory.size(); ++p) {
      if (log.peak_memory[p] > limit) {
        return Violation{ViolationKind::memory, p, round, log.peak_memory[p], limit};
      }
    }
  }
  return std::nullopt;
}

bool assert_transcript(const Transcript& t, const MpcConfig& config) {
  return !find_violation(t, config).has_value();
}

void write_transcript_csv(std::ostream& os, const Transcript& t) {
  os << "round,processor,words_sent,words_received,peak_memory\n";
  for (std::size_t r = 0; r < t.rounds.size(); ++r) {
    const auto& log = t.rounds[r];
    for (std::size_t p = 0; p < t.processors; ++p) {
      os << r + 1 << ',' << p << ',' << log.words_sent[p] << ',' << log.words_received[p] << ','
         << log.peak_memory[p] << '\n';
    }
  }
}

Transcript read_transcript_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("round,processor", 0) != 0) {
    throw std::runtime_error("transcript CSV: missing header");
  }
  struct Row {
    std::size_t round, processor, sent, received, peak;
  };
  std::vector<Row> rows;
  std::size_t max_round = 0;
  std::size_t max_proc = 0;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Row row{};
    if (!(ls >> row.round >> row.processor >> row.sent >> row.received >> row.peak) || row.round == 0) {
      throw std::runtime_error("transcript CSV: malformed line " + std::to_string(line_no));
    }
    max_round = std::max(max_round, row.round);
    max_proc = std::max(max_proc, row.processor);
    rows.push_back(row);
  }
  Transcript t;
  t.processors = rows.empty() ? 0 : max_proc + 1;
  t.rounds.resize(max_round);
  for (auto& log : t.rounds) {
    log.words_sent.assign(t.processors, 0);
    log.words_received.assign(t.processors, 0);
    log.peak_memory.assign(t.processors, 0);
  }
  for (const auto& row : rows) {
    auto& log = t.rounds[row.round - 1];
    log.words_sent[row.processor] = row.sent;
    log.words_received[row.processor] = row.received;
    log.peak_memory[row.processor] = row.peak;
  }
  return t;
}

nlohmann::json to_json(const Violation& v) {
  return nlohmann::json{{"kind", to_string(v.kind)},
                        {"processor", v.processor},
                        {"round", v.round},
                        {"words", v.words},
                        {"limit", v.limit}};
}

nlohmann::json transcript_summary(const Transcript& t, const MpcConfig& config,
                                  const std::optional<Violation>& violation) {
  nlohmann::json j;
  j["rounds"] = t.round_count();
  j["processors"] = config.processors;
  j["memory"] = config.memory;
  j["cap_factor"] = config.cap_factor;
  j["budget"] = config.budget();
  j["max_words_sent"] = t.max_words_sent();
  j["max_words_received"] = t.max_words_received();
  j["max_peak_memory"] = t.max_peak_memory();
  j["total_words_sent"] = t.total_words_sent();
  j["violation"] = violation ? to_json(*violation) : nlohmann::json(nullptr);
  return j;
}

}  // namespace mpcmm
