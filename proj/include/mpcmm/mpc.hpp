#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "mpcmm/semiring.hpp"
#include "mpcmm/transcript.hpp"

namespace mpcmm {

using ProcessorId = std::size_t;

/// Routing label attached to a message or a state slot. Tags are envelope
/// metadata and are never charged against memory or bandwidth.
using Tag = std::uint64_t;

/// Packs a kind byte and two 28-bit coordinates into a tag.
constexpr Tag make_tag(std::uint8_t kind, std::uint64_t a = 0, std::uint64_t b = 0) {
  return (Tag{kind} << 56) | ((a & 0xFFFFFFFu) << 28) | (b & 0xFFFFFFFu);
}
constexpr std::uint8_t tag_kind(Tag t) { return static_cast<std::uint8_t>(t >> 56); }
constexpr std::uint64_t tag_a(Tag t) { return (t >> 28) & 0xFFFFFFFu; }
constexpr std::uint64_t tag_b(Tag t) { return t & 0xFFFFFFFu; }

/// A processor's private memory: tagged word buffers. Its size in words is
/// what the engine charges against the memory budget.
class LocalStore {
 public:
  void put(Tag tag, std::vector<Element> data, bool output = false);
  bool contains(Tag tag) const { return slots_.contains(tag); }
  std::vector<Element>& at(Tag tag);
  const std::vector<Element>& at(Tag tag) const;
  /// Removes the slot and hands its words back.
  std::vector<Element> take(Tag tag);
  void erase(Tag tag) { slots_.erase(tag); }
  void mark_output(Tag tag, bool output = true);
  bool is_output(Tag tag) const;

  std::size_t words() const;
  std::size_t output_words() const;
  std::size_t slot_count() const { return slots_.size(); }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& [tag, slot] : slots_) f(tag, slot.data, slot.output);
  }

  bool operator==(const LocalStore&) const = default;

 private:
  struct Slot {
    std::vector<Element> data;
    bool output = false;
    bool operator==(const Slot&) const = default;
  };
  std::map<Tag, Slot> slots_;
};

struct Message {
  ProcessorId src = 0;
  ProcessorId dst = 0;
  Tag tag = 0;
  std::vector<Element> payload;
  bool operator==(const Message&) const = default;
};

enum class Execution { serial, parallel };

struct MpcConfig {
  std::size_t processors = 1;
  /// M, in words.
  std::size_t memory = 1;
  /// Per round a processor may send, receive and hold at most cap_factor * M words.
  std::size_t cap_factor = 4;
  /// Hard stop for runaway programs.
  std::size_t max_rounds = 100000;
  Execution execution = Execution::parallel;

  std::size_t budget() const { return cap_factor * memory; }
  void validate() const;
};

/// What a handler sees during one compute phase.
class Context {
 public:
  Context(std::size_t round, ProcessorId self, std::size_t processors, LocalStore& state,
          std::span<const Message> inbox, std::vector<Message>& outbox)
      : round_(round), self_(self), processors_(processors), state_(state), inbox_(inbox),
        outbox_(outbox) {}

  /// 0 for the setup phase, r for the phase that follows barrier r.
  std::size_t round() const { return round_; }
  ProcessorId self() const { return self_; }
  std::size_t processors() const { return processors_; }
  LocalStore& state() { return state_; }
  /// Messages delivered at the preceding barrier, ordered by (src, emission order).
  std::span<const Message> inbox() const { return inbox_; }

  void send(ProcessorId dst, Tag tag, std::vector<Element> payload);
  /// Votes to stop. The run ends after a phase in which every processor
  /// voted and nothing was sent.
  void halt() { halted_ = true; }
  bool halted() const { return halted_; }

 private:
  std::size_t round_;
  ProcessorId self_;
  std::size_t processors_;
  LocalStore& state_;
  std::span<const Message> inbox_;
  std::vector<Message>& outbox_;
  bool halted_ = false;
};

/// init loads a processor's input. step must be deterministic in
/// (round, state, inbox) and touch nothing but its own context; the engine
/// may call it for different processors concurrently.
struct Program {
  std::function<LocalStore(ProcessorId)> init;
  std::function<void(Context&)> step;
};

/// Base class for the three ways a run can be rejected by the model.
class ModelViolation : public std::runtime_error {
 public:
  ModelViolation(const Violation& v, Transcript partial);
  const Violation& violation() const { return violation_; }
  /// Rounds completed before the violation, plus the offending round.
  const Transcript& transcript() const { return transcript_; }

 private:
  Violation violation_;
  Transcript transcript_;
};

class MemoryExceeded : public ModelViolation {
 public:
  using ModelViolation::ModelViolation;
};

class BandwidthExceeded : public ModelViolation {
 public:
  using ModelViolation::ModelViolation;
  bool on_send() const { return violation().kind == ViolationKind::bandwidth_sent; }
};

class NonTermination : public ModelViolation {
 public:
  using ModelViolation::ModelViolation;
};

struct RunResult {
  Transcript transcript;
  std::vector<LocalStore> final_state;
};

/// Runs the program in synchronous rounds.
///
/// Phase 0 is local setup. Each later round is a barrier, at which all
/// messages of the previous phase are checked and delivered, followed by a
/// compute phase. The reported round count is the number of barriers, and
/// a run always executes at least one. Budgets are checked at every
/// barrier: sends, then receives, then memory (state + outbox before
/// delivery, state + inbox after; barrier 1 also covers the initial
/// states). The first failing check throws.
RunResult run(const Program& program, const MpcConfig& config);

}  // namespace mpcmm
