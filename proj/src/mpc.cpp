#include "mpcmm/mpc.hpp"

#include <algorithm>
#include <exception>
#include <string>

namespace mpcmm {

void LocalStore::put(Tag tag, std::vector<Element> data, bool output) {
  slots_[tag] = Slot{std::move(data), output};
}

std::vector<Element>& LocalStore::at(Tag tag) {
  auto it = slots_.find(tag);
  if (it == slots_.end()) throw std::out_of_range("no slot with tag " + std::to_string(tag));
  return it->second.data;
}

const std::vector<Element>& LocalStore::at(Tag tag) const {
  auto it = slots_.find(tag);
  if (it == slots_.end()) throw std::out_of_range("no slot with tag " + std::to_string(tag));
  return it->second.data;
}

std::vector<Element> LocalStore::take(Tag tag) {
  auto it = slots_.find(tag);
  if (it == slots_.end()) throw std::out_of_range("no slot with tag " + std::to_string(tag));
  auto data = std::move(it->second.data);
  slots_.erase(it);
  return data;
}

void LocalStore::mark_output(Tag tag, bool output) {
  auto it = slots_.find(tag);
  if (it == slots_.end()) throw std::out_of_range("no slot with tag " + std::to_string(tag));
  it->second.output = output;
}

bool LocalStore::is_output(Tag tag) const {
  auto it = slots_.find(tag);
  return it != slots_.end() && it->second.output;
}

std::size_t LocalStore::words() const {
  std::size_t w = 0;
  for (const auto& [tag, slot] : slots_) w += slot.data.size();
  return w;
}

std::size_t LocalStore::output_words() const {
  std::size_t w = 0;
  for (const auto& [tag, slot] : slots_) {
    if (slot.output) w += slot.data.size();
  }
  return w;
}

void MpcConfig::validate() const {
  if (processors == 0) throw std::invalid_argument("MpcConfig: P must be >= 1");
  if (memory == 0) throw std::invalid_argument("MpcConfig: M must be >= 1");
  if (cap_factor == 0) throw std::invalid_argument("MpcConfig: cap_factor must be >= 1");
}

void Context::send(ProcessorId dst, Tag tag, std::vector<Element> payload) {
  if (dst >= processors_) {
    throw std::out_of_range("processor " + std::to_string(self_) + " addressed processor " +
                            std::to_string(dst) + " of " + std::to_string(processors_));
  }
  outbox_.push_back(Message{self_, dst, tag, std::move(payload)});
}

namespace {

std::string describe(const Violation& v) {
  return to_string(v.kind) + " at round " + std::to_string(v.round) + " on processor " +
         std::to_string(v.processor) + ": " + std::to_string(v.words) + " words > limit " +
         std::to_string(v.limit);
}

[[noreturn]] void raise(const Violation& v, Transcript partial) {
  switch (v.kind) {
    case ViolationKind::memory:
      throw MemoryExceeded(v, std::move(partial));
    case ViolationKind::bandwidth_sent:
    case ViolationKind::bandwidth_received:
      throw BandwidthExceeded(v, std::move(partial));
    case ViolationKind::non_termination:
      break;
  }
  throw NonTermination(v, std::move(partial));
}

std::size_t payload_words(const std::vector<Message>& msgs) {
  std::size_t w = 0;
  for (const auto& m : msgs) w += m.payload.size();
  return w;
}

void check_all(const std::vector<std::size_t>& words, std::size_t limit, ViolationKind kind,
               std::size_t round, const Transcript& t) {
  for (std::size_t p = 0; p < words.size(); ++p) {
    if (words[p] > limit) raise(Violation{kind, p, round, words[p], limit}, t);
  }
}

/// Runs f(p) for every processor, serially or under OpenMP, and rethrows the
/// exception of the lowest-numbered failing processor.
template <class F>
void for_each_processor(std::size_t count, Execution mode, F&& f) {
  if (mode == Execution::serial || count < 2) {
    for (std::size_t p = 0; p < count; ++p) f(p);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    const auto p = static_cast<std::size_t>(i);
    try {
      f(p);
    } catch (...) {
      errors[p] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

ModelViolation::ModelViolation(const Violation& v, Transcript partial)
    : std::runtime_error(describe(v)), violation_(v), transcript_(std::move(partial)) {}

RunResult run(const Program& program, const MpcConfig& config) {
  config.validate();
  const std::size_t P = config.processors;
  const std::size_t limit = config.budget();

  std::vector<LocalStore> states(P);
  for_each_processor(P, config.execution, [&](std::size_t p) { states[p] = program.init(p); });

  Transcript t;
  t.processors = P;
  // The initial states count toward barrier 1's memory figure, so a program
  // that starts too large fails there, after the bandwidth checks.
  std::vector<std::size_t> initial(P);
  for (std::size_t p = 0; p < P; ++p) initial[p] = states[p].words();

  std::vector<std::vector<Message>> inboxes(P);
  for (std::size_t round = 0;; ++round) {
    std::vector<std::vector<Message>> outboxes(P);
    std::vector<char> halted(P, 0);
    std::vector<std::size_t> end_memory(P, 0);

    for_each_processor(P, config.execution, [&](std::size_t p) {
      Context ctx(round, p, P, states[p], inboxes[p], outboxes[p]);
      program.step(ctx);
      halted[p] = ctx.halted() ? 1 : 0;
      end_memory[p] = states[p].words() + payload_words(outboxes[p]);
    });

    const bool quiet = std::all_of(outboxes.begin(), outboxes.end(),
                                   [](const auto& o) { return o.empty(); });
    const bool all_halted = std::all_of(halted.begin(), halted.end(), [](char h) { return h != 0; });
    if (round >= 1 && quiet && all_halted) {
      auto& last = t.rounds.back();
      for (std::size_t p = 0; p < P; ++p) last.peak_memory[p] = std::max(last.peak_memory[p], end_memory[p]);
      check_all(end_memory, limit, ViolationKind::memory, round, t);
      break;
    }
    if (round >= config.max_rounds) {
      raise(Violation{ViolationKind::non_termination, 0, round + 1, round + 1, config.max_rounds}, t);
    }

    // Barrier round + 1.
    const std::size_t barrier = round + 1;
    RoundLog log;
    log.words_sent.assign(P, 0);
    log.words_received.assign(P, 0);
    log.peak_memory = end_memory;
    if (barrier == 1) {
      for (std::size_t p = 0; p < P; ++p) log.peak_memory[p] = std::max(log.peak_memory[p], initial[p]);
    }
    for (std::size_t p = 0; p < P; ++p) {
      for (const auto& m : outboxes[p]) {
        log.words_sent[p] += m.payload.size();
        log.words_received[m.dst] += m.payload.size();
      }
    }
    t.rounds.push_back(log);
    check_all(log.words_sent, limit, ViolationKind::bandwidth_sent, barrier, t);
    check_all(log.words_received, limit, ViolationKind::bandwidth_received, barrier, t);
    check_all(log.peak_memory, limit, ViolationKind::memory, barrier, t);

    for (auto& inbox : inboxes) inbox.clear();
    for (std::size_t p = 0; p < P; ++p) {
      for (auto& m : outboxes[p]) inboxes[m.dst].push_back(std::move(m));
    }

    std::vector<std::size_t> after(P);
    for (std::size_t p = 0; p < P; ++p) {
      after[p] = states[p].words() + payload_words(inboxes[p]);
      t.rounds.back().peak_memory[p] = std::max(t.rounds.back().peak_memory[p], after[p]);
    }
    check_all(after, limit, ViolationKind::memory, barrier, t);
  }

  t.output_words.resize(P);
  for (std::size_t p = 0; p < P; ++p) t.output_words[p] = states[p].output_words();
  return RunResult{std::move(t), std::move(states)};
}

}  // namespace mpcmm
