#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "mpcmm/schedule.hpp"

namespace mpcmm {

/// t addends of `width` words, one per processor, each processor with
/// memory k. width defaults to k (a sqrt(k) x sqrt(k) matrix).
struct SumTask {
  std::size_t t = 1;
  std::size_t k = 2;
  std::size_t width = 0;
};

/// ceil(log_k t), computed exactly; 0 for t <= 1.
std::size_t ceil_log(std::size_t base, std::size_t x);

/// Static communication plan for summing one addend per member.
///
/// Every entry of the result has its own reduction tree of fan-in k. The
/// first level spreads the width * ceil(t/k) leaf groups round-robin over
/// all members, so no processor receives more than 2k words; later levels
/// reduce into the lowest-numbered holder of each k-group. The plan is
/// data-independent and finishes in ceil(log_k t) barriers.
class TreeSumPlan {
 public:
  TreeSumPlan(std::vector<ProcessorId> members, std::size_t width, std::size_t fan_in);

  std::size_t rounds() const { return rounds_; }
  std::size_t width() const { return width_; }
  std::span<const ProcessorId> members() const { return members_; }
  bool is_member(ProcessorId p) const { return index_.contains(p); }

  /// Where entry e of the sum lives after the final step.
  ProcessorId final_holder(std::size_t e) const { return final_holder_[e]; }

  /// Executes fragment step s in [0, rounds()] on the calling processor.
  /// Step 0 consumes the addend slot; the last step stores entry e of the
  /// sum in slot make_tag(output_kind, e), marked as output. Messages use
  /// make_tag(message_kind, e, level).
  void step(Context& ctx, std::size_t s, Tag addend_tag, std::uint8_t message_kind,
            std::uint8_t output_kind, const SemiringSpec& sr) const;

 private:
  struct Send {
    std::size_t entry;
    ProcessorId dst;
  };
  std::vector<ProcessorId> members_;
  std::unordered_map<ProcessorId, std::size_t> index_;
  std::size_t width_ = 0;
  std::size_t fan_in_ = 2;
  std::size_t rounds_ = 0;
  // [level][member index]
  std::vector<std::vector<std::vector<Send>>> sends_;
  std::vector<std::vector<std::vector<std::size_t>>> reduces_;
  std::vector<ProcessorId> final_holder_;
};

/// Standalone program: member_order[l] holds addends[l]. Empty member_order
/// means the identity. The result is returned as a 1 x width matrix.
/// Throws std::invalid_argument if t or k is zero, k < 2 while t > 1, or
/// width > k.
Schedule schedule_tree_sum(const SumTask& task, std::span<const std::vector<Element>> addends,
                           const SemiringSpec& s, const ScheduleOptions& options = {},
                           std::vector<ProcessorId> member_order = {});

}  // namespace mpcmm
