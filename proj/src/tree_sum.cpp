#include "mpcmm/tree_sum.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mpcmm {

std::size_t ceil_log(std::size_t base, std::size_t x) {
  if (x <= 1) return 0;
  if (base < 2) throw std::invalid_argument("ceil_log: base must be >= 2");
  std::size_t r = 0;
  std::size_t reach = 1;
  while (reach < x) {
    reach = reach > x / base ? x : reach * base;
    ++r;
  }
  return r;
}

TreeSumPlan::TreeSumPlan(std::vector<ProcessorId> members, std::size_t width, std::size_t fan_in)
    : members_(std::move(members)), width_(width), fan_in_(fan_in) {
  const std::size_t t = members_.size();
  if (t == 0) throw std::invalid_argument("tree_sum: t must be >= 1");
  if (width_ == 0) throw std::invalid_argument("tree_sum: addend width must be >= 1");
  if (t > 1 && fan_in_ < 2) throw std::invalid_argument("tree_sum: k must be >= 2");
  for (std::size_t l = 0; l < t; ++l) {
    if (!index_.emplace(members_[l], l).second) {
      throw std::invalid_argument("tree_sum: duplicate member " + std::to_string(members_[l]));
    }
  }
  rounds_ = ceil_log(fan_in_, t);
  sends_.assign(rounds_ + 1, std::vector<std::vector<Send>>(t));
  reduces_.assign(rounds_ + 1, std::vector<std::vector<std::size_t>>(t));
  final_holder_.assign(width_, members_[0]);
  if (rounds_ == 0) return;

  const std::size_t k = fan_in_;
  const std::size_t groups = (t + k - 1) / k;
  for (std::size_t e = 0; e < width_; ++e) {
    // Level 1: leaf groups of k consecutive members, reducers spread round-robin.
    std::vector<ProcessorId> holders;
    for (std::size_t gi = 0; gi < groups; ++gi) {
      const ProcessorId reducer = members_[(e * groups + gi) % t];
      for (std::size_t l = gi * k; l < std::min(t, gi * k + k); ++l) {
        sends_[0][l].push_back({e, reducer});
      }
      reduces_[1][index_.at(reducer)].push_back(e);
      holders.push_back(reducer);
    }
    // Higher levels: reduce into the lowest-numbered holder of each k-group.
    for (std::size_t level = 1; level < rounds_; ++level) {
      std::vector<ProcessorId> next;
      for (std::size_t g0 = 0; g0 < holders.size(); g0 += k) {
        const auto end = std::min(holders.size(), g0 + k);
        const ProcessorId leader = *std::min_element(holders.begin() + static_cast<std::ptrdiff_t>(g0),
                                                     holders.begin() + static_cast<std::ptrdiff_t>(end));
        for (std::size_t h = g0; h < end; ++h) sends_[level][index_.at(holders[h])].push_back({e, leader});
        reduces_[level + 1][index_.at(leader)].push_back(e);
        next.push_back(leader);
      }
      holders = std::move(next);
    }
    if (holders.size() != 1) throw std::logic_error("tree_sum: reduction did not converge");
    final_holder_[e] = holders[0];
  }
}

void TreeSumPlan::step(Context& ctx, std::size_t s, Tag addend_tag, std::uint8_t message_kind,
                       std::uint8_t output_kind, const SemiringSpec& sr) const {
  auto it = index_.find(ctx.self());
  if (it == index_.end() || s > rounds_) return;
  const std::size_t me = it->second;
  auto& st = ctx.state();

  if (s == 0) {
    auto addend = st.take(addend_tag);
    if (addend.size() != width_) {
      throw std::logic_error("tree_sum: addend has " + std::to_string(addend.size()) + " words, expected " +
                             std::to_string(width_));
    }
    if (rounds_ == 0) {
      for (std::size_t e = 0; e < width_; ++e) st.put(make_tag(output_kind, e), {addend[e]}, true);
      return;
    }
    for (const auto& snd : sends_[0][me]) {
      ctx.send(snd.dst, make_tag(message_kind, snd.entry, 1), {addend[snd.entry]});
    }
    return;
  }

  const auto& mine = reduces_[s][me];
  if (mine.empty()) return;
  std::unordered_map<std::size_t, Element> acc;
  for (auto e : mine) acc.emplace(e, sr.zero);
  for (const auto& m : ctx.inbox()) {
    if (tag_kind(m.tag) != message_kind || tag_b(m.tag) != s) continue;
    auto a = acc.find(tag_a(m.tag));
    if (a == acc.end()) throw std::logic_error("tree_sum: unexpected partial sum");
    a->second = sr.add(a->second, m.payload.at(0));
  }
  if (s == rounds_) {
    for (auto e : mine) st.put(make_tag(output_kind, e), {acc.at(e)}, true);
    return;
  }
  for (const auto& snd : sends_[s][me]) {
    ctx.send(snd.dst, make_tag(message_kind, snd.entry, s + 1), {acc.at(snd.entry)});
  }
}

namespace {
enum : std::uint8_t { kAddend = 1, kPartial, kOut };
}

Schedule schedule_tree_sum(const SumTask& task, std::span<const std::vector<Element>> addends,
                           const SemiringSpec& s, const ScheduleOptions& options,
                           std::vector<ProcessorId> member_order) {
  if (task.t == 0 || task.k == 0) throw std::invalid_argument("tree_sum: t and k must be >= 1");
  const std::size_t width = task.width == 0 ? task.k : task.width;
  if (width > task.k) throw std::invalid_argument("tree_sum: addend wider than memory k");
  if (addends.size() != task.t) throw std::invalid_argument("tree_sum: need exactly t addends");
  for (const auto& a : addends) {
    if (a.size() != width) throw std::invalid_argument("tree_sum: addend width mismatch");
  }
  if (member_order.empty()) {
    member_order.resize(task.t);
    std::iota(member_order.begin(), member_order.end(), ProcessorId{0});
  }
  if (member_order.size() != task.t) throw std::invalid_argument("tree_sum: member order must list t processors");

  auto plan = std::make_shared<const TreeSumPlan>(member_order, width, task.k);
  // Processor p holds the addend of the member slot it occupies.
  std::vector<std::size_t> slot_of(task.t);
  for (std::size_t l = 0; l < task.t; ++l) {
    if (member_order[l] >= task.t) throw std::invalid_argument("tree_sum: member id out of range");
    slot_of[member_order[l]] = l;
  }
  auto data = std::make_shared<const std::vector<std::vector<Element>>>(addends.begin(), addends.end());

  Schedule sched;
  sched.name = "tree-sum";
  sched.config = detail::make_config(task.t, task.k, options, "tree_sum");
  sched.predicted_rounds = std::max<std::size_t>(plan->rounds(), 1);
  sched.program.init = [data, slot_of](ProcessorId p) {
    LocalStore st;
    st.put(make_tag(kAddend), (*data)[slot_of[p]]);
    return st;
  };
  sched.program.step = [plan, s](Context& ctx) {
    plan->step(ctx, ctx.round(), make_tag(kAddend), kPartial, kOut, s);
    if (ctx.round() >= std::max<std::size_t>(plan->rounds(), 1)) ctx.halt();
  };
  sched.assemble = [plan, width](std::span<const LocalStore> states) {
    DenseMatrix x(1, width, Element{0});
    for (std::size_t e = 0; e < width; ++e) x(0, e) = states[plan->final_holder(e)].at(make_tag(kOut, e)).at(0);
    return x;
  };
  return sched;
}

}  // namespace mpcmm
