#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "eosched/planners.hpp"

namespace eosched {

std::vector<std::string> check_plan(const TaskPlan& plan, std::span<const Collect> collects,
                                    double max_slew_rate) {
  std::unordered_map<std::int64_t, const Collect*> by_id;
  for (const auto& c : collects) by_id.emplace(c.id, &c);

  std::vector<std::string> problems;
  std::set<std::size_t> images;
  const Collect* previous = nullptr;
  for (std::size_t k = 0; k < plan.entries.size(); ++k) {
    const PlanEntry& e = plan.entries[k];
    const auto it = by_id.find(e.collect_id);
    if (it == by_id.end()) {
      problems.push_back(fmt::format("entry {}: unknown collect {}", k, e.collect_id));
      previous = nullptr;
      continue;
    }
    const Collect& c = *it->second;
    if (c.image != e.image || c.t_start != e.t_start || c.t_end != e.t_end) {
      problems.push_back(fmt::format("entry {}: does not match collect {}", k, e.collect_id));
    }
    if (!images.insert(c.image).second) {
      problems.push_back(fmt::format("entry {}: image {} planned twice", k, c.image));
    }
    if (previous) {
      if (!(c.t_start > previous->t_start)) {
        problems.push_back(fmt::format("entry {}: not after the previous entry", k));
      }
      if (!slew_feasible(*previous, c, max_slew_rate)) {
        problems.push_back(fmt::format("entry {}: slew from collect {} infeasible", k, previous->id));
      }
    }
    previous = &c;
  }
  return problems;
}

double plan_reward(const TaskPlan& plan, std::span<const double> rewards) {
  std::set<std::size_t> images;
  double total = 0.0;
  for (const auto& e : plan.entries) {
    if (images.insert(e.image).second) total += rewards[e.image];
  }
  return total;
}

}  // namespace eosched
