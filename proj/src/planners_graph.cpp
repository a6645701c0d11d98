#include <algorithm>
#include <chrono>
#include <vector>

#include "eosched/planners.hpp"

namespace eosched {

namespace {

PlanEntry entry_for(const Collect& c) { return PlanEntry{c.id, c.image, c.t_start, c.t_end}; }

}  // namespace

TaskPlan plan_graph(std::span<const Collect> collects, std::span<const double> rewards,
                    const ConstraintSet& cs) {
  const auto t0 = std::chrono::steady_clock::now();
  TaskPlan plan;
  plan.planner = "graph";
  const std::size_t n = collects.size();
  if (n == 0) return plan;

  // Edges are evaluated on the fly; collects are in start order, so predecessors of j
  // are among 0..j-1.
  constexpr std::size_t kSource = static_cast<std::size_t>(-1);
  std::vector<double> value(n, 0.0);
  std::vector<std::size_t> pred(n, kSource);
  for (std::size_t j = 0; j < n; ++j) {
    const Collect& cj = collects[j];
    double best = 0.0;
    for (std::size_t i = 0; i < j; ++i) {
      if (value[i] <= best) continue;
      const Collect& ci = collects[i];
      if (ci.image == cj.image || !slew_feasible(ci, cj, cs.max_slew_rate)) continue;
      best = value[i];
      pred[j] = i;
    }
    value[j] = best + rewards[cj.image];
  }

  std::size_t tail = 0;
  for (std::size_t j = 1; j < n; ++j) {
    if (value[j] > value[tail]) tail = j;
  }
  plan.objective = value[tail];

  std::vector<std::size_t> path;
  for (std::size_t j = tail; j != kSource; j = pred[j]) path.push_back(j);
  std::reverse(path.begin(), path.end());

  // Splice repeated images (keep the earliest) and drop anything the splice made infeasible.
  std::vector<bool> seen(rewards.size(), false);
  const Collect* previous = nullptr;
  for (std::size_t j : path) {
    const Collect& c = collects[j];
    if (seen[c.image]) continue;
    if (previous && !slew_feasible(*previous, c, cs.max_slew_rate)) continue;
    seen[c.image] = true;
    plan.entries.push_back(entry_for(c));
    previous = &c;
  }
  plan.nominal_reward = plan_reward(plan, rewards);
  plan.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return plan;
}

}  // namespace eosched
