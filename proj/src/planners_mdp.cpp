#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "eosched/planners.hpp"

namespace eosched {

namespace {

// Collects become available strictly after the state time; waiting stops this far short of
// the target collect.
constexpr double kWaitMargin = 1e-6;  // s

}  // namespace

double state_reward(const MdpState& s, std::span<const double> rewards) {
  double total = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    const bool collected = i < s.collected.size() && s.collected[i];
    total += collected ? rewards[i] : -rewards[i];
  }
  return total;
}

ForwardSearch::ForwardSearch(std::span<const Collect> collects, std::span<const double> rewards, ConstraintSet cs,
                             const CollectProbabilityTable& probs, double gamma, std::optional<Epoch> end)
    : collects_(collects), rewards_(rewards), cs_(std::move(cs)), gamma_(gamma) {
  if (!(cs_.horizon > 0.0)) throw std::invalid_argument("planning lookahead must be positive");
  if (!(cs_.max_slew_rate > 0.0)) throw std::invalid_argument("slew rate must be positive");
  prob_.reserve(collects.size());
  for (const auto& c : collects) {
    const auto p = probs.find(c.id);
    prob_.push_back(p ? *p : std::numeric_limits<double>::quiet_NaN());
  }
  if (end) {
    end_ = *end;
  } else {
    end_ = collects.empty() ? Epoch{} : collects.back().t_start;
  }
}

MdpState ForwardSearch::initial_state(Epoch time) const {
  MdpState s;
  s.time = time;
  s.collected.assign(rewards_.size(), false);
  return s;
}

std::vector<Action> ForwardSearch::actions(const MdpState& s) const {
  if (s.time >= end_) return {Action{}};
  return action_space(s, collects_, cs_);
}

double ForwardSearch::probability(std::size_t collect) const {
  const double p = prob_.at(collect);
  if (std::isnan(p)) {
    throw std::invalid_argument(fmt::format("no probability for reachable collect {}", collects_[collect].id));
  }
  return p;
}

bool ForwardSearch::has_collect_beyond_horizon(const MdpState& s) const {
  return !collects_.empty() && collects_.back().t_start > s.time + cs_.horizon && s.time < end_;
}

MdpState ForwardSearch::transition(const MdpState& s, const Action& a, bool success) const {
  MdpState next = s;
  if (a.is_nil()) {
    const Epoch limit = s.time + cs_.horizon;
    auto it = std::upper_bound(collects_.begin(), collects_.end(), limit,
                               [](const Epoch& t, const Collect& c) { return t < c.t_start; });
    if (it == collects_.end() || s.time >= end_) {
      next.time = std::max(end_, s.time);
    } else {
      next.time = std::max(s.time, it->t_start - kWaitMargin);
    }
    return next;
  }
  const Collect& c = collects_[a.collect];
  next.time = c.t_end;
  next.last_collect = a.collect;
  if (success && c.image < next.collected.size()) next.collected[c.image] = true;
  return next;
}

SearchResult ForwardSearch::select_action(const MdpState& s, int depth) {
  if (depth < 0) throw std::invalid_argument("search depth must be non-negative");
  return search(s, depth, state_reward(s, rewards_));
}

double ForwardSearch::child_reward(const MdpState& s, const Action& a, bool success, double r) const {
  if (a.is_nil() || !success) return r;
  const std::size_t image = collects_[a.collect].image;
  const bool fresh = image < s.collected.size() && !s.collected[image];
  return fresh ? r + 2.0 * rewards_[image] : r;
}

SearchResult ForwardSearch::search(const MdpState& s, int depth, double r) {
  ++expansions_;
  if (depth == 0) return {Action{}, 0.0};
  // With no lookahead left every action scores R(s), and NIL (listed first) wins the tie.
  if (depth == 1) return {Action{}, r};

  // One level above the leaves the successor value is its reward; no state is built.
  auto value_of = [&](const Action& a, bool success) {
    const double child = child_reward(s, a, success, r);
    if (depth == 2) {
      ++expansions_;
      return child;
    }
    return search(transition(s, a, success), depth - 1, child).value;
  };

  SearchResult best{Action{}, -std::numeric_limits<double>::infinity()};
  for (const Action& a : actions(s)) {
    double v = r;
    if (a.is_nil()) {
      v += gamma_ * value_of(a, true);
    } else {
      const double p = probability(a.collect);
      if (p > 0.0) v += gamma_ * p * value_of(a, true);
      if (p < 1.0) v += gamma_ * (1.0 - p) * value_of(a, false);
    }
    if (v > best.value) best = {a, v};
  }
  return best;
}

TaskPlan plan_mdp_forward_search(std::span<const Collect> collects, std::span<const double> rewards,
                                 const ConstraintSet& cs, const CollectProbabilityTable& probs,
                                 const MdpOptions& options) {
  if (options.depth < 1) throw std::invalid_argument("forward search depth must be at least 1");
  const auto t0 = std::chrono::steady_clock::now();
  TaskPlan plan;
  plan.planner = "mdp";
  if (collects.empty()) return plan;

  ForwardSearch search(collects, rewards, cs, probs, options.gamma, options.end);
  MdpState s = search.initial_state(options.start ? *options.start : collects.front().t_start - kWaitMargin);
  bool first = true;
  while (s.time < search.end()) {
    // Lookahead of `depth` actions means one more level of recursion, whose leaves score 0.
    const SearchResult result = search.select_action(s, options.depth + 1);
    if (first) {
      plan.objective = result.value;
      first = false;
    }
    if (result.action.is_nil()) {
      if (!search.has_collect_beyond_horizon(s)) break;
      s = search.transition(s, result.action, true);
      continue;
    }
    const Collect& c = collects[result.action.collect];
    plan.entries.push_back(PlanEntry{c.id, c.image, c.t_start, c.t_end});
    s = search.transition(s, result.action, true);
  }
  plan.expansions = search.expansions();
  plan.nominal_reward = plan_reward(plan, rewards);
  plan.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return plan;
}

}  // namespace eosched
