/**
 * @file planners.hpp
 * @brief Task planners: graph longest path, MILP branch-and-bound, MDP forward search.
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eosched/access.hpp"
#include "eosched/uncertainty.hpp"

namespace eosched {

inline constexpr int kMaxSearchDepth = 4;

struct PlanEntry {
  std::int64_t collect_id{};
  std::size_t image{};  // index into the target list
  Epoch t_start{};
  Epoch t_end{};
};

struct TaskPlan {
  std::string planner;
  std::vector<PlanEntry> entries;
  double nominal_reward{};  // sum of r_i over distinct planned images
  /// Planner-internal objective: longest-path value, MILP objective, or root search value.
  double objective{};
  double runtime_s{};
  bool optimal{true};
  std::size_t expansions{};  // forward-search nodes or branch-and-bound nodes
};

/// Independent plan checker. Returns human-readable violations; empty means valid.
[[nodiscard]] std::vector<std::string> check_plan(const TaskPlan& plan, std::span<const Collect> collects,
                                                  double max_slew_rate);

/// Sum of rewards over the distinct images of a plan.
[[nodiscard]] double plan_reward(const TaskPlan& plan, std::span<const double> rewards);

// ---------------------------------------------------------------------------------------------
// Graph

/// Longest weighted path over the slew-feasibility DAG. Later repeats of an image are spliced
/// out; `objective` keeps the path value before splicing.
[[nodiscard]] TaskPlan plan_graph(std::span<const Collect> collects, std::span<const double> rewards,
                                  const ConstraintSet& cs);

// ---------------------------------------------------------------------------------------------
// MILP

struct MilpModel {
  std::vector<double> objective;                       // per collect
  std::vector<std::vector<std::size_t>> image_rows;    // at-most-one rows, one per image with collects
  std::vector<std::pair<std::size_t, std::size_t>> exclusions;  // c_k + c_l <= 1, k < l

  /// CPLEX LP text format, variables named c<collect id>.
  [[nodiscard]] std::string to_lp(std::span<const Collect> collects) const;
};

[[nodiscard]] MilpModel build_milp(std::span<const Collect> collects, std::span<const double> rewards,
                                   const ConstraintSet& cs);

struct MilpOptions {
  double time_limit_s{600.0};    // <= 0 returns the greedy incumbent
  std::size_t node_limit{5'000'000};
};

[[nodiscard]] TaskPlan plan_milp(std::span<const Collect> collects, std::span<const double> rewards,
                                 const ConstraintSet& cs, const MilpOptions& options = {});

// ---------------------------------------------------------------------------------------------
// MDP forward search

/// R(s) = sum_i r_i * (b_i ? +1 : -1).
[[nodiscard]] double state_reward(const MdpState& s, std::span<const double> rewards);

struct SearchResult {
  Action action;
  double value{};
};

struct MdpOptions {
  int depth{2};        // actions of lookahead per decision, 1..kMaxSearchDepth
  double gamma{1.0};   // weight on successor values
  std::optional<Epoch> start;  // default: just before the first collect
  std::optional<Epoch> end;    // default: the last collect start
};

class ForwardSearch {
 public:
  /// Every collect reachable during the search must have an entry in `probs`.
  ForwardSearch(std::span<const Collect> collects, std::span<const double> rewards, ConstraintSet cs,
                const CollectProbabilityTable& probs, double gamma = 1.0, std::optional<Epoch> end = {});

  /// Recursive expectimax over success/failure outcomes. depth 0 returns (NIL, 0).
  [[nodiscard]] SearchResult select_action(const MdpState& s, int depth);

  /// Outcome of executing `a` from `s`. NIL waits until the next collect beyond the
  /// horizon becomes available, or jumps to the end when there is none.
  [[nodiscard]] MdpState transition(const MdpState& s, const Action& a, bool success) const;

  /// True when some collect starts after s.time + h.
  [[nodiscard]] bool has_collect_beyond_horizon(const MdpState& s) const;

  [[nodiscard]] MdpState initial_state(Epoch time) const;
  [[nodiscard]] std::vector<Action> actions(const MdpState& s) const;
  [[nodiscard]] double probability(std::size_t collect) const;
  [[nodiscard]] std::size_t expansions() const { return expansions_; }
  [[nodiscard]] Epoch end() const { return end_; }

 private:
  // `r` is R(s), carried down the recursion instead of recomputed per node.
  SearchResult search(const MdpState& s, int depth, double r);
  [[nodiscard]] double child_reward(const MdpState& s, const Action& a, bool success, double r) const;

  std::span<const Collect> collects_;
  std::span<const double> rewards_;
  ConstraintSet cs_;
  std::vector<double> prob_;  // NaN when missing
  double gamma_;
  Epoch end_;
  std::size_t expansions_{0};
};

/// Static plan: repeated select_action with the chosen collect assumed successful.
[[nodiscard]] TaskPlan plan_mdp_forward_search(std::span<const Collect> collects, std::span<const double> rewards,
                                               const ConstraintSet& cs, const CollectProbabilityTable& probs,
                                               const MdpOptions& options = {});

}  // namespace eosched
