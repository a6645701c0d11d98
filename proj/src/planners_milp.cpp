#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "eosched/planners.hpp"

namespace eosched {

MilpModel build_milp(std::span<const Collect> collects, std::span<const double> rewards,
                     const ConstraintSet& cs) {
  MilpModel model;
  model.objective.reserve(collects.size());
  std::vector<std::vector<std::size_t>> rows(rewards.size());
  for (std::size_t k = 0; k < collects.size(); ++k) {
    model.objective.push_back(rewards[collects[k].image]);
    rows[collects[k].image].push_back(k);
  }
  for (auto& row : rows) {
    if (!row.empty()) model.image_rows.push_back(std::move(row));
  }

  // Beyond this gap every reorientation is feasible, so later collects cannot conflict.
  const double free_gap = constants::kPi / cs.max_slew_rate;
  for (std::size_t k = 0; k < collects.size(); ++k) {
    const Collect& a = collects[k];
    for (std::size_t l = k + 1; l < collects.size(); ++l) {
      const Collect& b = collects[l];
      if (b.t_start - a.t_end >= free_gap) break;
      if (a.image == b.image) continue;
      if (!slew_feasible(a, b, cs.max_slew_rate) && !slew_feasible(b, a, cs.max_slew_rate)) {
        model.exclusions.emplace_back(k, l);
      }
    }
  }
  return model;
}

std::string MilpModel::to_lp(std::span<const Collect> collects) const {
  std::ostringstream out;
  auto name = [&](std::size_t k) { return fmt::format("c{}", collects[k].id); };
  out << "\\ Collect selection\nMaximize\n obj:";
  for (std::size_t k = 0; k < objective.size(); ++k) {
    out << (k ? " + " : " ") << fmt::format("{:.17g}", objective[k]) << ' ' << name(k);
  }
  out << "\nSubject To\n";
  std::size_t row_id = 0;
  for (const auto& row : image_rows) {
    out << " img" << row_id++ << ':';
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " + " : " ") << name(row[i]);
    out << " <= 1\n";
  }
  std::size_t ex_id = 0;
  for (const auto& [k, l] : exclusions) {
    out << " ex" << ex_id++ << ": " << name(k) << " + " << name(l) << " <= 1\n";
  }
  out << "Binary\n";
  for (std::size_t k = 0; k < objective.size(); ++k) out << ' ' << name(k) << '\n';
  out << "End\n";
  return out.str();
}

namespace {

struct Node {
  double bound;
  std::size_t depth;  // position in the branching order
  std::uint64_t seq;  // creation order, for deterministic ties
  std::vector<std::size_t> selected;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.seq > b.seq;
  }
};

using OpenList = std::priority_queue<Node, std::vector<Node>, NodeOrder>;

// Branch-and-bound over one connected component of the image conflict graph. Variables are
// local indices 0..n-1 mapped to `vars` in the full model.
class BranchAndBound {
 public:
  BranchAndBound(std::span<const Collect> collects, const MilpModel& model, const std::vector<std::size_t>& vars,
                 const std::vector<std::vector<std::size_t>>& neighbours)
      : vars_(vars) {
    const std::size_t n = vars.size();
    std::unordered_map<std::size_t, std::size_t> local;
    for (std::size_t i = 0; i < n; ++i) local.emplace(vars[i], i);

    std::unordered_map<std::size_t, std::size_t> image_index;
    image_.resize(n);
    value_.resize(n);
    neighbours_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Collect& c = collects[vars[i]];
      image_[i] = image_index.try_emplace(c.image, image_index.size()).first->second;
      value_[i] = model.objective[vars[i]];
      for (std::size_t g : neighbours[vars[i]]) neighbours_[i].push_back(local.at(g));
    }
    image_count_ = image_index.size();
    image_reward_.assign(image_count_, 0.0);
    for (std::size_t i = 0; i < n; ++i) image_reward_[image_[i]] = value_[i];

    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    auto density = [&](std::size_t i) {
      const Collect& c = collects[vars[i]];
      return value_[i] / (c.t_end - c.t_start);
    };
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      const double da = density(a);
      const double db = density(b);
      if (da != db) return da > db;
      const Collect& ca = collects[vars[a]];
      const Collect& cb = collects[vars[b]];
      if (ca.t_start != cb.t_start) return ca.t_start < cb.t_start;
      return ca.id < cb.id;
    });
  }

  /// Returns selected variables as indices into the full model.
  std::vector<std::size_t> solve(double time_left, std::size_t node_budget, bool greedy_only, bool& optimal,
                                 std::size_t& nodes) {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    OpenList open;
    Node root{0.0, 0, 0, {}};
    root.bound = bound(root);
    // The first dive doubles as the greedy incumbent.
    dive(std::move(root), open);
    ++nodes;
    optimal = !greedy_only;
    while (!greedy_only && !open.empty()) {
      if (open.top().bound <= best_value_ + kEps) break;
      if (nodes >= node_budget || elapsed() > time_left) {
        optimal = false;
        break;
      }
      Node node = open.top();
      open.pop();
      ++nodes;
      dive(std::move(node), open);
    }
    std::vector<std::size_t> out;
    for (std::size_t i : best_) out.push_back(vars_[i]);
    return out;
  }

 private:
  static constexpr double kEps = 1e-9;

  void mark_blocked(const std::vector<std::size_t>& selected) {
    blocked_.assign(vars_.size(), false);
    taken_.assign(image_count_, false);
    for (std::size_t i : selected) {
      taken_[image_[i]] = true;
      for (std::size_t l : neighbours_[i]) blocked_[l] = true;
    }
  }

  double selected_value(const std::vector<std::size_t>& selected) const {
    double v = 0.0;
    for (std::size_t i : selected) v += value_[i];
    return v;
  }

  // Current reward plus every image still reachable through an undecided compatible variable.
  double bound(const Node& node) {
    mark_blocked(node.selected);
    std::vector<bool> counted(image_count_, false);
    double b = selected_value(node.selected);
    for (std::size_t p = node.depth; p < order_.size(); ++p) {
      const std::size_t i = order_[p];
      if (taken_[image_[i]] || counted[image_[i]] || blocked_[i]) continue;
      counted[image_[i]] = true;
      b += image_reward_[image_[i]];
    }
    return b;
  }

  // Follow "select" branches from `node`; each compatible variable leaves a "reject" sibling.
  void dive(Node node, OpenList& open) {
    mark_blocked(node.selected);
    double value = selected_value(node.selected);
    while (node.depth < order_.size()) {
      const std::size_t i = order_[node.depth];
      const bool compatible = !taken_[image_[i]] && !blocked_[i];
      ++node.depth;
      if (!compatible) continue;

      Node reject{0.0, node.depth, ++seq_, node.selected};
      reject.bound = bound(reject);
      if (reject.bound > best_value_ + kEps) open.push(std::move(reject));
      node.selected.push_back(i);
      value += value_[i];
      mark_blocked(node.selected);
    }
    if (value > best_value_ + kEps || !has_best_) {
      has_best_ = true;
      best_value_ = std::max(best_value_, value);
      best_ = node.selected;
    }
  }

  const std::vector<std::size_t>& vars_;
  std::vector<std::size_t> image_;
  std::vector<double> value_;
  std::vector<std::vector<std::size_t>> neighbours_;
  std::vector<std::size_t> order_;
  std::size_t image_count_{};
  std::vector<double> image_reward_;
  std::vector<bool> blocked_;
  std::vector<bool> taken_;
  std::vector<std::size_t> best_;
  bool has_best_{false};
  double best_value_{0.0};
  std::uint64_t seq_{0};
};

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

TaskPlan plan_milp(std::span<const Collect> collects, std::span<const double> rewards,
                   const ConstraintSet& cs, const MilpOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  TaskPlan plan;
  plan.planner = "milp";
  const bool greedy_only = options.time_limit_s <= 0.0;
  plan.optimal = !greedy_only;
  if (collects.empty()) return plan;

  const MilpModel model = build_milp(collects, rewards, cs);
  std::vector<std::vector<std::size_t>> neighbours(collects.size());
  for (const auto& [k, l] : model.exclusions) {
    neighbours[k].push_back(l);
    neighbours[l].push_back(k);
  }

  // Images that never share an exclusion row are independent subproblems.
  std::vector<std::size_t> parent(rewards.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& [k, l] : model.exclusions) {
    parent[find_root(parent, collects[k].image)] = find_root(parent, collects[l].image);
  }
  std::map<std::size_t, std::vector<std::size_t>> components;  // keyed by root, deterministic order
  for (std::size_t k = 0; k < collects.size(); ++k) {
    components[find_root(parent, collects[k].image)].push_back(k);
  }

  std::vector<std::size_t> chosen;
  for (const auto& [root, vars] : components) {
    BranchAndBound bb(collects, model, vars, neighbours);
    bool optimal = true;
    const double time_left = options.time_limit_s - elapsed();
    // Once the budget is spent the remaining components fall back to their greedy dive.
    const bool greedy = greedy_only || !plan.optimal || time_left <= 0.0;
    const auto part = bb.solve(time_left, options.node_limit, greedy, optimal, plan.expansions);
    plan.optimal = plan.optimal && optimal && !greedy;
    chosen.insert(chosen.end(), part.begin(), part.end());
  }

  std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
    return collects[a].t_start != collects[b].t_start ? collects[a].t_start < collects[b].t_start
                                                      : collects[a].id < collects[b].id;
  });
  for (std::size_t k : chosen) {
    const Collect& c = collects[k];
    plan.entries.push_back(PlanEntry{c.id, c.image, c.t_start, c.t_end});
    plan.objective += model.objective[k];
  }
  plan.nominal_reward = plan_reward(plan, rewards);
  plan.runtime_s = elapsed();
  return plan;
}

}  // namespace eosched
