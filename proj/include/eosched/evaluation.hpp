/**
 * @file evaluation.hpp
 * @brief Replay of task plans against sampled true trajectories.
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eosched/planners.hpp"
#include "eosched/uncertainty.hpp"

namespace eosched {

/// Windows of every sampled true trajectory, drawn from the evaluation seed stream.
struct TruthSet {
  std::vector<SampleWindows> samples;
  OrbitCovariance covariance{};
};

[[nodiscard]] TruthSet sample_truths(const StateVector& nominal, const OrbitCovariance& cov,
                                     std::span<const ImageTarget> targets, const PropagationSettings& settings);

/// Sum of r_i over images with at least one planned collect inside a single true window.
[[nodiscard]] double realized_reward(const TaskPlan& plan, const std::vector<std::vector<Opportunity>>& true_windows,
                                     std::span<const ImageTarget> targets);

[[nodiscard]] double realized_reward(const TaskPlan& plan, const Trajectory& true_traj,
                                     std::span<const ImageTarget> targets);

struct EvaluationReport {
  std::string planner;
  std::vector<double> rewards;  // per successfully propagated sample
  double mean_reward{};
  double stdev_reward{};        // sample standard deviation
  double nominal_reward{};
  double runtime_s{};           // planning runtime
  std::size_t sample_count{};   // configured sample count
  std::size_t failed_samples{};
  std::uint64_t seed{};
};

[[nodiscard]] EvaluationReport evaluate(const TaskPlan& plan, const TruthSet& truths,
                                        std::span<const ImageTarget> targets);

[[nodiscard]] EvaluationReport evaluate(const TaskPlan& plan, const StateVector& nominal, const OrbitCovariance& cov,
                                        std::span<const ImageTarget> targets, const PropagationSettings& settings);

}  // namespace eosched
