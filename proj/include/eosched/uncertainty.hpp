/**
 * @file uncertainty.hpp
 * @brief Monte Carlo characterization of window shifts and collect feasibility.
 */
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eosched/access.hpp"
#include "eosched/dynamics.hpp"

namespace eosched {

/// Seed streams: the planner ensemble and the evaluation ensemble never share draws.
enum class SeedStream : std::uint32_t { Planner = 1, Evaluation = 2 };

struct OrbitCovariance {
  double position_sigma{0.0};  // m, total RMS over the three axes
  std::size_t samples{10};
  std::uint64_t seed{1};

  void validate() const;
};

/// Position-only Gaussian perturbation with per-axis sigma = position_sigma / sqrt(3).
[[nodiscard]] std::vector<StateVector> sample_initial_states(const StateVector& nominal,
                                                             const OrbitCovariance& cov,
                                                             SeedStream stream = SeedStream::Planner);

struct SampleWindows {
  bool ok{true};
  std::string error;
  std::vector<std::vector<Opportunity>> windows;  // per image
  /// Per image, per nominal window: index of the matched window in `windows`.
  std::vector<std::vector<std::optional<std::size_t>>> match;
};

struct Ensemble {
  Epoch start{};
  double duration{};
  std::vector<std::vector<Opportunity>> nominal;  // per image
  std::vector<SampleWindows> samples;
  std::size_t unmatched_windows{0};
  OrbitCovariance covariance{};  // provenance only

  [[nodiscard]] std::size_t failed_samples() const;
};

struct PropagationSettings {
  ForceModelConfig force_model{};
  SpacecraftParams spacecraft{};
  double duration{86400.0};
  double step{10.0};
  unsigned threads{1};
};

/// Runs `fn(i)` for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Propagates every sample, extracts its windows and matches them to the nominal windows.
[[nodiscard]] Ensemble ensemble_windows(std::span<const StateVector> samples,
                                        std::span<const ImageTarget> targets,
                                        const PropagationSettings& settings,
                                        const std::vector<std::vector<Opportunity>>& nominal_windows);

/// Nearest-midpoint one-to-one matching of sample windows onto nominal windows.
/// Returns the match table and adds unmatched sample windows to `unmatched`.
[[nodiscard]] std::vector<std::optional<std::size_t>> match_windows(
    const std::vector<Opportunity>& nominal, const std::vector<Opportunity>& sample, std::size_t& unmatched);

struct WindowBucket {
  int hour{};                 // bucket covers nominal starts in [hour-1, hour) h
  double sigma_start{};       // s
  double ratio{};             // sigma_start / mean_duration
  std::size_t windows{};      // nominal windows with >= 2 matched samples
  std::size_t matched{};      // matched sample windows
  bool low_sample{false};
};

struct WindowStatistics {
  double mean_duration{};  // s, over all nominal windows
  std::vector<WindowBucket> buckets;
  std::size_t unmatched_windows{};
};

[[nodiscard]] WindowStatistics window_statistics(const Ensemble& ensemble);

struct CollectProbabilityTable {
  std::map<std::int64_t, double> probability;  // collect id -> p
  std::uint64_t seed{};
  std::size_t samples{};
  double position_sigma{};

  [[nodiscard]] std::optional<double> find(std::int64_t collect_id) const;
};

/// True when [c.t_start, c.t_end] lies inside a single window (boundaries inclusive).
[[nodiscard]] bool contained_in_window(const Collect& c, const std::vector<Opportunity>& windows);

/// Fraction of ensemble samples in which each collect fits inside one window of its image.
[[nodiscard]] CollectProbabilityTable collect_probabilities(std::span<const Collect> collects,
                                                            const Ensemble& ensemble);

}  // namespace eosched
